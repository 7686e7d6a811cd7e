#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "har/models.hpp"
#include "har/nn/tensor.hpp"
#include "har/windowing.hpp"

namespace har {

struct TrainingConfig {
  std::size_t epochs = 4;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double accuracy = 0.0;  // on the training windows, before each update

  bool operator==(const EpochStats&) const = default;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Dataset positions of the channels of `subset`. Throws ErrorKind::Shape if
/// the dataset does not contain all of them.
std::vector<std::size_t> subset_positions(const WindowedDataset& dataset, Subset subset);

/// Normalization over the training windows, restricted to `subset`.
NormalizationStats fit_subset_normalization(const WindowedDataset& dataset,
                                            std::span<const std::size_t> train, Subset subset);

/// Turns stored raw windows into normalized [B x T x C] model input.
class WindowBatcher {
 public:
  /// `stats` covers the channels of `subset`, in canonical order.
  WindowBatcher(const WindowedDataset& dataset, Subset subset, NormalizationStats stats);

  nn::Tensor batch(std::span<const std::size_t> indices) const;
  std::size_t channels() const { return positions_.size(); }
  const WindowedDataset& dataset() const { return dataset_; }
  const NormalizationStats& stats() const { return stats_; }

 private:
  const WindowedDataset& dataset_;
  std::vector<std::size_t> positions_;
  NormalizationStats stats_;
};

/// Mini-batch Adam on plain cross-entropy. The window order is shuffled each
/// epoch from `seed`; identical inputs give bit-identical parameters.
std::vector<EpochStats> train_model(FusionModel& model, const WindowBatcher& batcher,
                                    std::span<const std::size_t> train,
                                    const TrainingConfig& config, std::uint64_t seed,
                                    const EpochCallback& on_epoch = {});

std::vector<Prediction> predict_windows(FusionModel& model, const WindowBatcher& batcher,
                                        std::span<const std::size_t> indices,
                                        std::size_t batch_size = 128);

}  // namespace har
