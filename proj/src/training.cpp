#include "har/training.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "har/errors.hpp"
#include "har/nn/adam.hpp"
#include "har/nn/loss.hpp"

namespace har {

std::vector<std::size_t> subset_positions(const WindowedDataset& dataset, Subset subset) {
  const auto& layout = canonical_layout();
  const auto& have = layout.subset(dataset.subset).indices;
  const auto& want = layout.subset(subset).indices;
  std::vector<std::size_t> positions;
  positions.reserve(want.size());
  for (auto ch : want) {
    const auto it = std::lower_bound(have.begin(), have.end(), ch);
    if (it == have.end() || *it != ch)
      fail(ErrorKind::Shape, "dataset with subset " + std::string(subset_name(dataset.subset)) +
                                 " lacks channels of subset " + std::string(subset_name(subset)));
    positions.push_back(static_cast<std::size_t>(it - have.begin()));
  }
  return positions;
}

NormalizationStats fit_subset_normalization(const WindowedDataset& dataset,
                                            std::span<const std::size_t> train, Subset subset) {
  const auto positions = subset_positions(dataset, subset);
  return fit_normalization(dataset, train).select(positions);
}

WindowBatcher::WindowBatcher(const WindowedDataset& dataset, Subset subset, NormalizationStats stats)
    : dataset_(dataset), positions_(subset_positions(dataset, subset)), stats_(std::move(stats)) {
  if (!dataset.stats.is_identity())
    fail(ErrorKind::Domain, "training and evaluation expect un-normalized windows");
  if (stats_.channels() != positions_.size())
    fail(ErrorKind::Shape, "normalization covers " + std::to_string(stats_.channels()) +
                               " channels, subset has " + std::to_string(positions_.size()));
}

nn::Tensor WindowBatcher::batch(std::span<const std::size_t> indices) const {
  const std::size_t frames = dataset_.window_size;
  const std::size_t width = dataset_.channels;
  const std::size_t channels = positions_.size();
  nn::Tensor out({indices.size(), frames, channels});
  double* dst = out.data();
  for (auto i : indices) {
    const auto w = dataset_.window(i);
    for (std::size_t t = 0; t < frames; ++t) {
      const float* row = w.data() + t * width;
      for (std::size_t c = 0; c < channels; ++c) *dst++ = stats_.apply(c, row[positions_[c]]);
    }
  }
  return out;
}

std::vector<EpochStats> train_model(FusionModel& model, const WindowBatcher& batcher,
                                    std::span<const std::size_t> train,
                                    const TrainingConfig& config, std::uint64_t seed,
                                    const EpochCallback& on_epoch) {
  if (config.batch_size == 0) fail(ErrorKind::Config, "batch size must be positive");
  if (train.empty()) fail(ErrorKind::Domain, "no training windows");
  const auto& data = batcher.dataset();

  nn::Adam optimizer(model.parameters(), {config.learning_rate});
  nn::SoftmaxCrossEntropy loss;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(train.begin(), train.end());
  std::vector<int> targets;
  std::vector<EpochStats> log;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto count = std::min(config.batch_size, order.size() - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      targets.clear();
      for (auto i : idx) targets.push_back(data.labels[i]);

      optimizer.zero_grad();
      const nn::Tensor logits = model.forward(batcher.batch(idx));
      loss_sum += loss.forward(logits, targets) * static_cast<double>(count);
      const auto& probs = loss.probabilities();
      for (std::size_t b = 0; b < count; ++b) {
        const auto row = probs.values().subspan(b * probs.dim(1), probs.dim(1));
        if (argmax_label(row) == targets[b]) ++correct;
      }
      model.backward(loss.backward());
      optimizer.step();
    }
    EpochStats stats{epoch, loss_sum / static_cast<double>(order.size()),
                     static_cast<double>(correct) / static_cast<double>(order.size())};
    log.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return log;
}

std::vector<Prediction> predict_windows(FusionModel& model, const WindowBatcher& batcher,
                                        std::span<const std::size_t> indices,
                                        std::size_t batch_size) {
  std::vector<Prediction> out;
  out.reserve(indices.size());
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const auto count = std::min(batch_size, indices.size() - start);
    auto preds = predict_batch(model, batcher.batch(indices.subspan(start, count)));
    for (auto& p : preds) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace har
