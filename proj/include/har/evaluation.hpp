#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "har/metrics.hpp"
#include "har/models.hpp"
#include "har/training.hpp"
#include "har/windowing.hpp"

namespace har {

/// What one leave-out fold withholds.
enum class FoldUnit {
  Session,         // session index 1..5 pooled over every subject
  SubjectSession,  // one (subject, session) pair
};

std::string_view fold_unit_name(FoldUnit unit);
FoldUnit parse_fold_unit(std::string_view name);

struct Fold {
  std::string name;  // "session_3" or "S01/session_3"
  int held_out_session = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// One fold per distinct session (or subject-session pair), ordered by id.
/// Train and test are disjoint and together cover every window.
std::vector<Fold> loso_split(const WindowedDataset& dataset, FoldUnit unit = FoldUnit::Session);

struct FoldContext {
  const WindowedDataset& dataset;
  const Fold& fold;
  std::size_t index;
  std::uint64_t seed;
};

/// What a fold's model produced. Training and stats must depend on the
/// training windows alone.
struct FoldOutcome {
  std::vector<int> predictions;  // one per fold.test window, same order
  std::vector<EpochStats> training;
  NormalizationStats stats;
};

using FoldRunner = std::function<FoldOutcome(const FoldContext&)>;

/// Fits normalization on the fold's training windows, trains a fresh model
/// and predicts the held-out windows.
FoldRunner cnn_fold_runner(ModelConfig model, TrainingConfig training);

/// Baseline: each window is reduced to its per-channel means, z-scored with
/// statistics of the training windows, and assigned the label of the nearest
/// class centroid (Euclidean; ties to the lowest label).
FoldRunner nearest_centroid_runner();

struct FoldResult {
  std::string name;
  int held_out_session = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  ConfusionMatrix confusion;
  std::vector<EpochStats> training;
  NormalizationStats stats;
};

struct CvSummary {
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_f1 = 0.0;
  double std_f1 = 0.0;

  bool operator==(const CvSummary&) const = default;
};

struct CvResult {
  std::vector<FoldResult> folds;
  CvSummary summary;
};

struct CvOptions {
  FoldUnit unit = FoldUnit::Session;
  /// Folds trained concurrently; results do not depend on it.
  std::size_t jobs = 1;
  std::function<void(const std::string&)> log;
};

/// Seed of fold `index` derived from the run seed.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t index);

CvResult run_cv(const WindowedDataset& dataset, const FoldRunner& runner, std::uint64_t seed,
                const CvOptions& options = {});
CvResult run_cv(const WindowedDataset& dataset, const ModelConfig& model,
                const TrainingConfig& training, std::uint64_t seed, const CvOptions& options = {});

/// Mean and population std over folds.
CvSummary summarize(std::span<const FoldResult> folds);

/// "90.54 ± 4.99" from fractions 0.9054 and 0.0499.
std::string format_percent(double mean, double stddev);

struct AblationCell {
  FusionMethod method;
  Subset subset;
  std::optional<CvResult> result;  // empty where the method is undefined
};

/// Data fusion on all four subsets and feature fusion on ALL and THERMAL_ONLY.
struct AblationReport {
  std::vector<AblationCell> cells;

  const AblationCell& cell(FusionMethod method, Subset subset) const;
  /// Aligned text table, one row per subset, "-" for undefined cells.
  std::string to_table() const;
  /// One record per line:
  /// method=<m> subset=<s> mean_acc=<x> std_acc=<x> mean_f1=<x> std_f1=<x>
  std::string to_records() const;
};

/// Runs every defined (method, subset) cell. `model` supplies widths; its
/// method and subset are overridden per cell.
AblationReport run_ablation(const WindowedDataset& dataset, const ModelConfig& model,
                            const TrainingConfig& training, std::uint64_t seed,
                            const CvOptions& options = {});

/// Per-fold text record: accuracy, macro F1, per-class metrics, training curve.
std::string format_fold_result(const FoldResult& fold);

}  // namespace har
