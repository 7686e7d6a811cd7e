#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "har/sensor_domain.hpp"

namespace har {

using Rational = boost::multiprecision::cpp_rational;

/// Counts of (true label, predicted label) pairs; rows are truth.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = kActivityCount);

  /// Labels are 1-based.
  void add(int truth, int predicted, std::uint64_t count = 1);
  std::uint64_t count(int truth, int predicted) const;

  std::size_t classes() const { return classes_; }
  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t true_positives(int label) const;
  std::uint64_t false_positives(int label) const;
  std::uint64_t false_negatives(int label) const;

  /// Applies the same relabelling to rows and columns: new label
  /// `permutation[k-1]` takes the place of old label k.
  ConfusionMatrix permuted(std::span<const int> permutation) const;

  /// Header row `truth\predicted,1,...,K`, then one row per true label.
  std::string to_csv() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t index(int truth, int predicted) const;

  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

/// 2 * precision * recall / (precision + recall), 0 when precision + recall = 0.
/// Empty when the class is absent from truth and predictions (tp = fp = fn = 0).
std::optional<Rational> f1_score_exact(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);
std::optional<double> f1_score(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

struct ClassMetrics {
  int label = 0;
  std::uint64_t support = 0;  // windows with this true label
  double precision = 0.0;     // 0 when never predicted
  double recall = 0.0;        // 0 when never true
  double f1 = 0.0;
  bool evaluated = false;     // false when absent from truth and predictions
};

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm);

struct MacroF1 {
  Rational value;
  std::vector<int> excluded;  // classes absent from truth and predictions
};

/// Unweighted mean of per-class F1 over the classes that occur in truth or
/// predictions. Zero for an empty matrix.
MacroF1 macro_f1_exact(const ConfusionMatrix& cm);
double macro_f1(const ConfusionMatrix& cm);

/// trace / total; zero for an empty matrix.
Rational accuracy_exact(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);

}  // namespace har
