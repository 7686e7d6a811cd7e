#include "har/metrics.hpp"

#include "har/errors.hpp"

namespace har {

ConfusionMatrix::ConfusionMatrix(std::size_t classes)
    : classes_(classes), counts_(classes * classes, 0) {
  if (classes == 0) fail(ErrorKind::Domain, "confusion matrix needs at least one class");
}

std::size_t ConfusionMatrix::index(int truth, int predicted) const {
  if (truth < 1 || predicted < 1 || static_cast<std::size_t>(truth) > classes_ ||
      static_cast<std::size_t>(predicted) > classes_)
    fail(ErrorKind::Domain, "label outside 1.." + std::to_string(classes_));
  return static_cast<std::size_t>(truth - 1) * classes_ + static_cast<std::size_t>(predicted - 1);
}

void ConfusionMatrix::add(int truth, int predicted, std::uint64_t count) {
  counts_[index(truth, predicted)] += count;
}

std::uint64_t ConfusionMatrix::count(int truth, int predicted) const {
  return counts_[index(truth, predicted)];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (std::size_t k = 0; k < classes_; ++k) s += counts_[k * classes_ + k];
  return s;
}

std::uint64_t ConfusionMatrix::true_positives(int label) const { return count(label, label); }

std::uint64_t ConfusionMatrix::false_positives(int label) const {
  std::uint64_t s = 0;
  for (std::size_t t = 1; t <= classes_; ++t)
    if (static_cast<int>(t) != label) s += count(static_cast<int>(t), label);
  return s;
}

std::uint64_t ConfusionMatrix::false_negatives(int label) const {
  std::uint64_t s = 0;
  for (std::size_t p = 1; p <= classes_; ++p)
    if (static_cast<int>(p) != label) s += count(label, static_cast<int>(p));
  return s;
}

ConfusionMatrix ConfusionMatrix::permuted(std::span<const int> permutation) const {
  if (permutation.size() != classes_) fail(ErrorKind::Domain, "permutation size mismatch");
  ConfusionMatrix out(classes_);
  for (std::size_t t = 1; t <= classes_; ++t)
    for (std::size_t p = 1; p <= classes_; ++p)
      out.add(permutation[t - 1], permutation[p - 1], count(static_cast<int>(t), static_cast<int>(p)));
  return out;
}

std::string ConfusionMatrix::to_csv() const {
  std::string out = "truth\\predicted";
  for (std::size_t p = 1; p <= classes_; ++p) out += "," + std::to_string(p);
  out += '\n';
  for (std::size_t t = 1; t <= classes_; ++t) {
    out += std::to_string(t);
    for (std::size_t p = 1; p <= classes_; ++p)
      out += "," + std::to_string(count(static_cast<int>(t), static_cast<int>(p)));
    out += '\n';
  }
  return out;
}

std::optional<Rational> f1_score_exact(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  if (tp == 0 && fp == 0 && fn == 0) return std::nullopt;
  const Rational precision = tp + fp == 0 ? Rational(0) : Rational(tp, tp + fp);
  const Rational recall = tp + fn == 0 ? Rational(0) : Rational(tp, tp + fn);
  if (precision + recall == 0) return Rational(0);
  return Rational(2 * precision * recall / (precision + recall));
}

std::optional<double> f1_score(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  const auto exact = f1_score_exact(tp, fp, fn);
  if (!exact) return std::nullopt;
  return exact->convert_to<double>();
}

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
  std::vector<ClassMetrics> out;
  for (std::size_t k = 1; k <= cm.classes(); ++k) {
    const int label = static_cast<int>(k);
    const auto tp = cm.true_positives(label);
    const auto fp = cm.false_positives(label);
    const auto fn = cm.false_negatives(label);
    ClassMetrics m;
    m.label = label;
    m.support = tp + fn;
    m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    const auto f1 = f1_score(tp, fp, fn);
    m.evaluated = f1.has_value();
    m.f1 = f1.value_or(0.0);
    out.push_back(m);
  }
  return out;
}

MacroF1 macro_f1_exact(const ConfusionMatrix& cm) {
  MacroF1 out{Rational(0), {}};
  Rational sum(0);
  std::size_t n = 0;
  for (std::size_t k = 1; k <= cm.classes(); ++k) {
    const int label = static_cast<int>(k);
    const auto f1 = f1_score_exact(cm.true_positives(label), cm.false_positives(label),
                                   cm.false_negatives(label));
    if (!f1) {
      out.excluded.push_back(label);
      continue;
    }
    sum += *f1;
    ++n;
  }
  if (n > 0) out.value = sum / n;
  return out;
}

double macro_f1(const ConfusionMatrix& cm) { return macro_f1_exact(cm).value.convert_to<double>(); }

Rational accuracy_exact(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  return total == 0 ? Rational(0) : Rational(cm.trace(), total);
}

double accuracy(const ConfusionMatrix& cm) { return accuracy_exact(cm).convert_to<double>(); }

}  // namespace har
