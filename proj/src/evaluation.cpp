#include "har/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>

#include "har/errors.hpp"

namespace har {

std::string_view fold_unit_name(FoldUnit unit) {
  return unit == FoldUnit::Session ? "session" : "subject-session";
}

FoldUnit parse_fold_unit(std::string_view name) {
  if (name == "session") return FoldUnit::Session;
  if (name == "subject-session") return FoldUnit::SubjectSession;
  fail(ErrorKind::Config, "unknown fold unit '" + std::string(name) + "'");
}

std::vector<Fold> loso_split(const WindowedDataset& dataset, FoldUnit unit) {
  // Key: (subject or -1, session). std::map keeps folds in id order.
  std::map<std::pair<std::string, int>, Fold> folds;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int session = dataset.session_ids[i];
    std::string subject = unit == FoldUnit::Session ? std::string() : dataset.subject_of(i);
    auto& fold = folds[{subject, session}];
    if (fold.name.empty()) {
      fold.name = (subject.empty() ? std::string() : subject + "/") + "session_" +
                  std::to_string(session);
      fold.held_out_session = session;
    }
  }
  if (folds.size() < 2)
    fail(ErrorKind::Split, "leave-one-session-out needs at least 2 sessions, found " +
                               std::to_string(folds.size()));
  std::vector<Fold> out;
  for (auto& [key, fold] : folds) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const bool held = dataset.session_ids[i] == key.second &&
                        (key.first.empty() || dataset.subject_of(i) == key.first);
      (held ? fold.test : fold.train).push_back(i);
    }
    out.push_back(std::move(fold));
  }
  return out;
}

FoldRunner cnn_fold_runner(ModelConfig model, TrainingConfig training) {
  validate_model_config(model);
  return [model, training](const FoldContext& ctx) {
    FoldOutcome outcome;
    outcome.stats = fit_subset_normalization(ctx.dataset, ctx.fold.train, model.subset);
    WindowBatcher batcher(ctx.dataset, model.subset, outcome.stats);
    FusionModel net(model, ctx.seed);
    outcome.training = train_model(net, batcher, ctx.fold.train, training, ctx.seed ^ 0x5eedULL);
    for (const auto& p : predict_windows(net, batcher, ctx.fold.test))
      outcome.predictions.push_back(p.label);
    return outcome;
  };
}

FoldRunner nearest_centroid_runner() {
  return [](const FoldContext& ctx) {
    const auto& ds = ctx.dataset;
    const std::size_t C = ds.channels;
    const std::size_t T = ds.window_size;
    auto features = [&](std::size_t i, std::vector<double>& f) {
      f.assign(C, 0.0);
      const auto w = ds.window(i);
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = 0; c < C; ++c) f[c] += w[t * C + c];
      for (auto& x : f) x /= static_cast<double>(T);
    };

    std::vector<double> mean(C, 0.0), sq(C, 0.0), f;
    for (auto i : ctx.fold.train) {
      features(i, f);
      for (std::size_t c = 0; c < C; ++c) mean[c] += f[c];
    }
    const double n = static_cast<double>(ctx.fold.train.size());
    for (auto& m : mean) m /= n;
    for (auto i : ctx.fold.train) {
      features(i, f);
      for (std::size_t c = 0; c < C; ++c) sq[c] += (f[c] - mean[c]) * (f[c] - mean[c]);
    }
    std::vector<double> scale(C);
    for (std::size_t c = 0; c < C; ++c) {
      const double sd = std::sqrt(sq[c] / n);
      scale[c] = sd < kConstantStdThreshold ? 1.0 : 1.0 / sd;
    }

    const std::size_t K = kActivityCount;
    std::vector<double> centroid(K * C, 0.0);
    std::vector<std::size_t> count(K, 0);
    for (auto i : ctx.fold.train) {
      features(i, f);
      const auto k = static_cast<std::size_t>(ds.labels[i] - 1);
      ++count[k];
      for (std::size_t c = 0; c < C; ++c) centroid[k * C + c] += (f[c] - mean[c]) * scale[c];
    }
    for (std::size_t k = 0; k < K; ++k)
      if (count[k])
        for (std::size_t c = 0; c < C; ++c) centroid[k * C + c] /= static_cast<double>(count[k]);

    FoldOutcome out;
    out.stats.mean = mean;
    out.stats.stddev.resize(C);
    out.stats.constant.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
      out.stats.stddev[c] = 1.0 / scale[c];
      out.stats.constant[c] = std::sqrt(sq[c] / n) < kConstantStdThreshold;
    }
    for (auto i : ctx.fold.test) {
      features(i, f);
      int best = 0;
      double best_d = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        if (!count[k]) continue;
        double d = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
          const double z = (f[c] - mean[c]) * scale[c] - centroid[k * C + c];
          d += z * z;
        }
        if (best == 0 || d < best_d) {
          best = static_cast<int>(k) + 1;
          best_d = d;
        }
      }
      out.predictions.push_back(best);
    }
    return out;
  };
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t index) {
  // splitmix64 of the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

FoldResult score_fold(const WindowedDataset& dataset, const Fold& fold, FoldOutcome outcome) {
  if (outcome.predictions.size() != fold.test.size())
    fail(ErrorKind::Shape, "fold " + fold.name + ": " + std::to_string(outcome.predictions.size()) +
                               " predictions for " + std::to_string(fold.test.size()) + " windows");
  FoldResult result;
  result.name = fold.name;
  result.held_out_session = fold.held_out_session;
  for (std::size_t k = 0; k < fold.test.size(); ++k)
    result.confusion.add(dataset.labels[fold.test[k]], outcome.predictions[k]);
  result.accuracy = accuracy(result.confusion);
  result.macro_f1 = macro_f1(result.confusion);
  result.per_class = per_class_metrics(result.confusion);
  result.training = std::move(outcome.training);
  result.stats = std::move(outcome.stats);
  return result;
}

}  // namespace

CvResult run_cv(const WindowedDataset& dataset, const FoldRunner& runner, std::uint64_t seed,
                const CvOptions& options) {
  const auto folds = loso_split(dataset, options.unit);
  std::vector<std::optional<FoldResult>> results(folds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= folds.size()) return;
      {
        std::lock_guard lock(mutex);
        if (error) return;
      }
      try {
        FoldContext ctx{dataset, folds[i], i, fold_seed(seed, i)};
        auto result = score_fold(dataset, folds[i], runner(ctx));
        std::lock_guard lock(mutex);
        if (options.log) {
          char line[160];
          std::snprintf(line, sizeof line, "fold %s: accuracy %.4f macro-F1 %.4f",
                        result.name.c_str(), result.accuracy, result.macro_f1);
          options.log(line);
        }
        results[i] = std::move(result);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, folds.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  CvResult cv;
  for (auto& r : results) cv.folds.push_back(std::move(*r));
  cv.summary = summarize(cv.folds);
  return cv;
}

CvResult run_cv(const WindowedDataset& dataset, const ModelConfig& model,
                const TrainingConfig& training, std::uint64_t seed, const CvOptions& options) {
  return run_cv(dataset, cnn_fold_runner(model, training), seed, options);
}

CvSummary summarize(std::span<const FoldResult> folds) {
  CvSummary s;
  if (folds.empty()) return s;
  const double n = static_cast<double>(folds.size());
  for (const auto& f : folds) {
    s.mean_accuracy += f.accuracy;
    s.mean_f1 += f.macro_f1;
  }
  s.mean_accuracy /= n;
  s.mean_f1 /= n;
  for (const auto& f : folds) {
    s.std_accuracy += (f.accuracy - s.mean_accuracy) * (f.accuracy - s.mean_accuracy);
    s.std_f1 += (f.macro_f1 - s.mean_f1) * (f.macro_f1 - s.mean_f1);
  }
  s.std_accuracy = std::sqrt(s.std_accuracy / n);
  s.std_f1 = std::sqrt(s.std_f1 / n);
  return s;
}

std::string format_percent(double mean, double stddev) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f ± %.2f", mean * 100.0, stddev * 100.0);
  return buf;
}

const AblationCell& AblationReport::cell(FusionMethod method, Subset subset) const {
  for (const auto& c : cells)
    if (c.method == method && c.subset == subset) return c;
  fail(ErrorKind::Domain, "no ablation cell for " + std::string(method_name(method)) + " / " +
                              std::string(subset_name(subset)));
}

std::string AblationReport::to_table() const {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %8s  %-16s %-16s %-16s %-16s\n", "subset", "channels",
                "DF accuracy", "DF macro-F1", "FF accuracy", "FF macro-F1");
  os << line;
  const auto& layout = canonical_layout();
  for (auto subset : kAllSubsets) {
    std::string cols[4] = {"-", "-", "-", "-"};
    for (const auto& c : cells) {
      if (c.subset != subset || !c.result) continue;
      const int off = c.method == FusionMethod::DataFusion ? 0 : 2;
      cols[off] = format_percent(c.result->summary.mean_accuracy, c.result->summary.std_accuracy);
      cols[off + 1] = format_percent(c.result->summary.mean_f1, c.result->summary.std_f1);
    }
    // the plus-minus sign is two bytes wide in UTF-8; pad by hand
    os << std::string(subset_name(subset));
    os << std::string(24 - subset_name(subset).size() + 1, ' ');
    std::snprintf(line, sizeof line, "%8zu ", layout.subset(subset).count());
    os << line;
    for (const auto& col : cols) {
      const std::size_t visible = col == "-" ? 1 : col.size() - 1;
      os << ' ' << col << std::string(visible < 16 ? 16 - visible : 0, ' ');
    }
    os << '\n';
  }
  return os.str();
}

std::string AblationReport::to_records() const {
  std::ostringstream os;
  char line[256];
  for (const auto& c : cells) {
    if (!c.result) {
      os << "method=" << method_name(c.method) << " subset=" << subset_name(c.subset)
         << " mean_acc=- std_acc=- mean_f1=- std_f1=-\n";
      continue;
    }
    const auto& s = c.result->summary;
    std::snprintf(line, sizeof line, " mean_acc=%.6f std_acc=%.6f mean_f1=%.6f std_f1=%.6f\n",
                  s.mean_accuracy, s.std_accuracy, s.mean_f1, s.std_f1);
    os << "method=" << method_name(c.method) << " subset=" << subset_name(c.subset) << line;
  }
  return os.str();
}

AblationReport run_ablation(const WindowedDataset& dataset, const ModelConfig& model,
                            const TrainingConfig& training, std::uint64_t seed,
                            const CvOptions& options) {
  AblationReport report;
  for (auto method : {FusionMethod::DataFusion, FusionMethod::FeatureFusion}) {
    for (auto subset : kAllSubsets) {
      AblationCell cell{method, subset, std::nullopt};
      const bool defined = method == FusionMethod::DataFusion || subset == Subset::All ||
                           subset == Subset::ThermalOnly;
      if (defined) {
        ModelConfig cfg = model;
        cfg.method = method;
        cfg.subset = subset;
        if (options.log)
          options.log("cell " + std::string(method_name(method)) + " " +
                      std::string(subset_name(subset)));
        cell.result = run_cv(dataset, cfg, training, seed, options);
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

std::string format_fold_result(const FoldResult& fold) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "fold=%s accuracy=%.6f macro_f1=%.6f\n", fold.name.c_str(),
                fold.accuracy, fold.macro_f1);
  os << line;
  for (const auto& c : fold.per_class) {
    if (!c.evaluated) {
      std::snprintf(line, sizeof line, "  class=%d support=0 absent\n", c.label);
    } else {
      std::snprintf(line, sizeof line,
                    "  class=%d support=%llu precision=%.6f recall=%.6f f1=%.6f\n", c.label,
                    static_cast<unsigned long long>(c.support), c.precision, c.recall, c.f1);
    }
    os << line;
  }
  for (const auto& e : fold.training) {
    std::snprintf(line, sizeof line, "  epoch=%zu loss=%.6f train_accuracy=%.6f\n", e.epoch,
                  e.mean_loss, e.accuracy);
    os << line;
  }
  return os.str();
}

}  // namespace har
