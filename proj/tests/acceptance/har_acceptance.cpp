// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Progress goes to stderr.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include "checks.hpp"
#include "har/evaluation.hpp"
#include "har/ingest.hpp"
#include "har/metrics.hpp"
#include "har/pipeline.hpp"
#include "har/synth.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and budgets.
constexpr double kLayerGradTol = 1e-4;
constexpr double kModelGradTol = 1e-3;
constexpr std::size_t kMinGradInstances = 100;
constexpr double kGradBudgetSeconds = 120.0;
constexpr double kForwardTol = 1e-6;
constexpr std::size_t kForwardConfigs = 50;
constexpr double kForwardBudgetSeconds = 60.0;
constexpr double kRampTol = 1e-9;
constexpr double kPipelineBudgetSeconds = 60.0;
constexpr std::size_t kMinMatrices = 20;
constexpr double kMinDfAccuracy = 0.90;
constexpr double kMinDfF1 = 0.85;
constexpr double kFfMargin = 0.02;
constexpr double kThermalGap = 0.03;
constexpr double kEndToEndBudgetSeconds = 30.0 * 60.0;
constexpr double kCentroidLow = 0.40;
constexpr double kCentroidHigh = 0.80;

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s criterion-%d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void progress(const std::string& line) {
  std::fprintf(stderr, "[acceptance] %s\n", line.c_str());
}

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

void gradients() {
  const auto t0 = Clock::now();
  oracle::Gen gen(1001);
  checks::GradCheck layers;
  for (auto kind : checks::all_layer_kinds())
    for (int i = 0; i < 12; ++i) layers.merge(checks::check_layer_instance(kind, gen));

  checks::GradCheck models;
  for (auto method : {har::FusionMethod::DataFusion, har::FusionMethod::FeatureFusion})
    for (std::uint64_t seed : {1, 2, 3}) models.merge(checks::check_model(method, har::Subset::All, seed, 6));
  const double secs = since(t0);

  const std::size_t instances = layers.instances + models.instances;
  const bool pass = layers.max_error <= kLayerGradTol && models.max_error <= kModelGradTol &&
                    instances >= kMinGradInstances && secs < kGradBudgetSeconds &&
                    layers.coordinates > 0 && models.coordinates > 0;
  report(1, "gradient-correctness", pass,
         fmt("instances=%zu layer_max_rel=%.3g (tol %.0e, %zu coords, %zu skipped at kinks) "
             "topology_max_rel=%.3g (tol %.0e, %zu coords, %zu skipped) time=%.1fs (budget %.0fs)",
             instances, layers.max_error, kLayerGradTol, layers.coordinates, layers.skipped,
             models.max_error, kModelGradTol, models.coordinates, models.skipped, secs,
             kGradBudgetSeconds));
}

void forward_oracles() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t configs = 0;
  std::uint64_t seed = 2001;
  for (auto kind : {har::nn::LayerKind::Conv1D, har::nn::LayerKind::Conv2D, har::nn::LayerKind::MaxPool1D,
                    har::nn::LayerKind::MaxPool2D, har::nn::LayerKind::Dense}) {
    const auto r = checks::check_forward(kind, seed++, kForwardConfigs);
    worst = std::max(worst, r.max_error);
    configs += r.configs;
  }
  const double secs = since(t0);
  report(2, "convolution-oracle", worst <= kForwardTol && configs == 5 * kForwardConfigs && secs < kForwardBudgetSeconds,
         fmt("configs=%zu (50 per kind, 5 kinds) max_abs=%.3g (tol %.0e) time=%.2fs", configs, worst, kForwardTol,
             secs));
}

void pipeline_exactness() {
  const auto t0 = Clock::now();
  oracle::Gen gen(3001);
  double ramp_err = 0.0;
  bool originals_exact = true;
  for (int trial = 0; trial < 200; ++trial) {
    har::TimedStream s;
    const std::size_t width = gen.size(1, 4), n = gen.size(2, 60);
    for (std::size_t c = 0; c < width; ++c) s.channel_names.push_back("c" + std::to_string(c));
    std::vector<double> a(width), b(width);
    for (std::size_t c = 0; c < width; ++c) {
      a[c] = gen.real(-100.0, 100.0);
      b[c] = gen.real(-10.0, 10.0);
    }
    double t = gen.real(0.0, 5.0);
    for (std::size_t i = 0; i < n; ++i) {
      s.times.push_back(t);
      for (std::size_t c = 0; c < width; ++c) s.values.push_back(a[c] + b[c] * t);
      t += gen.real(0.01, 0.7);
    }
    std::vector<double> q;
    for (int k = 0; k < 50; ++k) q.push_back(gen.real(s.times.front(), s.times.back()));
    std::sort(q.begin(), q.end());
    const auto m = har::resample_linear(s, q);
    for (std::size_t k = 0; k < q.size(); ++k)
      for (std::size_t c = 0; c < width; ++c) ramp_err = std::max(ramp_err, std::abs(m(k, c) - (a[c] + b[c] * q[k])));
    const auto same = har::resample_linear(s, s.times);
    originals_exact = originals_exact && same.data == s.values;
  }

  std::size_t combos = 0, mismatches = 0;
  for (std::size_t L = 0; L <= 200; ++L)
    for (std::size_t size = 1; size <= 40; ++size)
      for (std::size_t step = 1; step <= size; ++step) {
        ++combos;
        if (har::window_count(L, size, step) != oracle::enumerate_windows(L, size, step)) ++mismatches;
      }
  const double secs = since(t0);
  report(3, "pipeline-exactness", ramp_err <= kRampTol && originals_exact && mismatches == 0 && secs < kPipelineBudgetSeconds,
         fmt("ramp_max_abs=%.3g (tol %.0e) originals_exact=%s window_formula_mismatches=%zu/%zu time=%.2fs", ramp_err,
             kRampTol, originals_exact ? "yes" : "no", mismatches, combos, secs));
}

void metric_exactness() {
  const auto matrices = checks::constructed_matrices();
  std::size_t exact = 0, edge = 0;
  for (const auto& m : matrices) {
    har::ConfusionMatrix cm(m.size());
    for (std::size_t t = 0; t < m.size(); ++t)
      for (std::size_t p = 0; p < m.size(); ++p)
        if (m[t][p]) cm.add(static_cast<int>(t + 1), static_cast<int>(p + 1), m[t][p]);
    bool ok = har::macro_f1_exact(cm).value == oracle::macro_f1(m);
    for (std::size_t k = 1; k <= m.size(); ++k) {
      const int label = static_cast<int>(k);
      const auto tp = cm.true_positives(label), fp = cm.false_positives(label), fn = cm.false_negatives(label);
      const auto f = har::f1_score_exact(tp, fp, fn);
      if (tp + fp + fn == 0) {
        ok = ok && !f;
        continue;
      }
      ok = ok && f && *f == oracle::f1(tp, fp, fn);
      if (tp == 0) edge += 1;  // zero precision or zero recall, F1 must be 0
    }
    exact += ok;
  }
  // hand values
  const bool hand = *har::f1_score_exact(3, 1, 1) == har::Rational(3, 4) && *har::f1_score_exact(0, 5, 0) == 0 &&
                    *har::f1_score_exact(0, 0, 5) == 0 && *har::f1_score_exact(2, 0, 0) == 1;
  report(4, "metric-exactness", exact == matrices.size() && matrices.size() >= kMinMatrices && edge > 0 && hand,
         fmt("matrices=%zu exact=%zu zero_f1_edge_classes=%zu hand_cases=%s", matrices.size(), exact, edge,
             hand ? "ok" : "wrong"));
}

// ---------------------------------------------------------------------------

void end_to_end(const fs::path& scratch) {
  const auto t0 = Clock::now();
  const std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  har::synth::ScenarioConfig scenario;  // 10 x 5, seed 7
  const auto corpus = scratch / "corpus";
  progress("generating the default corpus");
  har::synth::generate_corpus(scenario, corpus, jobs);
  progress("ingesting");
  har::IngestOptions io;
  io.jobs = jobs;
  const auto dataset = har::ingest_corpus(corpus, io).dataset;
  progress(fmt("%zu windows", dataset.size()));

  // calibration first
  const auto nc = har::run_cv(dataset, har::nearest_centroid_runner(), 7);
  const double nc_acc = nc.summary.mean_accuracy;
  report(6, "generator-calibration", nc_acc >= kCentroidLow && nc_acc <= kCentroidHigh,
         fmt("nearest_centroid_accuracy=%.4f (band [%.2f, %.2f]) macro_f1=%.4f", nc_acc, kCentroidLow, kCentroidHigh,
             nc.summary.mean_f1));

  har::CvOptions opts;
  opts.jobs = jobs;
  opts.log = [](const std::string& line) { progress(line); };
  const har::TrainingConfig training;
  auto cv = [&](har::FusionMethod method, har::Subset subset) {
    har::ModelConfig mc;
    mc.method = method;
    mc.subset = subset;
    progress(fmt("cv %s %s", std::string(har::method_name(method)).c_str(),
                 std::string(har::subset_name(subset)).c_str()));
    return har::run_cv(dataset, mc, training, 7, opts).summary;
  };
  const auto df = cv(har::FusionMethod::DataFusion, har::Subset::All);
  const auto ff = cv(har::FusionMethod::FeatureFusion, har::Subset::All);
  const auto th = cv(har::FusionMethod::DataFusion, har::Subset::ThermalOnly);
  const auto ff_th = cv(har::FusionMethod::FeatureFusion, har::Subset::ThermalOnly);
  const double secs = since(t0);

  const bool pass = df.mean_accuracy >= kMinDfAccuracy && df.mean_f1 >= kMinDfF1 &&
                    ff.mean_accuracy >= df.mean_accuracy - kFfMargin &&
                    th.mean_accuracy <= df.mean_accuracy - kThermalGap &&
                    ff_th.mean_accuracy <= ff.mean_accuracy - kThermalGap && secs < kEndToEndBudgetSeconds;
  report(5, "end-to-end-reproduction", pass,
         fmt("DF-ALL acc=%.2f%% f1=%.2f%% (min 90/85) FF-ALL acc=%.2f%% f1=%.2f%% (min DF-2pp) "
             "DF-THERMAL_ONLY acc=%.2f%% (max DF-ALL-3pp) FF-THERMAL_ONLY acc=%.2f%% (max FF-ALL-3pp) "
             "epochs=%zu jobs=%zu time=%.0fs (budget %.0fs)",
             100 * df.mean_accuracy, 100 * df.mean_f1, 100 * ff.mean_accuracy, 100 * ff.mean_f1,
             100 * th.mean_accuracy, 100 * ff_th.mean_accuracy, training.epochs, jobs, secs,
             kEndToEndBudgetSeconds));

  // leakage canary on the same data, first fold
  const auto folds = har::loso_split(dataset);
  har::TrainingConfig short_training;
  short_training.epochs = 1;
  bool canary = true;
  std::string detail;
  for (const auto& [name, runner] :
       {std::pair<std::string, har::FoldRunner>{"data-fusion",
                                                 har::cnn_fold_runner(har::ModelConfig{}, short_training)},
        std::pair<std::string, har::FoldRunner>{"nearest-centroid", har::nearest_centroid_runner()}}) {
    progress("leakage canary " + name);
    const auto clean = runner(har::FoldContext{dataset, folds[0], 0, 7});
    auto dirty_ds = dataset;
    for (auto i : folds[0].test)
      for (auto& v : dirty_ds.window(i)) v = -40.0f * v + 500.0f;
    const auto dirty = runner(har::FoldContext{dirty_ds, folds[0], 0, 7});
    std::size_t changed = 0;
    for (std::size_t i = 0; i < clean.predictions.size(); ++i) changed += clean.predictions[i] != dirty.predictions[i];
    const bool ok = clean.training == dirty.training && clean.stats == dirty.stats && changed > 0;
    canary = canary && ok;
    detail += fmt("%s: training %s, stats %s, %zu/%zu predictions changed; ", name.c_str(),
                  clean.training == dirty.training ? "identical" : "DIFFERENT",
                  clean.stats == dirty.stats ? "identical" : "DIFFERENT", changed, clean.predictions.size());
  }
  report(8, "leakage-canary", canary, detail);
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const fs::path& dir, const std::string& args) {
  fs::create_directories(dir);
  const std::string cmd = "cd '" + dir.string() + "' && '" HAR_BINARY "' " + args + " > /dev/null 2>> log.txt";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism(const fs::path& scratch) {
  progress("determinism: every subcommand twice");
  const char* steps[] = {
      "synth --seed 11 --subjects 2 --sessions 2 --out corpus",
      "ingest corpus --seed 11 --out ingest",
      "train ingest/dataset.hards --seed 11 --epochs 1 --holdout-session 2 --out train",
      "eval ingest/dataset.hards --seed 11 --checkpoint train/model.ckpt --out eval",
      "cv ingest/dataset.hards --seed 11 --epochs 1 --method feature-fusion --out cv",
      "ablate ingest/dataset.hards --seed 11 --epochs 1 --out ablate",
      "report ablate",
  };
  bool ran = true;
  for (const char* run_name : {"a", "b"})
    for (const char* step : steps) ran = ran && run(scratch / "det" / run_name, step) == 0;

  std::size_t compared = 0, differing = 0;
  std::string first_diff;
  const auto a = scratch / "det" / "a", b = scratch / "det" / "b";
  if (ran)
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), a);
      if (rel.filename() == "timing.txt" || rel == "log.txt") continue;  // wall clock
      ++compared;
      if (slurp(e.path()) != slurp(b / rel)) {
        ++differing;
        if (first_diff.empty()) first_diff = rel.string();
      }
    }
  report(7, "determinism", ran && compared > 0 && differing == 0,
         fmt("subcommands=synth,ingest,train,eval,cv,ablate,report files_compared=%zu differing=%zu%s%s", compared,
             differing, first_diff.empty() ? "" : " first=", first_diff.c_str()));
}

}  // namespace

int main(int argc, char** argv) {
  // --skip-end-to-end leaves out criteria 5, 6 and 8 (for quick local runs)
  const bool quick = argc > 1 && std::string(argv[1]) == "--skip-end-to-end";
  const auto scratch = fs::temp_directory_path() / ("har_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  int status = 0;
  try {
    gradients();
    forward_oracles();
    pipeline_exactness();
    metric_exactness();
    determinism(scratch);
    if (!quick) end_to_end(scratch);
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    status = 1;
  }
  fs::remove_all(scratch);
  if (failures) status = 1;
  std::printf("%s\n", status ? "acceptance: FAILED" : "acceptance: all criteria passed");
  return status;
}
