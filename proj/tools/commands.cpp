#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "har/checkpoint.hpp"
#include "har/errors.hpp"
#include "har/evaluation.hpp"
#include "har/pipeline.hpp"
#include "har/synth.hpp"

namespace har::cli {

namespace fs = std::filesystem;

namespace {

void log(const std::string& line) { std::cerr << line << std::endl; }

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Creates the output directory, writes the resolved config there on
/// construction and the elapsed time (the only wall-clock output) on finish.
class Run {
 public:
  Run(const RunConfig& cfg) : dir_(cfg.out), start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
    write_resolved_config(cfg, dir_);
  }
  const fs::path& dir() const { return dir_; }
  void finish() const {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    char buf[64];
    std::snprintf(buf, sizeof buf, "elapsed_seconds=%.3f\n", dt.count());
    write_file(dir_ / "timing.txt", buf);
    log("done in " + std::string(buf, std::strlen(buf) - 1) + ", outputs in " + dir_.string());
  }

 private:
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
};

WindowedDataset load_dataset(const RunConfig& cfg) {
  auto ds = read_dataset(cfg.dataset);
  log("dataset " + cfg.dataset + ": " + std::to_string(ds.size()) + " windows of " +
      std::to_string(ds.window_size) + " x " + std::to_string(ds.channels));
  return ds;
}

CvOptions cv_options(const RunConfig& cfg) {
  CvOptions o;
  o.unit = cfg.fold_unit;
  o.jobs = cfg.jobs;
  o.log = log;
  return o;
}

std::string cell_tag(FusionMethod method, Subset subset) {
  return std::string(method_name(method)) + "_" + std::string(subset_flag(subset));
}

ConfusionMatrix pooled_confusion(const CvResult& cv) {
  ConfusionMatrix total;
  for (const auto& f : cv.folds)
    for (int t = 1; t <= static_cast<int>(kActivityCount); ++t)
      for (int p = 1; p <= static_cast<int>(kActivityCount); ++p)
        if (auto n = f.confusion.count(t, p)) total.add(t, p, n);
  return total;
}

std::string cv_summary_text(const CvResult& cv, FusionMethod method, Subset subset) {
  std::ostringstream os;
  char line[256];
  os << "method=" << method_name(method) << " subset=" << subset_name(subset)
     << " folds=" << cv.folds.size() << '\n';
  for (const auto& f : cv.folds) {
    std::snprintf(line, sizeof line, "fold=%s accuracy=%.6f macro_f1=%.6f\n", f.name.c_str(),
                  f.accuracy, f.macro_f1);
    os << line;
  }
  const auto& s = cv.summary;
  std::snprintf(line, sizeof line, "mean_acc=%.6f std_acc=%.6f mean_f1=%.6f std_f1=%.6f\n",
                s.mean_accuracy, s.std_accuracy, s.mean_f1, s.std_f1);
  os << line;
  os << "accuracy " << format_percent(s.mean_accuracy, s.std_accuracy) << '\n'
     << "macro-F1 " << format_percent(s.mean_f1, s.std_f1) << '\n';
  return os.str();
}

std::map<std::string, std::string> key_values(const std::string& line) {
  std::map<std::string, std::string> kv;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok)
    if (auto eq = tok.find('='); eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  return kv;
}

}  // namespace

void cmd_synth(const RunConfig& cfg) {
  synth::ScenarioConfig sc;
  sc.subjects = cfg.subjects;
  sc.sessions = cfg.sessions;
  sc.noise_scale = cfg.noise_scale;
  sc.seed = cfg.seed;
  sc.hot_drink_peak_c = cfg.hot_drink_peak_c;
  Run run(cfg);
  log("generating " + std::to_string(sc.subjects * sc.sessions) + " sessions into " + cfg.out);
  const auto manifest = synth::generate_corpus(sc, cfg.out, cfg.jobs);
  std::uint64_t bytes = 0;
  for (const auto& e : manifest.entries) bytes += e.bytes;
  log("wrote " + std::to_string(manifest.entries.size()) + " files, " + std::to_string(bytes) + " bytes");
  run.finish();
}

void cmd_ingest(const RunConfig& cfg) {
  IngestOptions opt;
  opt.align.frame_rate_hz = cfg.frame_rate_hz;
  opt.subset = cfg.subset;
  opt.window_size = cfg.window_size;
  opt.window_step = cfg.window_step;
  opt.jobs = cfg.jobs;
  Run run(cfg);
  const auto result = ingest_corpus(cfg.corpus, opt);
  write_dataset(run.dir() / "dataset.hards", result.dataset);
  write_file(run.dir() / "ingest_summary.csv", format_ingest_summary(result.sessions));
  log("ingested " + std::to_string(result.sessions.size()) + " sessions, " +
      std::to_string(result.dataset.size()) + " windows");
  run.finish();
}

void cmd_train(const RunConfig& cfg) {
  const auto model_cfg = cfg.model();
  validate_model_config(model_cfg);
  const auto ds = load_dataset(cfg);
  Run run(cfg);
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (cfg.holdout_session == 0 || ds.session_ids[i] != cfg.holdout_session) train.push_back(i);
  if (train.empty()) fail(ErrorKind::Split, "no training windows left after withholding the session");

  CheckpointMeta meta;
  meta.seed = cfg.seed;
  if (cfg.holdout_session != 0) meta.holdout_session = cfg.holdout_session;
  meta.stats = fit_subset_normalization(ds, train, cfg.subset);
  WindowBatcher batcher(ds, cfg.subset, meta.stats);
  FusionModel model(model_cfg, cfg.seed);
  std::ostringstream training_log;
  train_model(model, batcher, train, cfg.training(), fold_seed(cfg.seed, 0), [&](const EpochStats& e) {
    char line[128];
    std::snprintf(line, sizeof line, "epoch=%zu loss=%.6f train_accuracy=%.6f", e.epoch, e.mean_loss,
                  e.accuracy);
    training_log << line << '\n';
    log(line);
  });
  save_checkpoint(run.dir() / "model.ckpt", model, meta);
  write_file(run.dir() / "training_log.txt", training_log.str());
  run.finish();
}

void cmd_eval(const RunConfig& cfg) {
  auto ckpt = load_checkpoint(cfg.checkpoint);
  const auto ds = load_dataset(cfg);
  const auto& mc = ckpt.model.config();
  if (ds.channels != ckpt.model.input_channels() || ds.subset != mc.subset)
    fail(ErrorKind::Shape, "checkpoint expects " + std::to_string(ckpt.model.input_channels()) +
                               " channels (" + std::string(subset_name(mc.subset)) +
                               "), dataset has " + std::to_string(ds.channels) + " (" +
                               std::string(subset_name(ds.subset)) + ")");
  if (ds.window_size != mc.window)
    fail(ErrorKind::Shape, "checkpoint expects windows of " + std::to_string(mc.window) +
                               " frames, dataset has " + std::to_string(ds.window_size));
  Run run(cfg);
  Fold fold;
  fold.name = ckpt.meta.holdout_session ? "session_" + std::to_string(*ckpt.meta.holdout_session) : "all";
  fold.held_out_session = ckpt.meta.holdout_session.value_or(0);
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!ckpt.meta.holdout_session || ds.session_ids[i] == *ckpt.meta.holdout_session)
      fold.test.push_back(i);
  if (fold.test.empty()) fail(ErrorKind::Split, "dataset has no windows of the held-out session");

  WindowBatcher batcher(ds, mc.subset, ckpt.meta.stats);
  const auto preds = predict_windows(ckpt.model, batcher, fold.test);
  FoldResult result;
  result.name = fold.name;
  result.held_out_session = fold.held_out_session;
  std::ostringstream pred_csv;
  pred_csv << "window,subject,session,truth,predicted\n";
  for (std::size_t k = 0; k < fold.test.size(); ++k) {
    const auto i = fold.test[k];
    result.confusion.add(ds.labels[i], preds[k].label);
    pred_csv << i << ',' << ds.subject_of(i) << ',' << ds.session_ids[i] << ',' << ds.labels[i] << ','
             << preds[k].label << '\n';
  }
  result.accuracy = accuracy(result.confusion);
  result.macro_f1 = macro_f1(result.confusion);
  result.per_class = per_class_metrics(result.confusion);
  write_file(run.dir() / "fold_result.txt", format_fold_result(result));
  write_file(run.dir() / "confusion.csv", result.confusion.to_csv());
  write_file(run.dir() / "predictions.csv", pred_csv.str());
  char line[128];
  std::snprintf(line, sizeof line, "accuracy=%.4f macro_f1=%.4f on %zu windows", result.accuracy,
                result.macro_f1, fold.test.size());
  log(line);
  run.finish();
}

void cmd_cv(const RunConfig& cfg) {
  const auto model_cfg = cfg.model();
  validate_model_config(model_cfg);
  const auto ds = load_dataset(cfg);
  Run run(cfg);
  const auto cv = run_cv(ds, model_cfg, cfg.training(), cfg.seed, cv_options(cfg));
  fs::create_directories(run.dir() / "folds");
  for (const auto& f : cv.folds) {
    auto name = f.name;
    std::replace(name.begin(), name.end(), '/', '_');
    write_file(run.dir() / "folds" / (name + ".txt"), format_fold_result(f));
    write_file(run.dir() / "folds" / (name + "_confusion.csv"), f.confusion.to_csv());
  }
  write_file(run.dir() / "confusion.csv", pooled_confusion(cv).to_csv());
  const auto text = cv_summary_text(cv, cfg.method, cfg.subset);
  write_file(run.dir() / "cv_summary.txt", text);
  std::cout << text;
  run.finish();
}

void cmd_ablate(const RunConfig& cfg) {
  const auto ds = load_dataset(cfg);
  Run run(cfg);
  const auto report = run_ablation(ds, cfg.model(), cfg.training(), cfg.seed, cv_options(cfg));
  for (const auto& c : report.cells)
    if (c.result)
      write_file(run.dir() / ("confusion_" + cell_tag(c.method, c.subset) + ".csv"),
                 pooled_confusion(*c.result).to_csv());
  write_file(run.dir() / "ablation.txt", report.to_table());
  write_file(run.dir() / "ablation_records.txt", report.to_records());
  std::cout << report.to_table();
  run.finish();
}

void cmd_report(const std::string& run_dir) {
  const fs::path dir(run_dir);
  if (!fs::is_directory(dir)) fail(ErrorKind::Io, "run directory not found: " + run_dir);
  std::ostringstream text, csv;
  csv << "source,method,subset,mean_acc,std_acc,mean_f1,std_f1\n";
  bool any = false;

  if (fs::exists(dir / "config.txt")) text << "# config\n" << read_file(dir / "config.txt") << '\n';
  RunConfig cfg;
  if (fs::exists(dir / "config.txt")) cfg = parse_run_config(read_file(dir / "config.txt"));

  if (fs::exists(dir / "ablation_records.txt")) {
    any = true;
    text << "# ablation\n" << read_file(dir / "ablation.txt") << '\n';
    std::istringstream is(read_file(dir / "ablation_records.txt"));
    for (std::string line; std::getline(is, line);) {
      auto kv = key_values(line);
      csv << "ablation," << kv["method"] << ',' << kv["subset"] << ',' << kv["mean_acc"] << ','
          << kv["std_acc"] << ',' << kv["mean_f1"] << ',' << kv["std_f1"] << '\n';
    }
  }
  if (fs::exists(dir / "cv_summary.txt")) {
    any = true;
    const auto summary = read_file(dir / "cv_summary.txt");
    text << "# cross-validation\n" << summary << '\n';
    std::istringstream is(summary);
    std::string head, line, last;
    std::getline(is, head);
    while (std::getline(is, line))
      if (line.rfind("mean_acc=", 0) == 0) last = line;
    auto h = key_values(head);
    auto kv = key_values(last);
    csv << "cv," << h["method"] << ',' << h["subset"] << ',' << kv["mean_acc"] << ',' << kv["std_acc"]
        << ',' << kv["mean_f1"] << ',' << kv["std_f1"] << '\n';
  }
  if (fs::exists(dir / "fold_result.txt")) {
    any = true;
    const auto result = read_file(dir / "fold_result.txt");
    text << "# evaluation\n" << result << '\n';
    auto kv = key_values(result.substr(0, result.find('\n')));
    csv << "eval," << method_name(cfg.method) << ',' << subset_name(cfg.subset) << ','
        << kv["accuracy"] << ",," << kv["macro_f1"] << ",\n";
  }
  if (fs::exists(dir / "training_log.txt")) {
    any = true;
    text << "# training\n" << read_file(dir / "training_log.txt") << '\n';
  }
  if (fs::exists(dir / "ingest_summary.csv")) {
    any = true;
    text << "# ingest\n" << read_file(dir / "ingest_summary.csv") << '\n';
  }
  if (fs::exists(dir / "manifest.txt")) {
    any = true;
    const auto bad = synth::verify_manifest(dir);
    text << "# corpus\nmanifest " << (bad.empty() ? "ok" : "MISMATCH") << '\n';
    for (const auto& b : bad) text << "  " << b << '\n';
  }
  if (!any) fail(ErrorKind::Io, "no run outputs found in " + run_dir);
  write_file(dir / "report.txt", text.str());
  write_file(dir / "report.csv", csv.str());
  std::cout << text.str();
}

}  // namespace har::cli
