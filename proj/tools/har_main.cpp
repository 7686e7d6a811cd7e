// Command-line entry point: har <subcommand> [options]

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "har/config.hpp"
#include "har/errors.hpp"

namespace {

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0   success\n"
    "  1   unexpected internal error\n"
    "  2   bad configuration or command line\n"
    "  3   missing or unreadable file\n"
    "  4   bad container (magic, version, truncation, topology mismatch)\n"
    "  5   shape mismatch (e.g. checkpoint channels vs dataset channels)\n"
    "  6   malformed session log\n"
    "  7   value outside its domain (activity id, method/subset combination)\n"
    "  8   resampling/alignment failure or nothing left after NULL removal\n"
    "  9   cross-validation split impossible\n"
    "  10  non-finite numbers\n"
    "Errors print one line to stderr: error: code=<n> kind=<kind> message=\"...\"";

void print_error(int code, std::string_view kind, std::string message) {
  for (auto& ch : message)
    if (ch == '\n' || ch == '"') ch = ch == '"' ? '\'' : ' ';
  std::fprintf(stderr, "error: code=%d kind=%.*s message=\"%s\"\n", code,
               static_cast<int>(kind.size()), kind.data(), message.c_str());
}

// Flag values as text; applied on top of the config file through RunConfig::set.
struct Flags {
  std::string config;
  std::vector<std::pair<std::string, std::string>> values;
};

void add_value(CLI::App* app, Flags& flags, const std::string& name, const std::string& key,
               const std::string& help) {
  app->add_option_function<std::string>(
      name, [&flags, key](const std::string& v) { flags.values.emplace_back(key, v); }, help);
}

void add_common(CLI::App* app, Flags& flags) {
  app->add_option("--config", flags.config, "key = value configuration file (flags win)");
  add_value(app, flags, "--seed", "seed", "random seed");
  add_value(app, flags, "--jobs", "jobs", "worker threads (results do not depend on it)");
  add_value(app, flags, "--out", "out", "output directory");
}

void add_windowing(CLI::App* app, Flags& flags) {
  add_value(app, flags, "--subset", "subset", "all | thermal | no-thermal | no-thermal-no-accgyro");
  add_value(app, flags, "--window-size", "window_size", "frames per window (default 20)");
  add_value(app, flags, "--window-step", "window_step", "frames between window starts (default 10)");
}

void add_model(CLI::App* app, Flags& flags) {
  add_value(app, flags, "--method", "method", "data-fusion | feature-fusion");
  add_value(app, flags, "--subset", "subset", "all | thermal | no-thermal | no-thermal-no-accgyro");
  add_value(app, flags, "--epochs", "epochs", "training epochs");
  add_value(app, flags, "--lr", "learning_rate", "Adam learning rate");
  add_value(app, flags, "--batch-size", "batch_size", "mini-batch size");
}

har::RunConfig resolve(const Flags& flags) {
  har::RunConfig cfg;
  if (!flags.config.empty()) cfg = har::load_run_config(flags.config);
  for (const auto& [key, value] : flags.values) cfg.set(key, value);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kitchen activity recognition from multi-rate badge sensor logs."};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  Flags flags;
  std::string positional;

  auto* synth = app.add_subcommand("synth", "generate a synthetic session corpus");
  add_common(synth, flags);
  add_value(synth, flags, "--subjects", "subjects", "number of subjects (default 10)");
  add_value(synth, flags, "--sessions", "sessions", "sessions per subject (default 5)");
  add_value(synth, flags, "--noise-scale", "noise_scale", "sensor noise multiplier (default 1)");

  auto* ingest = app.add_subcommand("ingest", "align, strip NULL and window a corpus into a dataset");
  ingest->add_option("corpus", positional, "corpus directory");
  add_common(ingest, flags);
  add_windowing(ingest, flags);
  add_value(ingest, flags, "--rate", "frame_rate_hz", "aligned frame rate in Hz (default 6)");

  auto* train = app.add_subcommand("train", "train one model and write a checkpoint");
  train->add_option("dataset", positional, "dataset container (dataset.hards)");
  add_common(train, flags);
  add_model(train, flags);
  add_value(train, flags, "--holdout-session", "holdout_session", "withhold this session id");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval->add_option("dataset", positional, "dataset container");
  add_common(eval, flags);
  add_value(eval, flags, "--checkpoint", "checkpoint", "checkpoint file");

  auto* cv = app.add_subcommand("cv", "leave-one-session-out cross-validation of one model");
  cv->add_option("dataset", positional, "dataset container");
  add_common(cv, flags);
  add_model(cv, flags);
  add_value(cv, flags, "--fold-unit", "fold_unit", "session | subject-session");

  auto* ablate = app.add_subcommand("ablate", "cross-validate every method/subset combination");
  ablate->add_option("dataset", positional, "dataset container");
  add_common(ablate, flags);
  add_value(ablate, flags, "--epochs", "epochs", "training epochs");
  add_value(ablate, flags, "--lr", "learning_rate", "Adam learning rate");
  add_value(ablate, flags, "--batch-size", "batch_size", "mini-batch size");
  add_value(ablate, flags, "--fold-unit", "fold_unit", "session | subject-session");

  auto* report = app.add_subcommand("report", "summarize the outputs found in a run directory");
  report->add_option("run_dir", positional, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(har::exit_code(har::ErrorKind::Config), "config", e.what());
    return har::exit_code(har::ErrorKind::Config);
  }

  try {
    if (report->parsed()) {
      har::cli::cmd_report(positional);
      return 0;
    }
    auto cfg = resolve(flags);
    if (!positional.empty()) {
      if (ingest->parsed()) cfg.corpus = positional;
      else cfg.dataset = positional;
    }
    if (synth->parsed()) {
      // the corpus directory is the output
      bool out_given = false;
      for (const auto& kv : flags.values) out_given |= kv.first == "out";
      if (out_given) cfg.corpus = cfg.out;
      else cfg.out = cfg.corpus;
      har::cli::cmd_synth(cfg);
    } else if (ingest->parsed()) {
      har::cli::cmd_ingest(cfg);
    } else if (train->parsed()) {
      har::cli::cmd_train(cfg);
    } else if (eval->parsed()) {
      har::cli::cmd_eval(cfg);
    } else if (cv->parsed()) {
      har::cli::cmd_cv(cfg);
    } else if (ablate->parsed()) {
      har::cli::cmd_ablate(cfg);
    }
  } catch (const har::Error& e) {
    print_error(har::exit_code(e.kind()), har::error_kind_name(e.kind()), e.what());
    return har::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    print_error(har::exit_code(har::ErrorKind::Io), "io", e.what());
    return har::exit_code(har::ErrorKind::Io);
  } catch (const std::exception& e) {
    print_error(1, "internal", e.what());
    return 1;
  }
  return 0;
}
