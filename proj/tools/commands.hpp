#pragma once

#include <string>

#include "har/config.hpp"

namespace har::cli {

void cmd_synth(const RunConfig& cfg);
void cmd_ingest(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_cv(const RunConfig& cfg);
void cmd_ablate(const RunConfig& cfg);
/// `run_dir` is read; the report is written there and printed.
void cmd_report(const std::string& run_dir);

}  // namespace har::cli
