#include "har/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "har/errors.hpp"

namespace har {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size())
    fail(ErrorKind::Config, "bad value '" + std::string(value) + "' for " + std::string(key));
  return out;
}

std::size_t positive(std::string_view key, std::string_view value) {
  const auto v = parse_number<std::size_t>(key, value);
  if (v == 0) fail(ErrorKind::Config, std::string(key) + " must be positive");
  return v;
}

double positive_real(std::string_view key, std::string_view value) {
  const auto v = parse_number<double>(key, value);
  if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::Config, std::string(key) + " must be positive");
  return v;
}

std::string shortest(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  try {
    if (key == "corpus") corpus = value;
    else if (key == "dataset") dataset = value;
    else if (key == "checkpoint") checkpoint = value;
    else if (key == "out") out = value;
    else if (key == "frame_rate_hz") frame_rate_hz = positive_real(key, value);
    else if (key == "window_size") window_size = positive(key, value);
    else if (key == "window_step") window_step = positive(key, value);
    else if (key == "subset") subset = parse_subset(value);
    else if (key == "method") method = parse_method(value);
    else if (key == "hidden") hidden = positive(key, value);
    else if (key == "thermal_features") thermal_features = positive(key, value);
    else if (key == "epochs") epochs = positive(key, value);
    else if (key == "batch_size") batch_size = positive(key, value);
    else if (key == "learning_rate") learning_rate = positive_real(key, value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "jobs") jobs = positive(key, value);
    else if (key == "fold_unit") fold_unit = parse_fold_unit(value);
    else if (key == "holdout_session") holdout_session = parse_number<int>(key, value);
    else if (key == "subjects") subjects = positive(key, value);
    else if (key == "sessions") sessions = positive(key, value);
    else if (key == "noise_scale") noise_scale = parse_number<double>(key, value);
    else if (key == "hot_drink_peak_c") hot_drink_peak_c = parse_number<double>(key, value);
    else fail(ErrorKind::Config, "unknown key '" + std::string(key) + "'");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    fail(ErrorKind::Config, e.what());
  }
}

void RunConfig::validate() const {
  if (window_step > window_size) fail(ErrorKind::Config, "window_step must not exceed window_size");
  validate_model_config(model());
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "corpus = " << corpus << '\n'
     << "dataset = " << dataset << '\n'
     << "checkpoint = " << checkpoint << '\n'
     << "frame_rate_hz = " << shortest(frame_rate_hz) << '\n'
     << "window_size = " << window_size << '\n'
     << "window_step = " << window_step << '\n'
     << "subset = " << subset_flag(subset) << '\n'
     << "method = " << method_name(method) << '\n'
     << "hidden = " << hidden << '\n'
     << "thermal_features = " << thermal_features << '\n'
     << "epochs = " << epochs << '\n'
     << "batch_size = " << batch_size << '\n'
     << "learning_rate = " << shortest(learning_rate) << '\n'
     << "seed = " << seed << '\n'
     << "jobs = " << jobs << '\n'
     << "fold_unit = " << fold_unit_name(fold_unit) << '\n'
     << "holdout_session = " << holdout_session << '\n'
     << "subjects = " << subjects << '\n'
     << "sessions = " << sessions << '\n'
     << "noise_scale = " << shortest(noise_scale) << '\n'
     << "hot_drink_peak_c = " << shortest(hot_drink_peak_c) << '\n';
  return os.str();
}

ModelConfig RunConfig::model() const {
  ModelConfig m;
  m.method = method;
  m.subset = subset;
  m.window = window_size;
  m.hidden = hidden;
  m.thermal_features = thermal_features;
  return m;
}

TrainingConfig RunConfig::training() const { return {epochs, batch_size, learning_rate}; }

RunConfig parse_run_config(std::string_view text) {
  RunConfig config;
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::Config, "config line " + std::to_string(lineno) + ": expected key = value");
    try {
      config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      fail(ErrorKind::Config, "config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

void write_resolved_config(const RunConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "config.txt", std::ios::binary | std::ios::trunc);
  out << config.to_text();
  if (!out) fail(ErrorKind::Io, "cannot write " + (dir / "config.txt").string());
}

}  // namespace har
