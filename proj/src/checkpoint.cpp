#include "har/checkpoint.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "har/errors.hpp"

namespace har {
namespace {

constexpr std::string_view kMagic = "HARCKPT";
constexpr int kVersion = 1;

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

[[noreturn]] void bad(const std::string& source, const std::string& what) {
  fail(ErrorKind::Format, source + ": " + what);
}

template <typename T>
T parse_num(std::string_view s, const std::string& source) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) bad(source, "bad number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto i = s.find(sep);
    out.push_back(s.substr(0, i));
    if (i == std::string_view::npos) return out;
    s = s.substr(i + 1);
  }
}

std::vector<std::size_t> parse_sizes(std::string_view s, const std::string& source) {
  std::vector<std::size_t> out;
  for (auto tok : split(s, ',')) out.push_back(parse_num<std::size_t>(tok, source));
  return out;
}

}  // namespace

std::string serialize_checkpoint(FusionModel& model, const CheckpointMeta& meta) {
  const auto& c = model.config();
  std::ostringstream h;
  h << kMagic << ' ' << kVersion << '\n';
  h << "method " << method_name(c.method) << '\n';
  h << "subset " << subset_name(c.subset) << '\n';
  h << "input_channels " << model.input_channels() << '\n';
  h << "window " << c.window << '\n';
  h << "conv1d_channels " << join_sizes(c.conv1d_channels) << '\n';
  h << "conv1d_kernel " << c.conv1d_kernel << '\n';
  h << "pool " << c.pool << '\n';
  h << "hidden " << c.hidden << '\n';
  h << "conv2d_channels " << join_sizes(c.conv2d_channels) << '\n';
  h << "conv2d_kernel " << c.conv2d_kernel << '\n';
  h << "thermal_features " << c.thermal_features << '\n';
  h << "seed " << meta.seed << '\n';
  h << "holdout_session " << (meta.holdout_session ? std::to_string(*meta.holdout_session) : "none")
    << '\n';
  for (const auto& [stage, specs] : model.topology())
    for (const auto& s : specs) h << "layer " << stage << ' ' << s.to_string() << '\n';

  auto params = model.parameters();
  const auto names = model.parameter_names();
  std::size_t total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    h << "param " << names[i] << ' ' << nn::shape_string(params[i]->value.shape()) << '\n';
    total += params[i]->value.size();
  }

  const auto& st = meta.stats;
  h << "stats_channels " << st.channels() << '\n';
  h << "stats_mean";
  for (double v : st.mean) h << ' ' << format_double(v);
  h << "\nstats_std";
  for (double v : st.stddev) h << ' ' << format_double(v);
  h << "\nstats_constant";
  for (auto v : st.constant) h << ' ' << static_cast<int>(v);
  h << "\nblob_floats " << total << "\nend\n";

  std::string out = std::move(h).str();
  const std::size_t header = out.size();
  out.resize(header + total * sizeof(float));
  char* dst = out.data() + header;
  for (auto* p : params) {
    for (double v : p->value.values()) {
      const float f = static_cast<float>(v);
      std::memcpy(dst, &f, sizeof f);
      dst += sizeof f;
    }
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, FusionModel& model,
                     const CheckpointMeta& meta) {
  const auto bytes = serialize_checkpoint(model, meta);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

Checkpoint parse_checkpoint(std::string_view bytes, const std::string& source) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string_view {
    const auto nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) bad(source, "truncated header");
    auto line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };

  {
    const auto first = next_line();
    const auto parts = split(first, ' ');
    if (parts.size() != 2 || parts[0] != kMagic) bad(source, "not a checkpoint (bad magic)");
    if (parse_num<int>(parts[1], source) != kVersion)
      bad(source, "unsupported checkpoint version " + std::string(parts[1]));
  }

  std::map<std::string, std::string, std::less<>> fields;
  std::vector<std::string> layers, params;
  while (true) {
    const auto line = next_line();
    if (line == "end") break;
    const auto sp = line.find(' ');
    const auto key = line.substr(0, sp);
    const auto value = sp == std::string_view::npos ? std::string_view{} : line.substr(sp + 1);
    if (key == "layer")
      layers.emplace_back(value);
    else if (key == "param")
      params.emplace_back(value);
    else
      fields[std::string(key)] = std::string(value);
  }
  auto field = [&](const char* key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) bad(source, std::string("missing field '") + key + "'");
    return it->second;
  };

  ModelConfig c;
  c.method = parse_method(field("method"));
  c.subset = parse_subset(field("subset"));
  c.window = parse_num<std::size_t>(field("window"), source);
  c.conv1d_channels = parse_sizes(field("conv1d_channels"), source);
  c.conv1d_kernel = parse_num<std::size_t>(field("conv1d_kernel"), source);
  c.pool = parse_num<std::size_t>(field("pool"), source);
  c.hidden = parse_num<std::size_t>(field("hidden"), source);
  c.conv2d_channels = parse_sizes(field("conv2d_channels"), source);
  c.conv2d_kernel = parse_num<std::size_t>(field("conv2d_kernel"), source);
  c.thermal_features = parse_num<std::size_t>(field("thermal_features"), source);

  CheckpointMeta meta;
  meta.seed = parse_num<std::uint64_t>(field("seed"), source);
  if (const auto& h = field("holdout_session"); h != "none")
    meta.holdout_session = parse_num<int>(h, source);

  FusionModel model(c, meta.seed);
  if (parse_num<std::size_t>(field("input_channels"), source) != model.input_channels())
    bad(source, "input channel count does not match subset");

  std::vector<std::string> expected_layers;
  for (const auto& [stage, specs] : model.topology())
    for (const auto& s : specs) expected_layers.push_back(stage + " " + s.to_string());
  if (layers != expected_layers) bad(source, "layer list does not match the configured topology");

  auto model_params = model.parameters();
  const auto names = model.parameter_names();
  if (params.size() != model_params.size()) bad(source, "parameter count mismatch");
  std::size_t total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto expected = names[i] + " " + nn::shape_string(model_params[i]->value.shape());
    if (params[i] != expected) bad(source, "parameter '" + params[i] + "' does not match topology");
    total += model_params[i]->value.size();
  }

  const auto stats_channels = parse_num<std::size_t>(field("stats_channels"), source);
  auto parse_list = [&](const char* key, auto convert) {
    const auto& text = field(key);
    std::vector<decltype(convert(std::string_view{}))> out;
    if (!text.empty())
      for (auto tok : split(text, ' ')) out.push_back(convert(tok));
    if (out.size() != stats_channels) bad(source, std::string(key) + " has the wrong length");
    return out;
  };
  meta.stats.mean = parse_list("stats_mean", [&](std::string_view t) { return parse_num<double>(t, source); });
  meta.stats.stddev = parse_list("stats_std", [&](std::string_view t) { return parse_num<double>(t, source); });
  meta.stats.constant = parse_list("stats_constant", [&](std::string_view t) {
    return static_cast<std::uint8_t>(parse_num<int>(t, source));
  });
  if (stats_channels != 0 && stats_channels != model.input_channels())
    bad(source, "normalization does not cover the model inputs");

  if (parse_num<std::size_t>(field("blob_floats"), source) != total)
    bad(source, "blob size does not match parameters");
  if (bytes.size() - pos < total * sizeof(float)) bad(source, "truncated parameter blob");
  if (bytes.size() - pos > total * sizeof(float)) bad(source, "trailing bytes after parameter blob");
  const char* src = bytes.data() + pos;
  for (auto* p : model_params) {
    for (double& v : p->value.values()) {
      float f = 0.0f;
      std::memcpy(&f, src, sizeof f);
      src += sizeof f;
      v = f;
    }
  }
  return {std::move(model), std::move(meta)};
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str(), path.string());
}

}  // namespace har
