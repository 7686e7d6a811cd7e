#include "har/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "har/errors.hpp"

namespace har {
namespace {

// Slack for comparing grid times against sample and label timestamps.
constexpr double kTimeEps = 1e-9;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto nl = text_.find('\n', pos_);
    const auto end = nl == std::string_view::npos ? text_.size() : nl;
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++line_no_;
    return true;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

[[noreturn]] void parse_fail(const std::string& file, std::size_t line, const std::string& cause) {
  fail(ErrorKind::Parse, file + ":" + std::to_string(line) + ": " + cause);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

TimedStream parse_stream(std::string_view text, const std::vector<std::string>& expected,
                         const std::string& file) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line)) parse_fail(file, 1, "missing header");
  {
    const auto header = split_fields(line);
    if (header.size() != expected.size() + 1)
      parse_fail(file, 1,
                 "header has " + std::to_string(header.size()) + " columns, expected " +
                     std::to_string(expected.size() + 1));
    if (header[0] != "t") parse_fail(file, 1, "first column must be 't'");
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (header[i + 1] != expected[i])
        parse_fail(file, 1,
                   "column " + std::to_string(i + 1) + " is '" + std::string(header[i + 1]) +
                       "', expected '" + expected[i] + "'");
    }
  }

  TimedStream stream;
  stream.channel_names = expected;
  const std::size_t width = expected.size();
  std::vector<double> row(width);
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto n = reader.line_no();
    std::size_t field = 0;
    std::size_t start = 0;
    double t = 0.0;
    bool done = false;
    while (!done) {
      auto comma = line.find(',', start);
      if (comma == std::string_view::npos) {
        comma = line.size();
        done = true;
      }
      const auto tok = line.substr(start, comma - start);
      start = comma + 1;
      if (field > width) {
        ++field;
        continue;
      }
      double v = 0.0;
      if (!parse_number(tok, v) || !std::isfinite(v))
        parse_fail(file, n, "field " + std::to_string(field + 1) + " is not a finite number");
      if (field == 0)
        t = v;
      else
        row[field - 1] = v;
      ++field;
    }
    if (field != width + 1)
      parse_fail(file, n,
                 "expected " + std::to_string(width) + " values, got " + std::to_string(field - 1));
    if (!stream.times.empty() && !(t > stream.times.back()))
      parse_fail(file, n, "timestamp " + std::to_string(t) + " does not increase");
    stream.times.push_back(t);
    stream.values.insert(stream.values.end(), row.begin(), row.end());
  }
  return stream;
}

std::vector<LabelEvent> parse_labels(std::string_view text, const std::string& file) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line)) parse_fail(file, 1, "missing header");
  if (line != "t,label") parse_fail(file, 1, "header must be 't,label'");

  std::vector<LabelEvent> events;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto n = reader.line_no();
    const auto fields = split_fields(line);
    if (fields.size() != 2)
      parse_fail(file, n, "expected 2 fields, got " + std::to_string(fields.size()));
    double t = 0.0;
    int label = 0;
    if (!parse_number(fields[0], t) || !std::isfinite(t))
      parse_fail(file, n, "bad timestamp");
    if (!parse_number(fields[1], label)) parse_fail(file, n, "bad label");
    if (label != kNullLabel && !is_activity(label))
      parse_fail(file, n, "unknown activity id " + std::to_string(label));
    if (!events.empty() && t < events.back().time)
      parse_fail(file, n, "label timestamps must not decrease");
    events.push_back({t, label});
  }
  return events;
}

void append_number(std::string& out, double v, std::chars_format fmt, int precision) {
  std::array<char, 64> buf{};
  const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, fmt, precision);
  out.append(buf.data(), p);
}

void append_time(std::string& out, double t) { append_number(out, t, std::chars_format::fixed, 6); }

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> AlignedFrameSeries::segments() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < segment_starts.size(); ++i) {
    const auto end = i + 1 < segment_starts.size() ? segment_starts[i + 1] : frames();
    if (end > segment_starts[i]) out.emplace_back(segment_starts[i], end);
  }
  return out;
}

SessionRecording parse_session_text(std::string_view slow_csv, std::string_view fast_csv,
                                    std::string_view labels_csv, std::string subject_id,
                                    int session_id, const std::string& origin) {
  const std::string prefix = origin.empty() ? "" : origin + "/";
  SessionRecording rec;
  rec.subject_id = std::move(subject_id);
  rec.session_id = session_id;
  rec.slow = parse_stream(slow_csv, slow_channel_names(), prefix + "slow.csv");
  rec.fast = parse_stream(fast_csv, fast_channel_names(), prefix + "fast.csv");
  rec.labels = parse_labels(labels_csv, prefix + "labels.csv");

  auto within = [](const TimedStream& s, double t) {
    return !s.times.empty() && t >= s.times.front() - kTimeEps && t <= s.times.back() + kTimeEps;
  };
  for (std::size_t i = 0; i < rec.labels.size(); ++i) {
    const double t = rec.labels[i].time;
    if (!within(rec.slow, t) && !within(rec.fast, t))
      parse_fail(prefix + "labels.csv", i + 2, "label event lies outside both streams");
  }
  return rec;
}

SessionRecording parse_session(const std::filesystem::path& dir) {
  const std::string session_dir = dir.filename().string();
  const std::string subject = dir.parent_path().filename().string();
  int session_id = 0;
  constexpr std::string_view kPrefix = "session_";
  if (session_dir.rfind(kPrefix, 0) != 0 ||
      !parse_number(std::string_view(session_dir).substr(kPrefix.size()), session_id))
    fail(ErrorKind::Parse, dir.string() + ": directory name must be session_<k>");
  return parse_session_text(read_file(dir / "slow.csv"), read_file(dir / "fast.csv"),
                            read_file(dir / "labels.csv"), subject, session_id, dir.string());
}

std::string format_stream_csv(const TimedStream& stream) {
  std::string out = "t";
  for (const auto& name : stream.channel_names) {
    out += ',';
    out += name;
  }
  out += '\n';
  out.reserve(out.size() + stream.samples() * (stream.width() + 1) * 10);
  for (std::size_t i = 0; i < stream.samples(); ++i) {
    append_time(out, stream.times[i]);
    for (double v : stream.row(i)) {
      out += ',';
      append_number(out, v, std::chars_format::general, 7);
    }
    out += '\n';
  }
  return out;
}

std::string format_labels_csv(std::span<const LabelEvent> labels) {
  std::string out = "t,label\n";
  for (const auto& e : labels) {
    append_time(out, e.time);
    out += ',';
    out += std::to_string(e.label);
    out += '\n';
  }
  return out;
}

void write_session(const std::filesystem::path& dir, const SessionRecording& rec) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + (dir / name).string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail(ErrorKind::Io, "short write to " + (dir / name).string());
  };
  write("slow.csv", format_stream_csv(rec.slow));
  write("fast.csv", format_stream_csv(rec.fast));
  write("labels.csv", format_labels_csv(rec.labels));
}

Matrix resample_linear(const TimedStream& stream, std::span<const double> query_times) {
  const auto n = stream.samples();
  const auto width = stream.width();
  if (n < 2) fail(ErrorKind::Extrapolation, "resampling needs at least two samples");
  if (stream.values.size() != n * width) fail(ErrorKind::Shape, "stream values do not match width");

  Matrix out{query_times.size(), width, std::vector<double>(query_times.size() * width)};
  const double first = stream.times.front();
  const double last = stream.times.back();
  std::size_t seg = 0;  // current interval [times[seg], times[seg + 1]]
  double prev_q = first;
  for (std::size_t q = 0; q < query_times.size(); ++q) {
    const double t = query_times[q];
    if (!(t >= first && t <= last))
      fail(ErrorKind::Extrapolation, "query time " + std::to_string(t) + " outside [" +
                                         std::to_string(first) + ", " + std::to_string(last) + "]");
    if (t < prev_q) fail(ErrorKind::Extrapolation, "query times must not decrease");
    prev_q = t;

    double* dst = out.data.data() + q * width;
    if (t == last) {
      const auto src = stream.row(n - 1);
      std::copy(src.begin(), src.end(), dst);
      continue;
    }
    while (stream.times[seg + 1] <= t) ++seg;
    const double t0 = stream.times[seg];
    const auto a = stream.row(seg);
    if (t == t0) {
      std::copy(a.begin(), a.end(), dst);
      continue;
    }
    const auto b = stream.row(seg + 1);
    const double w = (t - t0) / (stream.times[seg + 1] - t0);
    for (std::size_t c = 0; c < width; ++c) dst[c] = a[c] + (b[c] - a[c]) * w;
  }
  return out;
}

AlignedFrameSeries align_session(const SessionRecording& rec, const AlignOptions& options) {
  if (rec.slow.samples() < 2 || rec.fast.samples() < 2)
    fail(ErrorKind::Alignment, "both streams need at least two samples");
  if (rec.slow.width() != kSlowChannelCount || rec.fast.width() != kFastChannelCount)
    fail(ErrorKind::Shape, "stream widths must be 780 (slow) and 11 (fast)");
  if (!(options.frame_rate_hz > 0.0)) fail(ErrorKind::Domain, "frame rate must be positive");

  const double origin = std::max(rec.slow.times.front(), rec.fast.times.front());
  const double end = std::min(rec.slow.times.back(), rec.fast.times.back());
  if (end < origin)
    fail(ErrorKind::Alignment, "streams of session " + rec.subject_id + "/" +
                                   std::to_string(rec.session_id) + " do not overlap in time");

  const double rate = options.frame_rate_hz;
  const auto frames = static_cast<std::size_t>(std::floor((end - origin) * rate + kTimeEps)) + 1;
  std::vector<double> grid(frames);
  for (std::size_t k = 0; k < frames; ++k)
    grid[k] = std::min(origin + static_cast<double>(k) / rate, end);

  const Matrix slow = resample_linear(rec.slow, grid);
  const Matrix fast = resample_linear(rec.fast, grid);
  const auto& layout = canonical_layout();
  const auto slow_idx = layout.group_indices(AcquisitionGroup::Slow);
  const auto fast_idx = layout.group_indices(AcquisitionGroup::Fast);

  AlignedFrameSeries out;
  out.subject_id = rec.subject_id;
  out.session_id = rec.session_id;
  out.frame_rate_hz = rate;
  out.origin = origin;
  out.values.resize(frames * kChannelCount);
  out.labels.resize(frames, kNullLabel);
  out.grid_index.resize(frames);
  out.segment_starts = {0};
  for (std::size_t k = 0; k < frames; ++k) {
    float* dst = out.values.data() + k * kChannelCount;
    const auto s = slow.row(k);
    for (std::size_t c = 0; c < slow_idx.size(); ++c) dst[slow_idx[c]] = static_cast<float>(s[c]);
    const auto f = fast.row(k);
    for (std::size_t c = 0; c < fast_idx.size(); ++c) dst[fast_idx[c]] = static_cast<float>(f[c]);
    out.grid_index[k] = k;
  }

  // Zero-order hold: most recent event at or before the frame time.
  std::size_t next_event = 0;
  int current = kNullLabel;
  for (std::size_t k = 0; k < frames; ++k) {
    const double t = origin + static_cast<double>(k) / rate;
    while (next_event < rec.labels.size() && rec.labels[next_event].time <= t + kTimeEps)
      current = rec.labels[next_event++].label;
    out.labels[k] = current;
  }
  return out;
}

AlignedFrameSeries strip_null(const AlignedFrameSeries& series) {
  AlignedFrameSeries out;
  out.subject_id = series.subject_id;
  out.session_id = series.session_id;
  out.frame_rate_hz = series.frame_rate_hz;
  out.origin = series.origin;
  out.channels = series.channels;

  // A new segment starts after a dropped frame or at an existing boundary.
  std::vector<bool> boundary(series.frames() + 1, false);
  for (auto s : series.segment_starts)
    if (s < boundary.size()) boundary[s] = true;

  bool open = false;
  for (std::size_t k = 0; k < series.frames(); ++k) {
    if (series.labels[k] == kNullLabel) {
      open = false;
      continue;
    }
    if (!open || boundary[k]) out.segment_starts.push_back(out.frames());
    open = true;
    const auto f = series.frame(k);
    out.values.insert(out.values.end(), f.begin(), f.end());
    out.labels.push_back(series.labels[k]);
    out.grid_index.push_back(series.grid_index[k]);
  }
  if (out.frames() == 0)
    fail(ErrorKind::EmptySeries, "session " + series.subject_id + "/" +
                                     std::to_string(series.session_id) + " has no labelled frames");
  return out;
}

}  // namespace har
