#include "har/windowing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "har/binary_io.hpp"
#include "har/errors.hpp"

namespace har {
namespace {

constexpr char kDatasetMagic[8] = {'H', 'A', 'R', 'W', 'D', 'S', '\r', '\n'};
constexpr std::uint32_t kDatasetVersion = 1;

// Two-pass population statistics over rows produced by `for_each_row`.
template <typename ForEachRow>
NormalizationStats fit_rows(std::size_t channels, ForEachRow&& for_each_row) {
  std::vector<double> sum(channels, 0.0);
  std::size_t count = 0;
  for_each_row([&](std::span<const float> row) {
    for (std::size_t c = 0; c < channels; ++c) sum[c] += row[c];
    ++count;
  });
  NormalizationStats stats;
  stats.mean.resize(channels, 0.0);
  stats.stddev.resize(channels, 0.0);
  stats.constant.resize(channels, 1);
  if (count == 0) return stats;
  for (std::size_t c = 0; c < channels; ++c) stats.mean[c] = sum[c] / static_cast<double>(count);

  std::vector<double> sq(channels, 0.0);
  for_each_row([&](std::span<const float> row) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double d = row[c] - stats.mean[c];
      sq[c] += d * d;
    }
  });
  for (std::size_t c = 0; c < channels; ++c) {
    stats.stddev[c] = std::sqrt(sq[c] / static_cast<double>(count));
    stats.constant[c] = stats.stddev[c] < kConstantStdThreshold ? 1 : 0;
  }
  return stats;
}

}  // namespace

NormalizationStats NormalizationStats::identity(std::size_t channels) {
  return {std::vector<double>(channels, 0.0), std::vector<double>(channels, 1.0),
          std::vector<std::uint8_t>(channels, 0)};
}

bool NormalizationStats::is_identity() const {
  for (std::size_t c = 0; c < channels(); ++c)
    if (mean[c] != 0.0 || stddev[c] != 1.0 || constant[c]) return false;
  return true;
}

NormalizationStats NormalizationStats::select(std::span<const std::size_t> channels) const {
  NormalizationStats out;
  for (auto c : channels) {
    out.mean.push_back(mean.at(c));
    out.stddev.push_back(stddev.at(c));
    out.constant.push_back(constant.at(c));
  }
  return out;
}

NormalizationStats fit_normalization(std::span<const AlignedFrameSeries> series_set) {
  if (series_set.empty()) fail(ErrorKind::Domain, "cannot fit normalization on no series");
  const auto channels = series_set.front().channels;
  for (const auto& s : series_set)
    if (s.channels != channels) fail(ErrorKind::Shape, "series differ in channel count");
  return fit_rows(channels, [&](auto&& visit) {
    for (const auto& s : series_set)
      for (std::size_t k = 0; k < s.frames(); ++k) visit(s.frame(k));
  });
}

NormalizationStats fit_normalization(const WindowedDataset& dataset,
                                     std::span<const std::size_t> window_indices) {
  const auto channels = dataset.channels;
  return fit_rows(channels, [&](auto&& visit) {
    for (auto i : window_indices) {
      const auto w = dataset.window(i);
      for (std::size_t t = 0; t < dataset.window_size; ++t) visit(w.subspan(t * channels, channels));
    }
  });
}

std::size_t window_count(std::size_t length, std::size_t size, std::size_t step) {
  if (size == 0 || step == 0 || step > size)
    fail(ErrorKind::Domain, "window size and step must satisfy 1 <= step <= size");
  if (length < size) return 0;
  return (length - size) / step + 1;
}

int window_label(std::span<const int> frame_labels) {
  std::array<std::size_t, kActivityCount + 1> counts{};
  for (int l : frame_labels) {
    if (!is_activity(l)) fail(ErrorKind::Domain, "window contains a non-activity label");
    ++counts[static_cast<std::size_t>(l)];
  }
  const auto best = *std::max_element(counts.begin(), counts.end());
  const int last = frame_labels.back();
  if (counts[static_cast<std::size_t>(last)] == best) return last;
  for (int l = 1; l <= kActivityCount; ++l)
    if (counts[static_cast<std::size_t>(l)] == best) return l;
  return last;
}

WindowedDataset make_windows(const AlignedFrameSeries& series, const NormalizationStats& stats,
                             Subset subset, std::size_t size, std::size_t step) {
  if (size == 0 || step == 0 || step > size)
    fail(ErrorKind::Domain, "window size and step must satisfy 1 <= step <= size");
  const auto& mask = canonical_layout().subset(subset);
  if (series.channels != kChannelCount)
    fail(ErrorKind::Shape, "windowing expects 791-channel frames");
  const bool raw = stats.channels() == 0;
  if (!raw && stats.channels() != kChannelCount)
    fail(ErrorKind::Shape, "normalization stats must cover all 791 channels");

  WindowedDataset out;
  out.window_size = size;
  out.channels = mask.count();
  out.subset = subset;
  out.subjects = {series.subject_id};
  out.stats = raw ? NormalizationStats::identity(mask.count()) : stats.select(mask.indices);

  std::vector<int> frame_labels(size);
  for (const auto& [begin, end] : series.segments()) {
    const auto n = window_count(end - begin, size, step);
    for (std::size_t w = 0; w < n; ++w) {
      const auto start = begin + w * step;
      for (std::size_t t = 0; t < size; ++t) {
        const auto frame = series.frame(start + t);
        for (std::size_t c = 0; c < mask.count(); ++c) {
          const auto ch = mask.indices[c];
          out.windows.push_back(raw ? frame[ch] : static_cast<float>(stats.apply(ch, frame[ch])));
        }
        frame_labels[t] = series.labels[start + t];
      }
      out.labels.push_back(window_label(frame_labels));
      out.session_ids.push_back(series.session_id);
      out.subject_index.push_back(0);
    }
  }
  return out;
}

void append_windows(WindowedDataset& into, const WindowedDataset& part) {
  if (into.labels.empty() && into.subjects.empty()) {
    auto reserved = std::move(into.windows);
    into = part;
    reserved.assign(part.windows.begin(), part.windows.end());
    into.windows = std::move(reserved);
    return;
  }
  if (into.window_size != part.window_size || into.channels != part.channels ||
      into.subset != part.subset)
    fail(ErrorKind::Shape, "cannot merge datasets with different window shapes");
  if (!(into.stats == part.stats))
    fail(ErrorKind::Domain, "cannot merge datasets normalized differently");
  std::vector<std::uint32_t> remap;
  for (const auto& s : part.subjects) {
    auto it = std::find(into.subjects.begin(), into.subjects.end(), s);
    if (it == into.subjects.end()) {
      into.subjects.push_back(s);
      it = into.subjects.end() - 1;
    }
    remap.push_back(static_cast<std::uint32_t>(it - into.subjects.begin()));
  }
  into.windows.insert(into.windows.end(), part.windows.begin(), part.windows.end());
  into.labels.insert(into.labels.end(), part.labels.begin(), part.labels.end());
  into.session_ids.insert(into.session_ids.end(), part.session_ids.begin(), part.session_ids.end());
  for (auto s : part.subject_index) into.subject_index.push_back(remap.at(s));
}

void write_dataset(const std::filesystem::path& path, const WindowedDataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  io::BinaryWriter w(out);
  w.put_bytes(std::string_view(kDatasetMagic, sizeof kDatasetMagic));
  w.put(kDatasetVersion);
  w.put(static_cast<std::uint64_t>(ds.size()));
  w.put(static_cast<std::uint32_t>(ds.window_size));
  w.put(static_cast<std::uint32_t>(ds.channels));
  w.put_string(subset_name(ds.subset));
  w.put(static_cast<std::uint32_t>(ds.subjects.size()));
  for (const auto& s : ds.subjects) w.put_string(s);
  w.put_array<float>(ds.windows);
  w.put_array<std::int32_t>(ds.labels);
  w.put_array<std::int32_t>(ds.session_ids);
  w.put_array<std::uint32_t>(ds.subject_index);
  w.put(static_cast<std::uint32_t>(ds.stats.channels()));
  w.put_array<double>(ds.stats.mean);
  w.put_array<double>(ds.stats.stddev);
  w.put_array<std::uint8_t>(ds.stats.constant);
  if (!w.ok()) fail(ErrorKind::Io, "short write to " + path.string());
}

WindowedDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  io::BinaryReader r(in, path.string());
  if (r.get_bytes(sizeof kDatasetMagic) != std::string_view(kDatasetMagic, sizeof kDatasetMagic))
    fail(ErrorKind::Format, path.string() + ": not a windowed dataset (bad magic)");
  if (const auto v = r.get<std::uint32_t>(); v != kDatasetVersion)
    fail(ErrorKind::Format, path.string() + ": unsupported dataset version " + std::to_string(v));

  WindowedDataset ds;
  const auto n = r.get<std::uint64_t>();
  ds.window_size = r.get<std::uint32_t>();
  ds.channels = r.get<std::uint32_t>();
  ds.subset = parse_subset(r.get_string());
  if (ds.channels != canonical_layout().subset(ds.subset).count())
    fail(ErrorKind::Format, path.string() + ": channel count does not match subset");
  const auto subjects = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < subjects; ++i) ds.subjects.push_back(r.get_string());
  ds.windows = r.get_array<float>(n * ds.window_size * ds.channels);
  ds.labels = r.get_array<std::int32_t>(n);
  ds.session_ids = r.get_array<std::int32_t>(n);
  ds.subject_index = r.get_array<std::uint32_t>(n);
  const auto sc = r.get<std::uint32_t>();
  if (sc != ds.channels) fail(ErrorKind::Format, path.string() + ": stats block size mismatch");
  ds.stats.mean = r.get_array<double>(sc);
  ds.stats.stddev = r.get_array<double>(sc);
  ds.stats.constant = r.get_array<std::uint8_t>(sc);
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_activity(ds.labels[i])) fail(ErrorKind::Format, path.string() + ": bad window label");
    if (ds.subject_index[i] >= ds.subjects.size())
      fail(ErrorKind::Format, path.string() + ": bad subject index");
  }
  return ds;
}

}  // namespace har
