#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "har/ingest.hpp"
#include "har/sensor_domain.hpp"

namespace har {

inline constexpr std::size_t kDefaultWindowSize = 20;
inline constexpr std::size_t kDefaultWindowStep = 10;
/// Channels whose standard deviation falls below this are only centred.
inline constexpr double kConstantStdThreshold = 1e-8;

/// Per-channel z-score parameters (population standard deviation).
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<std::uint8_t> constant;

  /// Mean 0, std 1: leaves values untouched.
  static NormalizationStats identity(std::size_t channels);

  std::size_t channels() const { return mean.size(); }
  bool is_identity() const;

  double apply(std::size_t channel, double x) const {
    const double centred = x - mean[channel];
    return constant[channel] ? centred : centred / stddev[channel];
  }

  /// Restriction to the given channels, in the given order.
  NormalizationStats select(std::span<const std::size_t> channels) const;

  bool operator==(const NormalizationStats&) const = default;
};

/// Fits stats over every frame of every series.
NormalizationStats fit_normalization(std::span<const AlignedFrameSeries> series_set);

/// Fixed-size labelled windows.
///
/// `windows` holds N x window_size x channels floats, time-major within a
/// window. `stats` records the normalization already applied to them.
struct WindowedDataset {
  std::size_t window_size = kDefaultWindowSize;
  std::size_t channels = 0;
  Subset subset = Subset::All;
  std::vector<float> windows;
  std::vector<int> labels;
  std::vector<int> session_ids;
  std::vector<std::uint32_t> subject_index;
  std::vector<std::string> subjects;
  NormalizationStats stats;

  std::size_t size() const { return labels.size(); }
  std::size_t window_floats() const { return window_size * channels; }
  std::span<const float> window(std::size_t i) const {
    return std::span<const float>(windows).subspan(i * window_floats(), window_floats());
  }
  std::span<float> window(std::size_t i) {
    return std::span<float>(windows).subspan(i * window_floats(), window_floats());
  }
  const std::string& subject_of(std::size_t i) const { return subjects[subject_index[i]]; }
};

/// Number of windows a segment of `length` frames yields.
std::size_t window_count(std::size_t length, std::size_t size, std::size_t step);

/// Cuts every contiguous segment of `series` into windows. Frames are
/// normalized with `stats` (pass an empty stats object for raw values) and
/// then restricted to `subset`.
WindowedDataset make_windows(const AlignedFrameSeries& series, const NormalizationStats& stats,
                             Subset subset, std::size_t size = kDefaultWindowSize,
                             std::size_t step = kDefaultWindowStep);

/// Label of a window: majority vote, ties go to the last frame's label when
/// it is among the tied labels, otherwise to the smallest tied id.
int window_label(std::span<const int> frame_labels);

/// Appends `part` to `into`; both must share window shape, subset and stats.
void append_windows(WindowedDataset& into, const WindowedDataset& part);

/// Fits stats over all frames of the selected windows (overlapping frames
/// count once per window containing them).
NormalizationStats fit_normalization(const WindowedDataset& dataset,
                                     std::span<const std::size_t> window_indices);

/// Binary container; layout documented in docs/formats.md.
void write_dataset(const std::filesystem::path& path, const WindowedDataset& dataset);
WindowedDataset read_dataset(const std::filesystem::path& path);

}  // namespace har
