#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "har/sensor_domain.hpp"

namespace har {

inline constexpr double kDefaultFrameRateHz = 6.0;

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
};

/// The synchronized frame series of one session.
///
/// Frame k sits at `origin + grid_index[k] / frame_rate_hz` on the session
/// clock. Before NULL removal `grid_index[k] == k`. Values are stored as
/// 32-bit floats in canonical channel order.
struct AlignedFrameSeries {
  std::string subject_id;
  int session_id = 0;
  double frame_rate_hz = kDefaultFrameRateHz;
  double origin = 0.0;
  std::size_t channels = kChannelCount;
  std::vector<float> values;
  std::vector<int> labels;
  std::vector<std::size_t> grid_index;
  /// First frame of each contiguous run; a run ends where the next begins.
  std::vector<std::size_t> segment_starts;

  std::size_t frames() const { return labels.size(); }
  std::span<const float> frame(std::size_t k) const {
    return std::span<const float>(values).subspan(k * channels, channels);
  }
  double time(std::size_t k) const {
    return origin + static_cast<double>(grid_index[k]) / frame_rate_hz;
  }
  /// Half-open [begin, end) frame ranges of the contiguous segments.
  std::vector<std::pair<std::size_t, std::size_t>> segments() const;
};

struct AlignOptions {
  double frame_rate_hz = kDefaultFrameRateHz;
};

// ---------------------------------------------------------------------------
// Session logs: slow.csv, fast.csv, labels.csv in one directory.

/// Parses the three log files in `dir`. Subject and session ids come from the
/// path: `<subject>/session_<k>`.
SessionRecording parse_session(const std::filesystem::path& dir);

/// Parses already-loaded log text. `origin` names the source in diagnostics.
SessionRecording parse_session_text(std::string_view slow_csv, std::string_view fast_csv,
                                    std::string_view labels_csv, std::string subject_id,
                                    int session_id, const std::string& origin = "");

/// Formats a recording in the log format. Output is a pure function of the input.
std::string format_stream_csv(const TimedStream& stream);
std::string format_labels_csv(std::span<const LabelEvent> labels);

/// Writes slow.csv, fast.csv and labels.csv into `dir` (created if needed).
void write_session(const std::filesystem::path& dir, const SessionRecording& rec);

// ---------------------------------------------------------------------------
// Synchronization

/// Piecewise-linear interpolation of every channel at the query times.
/// Query times must be non-decreasing and inside [first, last] sample time.
Matrix resample_linear(const TimedStream& stream, std::span<const double> query_times);

/// Resamples both streams onto a common grid over the intersection of their
/// time supports and attaches zero-order-hold labels.
AlignedFrameSeries align_session(const SessionRecording& rec, const AlignOptions& options = {});

/// Drops NULL-labelled frames and records where the gaps were.
AlignedFrameSeries strip_null(const AlignedFrameSeries& series);

}  // namespace har
