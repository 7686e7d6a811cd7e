#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "har/ingest.hpp"
#include "har/windowing.hpp"

namespace har {

struct IngestOptions {
  AlignOptions align;
  Subset subset = Subset::All;
  std::size_t window_size = kDefaultWindowSize;
  std::size_t window_step = kDefaultWindowStep;
  std::size_t jobs = 1;
};

struct SessionSummary {
  std::string subject_id;
  int session_id = 0;
  std::size_t frames = 0;       // aligned grid
  std::size_t kept_frames = 0;  // after NULL removal
  std::size_t segments = 0;
  std::size_t windows = 0;
};

struct IngestResult {
  WindowedDataset dataset;  // raw values, identity stats
  std::vector<SessionSummary> sessions;
};

/// Session directories `<corpus>/<subject>/session_<k>`, ordered by subject
/// name and then by k. Throws ErrorKind::Io if there are none.
std::vector<std::filesystem::path> list_sessions(const std::filesystem::path& corpus);

/// Align, strip NULL and window one recording.
SessionSummary window_recording(const SessionRecording& rec, const IngestOptions& options,
                                WindowedDataset& into);

/// Parses, aligns, strips and windows every session. Sessions are processed
/// `jobs` at a time and appended in listing order.
IngestResult ingest_corpus(const std::filesystem::path& corpus, const IngestOptions& options);

std::string format_ingest_summary(std::span<const SessionSummary> sessions);

}  // namespace har
