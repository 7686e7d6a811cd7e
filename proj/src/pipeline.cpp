#include "har/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "har/errors.hpp"

namespace har {

namespace {

std::optional<int> session_number(const std::string& name) {
  constexpr std::string_view prefix = "session_";
  if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) return {};
  int k = 0;
  const char* first = name.data() + prefix.size();
  const char* last = name.data() + name.size();
  const auto [p, ec] = std::from_chars(first, last, k);
  if (ec != std::errc() || p != last) return {};
  return k;
}

struct Partial {
  WindowedDataset windows;
  SessionSummary summary;
};

}  // namespace

std::vector<std::filesystem::path> list_sessions(const std::filesystem::path& corpus) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(corpus)) fail(ErrorKind::Io, "corpus directory not found: " + corpus.string());
  std::vector<fs::path> subjects;
  for (const auto& e : fs::directory_iterator(corpus))
    if (e.is_directory()) subjects.push_back(e.path());
  std::sort(subjects.begin(), subjects.end());
  std::vector<fs::path> out;
  for (const auto& subject : subjects) {
    std::vector<std::pair<int, fs::path>> sessions;
    for (const auto& e : fs::directory_iterator(subject))
      if (e.is_directory())
        if (auto k = session_number(e.path().filename().string())) sessions.emplace_back(*k, e.path());
    std::sort(sessions.begin(), sessions.end());
    for (auto& s : sessions) out.push_back(std::move(s.second));
  }
  if (out.empty()) fail(ErrorKind::Io, "no session directories under " + corpus.string());
  return out;
}

SessionSummary window_recording(const SessionRecording& rec, const IngestOptions& options,
                                WindowedDataset& into) {
  const auto aligned = align_session(rec, options.align);
  const auto kept = strip_null(aligned);
  auto part = make_windows(kept, NormalizationStats{}, options.subset, options.window_size,
                           options.window_step);
  SessionSummary s{rec.subject_id, rec.session_id, aligned.frames(), kept.frames(),
                   kept.segment_starts.size(), part.size()};
  append_windows(into, part);
  return s;
}

IngestResult ingest_corpus(const std::filesystem::path& corpus, const IngestOptions& options) {
  const auto dirs = list_sessions(corpus);
  std::vector<std::optional<Partial>> parts(dirs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= dirs.size()) return;
      try {
        Partial p;
        p.summary = window_recording(parse_session(dirs[i]), options, p.windows);
        parts[i] = std::move(p);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, dirs.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  IngestResult result;
  std::size_t floats = 0;
  for (const auto& p : parts) floats += p->windows.windows.size();
  result.dataset.windows.reserve(floats);
  for (auto& p : parts) {
    append_windows(result.dataset, p->windows);
    result.sessions.push_back(p->summary);
    p.reset();
  }
  return result;
}

std::string format_ingest_summary(std::span<const SessionSummary> sessions) {
  std::ostringstream os;
  os << "subject,session,frames,kept_frames,segments,windows\n";
  for (const auto& s : sessions)
    os << s.subject_id << ',' << s.session_id << ',' << s.frames << ',' << s.kept_frames << ','
       << s.segments << ',' << s.windows << '\n';
  return os.str();
}

}  // namespace har
