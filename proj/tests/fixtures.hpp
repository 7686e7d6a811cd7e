// Small in-memory datasets for tests.
#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "har/sensor_domain.hpp"
#include "har/windowing.hpp"

namespace fixtures {

/// Random windows whose label shows up as an offset on one channel per class.
/// Subjects are S01..., sessions 1..sessions; labels cycle through `classes`.
inline har::WindowedDataset toy_dataset(har::Subset subset, std::size_t subjects, std::size_t sessions,
                                        std::size_t per_session, std::uint64_t seed,
                                        int classes = har::kActivityCount, double signal = 3.0) {
  har::WindowedDataset ds;
  ds.subset = subset;
  ds.channels = har::canonical_layout().subset(subset).count();
  ds.window_size = har::kDefaultWindowSize;
  ds.stats = har::NormalizationStats::identity(ds.channels);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t s = 0; s < subjects; ++s) {
    char name[8];
    std::snprintf(name, sizeof name, "S%02zu", s + 1);
    ds.subjects.emplace_back(name);
    for (std::size_t session = 1; session <= sessions; ++session)
      for (std::size_t i = 0; i < per_session; ++i) {
        const int label = static_cast<int>((i + s + session) % static_cast<std::size_t>(classes)) + 1;
        const std::size_t hot = static_cast<std::size_t>(label - 1) * 7 % ds.channels;
        for (std::size_t t = 0; t < ds.window_size; ++t)
          for (std::size_t c = 0; c < ds.channels; ++c)
            ds.windows.push_back(static_cast<float>(noise(rng) + 10.0 + (c == hot ? signal : 0.0)));
        ds.labels.push_back(label);
        ds.session_ids.push_back(static_cast<int>(session));
        ds.subject_index.push_back(static_cast<std::uint32_t>(s));
      }
  }
  return ds;
}

}  // namespace fixtures
