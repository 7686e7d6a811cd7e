#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "har/sensor_domain.hpp"

namespace har::synth {

/// Sinusoid on one IMU axis: 0..2 acc x/y/z (g), 3..5 gyro x/y/z (dps).
struct Oscillation {
  int axis = 0;
  double amplitude = 0.0;
  double frequency_hz = 0.0;
};

enum class Gesture {
  Still,  // posture and oscillations only
  Sip,    // repeated raise-hold-lower cycles of a cup
  Pull,   // one short pull on a handle near the start
};

struct ImuPattern {
  double pitch_start_deg = 0.0;  // badge tilt, ramped to pitch_end over the activity
  double pitch_end_deg = 0.0;
  double roll_deg = 0.0;
  double heading_deg = 0.0;  // where in the kitchen the subject faces
  double heading_sweep_deg = 0.0;  // slow heading swing while moving around
  std::vector<Oscillation> oscillations;
  Gesture gesture = Gesture::Still;
  double noise_acc_g = 0.01;
  double noise_gyro_dps = 0.8;
};

struct ThermalPattern {
  bool hand_blob = false;
  double blob_row = 12.0, blob_col = 16.0;  // image coordinates
  double blob_drift_px = 0.0;               // amplitude of the blob's circular drift
  double blob_temp_c = 31.0;
  double hot_object_c = 0.0;  // 0: none; the cup for hot drinks, the kettle for boiling
  double hot_row = 0.0, hot_col = 0.0;
  bool hot_object_heats = false;  // ramps from ambient to peak over the activity
  double cold_delta_c = 0.0;      // cooling of the lower-right region (open freezer)
};

struct OpticalPattern {
  /// Reflectance-like coefficients of the cup contents, seen while sipping.
  std::array<double, 10> beverage{};
  bool has_beverage = false;
  double light_gain = 0.0;  // appliance lamp on top of room light
};

struct GasPattern {
  double co2_spike_ppm = 0.0;  // per sip, decaying
  double tvoc_spike_ppb = 0.0;
};

struct DistancePattern {
  double baseline_mm = 900.0;
  double near_mm = 900.0;  // reached while a cup is raised or a door is reached for
};

struct ActivitySignature {
  int id = 0;
  double min_seconds = 0.0;
  double max_seconds = 0.0;
  int occurrences = 1;  // per session
  ImuPattern imu;
  ThermalPattern thermal;
  OpticalPattern optical;
  GasPattern gas;
  DistancePattern distance;
  double pressure_delta_hpa = 0.0;  // change over the activity (height change)
};

/// Hand-designed signatures of activities 1..14, in id order.
const std::vector<ActivitySignature>& default_signatures();

struct ScenarioConfig {
  std::size_t subjects = 10;
  std::size_t sessions = 5;
  double noise_scale = 1.0;
  std::uint64_t seed = 7;
  double hot_drink_peak_c = 52.0;
  double min_gap_seconds = 2.0;  // NULL gaps between activities
  double max_gap_seconds = 5.0;
  std::vector<ActivitySignature> signatures = default_signatures();
};

/// Throws ErrorKind::Config on invalid settings.
void validate(const ScenarioConfig& config);

/// "S01".."S10"
std::string subject_name(std::size_t subject);

/// Session `session` (1-based) of subject `subject` (1-based). Streams start
/// at t = 0 with exactly 3 Hz and 12 Hz spacing; the result depends only on
/// (config, subject, session).
SessionRecording generate_session(const ScenarioConfig& config, std::size_t subject,
                                  std::size_t session);

struct ManifestEntry {
  std::string path;  // relative to the corpus root, '/' separated
  std::uint64_t bytes = 0;
  std::uint32_t crc32 = 0;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::uint64_t seed = 0;
  std::size_t subjects = 0;
  std::size_t sessions = 0;
  std::vector<ManifestEntry> entries;

  /// "har-corpus 1" header, key lines, then "file <crc32 hex> <bytes> <path>".
  std::string to_text() const;
  static Manifest parse(const std::string& text);
};

/// Writes <dir>/S01/session_1/{slow,fast,labels}.csv ... and <dir>/manifest.txt.
/// `jobs` sessions are generated concurrently; output does not depend on it.
Manifest generate_corpus(const ScenarioConfig& config, const std::filesystem::path& dir,
                         std::size_t jobs = 1);

std::uint32_t file_crc32(const std::filesystem::path& path);

/// Paths whose size or checksum differ from the manifest in `dir`.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

}  // namespace har::synth
