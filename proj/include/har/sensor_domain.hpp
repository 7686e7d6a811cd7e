#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace har {

enum class SensorId { AS7341, CCS811, LPS22HB, LSM9DS1, VL53L0X, MLX90640 };

/// The two microcontrollers sample at different rates.
enum class AcquisitionGroup { Slow, Fast };

struct SensorSpec {
  SensorId id;
  std::string_view name;
  std::size_t channel_count;
  double native_rate_hz;
  AcquisitionGroup group;
};

inline constexpr std::size_t kChannelCount = 791;
inline constexpr std::size_t kNonThermalCount = 23;
inline constexpr std::size_t kThermalOffset = 23;
inline constexpr std::size_t kThermalRows = 24;
inline constexpr std::size_t kThermalCols = 32;
inline constexpr std::size_t kThermalCount = kThermalRows * kThermalCols;
inline constexpr std::size_t kSlowChannelCount = 780;
inline constexpr std::size_t kFastChannelCount = 11;

// Canonical positions of individual channels.
inline constexpr std::size_t kOpticalOffset = 0;    // AS7341, 10 channels
inline constexpr std::size_t kGasOffset = 10;       // CCS811: eCO2, TVOC
inline constexpr std::size_t kPressureIndex = 12;   // LPS22HB
inline constexpr std::size_t kImuOffset = 13;       // LSM9DS1: accel xyz, gyro xyz, mag xyz
inline constexpr std::size_t kDistanceIndex = 22;   // VL53L0X

/// The six sensors in canonical channel order.
std::span<const SensorSpec> sensor_specs();
const SensorSpec& sensor_spec(SensorId id);
std::string_view sensor_name(SensorId id);
SensorId parse_sensor(std::string_view name);

// ---------------------------------------------------------------------------
// Channel subsets used by the ablation study.

enum class Subset { All, ThermalOnly, NoThermal, NoThermalNoAccGyro };

inline constexpr std::array<Subset, 4> kAllSubsets = {
    Subset::All, Subset::ThermalOnly, Subset::NoThermal, Subset::NoThermalNoAccGyro};

/// "ALL", "THERMAL_ONLY", "NO_THERMAL", "NO_THERMAL_NO_ACC_GYRO".
std::string_view subset_name(Subset subset);
/// "all", "thermal", "no-thermal", "no-thermal-no-accgyro".
std::string_view subset_flag(Subset subset);
/// Accepts either spelling; throws ErrorKind::Domain otherwise.
Subset parse_subset(std::string_view name);

struct ChannelDescriptor {
  SensorId sensor;
  std::size_t sub_index;
  std::string name;
  std::string unit;

  bool operator==(const ChannelDescriptor&) const = default;
};

struct SubsetMask {
  Subset subset;
  std::vector<bool> mask;
  std::vector<std::size_t> indices;  // ascending canonical channel indices

  std::size_t count() const { return indices.size(); }
};

/// Fixed ordering of the 791 channels:
///   [AS7341 0-9][CCS811 10-11][LPS22HB 12][LSM9DS1 13-21][VL53L0X 22][MLX90640 23-790]
/// IMU channels are accel x/y/z, gyro x/y/z, mag x/y/z. Thermal pixels are
/// row-major over 24 rows by 32 columns.
class ChannelLayout {
 public:
  explicit ChannelLayout(std::vector<ChannelDescriptor> channels);

  std::size_t size() const { return channels_.size(); }
  const ChannelDescriptor& channel(std::size_t index) const { return channels_.at(index); }
  std::span<const ChannelDescriptor> channels() const { return channels_; }

  const SubsetMask& subset(Subset subset) const;
  const SubsetMask& subset(std::string_view name) const;

  /// Canonical indices of the channels acquired by the given group, in canonical order.
  std::vector<std::size_t> group_indices(AcquisitionGroup group) const;

  /// One line per channel: `index,sensor,sub_index,name,unit`.
  std::string to_text() const;
  static ChannelLayout from_text(std::string_view text);

  bool operator==(const ChannelLayout& other) const { return channels_ == other.channels_; }

 private:
  std::vector<ChannelDescriptor> channels_;
  std::array<SubsetMask, 4> subsets_;
};

/// The shared immutable canonical layout.
const ChannelLayout& canonical_layout();

/// Linear index of a thermal pixel within the full 791-channel frame.
constexpr std::size_t thermal_channel(std::size_t row, std::size_t col) {
  return kThermalOffset + row * kThermalCols + col;
}

// ---------------------------------------------------------------------------
// Activities

inline constexpr int kActivityCount = 14;
/// Label value for frames that belong to no activity. Only exists before windowing.
inline constexpr int kNullLabel = 0;

/// Name of activity 1..14; throws ErrorKind::Domain for anything else.
std::string_view activity_name(int id);
bool is_activity(int id);

// ---------------------------------------------------------------------------
// Raw recordings

/// A uniformly-shaped stream of timestamped samples, stored row-major.
struct TimedStream {
  std::vector<std::string> channel_names;
  std::vector<double> times;   // seconds from session start, strictly increasing
  std::vector<double> values;  // times.size() x width()

  std::size_t width() const { return channel_names.size(); }
  std::size_t samples() const { return times.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * width(), width());
  }
};

struct LabelEvent {
  double time;
  int label;  // kNullLabel or 1..14

  bool operator==(const LabelEvent&) const = default;
};

/// One subject-session as logged by the badge.
struct SessionRecording {
  std::string subject_id;
  int session_id = 0;
  TimedStream slow;  // thermal + gas + optical at ~3 Hz
  TimedStream fast;  // pressure + IMU + distance at ~12 Hz
  std::vector<LabelEvent> labels;
};

/// Column names of the slow and fast stream, in log order.
std::vector<std::string> slow_channel_names();
std::vector<std::string> fast_channel_names();

}  // namespace har
