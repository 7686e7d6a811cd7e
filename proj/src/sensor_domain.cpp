#include "har/sensor_domain.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "har/errors.hpp"

namespace har {
namespace {

constexpr std::array<SensorSpec, 6> kSensors = {{
    {SensorId::AS7341, "AS7341", 10, 3.0, AcquisitionGroup::Slow},
    {SensorId::CCS811, "CCS811", 2, 3.0, AcquisitionGroup::Slow},
    {SensorId::LPS22HB, "LPS22HB", 1, 12.0, AcquisitionGroup::Fast},
    {SensorId::LSM9DS1, "LSM9DS1", 9, 12.0, AcquisitionGroup::Fast},
    {SensorId::VL53L0X, "VL53L0X", 1, 12.0, AcquisitionGroup::Fast},
    {SensorId::MLX90640, "MLX90640", 768, 3.0, AcquisitionGroup::Slow},
}};

constexpr std::array<std::string_view, 14> kActivityNames = {
    "sitting down",
    "standing up",
    "walking",
    "opening microwave oven",
    "opening freezer",
    "opening door",
    "boiling water",
    "washing hand",
    "cutting food",
    "drinking hot tea",
    "drinking hot coffee",
    "drinking milk",
    "drinking nature water",
    "drinking carbonated water",
};

std::vector<ChannelDescriptor> build_channels() {
  std::vector<ChannelDescriptor> out;
  out.reserve(kChannelCount);
  static constexpr std::array<std::string_view, 10> optical = {
      "F1_415nm", "F2_445nm", "F3_480nm", "F4_515nm", "F5_555nm",
      "F6_590nm", "F7_630nm", "F8_680nm", "CLEAR",    "NIR"};
  for (std::size_t i = 0; i < optical.size(); ++i)
    out.push_back({SensorId::AS7341, i, std::string(optical[i]), "counts"});
  out.push_back({SensorId::CCS811, 0, "eCO2", "ppm"});
  out.push_back({SensorId::CCS811, 1, "TVOC", "ppb"});
  out.push_back({SensorId::LPS22HB, 0, "pressure", "hPa"});
  static constexpr std::array<std::string_view, 9> imu = {
      "acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z", "mag_x", "mag_y", "mag_z"};
  static constexpr std::array<std::string_view, 3> imu_units = {"g", "dps", "gauss"};
  for (std::size_t i = 0; i < imu.size(); ++i)
    out.push_back({SensorId::LSM9DS1, i, std::string(imu[i]), std::string(imu_units[i / 3])});
  out.push_back({SensorId::VL53L0X, 0, "distance", "mm"});
  for (std::size_t r = 0; r < kThermalRows; ++r) {
    for (std::size_t c = 0; c < kThermalCols; ++c) {
      out.push_back({SensorId::MLX90640, r * kThermalCols + c,
                     "ir_r" + std::to_string(r) + "_c" + std::to_string(c), "degC"});
    }
  }
  return out;
}

SubsetMask make_mask(Subset subset, std::span<const ChannelDescriptor> channels) {
  SubsetMask m{subset, std::vector<bool>(channels.size(), false), {}};
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const auto& ch = channels[i];
    const bool thermal = ch.sensor == SensorId::MLX90640;
    bool keep = false;
    switch (subset) {
      case Subset::All: keep = true; break;
      case Subset::ThermalOnly: keep = thermal; break;
      case Subset::NoThermal: keep = !thermal; break;
      case Subset::NoThermalNoAccGyro:
        keep = !thermal && !(ch.sensor == SensorId::LSM9DS1 && ch.sub_index < 6);
        break;
    }
    if (keep) {
      m.mask[i] = true;
      m.indices.push_back(i);
    }
  }
  return m;
}

}  // namespace

std::span<const SensorSpec> sensor_specs() { return kSensors; }

const SensorSpec& sensor_spec(SensorId id) {
  for (const auto& s : kSensors)
    if (s.id == id) return s;
  fail(ErrorKind::Domain, "unknown sensor id");
}

std::string_view sensor_name(SensorId id) { return sensor_spec(id).name; }

SensorId parse_sensor(std::string_view name) {
  for (const auto& s : kSensors)
    if (s.name == name) return s.id;
  fail(ErrorKind::Domain, "unknown sensor '" + std::string(name) + "'");
}

std::string_view subset_name(Subset subset) {
  switch (subset) {
    case Subset::All: return "ALL";
    case Subset::ThermalOnly: return "THERMAL_ONLY";
    case Subset::NoThermal: return "NO_THERMAL";
    case Subset::NoThermalNoAccGyro: return "NO_THERMAL_NO_ACC_GYRO";
  }
  return "?";
}

std::string_view subset_flag(Subset subset) {
  switch (subset) {
    case Subset::All: return "all";
    case Subset::ThermalOnly: return "thermal";
    case Subset::NoThermal: return "no-thermal";
    case Subset::NoThermalNoAccGyro: return "no-thermal-no-accgyro";
  }
  return "?";
}

Subset parse_subset(std::string_view name) {
  for (Subset s : kAllSubsets)
    if (name == subset_name(s) || name == subset_flag(s)) return s;
  fail(ErrorKind::Domain, "unknown channel subset '" + std::string(name) + "'");
}

ChannelLayout::ChannelLayout(std::vector<ChannelDescriptor> channels)
    : channels_(std::move(channels)),
      subsets_{make_mask(Subset::All, channels_), make_mask(Subset::ThermalOnly, channels_),
               make_mask(Subset::NoThermal, channels_),
               make_mask(Subset::NoThermalNoAccGyro, channels_)} {}

const SubsetMask& ChannelLayout::subset(Subset subset) const {
  return subsets_[static_cast<std::size_t>(subset)];
}

const SubsetMask& ChannelLayout::subset(std::string_view name) const {
  return subset(parse_subset(name));
}

std::vector<std::size_t> ChannelLayout::group_indices(AcquisitionGroup group) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < channels_.size(); ++i)
    if (sensor_spec(channels_[i].sensor).group == group) out.push_back(i);
  return out;
}

std::string ChannelLayout::to_text() const {
  std::string out;
  out.reserve(channels_.size() * 32);
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    const auto& ch = channels_[i];
    out += std::to_string(i);
    out += ',';
    out += sensor_name(ch.sensor);
    out += ',';
    out += std::to_string(ch.sub_index);
    out += ',';
    out += ch.name;
    out += ',';
    out += ch.unit;
    out += '\n';
  }
  return out;
}

ChannelLayout ChannelLayout::from_text(std::string_view text) {
  std::vector<ChannelDescriptor> channels;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    std::array<std::string_view, 5> fields;
    std::size_t n = 0;
    while (n < fields.size()) {
      const auto comma = line.find(',');
      fields[n++] = line.substr(0, comma);
      if (comma == std::string_view::npos) {
        line = {};
        break;
      }
      line = line.substr(comma + 1);
    }
    if (n != fields.size() || !line.empty())
      fail(ErrorKind::Parse, "layout line " + std::to_string(line_no) + ": expected 5 fields");

    auto to_index = [&](std::string_view s) {
      std::size_t v = 0;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size())
        fail(ErrorKind::Parse, "layout line " + std::to_string(line_no) + ": bad integer");
      return v;
    };
    if (to_index(fields[0]) != channels.size())
      fail(ErrorKind::Parse, "layout line " + std::to_string(line_no) + ": index out of sequence");
    channels.push_back({parse_sensor(fields[1]), to_index(fields[2]), std::string(fields[3]),
                        std::string(fields[4])});
  }
  return ChannelLayout(std::move(channels));
}

const ChannelLayout& canonical_layout() {
  static const ChannelLayout layout(build_channels());
  return layout;
}

std::string_view activity_name(int id) {
  if (!is_activity(id))
    fail(ErrorKind::Domain, "activity id " + std::to_string(id) + " outside 1..14");
  return kActivityNames[static_cast<std::size_t>(id - 1)];
}

bool is_activity(int id) { return id >= 1 && id <= kActivityCount; }

std::vector<std::string> slow_channel_names() {
  const auto& layout = canonical_layout();
  std::vector<std::string> names;
  for (auto i : layout.group_indices(AcquisitionGroup::Slow)) names.push_back(layout.channel(i).name);
  return names;
}

std::vector<std::string> fast_channel_names() {
  const auto& layout = canonical_layout();
  std::vector<std::string> names;
  for (auto i : layout.group_indices(AcquisitionGroup::Fast)) names.push_back(layout.channel(i).name);
  return names;
}

}  // namespace har
