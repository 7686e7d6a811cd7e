#include "har/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <boost/crc.hpp>

#include "har/errors.hpp"
#include "har/ingest.hpp"

namespace har::synth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

// Cup positions in the thermal image: resting on the table and raised to the mouth.
constexpr double kCupTableRow = 20.0, kCupTableCol = 16.0;
constexpr double kCupMouthRow = 7.0, kCupMouthCol = 16.0;

// Room light seen by the spectral sensor, counts per channel.
constexpr std::array<double, 10> kRoomLight = {800, 1200, 1500, 1700, 1900,
                                               2100, 1800, 1400, 6000, 900};
constexpr std::array<double, 10> kLampLight = {300, 700, 1100, 1500, 1700,
                                               1600, 1300, 900, 4500, 400};
constexpr double kRoomReflectance = 0.35;

ActivitySignature base(int id, double lo, double hi, int occurrences = 1) {
  ActivitySignature s;
  s.id = id;
  s.min_seconds = lo;
  s.max_seconds = hi;
  s.occurrences = occurrences;
  return s;
}

ActivitySignature drink(int id, std::array<double, 10> beverage) {
  auto s = base(id, 15, 30);
  s.imu.heading_deg = 0;
  s.imu.pitch_start_deg = s.imu.pitch_end_deg = 4;
  s.imu.gesture = Gesture::Sip;
  s.thermal.hand_blob = true;
  s.thermal.blob_row = kCupTableRow;
  s.thermal.blob_col = kCupTableCol;
  s.optical.beverage = beverage;
  s.optical.has_beverage = true;
  s.distance.baseline_mm = 850;
  s.distance.near_mm = 140;
  return s;
}

std::vector<ActivitySignature> make_defaults() {
  std::vector<ActivitySignature> v;

  auto sit = base(1, 6, 10, 2);
  sit.imu.pitch_start_deg = 0;
  sit.imu.pitch_end_deg = 30;
  sit.imu.oscillations = {{2, 0.04, 0.8}};
  sit.pressure_delta_hpa = 0.06;
  v.push_back(sit);

  auto stand = base(2, 6, 10, 2);
  stand.imu.pitch_start_deg = 30;
  stand.imu.pitch_end_deg = 0;
  stand.imu.oscillations = {{2, 0.04, 0.8}};
  stand.pressure_delta_hpa = -0.06;
  v.push_back(stand);

  auto walk = base(3, 30, 60, 2);
  walk.imu.pitch_start_deg = walk.imu.pitch_end_deg = 5;
  walk.imu.heading_deg = 150;
  walk.imu.heading_sweep_deg = 90;
  walk.imu.oscillations = {{2, 0.22, 1.8}, {0, 0.08, 0.9}, {5, 12, 0.9}};
  walk.distance.baseline_mm = 1500;
  v.push_back(walk);

  auto microwave = base(4, 10, 20);
  microwave.imu.pitch_start_deg = microwave.imu.pitch_end_deg = 10;
  microwave.imu.heading_deg = 240;
  microwave.imu.gesture = Gesture::Pull;
  microwave.thermal.hand_blob = true;
  microwave.thermal.blob_row = 5;
  microwave.thermal.blob_col = 26;
  microwave.thermal.blob_drift_px = 1.5;
  microwave.optical.light_gain = 0.6;
  microwave.distance.baseline_mm = 420;
  microwave.distance.near_mm = 250;
  v.push_back(microwave);

  auto freezer = base(5, 10, 20);
  freezer.imu.pitch_start_deg = freezer.imu.pitch_end_deg = 25;
  freezer.imu.heading_deg = 200;
  freezer.imu.gesture = Gesture::Pull;
  freezer.thermal.hand_blob = true;
  freezer.thermal.blob_row = 19;
  freezer.thermal.blob_col = 26;
  freezer.thermal.blob_drift_px = 1.5;
  freezer.thermal.cold_delta_c = -6;
  freezer.optical.light_gain = 0.9;
  freezer.distance.baseline_mm = 450;
  freezer.distance.near_mm = 300;
  v.push_back(freezer);

  auto door = base(6, 8, 15);
  door.imu.pitch_start_deg = door.imu.pitch_end_deg = 5;
  door.imu.heading_deg = 300;
  door.imu.gesture = Gesture::Pull;
  door.imu.oscillations = {{2, 0.1, 1.7}};
  door.distance.baseline_mm = 600;
  door.distance.near_mm = 250;
  v.push_back(door);

  auto boil = base(7, 120, 200);
  boil.imu.pitch_start_deg = boil.imu.pitch_end_deg = 5;
  boil.imu.heading_deg = 60;
  boil.imu.oscillations = {{0, 0.02, 0.3}};
  boil.thermal.hot_object_c = 70;
  boil.thermal.hot_row = 8;
  boil.thermal.hot_col = 10;
  boil.thermal.hot_object_heats = true;
  boil.distance.baseline_mm = 700;
  v.push_back(boil);

  auto wash = base(8, 30, 50);
  wash.imu.pitch_start_deg = wash.imu.pitch_end_deg = 15;
  wash.imu.heading_deg = 120;
  wash.imu.oscillations = {{0, 0.06, 2.5}, {3, 18, 2.5}};
  wash.thermal.hand_blob = true;
  wash.thermal.blob_row = 14;
  wash.thermal.blob_col = 6;
  wash.thermal.blob_drift_px = 2;
  wash.thermal.blob_temp_c = 29;
  wash.distance.baseline_mm = 500;
  v.push_back(wash);

  auto cut = base(9, 60, 120);
  cut.imu.pitch_start_deg = cut.imu.pitch_end_deg = 20;
  cut.imu.heading_deg = 90;
  cut.imu.oscillations = {{2, 0.1, 2.2}, {4, 15, 2.2}};
  cut.thermal.hand_blob = true;
  cut.thermal.blob_row = 16;
  cut.thermal.blob_col = 16;
  cut.thermal.blob_drift_px = 1;
  cut.distance.baseline_mm = 450;
  v.push_back(cut);

  auto tea = drink(10, {0.10, 0.12, 0.16, 0.22, 0.30, 0.40, 0.50, 0.58, 0.35, 0.62});
  tea.thermal.hot_object_c = 1;  // replaced by the scenario's hot-drink peak
  tea.gas.tvoc_spike_ppb = 15;
  v.push_back(tea);

  auto coffee = drink(11, {0.05, 0.06, 0.07, 0.09, 0.12, 0.16, 0.22, 0.28, 0.15, 0.40});
  coffee.thermal.hot_object_c = 1;
  coffee.gas.tvoc_spike_ppb = 40;
  v.push_back(coffee);

  v.push_back(drink(12, {0.80, 0.82, 0.84, 0.85, 0.86, 0.86, 0.85, 0.84, 0.85, 0.80}));
  v.push_back(drink(13, {0.45, 0.46, 0.47, 0.47, 0.48, 0.48, 0.48, 0.47, 0.47, 0.40}));

  auto soda = drink(14, {0.45, 0.46, 0.47, 0.47, 0.48, 0.48, 0.48, 0.47, 0.47, 0.40});
  soda.gas.co2_spike_ppm = 120;
  v.push_back(soda);
  return v;
}

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  return mix(mix(mix(mix(seed) ^ a) ^ b) ^ c);
}

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

struct SubjectTraits {
  double amplitude;  // oscillation and gesture strength
  double frequency;
  double pitch_deg;
  double blob_temp_c;
};

struct SessionTraits {
  double thermal_offset_c;
  double light_gain;
  double pressure_hpa;
  double co2_ppm;
  double tvoc_ppb;
  double heading_deg;
  std::array<double, 3> hard_iron;
};

struct Occurrence {
  const ActivitySignature* sig;
  double start, end;
  double pitch_jitter_deg;
  double blob_dr, blob_dc;
  double sip_period, sip_phase;
  double drift_phase;
};

struct Gap {
  double start, end;
  double heading_deg;
};

struct GasEvent {
  double time;
  double co2, tvoc;
};

// Raised-cup level in [0, 1] during a sip cycle.
double sip_level(const Occurrence& o, double tau) {
  const double p = o.sip_period;
  double u = std::fmod(tau + o.sip_phase, p);
  const double rest = p - 4.0;
  if (u < rest) return 0.0;
  u -= rest;
  if (u < 1.0) return smoothstep(u);
  if (u < 3.0) return 1.0;
  return 1.0 - smoothstep(u - 3.0);
}

class SessionModel {
 public:
  SessionModel(const ScenarioConfig& cfg, std::size_t subject, std::size_t session);

  SessionRecording render();

 private:
  void schedule(std::mt19937_64& rng);
  const Occurrence* occurrence_at(double t) const;
  double pitch(const Occurrence* o, double t) const;
  void fast_row(double t, double* out);
  void slow_row(double t, double* out);

  const ScenarioConfig& cfg_;
  std::size_t subject_, session_;
  SubjectTraits subject_traits_{};
  SessionTraits session_traits_{};
  std::vector<Occurrence> occ_;
  std::vector<Gap> gaps_;
  std::vector<GasEvent> gas_events_;
  std::vector<double> fixed_pattern_;
  double end_ = 0.0;
  std::mt19937_64 noise_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
};

SessionModel::SessionModel(const ScenarioConfig& cfg, std::size_t subject, std::size_t session)
    : cfg_(cfg), subject_(subject), session_(session), noise_(derive(cfg.seed, subject, session, 1)) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::mt19937_64 subject_rng(derive(cfg.seed, subject, 0, 2));
  subject_traits_.amplitude = 0.8 + 0.4 * u01(subject_rng);
  subject_traits_.frequency = 0.92 + 0.16 * u01(subject_rng);
  subject_traits_.pitch_deg = 3.0 * n01(subject_rng);
  subject_traits_.blob_temp_c = 0.5 * n01(subject_rng);

  std::mt19937_64 rng(derive(cfg.seed, subject, session, 3));
  session_traits_.thermal_offset_c = 0.8 * n01(rng);
  session_traits_.light_gain = 0.85 + 0.3 * u01(rng);
  session_traits_.pressure_hpa = 1013.0 + 4.0 * n01(rng);
  session_traits_.co2_ppm = 420.0 + 100.0 * u01(rng);
  session_traits_.tvoc_ppb = 20.0 + 40.0 * u01(rng);
  session_traits_.heading_deg = 10.0 * n01(rng);
  for (auto& h : session_traits_.hard_iron) h = 0.02 * n01(rng);

  std::mt19937_64 device_rng(derive(cfg.seed, 0, 0, 4));
  fixed_pattern_.resize(kThermalCount);
  for (auto& f : fixed_pattern_) f = 0.15 * n01(device_rng);

  schedule(rng);
}

void SessionModel::schedule(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<const ActivitySignature*> order;
  for (const auto& s : cfg_.signatures)
    for (int k = 0; k < s.occurrences; ++k) order.push_back(&s);
  std::shuffle(order.begin(), order.end(), rng);

  auto ms = [](double t) { return std::round(t * 1000.0) / 1000.0; };
  auto gap_length = [&] {
    return cfg_.min_gap_seconds + (cfg_.max_gap_seconds - cfg_.min_gap_seconds) * u01(rng);
  };
  double t = 0.0;
  for (const auto* sig : order) {
    const double g = ms(t + gap_length());
    gaps_.push_back({t, g, 360.0 * u01(rng)});
    t = g;
    Occurrence o{};
    o.sig = sig;
    o.start = t;
    o.end = ms(t + sig->min_seconds + (sig->max_seconds - sig->min_seconds) * u01(rng));
    o.pitch_jitter_deg = 4.0 * (2.0 * u01(rng) - 1.0);
    o.blob_dr = 1.2 * (2.0 * u01(rng) - 1.0);
    o.blob_dc = 1.2 * (2.0 * u01(rng) - 1.0);
    o.sip_period = 4.5 + 2.0 * u01(rng);
    o.sip_phase = o.sip_period * u01(rng);
    o.drift_phase = 2.0 * kPi * u01(rng);
    if (sig->imu.gesture == Gesture::Sip &&
        (sig->gas.co2_spike_ppm > 0 || sig->gas.tvoc_spike_ppb > 0)) {
      // one release of gas at the start of every hold phase
      for (double tau = 0.0; tau < o.end - o.start; tau += 0.05) {
        if (sip_level(o, tau) >= 1.0 && (tau < 0.05 || sip_level(o, tau - 0.05) < 1.0)) {
          const double k = subject_traits_.amplitude * (0.8 + 0.4 * u01(rng));
          gas_events_.push_back({o.start + tau, sig->gas.co2_spike_ppm * k,
                                 sig->gas.tvoc_spike_ppb * k});
        }
      }
    }
    occ_.push_back(o);
    t = o.end;
  }
  const double g = ms(t + gap_length());
  gaps_.push_back({t, g, 360.0 * u01(rng)});
  end_ = g;
}

const Occurrence* SessionModel::occurrence_at(double t) const {
  auto it = std::upper_bound(occ_.begin(), occ_.end(), t,
                             [](double x, const Occurrence& o) { return x < o.start; });
  if (it == occ_.begin()) return nullptr;
  --it;
  return t < it->end ? &*it : nullptr;
}

double SessionModel::pitch(const Occurrence* o, double t) const {
  double p = subject_traits_.pitch_deg;
  if (!o) return p;
  const auto& imu = o->sig->imu;
  const double progress = (t - o->start) / (o->end - o->start);
  p += o->pitch_jitter_deg + imu.pitch_start_deg +
       (imu.pitch_end_deg - imu.pitch_start_deg) * smoothstep(progress);
  if (imu.gesture == Gesture::Sip) p += 20.0 * subject_traits_.amplitude * sip_level(*o, t - o->start);
  return p;
}

void SessionModel::fast_row(double t, double* out) {
  const double ns = cfg_.noise_scale;
  const Occurrence* o = occurrence_at(t);
  const double amp = subject_traits_.amplitude;
  const double fq = subject_traits_.frequency;
  const double tau = o ? t - o->start : 0.0;
  const double progress = o ? tau / (o->end - o->start) : 0.0;

  // pressure: weather baseline, slow drift, height change
  double pressure = session_traits_.pressure_hpa + 0.3 * std::sin(2.0 * kPi * t / 900.0);
  if (o) pressure += o->sig->pressure_delta_hpa * smoothstep(progress);

  const double th = pitch(o, t) * kDeg;
  double roll = o ? o->sig->imu.roll_deg * kDeg : 0.0;
  std::array<double, 6> imu = {-std::sin(th), std::cos(th) * std::sin(roll),
                               std::cos(th) * std::cos(roll), 0.0, 0.0, 0.0};
  constexpr double h = 1e-3;
  imu[4] = (pitch(o, t + h) - pitch(o, t - h)) / (2.0 * h);

  double heading = session_traits_.heading_deg;
  double distance = 900.0;
  if (o) {
    const auto& sig = *o->sig;
    for (const auto& osc : sig.imu.oscillations)
      imu[osc.axis] += amp * osc.amplitude * std::sin(2.0 * kPi * osc.frequency_hz * fq * tau + o->drift_phase);
    heading += sig.imu.heading_deg +
               sig.imu.heading_sweep_deg * std::sin(2.0 * kPi * 0.04 * tau + o->drift_phase);
    distance = sig.distance.baseline_mm;
    if (sig.imu.gesture == Gesture::Pull) {
      const double pulse = std::exp(-0.5 * std::pow((tau - 1.5) / 0.4, 2.0));
      imu[5] += amp * 45.0 * pulse;
      imu[0] -= amp * 0.15 * pulse;
      const double reach = smoothstep((tau - 0.5) / 0.5) * (1.0 - smoothstep((tau - 3.0) / 0.8));
      distance += (sig.distance.near_mm - sig.distance.baseline_mm) * reach;
    } else if (sig.imu.gesture == Gesture::Sip) {
      const double s = sip_level(*o, tau);
      distance += (sig.distance.near_mm - sig.distance.baseline_mm) * s;
      imu[3] += amp * 6.0 * std::sin(2.0 * kPi * 0.7 * tau) * s;
    }
  } else {
    for (const auto& g : gaps_)
      if (t >= g.start && t < g.end) heading += g.heading_deg;
  }
  const double hd = heading * kDeg;

  out[0] = pressure + 0.01 * ns * gauss_(noise_);
  const double noise_acc = o ? o->sig->imu.noise_acc_g : 0.01;
  const double noise_gyro = o ? o->sig->imu.noise_gyro_dps : 0.8;
  for (int k = 0; k < 3; ++k) out[1 + k] = imu[k] + noise_acc * ns * gauss_(noise_);
  for (int k = 3; k < 6; ++k) out[1 + k] = imu[k] + noise_gyro * ns * gauss_(noise_);
  const std::array<double, 3> mag = {0.25 * std::cos(hd), 0.25 * std::sin(hd), -0.4};
  for (int k = 0; k < 3; ++k)
    out[7 + k] = mag[k] + session_traits_.hard_iron[k] + 0.005 * ns * gauss_(noise_);
  out[10] = std::max(30.0, distance + 8.0 * ns * gauss_(noise_));
}

void SessionModel::slow_row(double t, double* out) {
  const double ns = cfg_.noise_scale;
  const Occurrence* o = occurrence_at(t);
  const double tau = o ? t - o->start : 0.0;
  const double progress = o ? tau / (o->end - o->start) : 0.0;
  const double s = o && o->sig->imu.gesture == Gesture::Sip ? sip_level(*o, tau) : 0.0;

  // spectral sensor
  const double gain = session_traits_.light_gain;
  double lamp = 0.0;
  if (o && o->sig->optical.light_gain > 0.0) {
    const double open = smoothstep((tau - 1.0) / 0.5) * (1.0 - smoothstep((tau - (o->end - o->start) + 2.0) / 0.5));
    lamp = o->sig->optical.light_gain * open;
  }
  for (std::size_t k = 0; k < 10; ++k) {
    double refl = kRoomReflectance;
    if (o && o->sig->optical.has_beverage) refl = (1.0 - s) * kRoomReflectance + s * o->sig->optical.beverage[k];
    const double counts = gain * kRoomLight[k] * refl + lamp * kLampLight[k];
    out[k] = std::max(0.0, counts * (1.0 + 0.02 * ns * gauss_(noise_)) + 5.0 * ns * gauss_(noise_));
  }

  // gas sensor
  double co2 = session_traits_.co2_ppm + 10.0 * std::sin(2.0 * kPi * t / 600.0);
  double tvoc = session_traits_.tvoc_ppb;
  for (const auto& e : gas_events_) {
    if (e.time > t) break;
    co2 += e.co2 * std::exp(-(t - e.time) / 8.0);
    tvoc += e.tvoc * std::exp(-(t - e.time) / 10.0);
  }
  out[10] = co2 + 4.0 * ns * gauss_(noise_);
  out[11] = std::max(0.0, tvoc + 2.0 * ns * gauss_(noise_));

  // thermal image
  const double bg = 22.0 + session_traits_.thermal_offset_c;
  double* img = out + 12;
  for (std::size_t r = 0; r < kThermalRows; ++r)
    for (std::size_t c = 0; c < kThermalCols; ++c)
      img[r * kThermalCols + c] = bg + 0.05 * static_cast<double>(r) + fixed_pattern_[r * kThermalCols + c];

  auto add_blob = [&](double row, double col, double peak, double sigma) {
    const int r0 = std::max(0, static_cast<int>(row - 3.0 * sigma));
    const int r1 = std::min<int>(kThermalRows - 1, static_cast<int>(row + 3.0 * sigma) + 1);
    const int c0 = std::max(0, static_cast<int>(col - 3.0 * sigma));
    const int c1 = std::min<int>(kThermalCols - 1, static_cast<int>(col + 3.0 * sigma) + 1);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) {
        const double d2 = (r - row) * (r - row) + (c - col) * (c - col);
        img[r * kThermalCols + c] += peak * std::exp(-0.5 * d2 / (sigma * sigma));
      }
  };

  if (o) {
    const auto& th = o->sig->thermal;
    const bool sip = o->sig->imu.gesture == Gesture::Sip;
    double row = th.blob_row + o->blob_dr;
    double col = th.blob_col + o->blob_dc;
    if (sip) {
      row = kCupTableRow + (kCupMouthRow - kCupTableRow) * s + o->blob_dr;
      col = kCupTableCol + (kCupMouthCol - kCupTableCol) * s + o->blob_dc;
    }
    const double wobble = 2.0 * kPi * 0.3 * tau + o->drift_phase;
    row += th.blob_drift_px * std::sin(wobble);
    col += th.blob_drift_px * std::cos(wobble);
    if (th.hand_blob)
      add_blob(row, col + (sip ? 2.5 : 0.0), th.blob_temp_c + subject_traits_.blob_temp_c - bg, 2.2);
    if (th.hot_object_c > 0.0) {
      if (sip) {
        add_blob(row, col - 1.0, cfg_.hot_drink_peak_c - bg, 1.6);
      } else {
        const double peak = th.hot_object_heats ? bg + (th.hot_object_c - bg) * smoothstep(progress)
                                                : th.hot_object_c;
        add_blob(th.hot_row + o->blob_dr, th.hot_col + o->blob_dc, peak - bg, 1.8);
      }
    }
    if (th.cold_delta_c != 0.0) {
      const double open = smoothstep((tau - 1.0) / 0.8);
      for (std::size_t r = 15; r < kThermalRows; ++r)
        for (std::size_t c = 21; c < kThermalCols; ++c)
          img[r * kThermalCols + c] += th.cold_delta_c * open;
    }
  }
  for (std::size_t k = 0; k < kThermalCount; ++k) img[k] += 0.25 * ns * gauss_(noise_);
}

SessionRecording SessionModel::render() {
  SessionRecording rec;
  rec.subject_id = subject_name(subject_);
  rec.session_id = static_cast<int>(session_);

  rec.fast.channel_names = fast_channel_names();
  rec.slow.channel_names = slow_channel_names();
  const auto fast_n = static_cast<std::size_t>(std::floor(end_ * 12.0)) + 1;
  const auto slow_n = static_cast<std::size_t>(std::floor(end_ * 3.0)) + 1;
  rec.fast.values.resize(fast_n * kFastChannelCount);
  rec.slow.values.resize(slow_n * kSlowChannelCount);
  // Interleave both streams in time so the noise sequence is fixed.
  std::size_t i = 0;
  for (std::size_t j = 0; j < slow_n; ++j) {
    const double ts = static_cast<double>(j) / 3.0;
    for (; i < fast_n && static_cast<double>(i) / 12.0 < ts + 1e-12; ++i) {
      rec.fast.times.push_back(static_cast<double>(i) / 12.0);
      fast_row(rec.fast.times.back(), rec.fast.values.data() + i * kFastChannelCount);
    }
    rec.slow.times.push_back(ts);
    slow_row(ts, rec.slow.values.data() + j * kSlowChannelCount);
  }
  for (; i < fast_n; ++i) {
    rec.fast.times.push_back(static_cast<double>(i) / 12.0);
    fast_row(rec.fast.times.back(), rec.fast.values.data() + i * kFastChannelCount);
  }

  rec.labels.push_back({0.0, kNullLabel});
  for (const auto& o : occ_) {
    rec.labels.push_back({o.start, o.sig->id});
    rec.labels.push_back({o.end, kNullLabel});
  }
  return rec;
}

}  // namespace

const std::vector<ActivitySignature>& default_signatures() {
  static const std::vector<ActivitySignature> defaults = make_defaults();
  return defaults;
}

void validate(const ScenarioConfig& config) {
  if (config.subjects == 0 || config.sessions == 0)
    fail(ErrorKind::Config, "need at least one subject and one session");
  if (config.subjects > 99) fail(ErrorKind::Config, "at most 99 subjects");
  if (!(config.noise_scale >= 0.0) || !std::isfinite(config.noise_scale))
    fail(ErrorKind::Config, "noise scale must be finite and non-negative");
  if (!(config.min_gap_seconds > 0.0) || config.max_gap_seconds < config.min_gap_seconds)
    fail(ErrorKind::Config, "NULL gaps need 0 < min <= max");
  if (config.signatures.empty()) fail(ErrorKind::Config, "no activity signatures");
  for (const auto& s : config.signatures) {
    if (!is_activity(s.id)) fail(ErrorKind::Config, "signature with invalid id " + std::to_string(s.id));
    if (!(s.min_seconds > 0.0) || s.max_seconds < s.min_seconds || s.occurrences < 1)
      fail(ErrorKind::Config, "activity " + std::to_string(s.id) + ": bad duration or occurrences");
    for (const auto& osc : s.imu.oscillations)
      if (osc.axis < 0 || osc.axis > 5)
        fail(ErrorKind::Config, "activity " + std::to_string(s.id) + ": oscillation axis out of range");
  }
}

std::string subject_name(std::size_t subject) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%02zu", subject);
  return buf;
}

SessionRecording generate_session(const ScenarioConfig& config, std::size_t subject,
                                  std::size_t session) {
  validate(config);
  if (subject < 1 || subject > config.subjects || session < 1 || session > config.sessions)
    fail(ErrorKind::Config, "subject or session out of range");
  return SessionModel(config, subject, session).render();
}

std::string Manifest::to_text() const {
  std::ostringstream os;
  os << "har-corpus 1\n"
     << "seed " << seed << '\n'
     << "subjects " << subjects << '\n'
     << "sessions " << sessions << '\n';
  char line[32];
  for (const auto& e : entries) {
    std::snprintf(line, sizeof line, "%08x", e.crc32);
    os << "file " << line << ' ' << e.bytes << ' ' << e.path << '\n';
  }
  return os.str();
}

Manifest Manifest::parse(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "har-corpus 1") fail(ErrorKind::Format, "not a corpus manifest");
  Manifest m;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    bool ok = true;
    if (key == "seed") {
      ok = static_cast<bool>(ls >> m.seed);
    } else if (key == "subjects") {
      ok = static_cast<bool>(ls >> m.subjects);
    } else if (key == "sessions") {
      ok = static_cast<bool>(ls >> m.sessions);
    } else if (key == "file") {
      ManifestEntry e;
      std::string crc;
      ok = static_cast<bool>(ls >> crc >> e.bytes >> e.path);
      if (ok) {
        char* end = nullptr;
        e.crc32 = static_cast<std::uint32_t>(std::strtoul(crc.c_str(), &end, 16));
        ok = crc.size() == 8 && end == crc.c_str() + 8;
      }
      m.entries.push_back(e);
    } else {
      ok = false;
    }
    if (!ok) fail(ErrorKind::Format, "manifest line " + std::to_string(lineno) + ": malformed");
  }
  return m;
}

std::uint32_t file_crc32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
  boost::crc_32_type crc;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    crc.process_bytes(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return crc.checksum();
}

Manifest generate_corpus(const ScenarioConfig& config, const std::filesystem::path& dir,
                         std::size_t jobs) {
  validate(config);
  const std::size_t total = config.subjects * config.sessions;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= total) return;
      try {
        const std::size_t subject = k / config.sessions + 1;
        const std::size_t session = k % config.sessions + 1;
        const auto rec = generate_session(config, subject, session);
        write_session(dir / rec.subject_id / ("session_" + std::to_string(session)), rec);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, total);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  Manifest m{config.seed, config.subjects, config.sessions, {}};
  for (std::size_t subject = 1; subject <= config.subjects; ++subject)
    for (std::size_t session = 1; session <= config.sessions; ++session)
      for (const char* name : {"slow.csv", "fast.csv", "labels.csv"}) {
        const std::string rel =
            subject_name(subject) + "/session_" + std::to_string(session) + "/" + name;
        const auto path = dir / rel;
        m.entries.push_back({rel, std::filesystem::file_size(path), file_crc32(path)});
      }
  std::ofstream out(dir / "manifest.txt", std::ios::binary | std::ios::trunc);
  out << m.to_text();
  if (!out) fail(ErrorKind::Io, "cannot write " + (dir / "manifest.txt").string());
  return m;
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.txt", std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + (dir / "manifest.txt").string());
  std::ostringstream text;
  text << in.rdbuf();
  std::vector<std::string> bad;
  for (const auto& e : Manifest::parse(text.str()).entries) {
    const auto path = dir / e.path;
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec || size != e.bytes || file_crc32(path) != e.crc32) bad.push_back(e.path);
  }
  return bad;
}

}  // namespace har::synth
