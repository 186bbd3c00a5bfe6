#pragma once

// Synthetic drive generator: scripted speed/heading profiles, per-wheel
// radius errors, wheel noise and slip, and 1 Hz GNSS fixes on the WGS-84
// ellipsoid. It is the ground-truth oracle for the physics and learning
// stages, so it keeps its own geodesic stepping (a numerically integrated
// geodesic) rather than reusing the inverse solver it is used to check.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "wheelodo/dataset.hpp"
#include "wheelodo/drive.hpp"
#include "wheelodo/error.hpp"
#include "wheelodo/geodesy.hpp"
#include "wheelodo/random.hpp"

namespace wheelodo {

struct SlipEvent {
  double start = 0.0;     // s
  double duration = 0.0;  // s
  double factor = 0.0;    // rear wheels read (1 - factor) of ground speed
};

struct WheelScales {
  double fl = 1.0, fr = 1.0, rl = 1.0, rr = 1.0;
};

struct VehicleSpec {
  double r_true = 0.30;
  WheelScales scales;            // effective radius multipliers
  double wheel_noise_std = 0.0;  // rad/s
  std::vector<SlipEvent> slip_events;
};

enum class SpeedKind { Constant, Ramp, StopAndGo, Sinusoidal };

inline std::string to_string(SpeedKind k) {
  switch (k) {
    case SpeedKind::Constant: return "constant";
    case SpeedKind::Ramp: return "ramp";
    case SpeedKind::StopAndGo: return "stop_and_go";
    case SpeedKind::Sinusoidal: return "sinusoidal";
  }
  return "constant";
}

struct SpeedProfile {
  SpeedKind kind = SpeedKind::Constant;
  double v_low = 0.0;    // ramp floor / sinusoid mean
  double v_high = 10.0;  // constant speed / ramp peak / cruise / sinusoid amplitude
  double period_s = 60.0;
  double accel = 2.0;    // m/s^2, stop-and-go
  double stop_s = 5.0;   // standstill per stop-and-go cycle

  double speed_at(double t) const {
    switch (kind) {
      case SpeedKind::Constant:
        return v_high;
      case SpeedKind::Ramp: {
        const double phase = std::fmod(t, period_s) / period_s;
        const double tri = phase < 0.5 ? 2.0 * phase : 2.0 - 2.0 * phase;
        return v_low + (v_high - v_low) * tri;
      }
      case SpeedKind::StopAndGo: {
        const double ramp = v_high / accel;
        const double cruise = std::max(0.0, period_s - 2.0 * ramp - stop_s);
        const double c = std::fmod(t, period_s);
        if (c < ramp) return accel * c;
        if (c < ramp + cruise) return v_high;
        if (c < 2.0 * ramp + cruise) return v_high - accel * (c - ramp - cruise);
        return 0.0;
      }
      case SpeedKind::Sinusoidal:
        return std::max(0.0, v_low + v_high * std::sin(2.0 * std::numbers::pi * t / period_s));
    }
    return 0.0;
  }
};

struct YawProfile {
  double constant_rate = 0.0;  // rad/s
  double amplitude = 0.0;      // rad/s
  double period_s = 30.0;

  double rate_at(double t) const {
    return constant_rate + amplitude * std::sin(2.0 * std::numbers::pi * t / period_s);
  }
};

struct ScenarioScript {
  std::string id = "drive";
  int duration_s = 60;
  SpeedProfile speed;
  YawProfile yaw;
  double initial_heading = 0.0;  // rad, clockwise from north
  bool gnss_noise = false;       // uniform within a 3 m disc per fix
  double gnss_noise_radius = 3.0;
  std::uint64_t seed = 1;
  GeoCoordinate origin{52.0, -1.5};
  std::vector<std::string> tags;
};

/// Exact per-second kinematics for seconds 1..duration.
struct GroundTruth {
  std::vector<double> t;
  std::vector<double> x_true;    // metres travelled in the second
  std::vector<double> eps_true;  // rear-axle WPM at r_true minus x_true
  std::vector<double> yaw;       // heading held over the second
};

struct SyntheticDrive {
  DriveRecord drive;
  GroundTruth truth;
  std::vector<GeoCoordinate> true_fixes;
};

namespace detail {

/// Moves `distance` metres along the geodesic leaving `from` at `azimuth`
/// (rad) by RK4 integration of the geodesic equations in arc length. The
/// latitude/longitude increments are accumulated from zero so that short hops
/// keep full relative precision.
inline GeoCoordinate geodesic_step(const GeoCoordinate& from, double azimuth, double distance) {
  if (distance == 0.0) return from;
  constexpr double a = wgs84::kSemiMajor;
  constexpr double e2 = wgs84::kFlattening * (2.0 - wgs84::kFlattening);
  const double phi0 = from.lat * kDegToRad;
  struct State {
    double dphi, dlambda, alpha;
  };
  auto rate = [&](const State& s) {
    const double phi = phi0 + s.dphi;
    const double sp = std::sin(phi);
    const double w = 1.0 - e2 * sp * sp;
    const double n = a / std::sqrt(w);
    const double m = a * (1.0 - e2) / (w * std::sqrt(w));
    return State{std::cos(s.alpha) / m, std::sin(s.alpha) / (n * std::cos(phi)), std::sin(s.alpha) * std::tan(phi) / n};
  };
  const int steps = std::max(4, static_cast<int>(std::ceil(std::abs(distance) / 2.0)));
  const double h = distance / steps;
  State s{0.0, 0.0, azimuth};
  for (int i = 0; i < steps; ++i) {
    const State k1 = rate(s);
    const State k2 = rate({s.dphi + 0.5 * h * k1.dphi, s.dlambda + 0.5 * h * k1.dlambda, s.alpha + 0.5 * h * k1.alpha});
    const State k3 = rate({s.dphi + 0.5 * h * k2.dphi, s.dlambda + 0.5 * h * k2.dlambda, s.alpha + 0.5 * h * k2.alpha});
    const State k4 = rate({s.dphi + h * k3.dphi, s.dlambda + h * k3.dlambda, s.alpha + h * k3.alpha});
    s.dphi += h / 6.0 * (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi);
    s.dlambda += h / 6.0 * (k1.dlambda + 2.0 * k2.dlambda + 2.0 * k3.dlambda + k4.dlambda);
    s.alpha += h / 6.0 * (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha);
  }
  return {from.lat + s.dphi * kRadToDeg, wrap_degrees(from.lon + s.dlambda * kRadToDeg)};
}

}  // namespace detail

inline void validate(const VehicleSpec& spec, int duration_s) {
  if (!(spec.r_true > 0.0)) fail(Errc::InvalidScript, "r_true must be > 0");
  for (double s : {spec.scales.fl, spec.scales.fr, spec.scales.rl, spec.scales.rr}) {
    if (!(s >= 0.8 && s <= 1.2)) fail(Errc::InvalidScript, "wheel scale factors must lie in [0.8, 1.2]");
  }
  if (!(spec.wheel_noise_std >= 0.0)) fail(Errc::InvalidScript, "wheel noise std must be >= 0");
  for (const auto& e : spec.slip_events) {
    if (!(e.factor > -1.0 && e.factor < 1.0)) fail(Errc::InvalidScript, "slip factor must lie in (-1, 1)");
    if (e.start < 0.0 || e.duration <= 0.0 || e.start + e.duration > duration_s) {
      fail(Errc::InvalidScript, "slip event outside the drive");
    }
  }
}

inline void validate(const ScenarioScript& s) {
  if (s.duration_s < 2) fail(Errc::InvalidScript, "duration must be >= 2 s");
  if (s.speed.v_low < 0.0 || s.speed.v_high < 0.0) fail(Errc::InvalidScript, "speeds must be >= 0");
  if (s.speed.kind == SpeedKind::Sinusoidal && s.speed.v_high > s.speed.v_low) {
    fail(Errc::InvalidScript, "sinusoid amplitude exceeds its mean (negative speed)");
  }
  if (!(s.speed.period_s > 0.0) || !(s.yaw.period_s > 0.0)) fail(Errc::InvalidScript, "periods must be > 0");
  if (s.speed.kind == SpeedKind::StopAndGo && !(s.speed.accel > 0.0)) fail(Errc::InvalidScript, "accel must be > 0");
  if (!(s.gnss_noise_radius >= 0.0)) fail(Errc::InvalidScript, "GNSS noise radius must be >= 0");
  if (!is_valid(s.origin)) fail(Errc::InvalidScript, "origin coordinate out of range");
}

inline SyntheticDrive generate_drive(const VehicleSpec& spec, const ScenarioScript& script) {
  validate(script);
  validate(spec, script.duration_s);

  Rng wheel_rng(mix_seed(script.seed, 1));
  Rng gnss_rng(mix_seed(script.seed, 2));

  SyntheticDrive out;
  auto& drive = out.drive;
  drive.id = script.id;
  drive.tags = script.tags;
  drive.tags.insert(drive.tags.begin(), to_string(script.speed.kind));

  const int n_seconds = script.duration_s;
  const int n_ticks = n_seconds * kSamplesPerSecond + 1;  // trailing sample carries the last fix
  std::vector<double> speed(static_cast<std::size_t>(n_ticks));
  drive.samples.reserve(static_cast<std::size_t>(n_ticks));
  for (int i = 0; i < n_ticks; ++i) {
    const double t = tick_time(i);
    const double v = script.speed.speed_at(t);
    speed[static_cast<std::size_t>(i)] = v;
    double slip = 0.0;
    for (const auto& e : spec.slip_events) {
      if (t >= e.start && t < e.start + e.duration) slip = e.factor;
    }
    auto measure = [&](double scale, double slip_factor) {
      if (v == 0.0) return 0.0;
      const double w = v / (spec.r_true * scale) * (1.0 - slip_factor);
      return std::max(0.0, w + spec.wheel_noise_std * wheel_rng.normal());
    };
    WheelSpeedSample s;
    s.t = t;
    s.w_fl = measure(spec.scales.fl, 0.0);
    s.w_fr = measure(spec.scales.fr, 0.0);
    s.w_rl = measure(spec.scales.rl, slip);
    s.w_rr = measure(spec.scales.rr, slip);
    drive.samples.push_back(s);
  }

  auto& truth = out.truth;
  double heading = script.initial_heading;
  GeoCoordinate pos = script.origin;
  out.true_fixes.push_back(pos);
  for (int k = 1; k <= n_seconds; ++k) {
    double x = 0.0;
    double wheel = 0.0;
    for (int i = (k - 1) * kSamplesPerSecond; i < k * kSamplesPerSecond; ++i) {
      const auto& s = drive.samples[static_cast<std::size_t>(i)];
      x += speed[static_cast<std::size_t>(i)] * kSamplePeriod;
      wheel += 0.5 * (s.w_rl + s.w_rr) * kSamplePeriod;
    }
    truth.t.push_back(k);
    truth.x_true.push_back(x);
    truth.eps_true.push_back(wheel * spec.r_true - x);
    truth.yaw.push_back(std::remainder(heading, 2.0 * std::numbers::pi));
    pos = detail::geodesic_step(pos, heading, x);
    out.true_fixes.push_back(pos);
    if (x > 0.0) heading += script.yaw.rate_at(k - 0.5);
  }

  for (int k = 0; k <= n_seconds; ++k) {
    GeoCoordinate fix = out.true_fixes[static_cast<std::size_t>(k)];
    if (script.gnss_noise) {
      const double az = gnss_rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double r = script.gnss_noise_radius * std::sqrt(gnss_rng.uniform());
      fix = detail::geodesic_step(fix, az, r);
    }
    drive.gnss.fixes.push_back({static_cast<double>(k), fix});
  }
  return out;
}

struct SyntheticDomain {
  DomainDataset data;
  VehicleSpec vehicle;  // nominal spec (slip events are drawn per drive)
  std::vector<ScenarioScript> train_scripts, test_scripts;
  std::vector<GroundTruth> train_truth, test_truth;
};

struct DomainPair {
  SyntheticDomain a;
  SyntheticDomain b;
};

struct DomainPairOptions {
  int train_drive_s = 330;  // per scenario class
  int test_drive_s = 242;   // per scenario class
  bool gnss_noise = false;
};

namespace detail {

/// The four scenario classes, stop-and-go first so the chronological head of
/// a training set sweeps the speed range.
inline std::vector<ScenarioScript> scenario_classes(Rng& rng, int duration_s, const std::string& prefix) {
  std::vector<ScenarioScript> out;
  auto base = [&](const std::string& name) {
    ScenarioScript s;
    s.id = prefix + "_" + name;
    s.duration_s = duration_s;
    s.initial_heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
    s.seed = rng.next_u64();
    return s;
  };
  {
    auto s = base("stop_and_go");
    s.speed = {SpeedKind::StopAndGo, 0.0, rng.uniform(12.0, 14.0), 42.0, 2.0, 4.0};
    s.yaw = {0.0, 0.15, 30.0};
    s.tags = {"hard-brake"};
    out.push_back(s);
  }
  {
    auto s = base("sinusoidal");
    s.speed = {SpeedKind::Sinusoidal, rng.uniform(8.0, 10.0), 5.0, 50.0};
    s.yaw = {0.0, 0.05, 45.0};
    s.tags = {"successive-turns"};
    out.push_back(s);
  }
  {
    auto s = base("ramp");
    s.speed = {SpeedKind::Ramp, 2.0, rng.uniform(15.0, 17.0), 60.0};
    s.yaw = {0.08, 0.04, 20.0};
    s.tags = {"roundabout"};
    out.push_back(s);
  }
  {
    auto s = base("constant");
    s.speed = {SpeedKind::Constant, 0.0, rng.uniform(10.0, 12.0), 60.0};
    s.yaw = {0.0, 0.02, 60.0};
    s.tags = {"motorway"};
    out.push_back(s);
  }
  return out;
}

inline std::vector<SlipEvent> random_slips(Rng& rng, int duration_s) {
  std::vector<SlipEvent> events;
  double t = rng.uniform(20.0, 60.0);
  while (t + 3.0 < duration_s) {
    const double len = std::floor(rng.uniform(1.0, 4.0));
    events.push_back({std::floor(t), len, rng.uniform(0.15, 0.4)});
    t += len + rng.uniform(45.0, 90.0);
  }
  return events;
}

inline SyntheticDomain make_domain(const std::string& id, const VehicleSpec& vehicle, bool slips, DomainRole role,
                                   std::uint64_t seed, const DomainPairOptions& opt) {
  Rng rng(seed);
  SyntheticDomain dom;
  dom.vehicle = vehicle;
  dom.data.domain_id = id;
  dom.data.vehicle_id = "vehicle-" + id;
  dom.data.role = role;
  dom.data.state_tags = {{"r_true_m", std::to_string(vehicle.r_true)}};
  dom.train_scripts = scenario_classes(rng, opt.train_drive_s, id + "_train");
  dom.test_scripts = scenario_classes(rng, opt.test_drive_s, id + "_test");
  auto build = [&](std::vector<ScenarioScript>& scripts, std::vector<DriveRecord>& drives,
                   std::vector<GroundTruth>& truths) {
    for (auto& script : scripts) {
      script.gnss_noise = opt.gnss_noise;
      VehicleSpec spec = vehicle;
      if (slips) spec.slip_events = random_slips(rng, script.duration_s);
      auto sd = generate_drive(spec, script);
      drives.push_back(std::move(sd.drive));
      truths.push_back(std::move(sd.truth));
    }
  };
  build(dom.train_scripts, dom.data.train, dom.train_truth);
  build(dom.test_scripts, dom.data.test, dom.test_truth);
  return dom;
}

}  // namespace detail

inline VehicleSpec source_vehicle() { return {0.30, {1.0, 1.0, 1.0, 1.0}, 0.05, {}}; }
inline VehicleSpec target_vehicle() { return {0.33, {1.0, 1.0, 1.03, 0.97}, 0.10, {}}; }

/// Source vehicle A and a target vehicle B with larger tyres, unequal rear
/// tyres, noisier encoders and occasional rear-wheel slip.
inline DomainPair make_domain_pair(std::uint64_t seed, const DomainPairOptions& opt = {}) {
  DomainPair pair;
  pair.a = detail::make_domain("A", source_vehicle(), false, DomainRole::Source, mix_seed(seed, 0xA), opt);
  pair.b = detail::make_domain("B", target_vehicle(), true, DomainRole::Target, mix_seed(seed, 0xB), opt);
  return pair;
}

}  // namespace wheelodo
