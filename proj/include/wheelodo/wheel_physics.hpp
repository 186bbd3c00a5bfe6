#pragma once

// Wheel encoder physics model (WPM): rear-axle speed -> v = w r -> per-second
// body-frame displacement -> yaw rotation into the navigation frame.

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wheelodo/drive.hpp"
#include "wheelodo/error.hpp"
#include "wheelodo/geodesy.hpp"

namespace wheelodo {

struct CalibrationParams {
  double radius_m = 0.3;  // wheel-speed-to-velocity constant

  /// Passenger-car tyres sit in this band; values outside are suspicious, not invalid.
  bool plausible() const noexcept { return radius_m >= 0.2 && radius_m <= 0.5; }
};

inline void validate(const CalibrationParams& cal) {
  if (!(cal.radius_m > 0.0) || !std::isfinite(cal.radius_m)) {
    fail(Errc::InvalidConfig, "wheel radius must be positive and finite");
  }
}

inline double rear_axle_speed(double w_rl, double w_rr) {
  if (!std::isfinite(w_rl) || !std::isfinite(w_rr)) fail(Errc::NonFinite, "non-finite wheel speed");
  return 0.5 * (w_rl + w_rr);
}

inline double linear_velocity(double w_axle, const CalibrationParams& cal) { return w_axle * cal.radius_m; }

/// Left-rectangle integral of the rear-axle velocity over one second of 10 Hz samples.
inline double second_displacement(std::span<const WheelSpeedSample> samples, const CalibrationParams& cal) {
  if (samples.size() != static_cast<std::size_t>(kSamplesPerSecond)) {
    fail(Errc::WrongSampleCount, "expected 10 samples, got " + std::to_string(samples.size()));
  }
  double x = 0.0;
  for (const auto& s : samples) x += linear_velocity(rear_axle_speed(s.w_rl, s.w_rr), cal) * kSamplePeriod;
  return x;
}

/// Integrated rear-axle angle over one second (rad); displacement = radius * this.
inline double second_axle_angle(std::span<const WheelSpeedSample> samples) {
  double w = 0.0;
  for (const auto& s : samples) w += rear_axle_speed(s.w_rl, s.w_rr) * kSamplePeriod;
  return w;
}

/// Wraps into (-pi, pi].
inline double normalize_yaw(double yaw) {
  double w = std::remainder(yaw, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

struct Pose2D {
  double north = 0.0;
  double east = 0.0;
  double yaw = 0.0;  // radians, clockwise from north
};

struct NavDelta {
  double north = 0.0;
  double east = 0.0;
};

/// Planar part of the body-to-navigation rotation applied to (dx, 0).
inline NavDelta rotate_to_nav(double dx_body, double yaw) {
  return {dx_body * std::cos(yaw), dx_body * std::sin(yaw)};
}

struct BodyStep {
  double dx = 0.0;   // metres along the body x axis
  double yaw = 0.0;  // heading held over the step
};

inline std::vector<Pose2D> dead_reckon(const Pose2D& start, std::span<const BodyStep> steps) {
  if (steps.empty()) fail(Errc::EmptyInput, "dead reckoning needs at least one step");
  std::vector<Pose2D> path;
  path.reserve(steps.size() + 1);
  path.push_back(start);
  for (const auto& step : steps) {
    const auto d = rotate_to_nav(step.dx, step.yaw);
    const auto& prev = path.back();
    path.push_back({prev.north + d.north, prev.east + d.east, normalize_yaw(step.yaw)});
  }
  return path;
}

/// Signed GNSS displacement for second T: negative inside reverse segments.
inline double signed_gnss_displacement(const DriveRecord& drive, long second) {
  const GnssFix* a = fix_at(drive, second - 1);
  const GnssFix* b = fix_at(drive, second);
  if (!a || !b) fail(Errc::AlignmentGap, "no GNSS fix pair for second " + std::to_string(second) + " of '" + drive.id + "'");
  const double d = vincenty_inverse(a->coord, b->coord);
  return in_reverse(drive, static_cast<double>(second) - 0.5) ? -d : d;
}

struct SecondError {
  double t = 0.0;      // end of the second
  double eps = 0.0;    // x_whr - x_gnss
  double x_whr = 0.0;  // wheel displacement
  double x_gnss = 0.0; // reference displacement
};

/// Per-second WPM error; also the learning target of the recurrent model.
inline std::vector<SecondError> wpm_error_series(const DriveRecord& drive, const CalibrationParams& cal) {
  validate(cal);
  std::vector<SecondError> out;
  for (long t : complete_seconds(drive)) {
    const double x_whr = second_displacement(second_samples(drive, t), cal);
    const double x_gnss = signed_gnss_displacement(drive, t);
    out.push_back({static_cast<double>(t), x_whr - x_gnss, x_whr, x_gnss});
  }
  return out;
}

inline constexpr double kMinCalibrationDisplacement = 0.5;
inline constexpr std::size_t kMinCalibrationSeconds = 30;

/// Closed-form least squares for r in x_gnss ~ r * (integrated axle angle).
inline CalibrationParams calibrate_radius(std::span<const DriveRecord> drives) {
  double sxy = 0.0;
  double sxx = 0.0;
  std::size_t used = 0;
  for (const auto& drive : drives) {
    for (long t : labelled_seconds(drive)) {
      const double x = signed_gnss_displacement(drive, t);
      if (std::abs(x) <= kMinCalibrationDisplacement) continue;
      const double angle = second_axle_angle(second_samples(drive, t));
      sxy += angle * x;
      sxx += angle * angle;
      ++used;
    }
  }
  if (used < kMinCalibrationSeconds || !(sxx > 0.0)) {
    fail(Errc::InsufficientMotion, "only " + std::to_string(used) + " seconds with GNSS displacement > 0.5 m (need 30)");
  }
  return {sxy / sxx};
}

inline CalibrationParams calibrate_radius(const DriveRecord& drive) {
  return calibrate_radius(std::span<const DriveRecord>(&drive, 1));
}

/// Heading of second T from its GNSS fix pair; nullopt when the vehicle barely moved.
inline std::optional<double> gnss_heading(const DriveRecord& drive, long second) {
  const GnssFix* a = fix_at(drive, second - 1);
  const GnssFix* b = fix_at(drive, second);
  if (!a || !b) return std::nullopt;
  const auto inv = vincenty_inverse_full(a->coord, b->coord);
  if (inv.distance_m < kMinCalibrationDisplacement) return std::nullopt;
  double yaw = inv.azimuth1_rad;
  if (in_reverse(drive, static_cast<double>(second) - 0.5)) yaw += std::numbers::pi;
  return normalize_yaw(yaw);
}

/// Dead-reckoned NED path across an outage of seconds (first, first + n - 1],
/// starting at the origin with the last GNSS heading before the outage held
/// constant. `corrections` (if given) is subtracted from each second's
/// wheel displacement.
inline std::vector<Pose2D> outage_path(const DriveRecord& drive, const CalibrationParams& cal, long first_second,
                                       std::size_t n_seconds, std::span<const double> corrections = {}) {
  double yaw = 0.0;
  for (long t = first_second - 1; t >= first_second - 60; --t) {
    if (auto h = gnss_heading(drive, t)) {
      yaw = *h;
      break;
    }
  }
  std::vector<BodyStep> steps;
  steps.reserve(n_seconds);
  for (std::size_t k = 0; k < n_seconds; ++k) {
    const long t = first_second + static_cast<long>(k);
    double dx = second_displacement(second_samples(drive, t), cal);
    if (k < corrections.size()) dx -= corrections[k];
    steps.push_back({dx, yaw});
  }
  return dead_reckon(Pose2D{0.0, 0.0, yaw}, steps);
}

}  // namespace wheelodo
