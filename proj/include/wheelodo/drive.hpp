#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "wheelodo/error.hpp"
#include "wheelodo/geodesy.hpp"

namespace wheelodo {

inline constexpr int kSamplesPerSecond = 10;
inline constexpr double kSamplePeriod = 0.1;

/// One 10 Hz reading of the four wheel angular speeds (rad/s).
struct WheelSpeedSample {
  double t = 0.0;
  double w_fl = 0.0;
  double w_fr = 0.0;
  double w_rl = 0.0;
  double w_rr = 0.0;

  bool operator==(const WheelSpeedSample&) const = default;
};

struct TimeSpan {
  double start = 0.0;
  double end = 0.0;

  bool contains(double t) const noexcept { return t >= start && t < end; }
  bool operator==(const TimeSpan&) const = default;
};

/// Index of the 0.1 s grid slot a timestamp falls on.
inline long to_tick(double t) { return std::lround(t * kSamplesPerSecond); }
inline double tick_time(long tick) { return static_cast<double>(tick) / kSamplesPerSecond; }

/// A contiguous drive: wheel samples on an exact 10 Hz grid plus whole-second
/// GNSS fixes. Wheel speeds inside reverse segments are stored negated.
///
/// Second T is the interval [T-1, T): its displacement integrates the ten
/// samples stamped T-1.0 ... T-0.9 and its GNSS label uses the fixes at T-1
/// and T.
struct DriveRecord {
  std::string id;
  std::vector<WheelSpeedSample> samples;
  GnssTrack gnss;
  std::vector<std::string> tags;
  std::vector<TimeSpan> reverse_segments;

  long first_tick() const { return samples.empty() ? 0 : to_tick(samples.front().t); }
  long end_tick() const { return first_tick() + static_cast<long>(samples.size()); }
  double duration() const { return static_cast<double>(samples.size()) * kSamplePeriod; }

  bool operator==(const DriveRecord&) const = default;
};

inline bool in_reverse(const DriveRecord& drive, double t) {
  return std::any_of(drive.reverse_segments.begin(), drive.reverse_segments.end(),
                     [t](const TimeSpan& s) { return s.contains(t); });
}

/// Checks the exact-grid invariant: consecutive ticks, each timestamp on its slot.
inline void validate_grid(const DriveRecord& drive) {
  const long first = drive.first_tick();
  for (std::size_t i = 0; i < drive.samples.size(); ++i) {
    const auto& s = drive.samples[i];
    if (!std::isfinite(s.t) || !std::isfinite(s.w_fl) || !std::isfinite(s.w_fr) || !std::isfinite(s.w_rl) ||
        !std::isfinite(s.w_rr)) {
      fail(Errc::NonFinite, "non-finite wheel sample in drive '" + drive.id + "'");
    }
    const long expected = first + static_cast<long>(i);
    if (to_tick(s.t) != expected) {
      fail(Errc::AlignmentGap, "drive '" + drive.id + "' is not on a contiguous 10 Hz grid at t=" +
                                   std::to_string(s.t));
    }
  }
}

/// Whole seconds T whose ten samples [T-1, T) are all present.
inline std::vector<long> complete_seconds(const DriveRecord& drive) {
  std::vector<long> out;
  if (drive.samples.empty()) return out;
  auto floor_div = [](long a, long b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0)) ? 1 : 0); };
  const long first = drive.first_tick();
  const long end = drive.end_tick();
  const long lo = -floor_div(-first, kSamplesPerSecond) + 1;  // ceil(first / 10) + 1
  const long hi = floor_div(end, kSamplesPerSecond);
  for (long t = lo; t <= hi; ++t) out.push_back(t);
  return out;
}

inline std::span<const WheelSpeedSample> second_samples(const DriveRecord& drive, long second) {
  const long lo = kSamplesPerSecond * (second - 1) - drive.first_tick();
  if (lo < 0 || lo + kSamplesPerSecond > static_cast<long>(drive.samples.size())) {
    fail(Errc::AlignmentGap, "second " + std::to_string(second) + " not covered by drive '" + drive.id + "'");
  }
  return std::span<const WheelSpeedSample>(drive.samples).subspan(static_cast<std::size_t>(lo), kSamplesPerSecond);
}

/// The fix stamped at whole second T, if any.
inline const GnssFix* fix_at(const DriveRecord& drive, long second) {
  const auto& fixes = drive.gnss.fixes;
  auto it = std::lower_bound(fixes.begin(), fixes.end(), static_cast<double>(second) - 0.5,
                             [](const GnssFix& f, double t) { return f.t < t; });
  if (it != fixes.end() && std::lround(it->t) == second && std::abs(it->t - static_cast<double>(second)) <= kGnssJitter) {
    return &*it;
  }
  return nullptr;
}

/// Seconds that carry both a full set of wheel samples and fixes at both ends.
inline std::vector<long> labelled_seconds(const DriveRecord& drive) {
  std::vector<long> out;
  for (long t : complete_seconds(drive)) {
    if (fix_at(drive, t - 1) && fix_at(drive, t)) out.push_back(t);
  }
  return out;
}

}  // namespace wheelodo
