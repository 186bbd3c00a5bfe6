#pragma once

// Two-step temporal windows of raw wheel speeds, their per-second error
// labels, and the per-column min-max scaler shared by inputs and targets.

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wheelodo/drive.hpp"
#include "wheelodo/error.hpp"
#include "wheelodo/wheel_physics.hpp"

namespace wheelodo {

inline constexpr std::size_t kWindowSteps = 2;
inline constexpr std::size_t kStepFeatures = 4 * kSamplesPerSecond;  // fl x10, fr x10, rl x10, rr x10
inline constexpr std::size_t kWindowFeatures = kWindowSteps * kStepFeatures;

/// Steps are stored oldest first: values[0..40) is the second ending at
/// t_end - 1, values[40..80) the second ending at t_end. The recurrent model
/// consumes them in that order.
struct FeatureWindow {
  std::array<double, kWindowFeatures> values{};
  double t_end = 0.0;

  std::span<const double, kStepFeatures> step(std::size_t k) const {
    return std::span<const double, kStepFeatures>(values.data() + k * kStepFeatures, kStepFeatures);
  }

  bool operator==(const FeatureWindow&) const = default;
};

/// A window with its raw per-second WPM error (metres) for the step-1 second.
struct LabeledWindow {
  FeatureWindow window;
  double eps = 0.0;
};

struct ErrorLabel {
  double eps = 0.0;
  double eps_norm = 0.0;
};

namespace detail {

inline void fill_step(std::span<const WheelSpeedSample> second, double* out) {
  for (int i = 0; i < kSamplesPerSecond; ++i) {
    const auto& s = second[static_cast<std::size_t>(i)];
    out[i] = s.w_fl;
    out[kSamplesPerSecond + i] = s.w_fr;
    out[2 * kSamplesPerSecond + i] = s.w_rl;
    out[3 * kSamplesPerSecond + i] = s.w_rr;
  }
}

}  // namespace detail

/// Raw (unnormalized) window for the two seconds ending at `second`.
inline FeatureWindow make_window(const DriveRecord& drive, long second) {
  FeatureWindow w;
  w.t_end = static_cast<double>(second);
  detail::fill_step(second_samples(drive, second - 1), w.values.data());
  detail::fill_step(second_samples(drive, second), w.values.data() + kStepFeatures);
  return w;
}

/// One labelled window per whole second t >= 2 s of the drive.
inline std::vector<LabeledWindow> build_windows(const DriveRecord& drive, const CalibrationParams& cal) {
  if (drive.duration() < 2.0) {
    fail(Errc::DriveTooShort, "drive '" + drive.id + "' lasts " + std::to_string(drive.duration()) + " s (< 2 s)");
  }
  const auto errors = wpm_error_series(drive, cal);
  std::vector<LabeledWindow> out;
  if (errors.size() < 2) return out;
  out.reserve(errors.size() - 1);
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const long second = std::lround(errors[i].t);
    out.push_back({make_window(drive, second), errors[i].eps});
  }
  return out;
}

/// Per-column min-max scaler fitted on training windows only.
struct Scaler {
  std::array<double, kWindowFeatures> feature_min{};
  std::array<double, kWindowFeatures> feature_max{};
  double label_min = 0.0;
  double label_max = 0.0;

  static double scale(double x, double lo, double hi) {
    const double range = hi - lo;
    if (!(range > 0.0)) return 0.0;
    return std::clamp((x - lo) / range, 0.0, 1.0);
  }

  static double unscale(double v, double lo, double hi) {
    const double range = hi - lo;
    if (!(range > 0.0)) return lo;
    return lo + v * range;
  }

  static Scaler fit(std::span<const LabeledWindow> data) {
    if (data.empty()) fail(Errc::EmptyTrainingSet, "cannot fit a scaler on zero windows");
    Scaler s;
    s.feature_min = data.front().window.values;
    s.feature_max = data.front().window.values;
    s.label_min = s.label_max = data.front().eps;
    for (const auto& lw : data) {
      for (std::size_t j = 0; j < kWindowFeatures; ++j) {
        s.feature_min[j] = std::min(s.feature_min[j], lw.window.values[j]);
        s.feature_max[j] = std::max(s.feature_max[j], lw.window.values[j]);
      }
      s.label_min = std::min(s.label_min, lw.eps);
      s.label_max = std::max(s.label_max, lw.eps);
    }
    return s;
  }

  FeatureWindow apply(const FeatureWindow& raw) const {
    FeatureWindow out;
    out.t_end = raw.t_end;
    for (std::size_t j = 0; j < kWindowFeatures; ++j) out.values[j] = scale(raw.values[j], feature_min[j], feature_max[j]);
    return out;
  }

  FeatureWindow invert(const FeatureWindow& norm) const {
    FeatureWindow out;
    out.t_end = norm.t_end;
    for (std::size_t j = 0; j < kWindowFeatures; ++j) out.values[j] = unscale(norm.values[j], feature_min[j], feature_max[j]);
    return out;
  }

  double apply_label(double eps) const { return scale(eps, label_min, label_max); }
  double invert_label(double norm) const { return unscale(norm, label_min, label_max); }
  ErrorLabel label(double eps) const { return {eps, apply_label(eps)}; }

  /// Columns whose observed values fall outside the fitted range.
  std::vector<std::size_t> clamped_columns(std::span<const LabeledWindow> data) const {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < kWindowFeatures; ++j) {
      for (const auto& lw : data) {
        if (lw.window.values[j] < feature_min[j] || lw.window.values[j] > feature_max[j]) {
          cols.push_back(j);
          break;
        }
      }
    }
    return cols;
  }

  bool operator==(const Scaler&) const = default;
};

}  // namespace wheelodo
