#pragma once

// Generic (G), specific (S) and recalibrated (R) model workflows, plus
// feature-shift diagnostics between two domains.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wheelodo/dataset.hpp"
#include "wheelodo/features.hpp"
#include "wheelodo/model_io.hpp"
#include "wheelodo/text.hpp"
#include "wheelodo/trainer.hpp"
#include "wheelodo/wheel_physics.hpp"

namespace wheelodo {

inline constexpr double kDefaultSliceSeconds = 50.0;
inline constexpr int kDefaultRecalEpochs = 50;

inline std::vector<LabeledWindow> domain_windows(std::span<const DriveRecord> drives, const CalibrationParams& cal) {
  std::vector<LabeledWindow> out;
  for (const auto& d : drives) {
    auto w = build_windows(d, cal);
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

inline std::size_t count_windows(std::span<const DriveRecord> drives) {
  std::size_t n = 0;
  for (const auto& d : drives) {
    const auto secs = labelled_seconds(d);
    if (secs.size() > 1) n += secs.size() - 1;
  }
  return n;
}

namespace detail {

inline TrainResult train_variant(const DomainDataset& data, const TrainConfig& config,
                                 std::optional<double> radius_override, Variant variant) {
  if (data.train.empty() || count_windows(data.train) == 0) {
    fail(Errc::EmptyDataset, "domain '" + data.domain_id + "' has no training windows");
  }
  const CalibrationParams cal = radius_override ? CalibrationParams{*radius_override} : calibrate_radius(data.train);
  validate(cal);
  const auto windows = domain_windows(data.train, cal);
  auto result = train(windows, config);
  result.model.meta.variant = variant;
  result.model.meta.domain_id = data.domain_id;
  result.model.meta.radius_m = cal.radius_m;
  return result;
}

}  // namespace detail

/// G: trained on the source domain only. The WPM radius is calibrated on the
/// source training drives unless overridden.
inline TrainResult train_generic(const DomainDataset& source, const TrainConfig& config,
                                 std::optional<double> radius_override = std::nullopt) {
  if (source.role != DomainRole::Source) {
    fail(Errc::InvalidConfig, "generic training needs a source-role dataset, got '" + source.domain_id + "' (target)");
  }
  return detail::train_variant(source, config, radius_override, Variant::G);
}

/// S: trained from scratch on the vehicle it will be deployed on.
inline TrainResult train_specific(const DomainDataset& target, const TrainConfig& config,
                                  std::optional<double> radius_override = std::nullopt) {
  return detail::train_variant(target, config, radius_override, Variant::S);
}

struct AdaptationSlice {
  double seconds = kDefaultSliceSeconds;
};

/// Training drives of a domain in chronological order: `adapt` if present,
/// otherwise `train`.
inline const std::vector<DriveRecord>& adaptation_source(const DomainDataset& target) {
  if (!target.adapt.empty()) return target.adapt;
  return require_partition(target, Partition::Train);
}

inline double total_duration(std::span<const DriveRecord> drives) {
  double s = 0.0;
  for (const auto& d : drives) s += std::floor(d.duration() + 1e-9);
  return s;
}

/// The first `seconds` of the drives, taken in order without shuffling. The
/// sample carrying the closing GNSS fix is kept so the last second is labelled.
inline std::vector<DriveRecord> slice_head(std::span<const DriveRecord> drives, double seconds) {
  const double available = total_duration(drives);
  if (!(seconds > 0.0) || seconds > available + 1e-9) {
    fail(Errc::SliceTooLong, "adaptation slice of " + format_double(seconds) + " s; available " +
                                 format_double(available) + " s (need 0 < slice <= available)");
  }
  std::vector<DriveRecord> out;
  long remaining = std::lround(seconds * kSamplesPerSecond);
  for (const auto& d : drives) {
    if (remaining <= 0) break;
    const long whole = std::lround(std::floor(d.duration() + 1e-9) * kSamplesPerSecond);
    const long n = std::min(remaining, whole);
    DriveRecord part = d;
    part.samples.resize(static_cast<std::size_t>(std::min<long>(n + 1, static_cast<long>(d.samples.size()))));
    const double t_last = part.samples.back().t + 1e-9;
    std::erase_if(part.gnss.fixes, [&](const GnssFix& f) { return f.t > t_last; });
    out.push_back(std::move(part));
    remaining -= n;
  }
  return out;
}

namespace detail {

inline double logit(double p) {
  p = std::clamp(p, 1e-9, 1.0 - 1e-9);
  return std::log(p / (1.0 - p));
}

/// Widens the label range to cover `lo`..`hi` and adjusts the output layer so
/// predictions near pre-activation `z0` keep their metre values to first order.
inline void widen_label_range(RnnModel& model, double lo, double hi, double z0) {
  Scaler& s = *model.scaler;
  const double new_min = std::min(s.label_min, lo);
  const double new_max = std::max(s.label_max, hi);
  if (new_min == s.label_min && new_max == s.label_max) return;
  const double old_range = s.label_max - s.label_min;
  const double new_range = new_max - new_min;
  const double a = old_range / new_range;
  const double b = (s.label_min - new_min) / new_range;
  const double s0 = sigmoid(z0);
  const double s1 = std::clamp(a * s0 + b, 1e-6, 1.0 - 1e-6);
  const double k = a * s0 * (1.0 - s0) / (s1 * (1.0 - s1));
  model.params.w_o() *= k;
  double& b_o = model.params.b_o();
  b_o = k * (b_o - z0) + logit(s1);
  model.params.touch();
  s.label_min = new_min;
  s.label_max = new_max;
}

}  // namespace detail

/// R: continues training a G model on a short chronological slice of target
/// data. Features go through the source scaler (values outside its range are
/// clamped); the label range is widened to include the slice's errors.
inline TrainResult recalibrate(const RnnModel& g_model, const DomainDataset& target, const AdaptationSlice& slice,
                               const TrainConfig& recal_config) {
  if (g_model.meta.variant != Variant::G) {
    fail(Errc::VariantMismatch, "recalibration needs a G model, got variant " + to_string(g_model.meta.variant));
  }
  if (!g_model.trained()) fail(Errc::UntrainedModel, "the G model has not been trained");
  const auto drives = slice_head(adaptation_source(target), slice.seconds);
  const CalibrationParams cal{g_model.meta.radius_m};
  const auto windows = domain_windows(drives, cal);
  if (windows.empty()) fail(Errc::EmptyDataset, "adaptation slice yields no labelled windows");

  RnnModel start = g_model;
  double lo = windows.front().eps, hi = lo, z_sum = 0.0;
  ForwardCache cache;
  for (const auto& lw : windows) {
    lo = std::min(lo, lw.eps);
    hi = std::max(hi, lw.eps);
    forward_into(start.params, window_matrix(start.scaler->apply(lw.window)), nullptr, cache);
    z_sum += cache.z;
  }
  detail::widen_label_range(start, lo, hi, z_sum / static_cast<double>(windows.size()));

  auto result = train(windows, recal_config, &start);
  auto& meta = result.model.meta;
  meta.variant = Variant::R;
  meta.domain_id = target.domain_id;
  meta.parent_hash = model_digest(g_model);
  meta.slice_seconds = slice.seconds;
  meta.label_range = "source+slice";
  return result;
}

/// Default recalibration config: the training config with a reduced epoch budget.
inline TrainConfig recal_config_from(const TrainConfig& base, int epochs = kDefaultRecalEpochs) {
  TrainConfig c = base;
  c.epochs = epochs;
  return c;
}

// ---------------------------------------------------------------------------
// Feature shift diagnostics

struct FeatureShiftReport {
  std::vector<double> mean_abs_diff;   // |mean_t - mean_s| per feature
  std::vector<double> std_ratio;       // (std_t + 1e-12) / (std_s + 1e-12)
  std::vector<double> outside_fraction;  // share of target values outside the source range
  std::vector<std::size_t> clamp_risk;   // features with outside_fraction > kClampRiskFraction
  double summary = 0.0;                // mean of mean_abs_diff
  double rear_summary = 0.0;           // same, rear-wheel columns only

  static constexpr double kClampRiskFraction = 0.05;
};

/// Raw feature windows for every second with two complete seconds of wheel data.
inline std::vector<FeatureWindow> feature_windows(std::span<const DriveRecord> drives) {
  std::vector<FeatureWindow> out;
  for (const auto& d : drives) {
    const auto secs = complete_seconds(d);
    for (std::size_t i = 1; i < secs.size(); ++i) out.push_back(make_window(d, secs[i]));
  }
  return out;
}

inline bool is_rear_column(std::size_t j) {
  const std::size_t within = j % kStepFeatures;
  return within >= 2 * kSamplesPerSecond;
}

inline FeatureShiftReport feature_shift_stats(std::span<const FeatureWindow> source,
                                              std::span<const FeatureWindow> target) {
  if (source.empty() || target.empty()) fail(Errc::EmptyDataset, "feature shift needs two non-empty sets");
  FeatureShiftReport r;
  r.mean_abs_diff.resize(kWindowFeatures);
  r.std_ratio.resize(kWindowFeatures);
  r.outside_fraction.resize(kWindowFeatures);
  auto moments = [](std::span<const FeatureWindow> set, std::size_t j) {
    double mean = 0.0;
    for (const auto& w : set) mean += w.values[j];
    mean /= static_cast<double>(set.size());
    double var = 0.0;
    for (const auto& w : set) var += (w.values[j] - mean) * (w.values[j] - mean);
    return std::pair{mean, std::sqrt(var / static_cast<double>(set.size()))};
  };
  double rear_sum = 0.0;
  std::size_t rear_n = 0;
  for (std::size_t j = 0; j < kWindowFeatures; ++j) {
    const auto [ms, ss] = moments(source, j);
    const auto [mt, st] = moments(target, j);
    r.mean_abs_diff[j] = std::abs(mt - ms);
    r.std_ratio[j] = (st + 1e-12) / (ss + 1e-12);
    double lo = source.front().values[j], hi = lo;
    for (const auto& w : source) {
      lo = std::min(lo, w.values[j]);
      hi = std::max(hi, w.values[j]);
    }
    std::size_t outside = 0;
    for (const auto& w : target) outside += (w.values[j] < lo || w.values[j] > hi) ? 1 : 0;
    r.outside_fraction[j] = static_cast<double>(outside) / static_cast<double>(target.size());
    if (r.outside_fraction[j] > FeatureShiftReport::kClampRiskFraction) r.clamp_risk.push_back(j);
    r.summary += r.mean_abs_diff[j];
    if (is_rear_column(j)) {
      rear_sum += r.mean_abs_diff[j];
      ++rear_n;
    }
  }
  r.summary /= static_cast<double>(kWindowFeatures);
  r.rear_summary = rear_sum / static_cast<double>(rear_n);
  return r;
}

inline FeatureShiftReport feature_shift_stats(const DomainDataset& source, const DomainDataset& target) {
  const auto s = feature_windows(require_partition(source, Partition::Train));
  const auto t = feature_windows(require_partition(target, Partition::Train));
  return feature_shift_stats(s, t);
}

/// Same-domain reference level: mean summary distance between two bootstrap
/// resamples of one window set.
inline double bootstrap_shift_baseline(std::span<const FeatureWindow> windows, int resamples, std::uint64_t seed) {
  if (windows.empty()) fail(Errc::EmptyDataset, "bootstrap of zero windows");
  Rng rng(seed);
  double total = 0.0;
  std::vector<FeatureWindow> a(windows.size()), b(windows.size());
  for (int k = 0; k < resamples; ++k) {
    for (std::size_t i = 0; i < windows.size(); ++i) {
      a[i] = windows[rng.below(windows.size())];
      b[i] = windows[rng.below(windows.size())];
    }
    total += feature_shift_stats(a, b).summary;
  }
  return total / resamples;
}

}  // namespace wheelodo
