#pragma once

// Outage segmentation, per-second error prediction, CRSE/CTE and their
// aggregates over test sequences.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "wheelodo/drive.hpp"
#include "wheelodo/error.hpp"
#include "wheelodo/features.hpp"
#include "wheelodo/model.hpp"
#include "wheelodo/wheel_physics.hpp"

namespace wheelodo {

inline constexpr int kWarmupSeconds = 2;
inline const std::vector<int> kDefaultScenarios = {30, 60, 120, 180};

struct OutageScenario {
  int duration_s = 30;
  int prediction_period_s = 1;
};

inline void validate(const OutageScenario& s) {
  if (s.prediction_period_s != 1) fail(Errc::InvalidConfig, "only a 1 s prediction period is supported");
  if (s.duration_s < 1) fail(Errc::InvalidConfig, "outage duration must be a positive number of seconds");
}

/// Seconds (first_second, ..., first_second + n_seconds - 1) of one drive.
struct TestSequence {
  std::size_t index = 0;  // position within the drive
  long first_second = 0;
  int n_seconds = 0;
};

/// Consecutive, non-overlapping outages after a 2 s warm-up; a trailing
/// remainder shorter than the outage is dropped.
inline std::vector<TestSequence> segment_outages(const DriveRecord& drive, const OutageScenario& scenario) {
  validate(scenario);
  const auto secs = complete_seconds(drive);
  const long available = static_cast<long>(secs.size()) - kWarmupSeconds;
  if (available < scenario.duration_s) {
    fail(Errc::DriveTooShort, "drive '" + drive.id + "' has " + std::to_string(secs.size()) + " s; a " +
                                  std::to_string(scenario.duration_s) + " s outage needs " +
                                  std::to_string(scenario.duration_s + kWarmupSeconds) + " s");
  }
  std::vector<TestSequence> out;
  const long start = secs.front() + kWarmupSeconds;
  for (long k = 0; (k + 1) * scenario.duration_s <= available; ++k) {
    out.push_back({static_cast<std::size_t>(k), start + k * scenario.duration_s, scenario.duration_s});
  }
  return out;
}

enum class PredictorKind { Wpm, Model, Oracle };

/// Something that estimates the WPM error of each second: nothing (WPM),
/// a trained network, or the ground truth itself.
struct Predictor {
  std::string name;
  PredictorKind kind = PredictorKind::Wpm;
  double radius_m = 0.0;
  const RnnModel* model = nullptr;

  static Predictor wpm(std::string name, double radius_m) { return {std::move(name), PredictorKind::Wpm, radius_m}; }
  static Predictor oracle(std::string name, double radius_m) {
    return {std::move(name), PredictorKind::Oracle, radius_m};
  }
  static Predictor network(std::string name, const RnnModel& m) {
    return {std::move(name), PredictorKind::Model, m.meta.radius_m, &m};
  }
};

inline void check_ready(const Predictor& p) {
  validate(CalibrationParams{p.radius_m});
  if (p.kind != PredictorKind::Model) return;
  if (!p.model) fail(Errc::UntrainedModel, "predictor '" + p.name + "' has no model");
  if (!p.model->scaler) fail(Errc::ScalerMissing, "model '" + p.name + "' has no fitted scaler");
  if (!p.model->trained()) fail(Errc::UntrainedModel, "model '" + p.name + "' has not been trained");
}

struct SequencePrediction {
  std::vector<double> t;
  std::vector<double> e_pred;    // eps_true - eps_hat
  std::vector<double> distance;  // reference displacement per second
};

/// e_pred for every second of the sequence. The network sees wheel data only;
/// GNSS supplies the reference error it is scored against.
inline SequencePrediction predict_sequence(const Predictor& p, const DriveRecord& drive, const TestSequence& seq) {
  check_ready(p);
  const CalibrationParams cal{p.radius_m};
  SequencePrediction out;
  out.t.reserve(static_cast<std::size_t>(seq.n_seconds));
  for (int k = 0; k < seq.n_seconds; ++k) {
    const long t = seq.first_second + k;
    const double x_whr = second_displacement(second_samples(drive, t), cal);
    const double x_ref = signed_gnss_displacement(drive, t);
    const double eps_true = x_whr - x_ref;
    double eps_hat = 0.0;
    if (p.kind == PredictorKind::Model) eps_hat = p.model->predict_eps(make_window(drive, t));
    if (p.kind == PredictorKind::Oracle) eps_hat = eps_true;
    out.t.push_back(static_cast<double>(t));
    out.e_pred.push_back(eps_true - eps_hat);
    out.distance.push_back(std::abs(x_ref));
  }
  return out;
}

/// Cumulative root squared error: sum of |e|.
inline double crse(std::span<const double> e_pred) {
  if (e_pred.empty()) fail(Errc::EmptyInput, "CRSE of an empty sequence");
  double s = 0.0;
  for (double e : e_pred) s += std::sqrt(e * e);
  return s;
}

/// Cumulative true error: signed sum.
inline double cte(std::span<const double> e_pred) {
  if (e_pred.empty()) fail(Errc::EmptyInput, "CTE of an empty sequence");
  double s = 0.0;
  for (double e : e_pred) s += e;
  return s;
}

struct SequenceResult {
  std::string dataset;
  int scenario = 0;
  std::string model;
  std::string drive_id;
  std::size_t drive_index = 0;
  std::size_t sequence = 0;  // index within the dataset for this scenario
  long first_second = 0;
  double crse = 0.0;
  double cte = 0.0;
  double distance = 0.0;
  int n_seconds = 0;
  SequencePrediction trace;
};

struct Stats {
  double max = 0.0;
  double min = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population form
};

inline Stats describe(std::span<const double> v) {
  if (v.empty()) fail(Errc::EmptyInput, "statistics of zero sequences");
  Stats s;
  s.max = *std::max_element(v.begin(), v.end());
  s.min = *std::min_element(v.begin(), v.end());
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / static_cast<double>(v.size()));
  return s;
}

struct MetricsRow {
  std::string dataset;
  int scenario = 0;
  std::string model;
  Stats crse;
  Stats cte;
  double total_distance = 0.0;
  double max_distance = 0.0;  // longest single sequence
  std::size_t n_sequences = 0;
};

inline MetricsRow aggregate(std::span<const SequenceResult> results) {
  if (results.empty()) fail(Errc::EmptyInput, "aggregate of zero sequences");
  MetricsRow row;
  row.dataset = results.front().dataset;
  row.scenario = results.front().scenario;
  row.model = results.front().model;
  std::vector<double> c, e;
  for (const auto& r : results) {
    c.push_back(r.crse);
    e.push_back(r.cte);
    row.total_distance += r.distance;
    row.max_distance = std::max(row.max_distance, r.distance);
  }
  row.crse = describe(c);
  row.cte = describe(e);
  row.n_sequences = results.size();
  return row;
}

struct EvalDataset {
  std::string name;
  std::vector<DriveRecord> drives;
};

struct Evaluation {
  std::vector<MetricsRow> rows;           // dataset, scenario, model order of the inputs
  std::vector<SequenceResult> sequences;  // same order, then sequence index
};

/// Full cross product of datasets x scenarios x predictors. Drives too short
/// for a scenario contribute no sequences; a (dataset, scenario) with none at
/// all is an error.
inline Evaluation compare_models(std::span<const Predictor> predictors, std::span<const EvalDataset> datasets,
                                 std::span<const int> scenarios) {
  Evaluation ev;
  for (const auto& p : predictors) check_ready(p);
  for (const auto& ds : datasets) {
    for (int n : scenarios) {
      const OutageScenario scenario{n, 1};
      validate(scenario);
      struct Item {
        std::size_t drive;
        TestSequence seq;
      };
      std::vector<Item> items;
      for (std::size_t d = 0; d < ds.drives.size(); ++d) {
        if (static_cast<long>(complete_seconds(ds.drives[d]).size()) < n + kWarmupSeconds) continue;
        for (const auto& s : segment_outages(ds.drives[d], scenario)) items.push_back({d, s});
      }
      if (items.empty()) {
        fail(Errc::DriveTooShort, "dataset '" + ds.name + "' has no drive long enough for " + std::to_string(n) +
                                      " s outages");
      }
      for (const auto& p : predictors) {
        std::vector<SequenceResult> results;
        for (std::size_t i = 0; i < items.size(); ++i) {
          const auto& drive = ds.drives[items[i].drive];
          SequenceResult r;
          r.dataset = ds.name;
          r.scenario = n;
          r.model = p.name;
          r.drive_id = drive.id;
          r.drive_index = items[i].drive;
          r.sequence = i;
          r.first_second = items[i].seq.first_second;
          r.n_seconds = items[i].seq.n_seconds;
          r.trace = predict_sequence(p, drive, items[i].seq);
          r.crse = crse(r.trace.e_pred);
          r.cte = cte(r.trace.e_pred);
          for (double x : r.trace.distance) r.distance += x;
          results.push_back(std::move(r));
        }
        ev.rows.push_back(aggregate(results));
        for (auto& r : results) ev.sequences.push_back(std::move(r));
      }
    }
  }
  return ev;
}

}  // namespace wheelodo
