#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wheelodo/error.hpp"
#include "wheelodo/features.hpp"
#include "wheelodo/rnn.hpp"

namespace wheelodo {

enum class Variant { Untrained, G, S, R };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::G: return "G";
    case Variant::S: return "S";
    case Variant::R: return "R";
    case Variant::Untrained: break;
  }
  return "untrained";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "G") return Variant::G;
  if (s == "S") return Variant::S;
  if (s == "R") return Variant::R;
  if (s == "untrained") return Variant::Untrained;
  fail(Errc::SchemaError, "unknown model variant '" + s + "'");
}

struct ModelMeta {
  std::string domain_id;
  std::uint64_t seed = 0;
  int epochs_trained = 0;
  std::string config_hash;
  Variant variant = Variant::Untrained;
  double radius_m = 0.0;         // WPM radius the error labels were computed with
  std::string parent_hash;       // R only: digest of the G model file
  double slice_seconds = 0.0;    // R only
  std::string scaler_mode = "per_column";
  std::string label_range = "fit";  // "fit", or "source+slice" after recalibration

  bool operator==(const ModelMeta&) const = default;
};

struct RnnModel {
  RnnParams params;
  std::optional<Scaler> scaler;
  ModelMeta meta;

  Index hidden_size() const { return params.hidden_size(); }

  bool trained() const { return meta.epochs_trained > 0 && scaler.has_value(); }

  /// Denormalized error prediction (metres) for a raw window.
  double predict_eps(const FeatureWindow& raw) const {
    if (!scaler) fail(Errc::ScalerMissing, "model has no fitted scaler");
    const auto r = forward(params, scaler->apply(raw));
    return scaler->invert_label(r.y);
  }

  bool operator==(const RnnModel& o) const {
    return params == o.params && scaler == o.scaler && meta == o.meta;
  }
};

}  // namespace wheelodo
