#pragma once

// Self-describing JSON model file. Doubles are written in shortest
// round-trip form, so save(load(file)) reproduces the bytes.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "wheelodo/error.hpp"
#include "wheelodo/hash.hpp"
#include "wheelodo/model.hpp"

namespace wheelodo {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json matrix_json(const Eigen::Ref<const MatrixXd>& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline void read_matrix(const nlohmann::json& j, Eigen::Map<MatrixXd> out, const char* name) {
  if (j.at("rows").get<Index>() != out.rows() || j.at("cols").get<Index>() != out.cols() ||
      j.at("data").size() != static_cast<std::size_t>(out.size())) {
    fail(Errc::ShapeMismatch, std::string("weight block '") + name + "' has the wrong shape");
  }
  const auto& data = j.at("data");
  std::size_t k = 0;
  for (Index r = 0; r < out.rows(); ++r)
    for (Index c = 0; c < out.cols(); ++c) out(r, c) = data[k++].get<double>();
}

template <typename Vec>
nlohmann::json vector_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace detail

inline nlohmann::json scaler_to_json(const Scaler& s, const std::string& mode) {
  return {{"mode", mode},
          {"feature_min", s.feature_min},
          {"feature_max", s.feature_max},
          {"label_min", s.label_min},
          {"label_max", s.label_max}};
}

inline Scaler scaler_from_json(const nlohmann::json& j) {
  Scaler s;
  const auto fmin = j.at("feature_min").get<std::vector<double>>();
  const auto fmax = j.at("feature_max").get<std::vector<double>>();
  if (fmin.size() != kWindowFeatures || fmax.size() != kWindowFeatures) {
    fail(Errc::ShapeMismatch, "scaler must have 80 feature columns");
  }
  std::copy(fmin.begin(), fmin.end(), s.feature_min.begin());
  std::copy(fmax.begin(), fmax.end(), s.feature_max.begin());
  s.label_min = j.at("label_min").get<double>();
  s.label_max = j.at("label_max").get<double>();
  return s;
}

inline nlohmann::json model_to_json(const RnnModel& m) {
  const auto& p = m.params;
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = "wheelodo.rnn_model";
  j["dims"] = {{"input", p.input_size()}, {"hidden", p.hidden_size()}, {"steps", kWindowSteps}};
  j["weights"] = {{"w_x", detail::matrix_json(p.w_x())},
                  {"u_h", detail::matrix_json(p.u_h())},
                  {"b_h", detail::vector_json(p.b_h())},
                  {"w_o", detail::vector_json(p.w_o())},
                  {"b_o", p.b_o()}};
  j["scaler"] = m.scaler ? scaler_to_json(*m.scaler, m.meta.scaler_mode) : nlohmann::json(nullptr);
  const auto& meta = m.meta;
  j["meta"] = {{"domain_id", meta.domain_id},         {"seed", meta.seed},
               {"epochs_trained", meta.epochs_trained}, {"config_hash", meta.config_hash},
               {"variant", to_string(meta.variant)},   {"radius_m", meta.radius_m},
               {"parent_hash", meta.parent_hash},       {"slice_seconds", meta.slice_seconds},
               {"label_range", meta.label_range}};
  return j;
}

inline RnnModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      fail(Errc::SchemaError, "unsupported model format_version " + j.at("format_version").dump());
    }
    const auto& dims = j.at("dims");
    RnnModel m;
    m.params = RnnParams(dims.at("input").get<Index>(), dims.at("hidden").get<Index>());
    if (dims.at("steps").get<std::size_t>() != kWindowSteps) fail(Errc::ShapeMismatch, "model expects another step count");
    const auto& w = j.at("weights");
    detail::read_matrix(w.at("w_x"), m.params.w_x(), "w_x");
    detail::read_matrix(w.at("u_h"), m.params.u_h(), "u_h");
    const auto b_h = w.at("b_h").get<std::vector<double>>();
    const auto w_o = w.at("w_o").get<std::vector<double>>();
    if (static_cast<Index>(b_h.size()) != m.hidden_size() || static_cast<Index>(w_o.size()) != m.hidden_size()) {
      fail(Errc::ShapeMismatch, "bias/output vectors do not match the hidden size");
    }
    for (Index i = 0; i < m.hidden_size(); ++i) {
      m.params.b_h()[i] = b_h[static_cast<std::size_t>(i)];
      m.params.w_o()[i] = w_o[static_cast<std::size_t>(i)];
    }
    m.params.b_o() = w.at("b_o").get<double>();
    if (!m.params.flat().allFinite()) fail(Errc::NonFinite, "model weights must be finite");

    const auto& meta = j.at("meta");
    m.meta.domain_id = meta.at("domain_id").get<std::string>();
    m.meta.seed = meta.at("seed").get<std::uint64_t>();
    m.meta.epochs_trained = meta.at("epochs_trained").get<int>();
    m.meta.config_hash = meta.at("config_hash").get<std::string>();
    m.meta.variant = parse_variant(meta.at("variant").get<std::string>());
    m.meta.radius_m = meta.at("radius_m").get<double>();
    m.meta.parent_hash = meta.at("parent_hash").get<std::string>();
    m.meta.slice_seconds = meta.at("slice_seconds").get<double>();
    m.meta.label_range = meta.at("label_range").get<std::string>();
    if (!j.at("scaler").is_null()) {
      m.scaler = scaler_from_json(j.at("scaler"));
      m.meta.scaler_mode = j.at("scaler").at("mode").get<std::string>();
    }
    if (m.scaler.has_value() != (m.meta.epochs_trained > 0)) {
      fail(Errc::SchemaError, "scaler must be present exactly when the model has been trained");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::SchemaError, std::string("malformed model file: ") + e.what());
  }
}

inline std::string model_to_string(const RnnModel& m) { return model_to_json(m).dump(1) + "\n"; }

inline void save_model(const RnnModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  out << model_to_string(m);
}

inline RnnModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(Errc::MissingFile, path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::SchemaError, path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

/// Provenance digest of a model: hash of its canonical serialization.
inline std::string model_digest(const RnnModel& m) { return hex_digest(fnv1a(model_to_string(m))); }

}  // namespace wheelodo
