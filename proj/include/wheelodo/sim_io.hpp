#pragma once

// Simulation specs (JSON) and writing synthetic domains as manifest datasets.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "wheelodo/ingest.hpp"
#include "wheelodo/synth_sim.hpp"

namespace wheelodo {

inline nlohmann::json vehicle_to_json(const VehicleSpec& v) {
  return {{"r_true", v.r_true},
          {"scales", {v.scales.fl, v.scales.fr, v.scales.rl, v.scales.rr}},
          {"wheel_noise_std", v.wheel_noise_std}};
}

inline VehicleSpec vehicle_from_json(const nlohmann::json& j, VehicleSpec base) {
  if (j.contains("r_true")) base.r_true = j.at("r_true").get<double>();
  if (j.contains("scales")) {
    const auto s = j.at("scales").get<std::vector<double>>();
    if (s.size() != 4) fail(Errc::InvalidScript, "vehicle scales need 4 values (fl, fr, rl, rr)");
    base.scales = {s[0], s[1], s[2], s[3]};
  }
  if (j.contains("wheel_noise_std")) base.wheel_noise_std = j.at("wheel_noise_std").get<double>();
  return base;
}

inline nlohmann::json script_to_json(const ScenarioScript& s) {
  return {{"id", s.id},
          {"duration_s", s.duration_s},
          {"speed",
           {{"kind", to_string(s.speed.kind)},
            {"v_low", s.speed.v_low},
            {"v_high", s.speed.v_high},
            {"period_s", s.speed.period_s},
            {"accel", s.speed.accel},
            {"stop_s", s.speed.stop_s}}},
          {"yaw", {{"constant_rate", s.yaw.constant_rate}, {"amplitude", s.yaw.amplitude}, {"period_s", s.yaw.period_s}}},
          {"initial_heading", s.initial_heading},
          {"gnss_noise", s.gnss_noise ? "uniform_disc" : "off"},
          {"gnss_noise_radius_m", s.gnss_noise_radius},
          {"seed", s.seed},
          {"origin", {s.origin.lat, s.origin.lon}}};
}

/// Parameters of `simulate`: a seeded source/target pair, with optional
/// vehicle overrides.
struct SimulationSpec {
  std::uint64_t seed = 1;
  DomainPairOptions options;
  VehicleSpec source = source_vehicle();
  VehicleSpec target = target_vehicle();
  bool target_slips = true;

  nlohmann::json to_json() const {
    return {{"seed", seed},
            {"train_drive_s", options.train_drive_s},
            {"test_drive_s", options.test_drive_s},
            {"gnss_noise", options.gnss_noise},
            {"source", vehicle_to_json(source)},
            {"target", vehicle_to_json(target)},
            {"target_slips", target_slips}};
  }
};

inline SimulationSpec parse_simulation_spec(const nlohmann::json& j) {
  try {
    SimulationSpec s;
    s.seed = j.value("seed", s.seed);
    s.options.train_drive_s = j.value("train_drive_s", s.options.train_drive_s);
    s.options.test_drive_s = j.value("test_drive_s", s.options.test_drive_s);
    s.options.gnss_noise = j.value("gnss_noise", s.options.gnss_noise);
    if (j.contains("source")) s.source = vehicle_from_json(j.at("source"), s.source);
    if (j.contains("target")) s.target = vehicle_from_json(j.at("target"), s.target);
    s.target_slips = j.value("target_slips", s.target_slips);
    if (s.options.train_drive_s < 35 || s.options.test_drive_s < 35) {
      fail(Errc::InvalidScript, "simulated drives must last at least 35 s");
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidScript, std::string("malformed simulation spec: ") + e.what());
  }
}

inline SimulationSpec read_simulation_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::MissingFile, path.string());
  try {
    return parse_simulation_spec(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::InvalidScript, path.string() + ": " + e.what());
  }
}

inline DomainPair simulate_pair(const SimulationSpec& spec) {
  DomainPair pair;
  pair.a = detail::make_domain("A", spec.source, false, DomainRole::Source, mix_seed(spec.seed, 0xA), spec.options);
  pair.b = detail::make_domain("B", spec.target, spec.target_slips, DomainRole::Target, mix_seed(spec.seed, 0xB),
                               spec.options);
  return pair;
}

inline void write_ground_truth(const GroundTruth& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  out << "t,x_true,eps_true\n";
  for (std::size_t i = 0; i < g.t.size(); ++i) {
    out << format_double(g.t[i]) << ',' << format_double(g.x_true[i]) << ',' << format_double(g.eps_true[i]) << '\n';
  }
}

/// Writes `<dir>/<drive>.csv`, `<dir>/<drive>.groundtruth.csv` and
/// `<dir>/manifest.json`.
inline void write_synthetic_domain(const SyntheticDomain& dom, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  DatasetManifest m;
  m.domain_id = dom.data.domain_id;
  m.vehicle = vehicle_to_json(dom.vehicle);
  m.vehicle["id"] = dom.data.vehicle_id;
  m.role = to_string(dom.data.role);
  m.state_tags = dom.data.state_tags;
  nlohmann::json scripts = nlohmann::json::array();
  auto emit = [&](const std::vector<DriveRecord>& drives, const std::vector<ScenarioScript>& sc,
                  const std::vector<GroundTruth>& truth, const char* role) {
    for (std::size_t i = 0; i < drives.size(); ++i) {
      const std::string file = drives[i].id + ".csv";
      write_drive_csv(drives[i], dir / file);
      write_ground_truth(truth[i], dir / (drives[i].id + ".groundtruth.csv"));
      m.drives.push_back({file, role, drives[i].tags, drives[i].reverse_segments});
      scripts.push_back(script_to_json(sc[i]));
    }
  };
  emit(dom.data.train, dom.train_scripts, dom.train_truth, "train");
  emit(dom.data.test, dom.test_scripts, dom.test_truth, "test");
  auto j = manifest_to_json(m);
  j["scripts"] = scripts;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write " + (dir / "manifest.json").string());
  out << j.dump(1) << '\n';
}

}  // namespace wheelodo
