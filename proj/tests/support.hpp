#pragma once

#include <filesystem>
#include <string>

#include "wheelodo/synth_sim.hpp"

namespace wheelodo::testing {

inline ScenarioScript constant_script(double speed, int seconds, std::uint64_t seed = 1, double yaw_rate = 0.0) {
  ScenarioScript s;
  s.id = "const";
  s.duration_s = seconds;
  s.speed = {SpeedKind::Constant, 0.0, speed, 60.0};
  s.yaw = {yaw_rate, 0.0, 60.0};
  s.seed = seed;
  return s;
}

inline ScenarioScript varied_script(int seconds, std::uint64_t seed = 1) {
  ScenarioScript s;
  s.id = "varied";
  s.duration_s = seconds;
  s.speed = {SpeedKind::StopAndGo, 0.0, 12.0, 40.0, 2.0, 4.0};
  s.yaw = {0.01, 0.1, 25.0};
  s.initial_heading = 0.7;
  s.seed = seed;
  return s;
}

inline VehicleSpec exact_vehicle(double r = 0.30) { return {r, {1.0, 1.0, 1.0, 1.0}, 0.0, {}}; }

/// A fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("wheelodo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace wheelodo::testing
