#pragma once

// Shared synthetic learning tasks for unit and acceptance tests.

#include <vector>

#include "wheelodo/features.hpp"
#include "wheelodo/synth_sim.hpp"

namespace wheelodo::testing {

/// Windows from noisy source-vehicle drives, relabelled with an error that is
/// an exact affine function of the mean rear-wheel speed in the label second:
/// eps = 0.03 * mean(w_rl, w_rr) - 0.1 metres.
inline std::vector<LabeledWindow> affine_error_task(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xaff));
  std::vector<LabeledWindow> out;
  const VehicleSpec vehicle{0.30, {1.0, 1.0, 1.0, 1.0}, 0.05, {}};
  const SpeedProfile profiles[] = {{SpeedKind::StopAndGo, 0.0, 14.0, 40.0, 2.0, 4.0},
                                   {SpeedKind::Sinusoidal, 9.0, 5.0, 50.0},
                                   {SpeedKind::Ramp, 2.0, 16.0, 60.0}};
  for (const auto& profile : profiles) {
    ScenarioScript s;
    s.duration_s = 150;
    s.speed = profile;
    s.yaw = {0.0, 0.05, 40.0};
    s.seed = rng.next_u64();
    const auto sd = generate_drive(vehicle, s);
    for (auto& lw : build_windows(sd.drive, {0.30})) {
      const auto step = lw.window.step(1);
      double mean_rear = 0.0;
      for (std::size_t i = 2 * kSamplesPerSecond; i < kStepFeatures; ++i) mean_rear += step[i];
      mean_rear /= 2.0 * kSamplesPerSecond;
      lw.eps = 0.03 * mean_rear - 0.1;
      out.push_back(lw);
    }
  }
  return out;
}

}  // namespace wheelodo::testing
