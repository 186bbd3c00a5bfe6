#include <gtest/gtest.h>

#include <set>

#include "support.hpp"
#include "wheelodo/sim_io.hpp"
#include "wheelodo/synth_sim.hpp"
#include "wheelodo/wheel_physics.hpp"

using namespace wheelodo;
using namespace wheelodo::testing;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::IoError;
}

}  // namespace

TEST(Simulator, ExactVehicleIsReproducedByWpm) {
  const auto sd = generate_drive(exact_vehicle(0.30), varied_script(150, 3));
  const auto errs = wpm_error_series(sd.drive, {0.30});
  for (std::size_t i = 0; i < errs.size(); ++i) {
    EXPECT_NEAR(errs[i].x_whr, sd.truth.x_true[i], 1e-9);
    EXPECT_NEAR(errs[i].x_gnss, sd.truth.x_true[i], 1e-9);
  }
}

TEST(Simulator, LargerRearTyresUnderMeasure) {
  VehicleSpec v{0.30, {1.0, 1.0, 1.10, 1.10}, 0.0, {}};
  const auto sd = generate_drive(v, constant_script(3.0, 20));
  const double expected = 3.0 * (1.0 / 1.1 - 1.0);
  EXPECT_NEAR(expected, -0.2727, 1e-4);
  for (double e : sd.truth.eps_true) EXPECT_NEAR(e, expected, 1e-12);
  for (const auto& e : wpm_error_series(sd.drive, {0.30})) EXPECT_NEAR(e.eps, expected, 1e-9);
}

TEST(Simulator, SlipSecondsUnderReadByTheSlipFactor) {
  VehicleSpec v{0.30, {1.0, 1.0, 1.0, 1.0}, 0.0, {{10.0, 2.0, 0.5}}};
  const auto sd = generate_drive(v, constant_script(3.0, 20));
  // Slip covers [10, 12), i.e. seconds 11 and 12.
  for (std::size_t i = 0; i < sd.truth.t.size(); ++i) {
    const double t = sd.truth.t[i];
    EXPECT_NEAR(sd.truth.eps_true[i], (t == 11.0 || t == 12.0) ? -1.5 : 0.0, 1e-12) << t;
  }
  // Front wheels are unaffected.
  EXPECT_EQ(sd.drive.samples[105].w_fl, 10.0);
  EXPECT_EQ(sd.drive.samples[105].w_rl, 5.0);
}

TEST(Simulator, GnssNoiseStaysInsideTheDisc) {
  auto script = varied_script(300, 9);
  script.gnss_noise = true;
  const auto sd = generate_drive(exact_vehicle(), script);
  double worst = 0.0, mean = 0.0;
  for (std::size_t k = 0; k < sd.true_fixes.size(); ++k) {
    const double d = vincenty_inverse(sd.true_fixes[k], sd.drive.gnss.fixes[k].coord);
    worst = std::max(worst, d);
    mean += d;
  }
  mean /= static_cast<double>(sd.true_fixes.size());
  EXPECT_LE(worst, 3.0 + 1e-9);
  EXPECT_NEAR(mean, 2.0, 0.2);  // E|r| = 2R/3 for a uniform disc
}

TEST(Simulator, GridAndFixLayout) {
  const auto sd = generate_drive(exact_vehicle(), constant_script(4.0, 10));
  EXPECT_EQ(sd.drive.samples.size(), 101u);
  EXPECT_EQ(sd.drive.gnss.fixes.size(), 11u);
  EXPECT_NO_THROW(validate_grid(sd.drive));
  EXPECT_EQ(sd.drive.samples[37].t, 3.7);
  EXPECT_EQ(sd.drive.tags.front(), "constant");
}

TEST(Simulator, StationaryVehicleReadsZero) {
  auto script = constant_script(0.0, 10);
  const auto sd = generate_drive({0.3, {1, 1, 1, 1}, 0.2, {}}, script);
  for (const auto& s : sd.drive.samples) EXPECT_EQ(s.w_rl, 0.0);
}

TEST(Simulator, InvalidScripts) {
  auto s = constant_script(3.0, 20);
  s.speed.v_high = -1.0;
  EXPECT_EQ(code_of([&] { generate_drive(exact_vehicle(), s); }), Errc::InvalidScript);
  s = constant_script(3.0, 20);
  EXPECT_EQ(code_of([&] { generate_drive({0.3, {1, 1, 1.3, 1}, 0.0, {}}, s); }), Errc::InvalidScript);
  EXPECT_EQ(code_of([&] { generate_drive({0.3, {1, 1, 1, 1}, 0.0, {{19.0, 2.0, 0.3}}}, s); }), Errc::InvalidScript);
  EXPECT_EQ(code_of([&] { generate_drive({0.0, {1, 1, 1, 1}, 0.0, {}}, s); }), Errc::InvalidScript);
  s.duration_s = 1;
  EXPECT_EQ(code_of([&] { generate_drive(exact_vehicle(), s); }), Errc::InvalidScript);
}

TEST(DomainPair, ShapeOfTheSourceAndTargetDomains) {
  const auto pair = make_domain_pair(1);
  const auto& a = pair.a.data;
  const auto& b = pair.b.data;
  EXPECT_EQ(a.role, DomainRole::Source);
  EXPECT_EQ(b.role, DomainRole::Target);
  EXPECT_EQ(pair.a.vehicle.r_true, 0.30);
  EXPECT_EQ(pair.b.vehicle.r_true, 0.33);
  EXPECT_EQ(pair.b.vehicle.scales.rl, 1.03);
  EXPECT_EQ(pair.b.vehicle.scales.rr, 0.97);
  EXPECT_EQ(pair.a.vehicle.wheel_noise_std, 0.05);
  EXPECT_EQ(pair.b.vehicle.wheel_noise_std, 0.10);
  for (const auto* d : {&a, &b}) {
    double train = 0.0, test = 0.0;
    std::set<std::string> classes;
    for (const auto& dr : d->train) {
      train += std::floor(dr.duration());
      classes.insert(dr.tags.front());
    }
    for (const auto& dr : d->test) test += std::floor(dr.duration());
    EXPECT_GE(train, 1200.0);
    EXPECT_GE(test, 800.0);
    EXPECT_EQ(classes.size(), 4u);
  }
  EXPECT_EQ(a.train.front().tags.front(), "stop_and_go");
  std::size_t slips = 0;
  for (const auto& s : pair.b.train_truth) {
    for (double e : s.eps_true) slips += e < -0.5 ? 1 : 0;
  }
  EXPECT_GT(slips, 0u);
}

TEST(DomainPair, SeededDeterminism) {
  DomainPairOptions opt;
  opt.train_drive_s = 60;
  opt.test_drive_s = 40;
  const auto p1 = make_domain_pair(7, opt);
  const auto p2 = make_domain_pair(7, opt);
  EXPECT_EQ(p1.a.data, p2.a.data);
  EXPECT_EQ(p1.b.data, p2.b.data);
  EXPECT_FALSE(make_domain_pair(8, opt).b.data == p1.b.data);
  SimulationSpec spec;
  spec.seed = 7;
  spec.options = opt;
  EXPECT_EQ(simulate_pair(spec).b.data, p1.b.data);
}
