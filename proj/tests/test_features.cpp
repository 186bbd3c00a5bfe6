#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "wheelodo/features.hpp"

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

LabeledWindow window_with_column0(double v, double eps = 0.0) {
  LabeledWindow lw;
  lw.window.values.fill(1.0);
  lw.window.values[0] = v;
  lw.eps = eps;
  return lw;
}

}  // namespace

TEST(Features, ThreeSecondDriveGivesTwoWindows) {
  auto sd = generate_drive(exact_vehicle(), constant_script(5.0, 3));
  sd.drive.samples.pop_back();  // exactly 30 samples
  ASSERT_EQ(sd.drive.samples.size(), 30u);
  const auto w = build_windows(sd.drive, {0.30});
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].window.t_end, 2.0);
  EXPECT_EQ(w[1].window.t_end, 3.0);
}

TEST(Features, ShortDriveIsRejected) {
  auto sd = generate_drive(exact_vehicle(), constant_script(5.0, 3));
  sd.drive.samples.resize(15);
  EXPECT_EQ(code_of([&] { build_windows(sd.drive, {0.30}); }), Errc::DriveTooShort);
}

TEST(Features, WindowCountIsWholeSecondsMinusOne) {
  const auto sd = generate_drive(exact_vehicle(), varied_script(200));
  EXPECT_EQ(build_windows(sd.drive, {0.30}).size(), static_cast<std::size_t>(std::floor(sd.drive.duration())) - 1);
}

TEST(Features, ConstantSpeedGivesIdenticalWindows) {
  const auto sd = generate_drive(exact_vehicle(), constant_script(7.0, 30));
  const auto w = build_windows(sd.drive, {0.30});
  for (const auto& lw : w) EXPECT_EQ(lw.window.values, w.front().window.values);
}

TEST(Features, StepLayoutAndLabelAlignment) {
  // Inflated radius: eps = 0.1 * x_true of the label second.
  const auto sd = generate_drive(exact_vehicle(0.30), varied_script(80));
  const auto w = build_windows(sd.drive, {0.33});
  for (const auto& lw : w) {
    const auto t = static_cast<long>(lw.window.t_end);
    EXPECT_NEAR(lw.eps, 0.1 * sd.truth.x_true[static_cast<std::size_t>(t - 1)], 1e-9);
    for (int k = 0; k < 2; ++k) {
      const auto secs = second_samples(sd.drive, t - 1 + k);
      const auto step = lw.window.step(static_cast<std::size_t>(k));
      for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(step[i], secs[i].w_fl);
        EXPECT_EQ(step[10 + i], secs[i].w_fr);
        EXPECT_EQ(step[20 + i], secs[i].w_rl);
        EXPECT_EQ(step[30 + i], secs[i].w_rr);
      }
    }
  }
}

TEST(Features, WindowsAreDeterministic) {
  const auto a = generate_drive(exact_vehicle(), varied_script(60, 4));
  const auto b = generate_drive(exact_vehicle(), varied_script(60, 4));
  const auto wa = build_windows(a.drive, {0.3});
  const auto wb = build_windows(b.drive, {0.3});
  ASSERT_EQ(wa.size(), wb.size());
  for (std::size_t i = 0; i < wa.size(); ++i) {
    EXPECT_EQ(wa[i].window, wb[i].window);
    EXPECT_EQ(wa[i].eps, wb[i].eps);
  }
}

TEST(Scaler, MidpointDegenerateAndClamp) {
  const std::vector<LabeledWindow> data{window_with_column0(2.0, -1.0), window_with_column0(4.0, 0.0),
                                        window_with_column0(6.0, 3.0)};
  const auto s = Scaler::fit(data);
  EXPECT_EQ(s.feature_min[0], 2.0);
  EXPECT_EQ(s.feature_max[0], 6.0);
  const auto mid = s.apply(window_with_column0(4.0).window);
  EXPECT_EQ(mid.values[0], 0.5);
  EXPECT_EQ(mid.values[1], 0.0);  // column of constant 1.0
  EXPECT_EQ(s.apply(window_with_column0(8.0).window).values[0], 1.0);
  EXPECT_EQ(s.apply(window_with_column0(-3.0).window).values[0], 0.0);
  EXPECT_EQ(s.apply_label(1.0), 0.5);
  EXPECT_EQ(s.label(3.0).eps_norm, 1.0);
  EXPECT_EQ(s.clamped_columns(std::vector<LabeledWindow>{window_with_column0(8.0)}), std::vector<std::size_t>{0});
}

TEST(Scaler, RoundTripsInRangeValues) {
  const auto sd = generate_drive({0.3, {1, 1, 1, 1}, 0.2, {}}, varied_script(120));
  const auto w = build_windows(sd.drive, {0.3});
  const auto s = Scaler::fit(w);
  for (const auto& lw : w) {
    const auto n = s.apply(lw.window);
    for (double v : n.values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    const auto back = s.invert(n);
    for (std::size_t j = 0; j < kWindowFeatures; ++j) {
      if (s.feature_max[j] > s.feature_min[j]) {
        EXPECT_NEAR(back.values[j], lw.window.values[j], 1e-12);
      }
    }
    EXPECT_NEAR(s.invert_label(s.apply_label(lw.eps)), lw.eps, 1e-12);
  }
}

TEST(Scaler, NeedsTrainingData) {
  EXPECT_EQ(code_of([] { Scaler::fit(std::vector<LabeledWindow>{}); }), Errc::EmptyTrainingSet);
}
