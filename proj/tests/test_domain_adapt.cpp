#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "wheelodo/domain_adapt.hpp"
#include "wheelodo/model_io.hpp"
#include "wheelodo/synth_sim.hpp"

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

const DomainPair& small_pair() {
  static const DomainPair pair = [] {
    DomainPairOptions opt;
    opt.train_drive_s = 80;
    opt.test_drive_s = 40;
    return make_domain_pair(11, opt);
  }();
  return pair;
}

TrainConfig quick_config() {
  TrainConfig c;
  c.epochs = 3;
  c.hidden_size = 8;
  c.batch_size = 16;
  c.seed = 5;
  return c;
}

const RnnModel& generic_model() {
  static const RnnModel m = train_generic(small_pair().a.data, quick_config()).model;
  return m;
}

}  // namespace

TEST(Slice, FiftySecondsGiveFortyNineWindows) {
  const auto& b = small_pair().b.data;
  const auto head = slice_head(b.train, 50.0);
  ASSERT_EQ(head.size(), 1u);
  EXPECT_EQ(head[0].samples.front().t, b.train[0].samples.front().t);
  EXPECT_EQ(domain_windows(head, {0.3}).size(), 49u);
  EXPECT_EQ(labelled_seconds(head[0]).back(), 50);
}

TEST(Slice, SpansDrivesInOrder) {
  const auto& b = small_pair().b.data;
  const auto head = slice_head(b.train, 100.0);
  ASSERT_EQ(head.size(), 2u);
  EXPECT_EQ(head[0].id, b.train[0].id);
  EXPECT_EQ(head[1].id, b.train[1].id);
  EXPECT_EQ(labelled_seconds(head[1]).back(), 20);
}

TEST(Slice, RejectsEmptyAndOversizedSlices) {
  const auto& b = small_pair().b.data;
  EXPECT_EQ(code_of([&] { slice_head(b.train, 0.0); }), Errc::SliceTooLong);
  EXPECT_EQ(code_of([&] { slice_head(b.train, -5.0); }), Errc::SliceTooLong);
  EXPECT_EQ(code_of([&] { slice_head(b.train, total_duration(b.train) + 1.0); }), Errc::SliceTooLong);
  EXPECT_NO_THROW(slice_head(b.train, total_duration(b.train)));
}

TEST(Slice, AdaptPartitionTakesPrecedence) {
  auto b = small_pair().b.data;
  b.adapt = {b.test[1]};
  EXPECT_EQ(&adaptation_source(b), &b.adapt);
  b.adapt.clear();
  EXPECT_EQ(&adaptation_source(b), &b.train);
}

TEST(Variants, GenericRequiresASourceDataset) {
  EXPECT_EQ(code_of([&] { train_generic(small_pair().b.data, quick_config()); }), Errc::InvalidConfig);
  DomainDataset empty;
  EXPECT_EQ(code_of([&] { train_generic(empty, quick_config()); }), Errc::EmptyDataset);
}

TEST(Variants, GenericAndSpecificCalibrateTheirOwnRadius) {
  const auto& g = generic_model();
  EXPECT_EQ(g.meta.variant, Variant::G);
  EXPECT_EQ(g.meta.domain_id, "A");
  EXPECT_NEAR(g.meta.radius_m, 0.30, 0.003);
  const auto s = train_specific(small_pair().b.data, quick_config()).model;
  EXPECT_EQ(s.meta.variant, Variant::S);
  EXPECT_NEAR(s.meta.radius_m, 0.33, 0.01);
  EXPECT_EQ(train_generic(small_pair().a.data, quick_config(), 0.5).model.meta.radius_m, 0.5);
}

TEST(Variants, SpecificOnSourceDataMatchesGeneric) {
  const auto s = train_specific(small_pair().a.data, quick_config()).model;
  EXPECT_EQ(s.params, generic_model().params);
  EXPECT_EQ(s.scaler, generic_model().scaler);
}

TEST(Recalibrate, ProducesAnRModelLinkedToItsParent) {
  const auto& g = generic_model();
  auto cfg = recal_config_from(quick_config(), 2);
  const auto r = recalibrate(g, small_pair().b.data, {50.0}, cfg).model;
  EXPECT_EQ(r.meta.variant, Variant::R);
  EXPECT_EQ(r.meta.domain_id, "B");
  EXPECT_EQ(r.meta.parent_hash, model_digest(g));
  EXPECT_EQ(r.meta.slice_seconds, 50.0);
  EXPECT_EQ(r.meta.radius_m, g.meta.radius_m);
  EXPECT_EQ(r.meta.label_range, "source+slice");
  EXPECT_EQ(r.scaler->feature_min, g.scaler->feature_min);
  EXPECT_EQ(r.scaler->feature_max, g.scaler->feature_max);
  EXPECT_LE(r.scaler->label_min, g.scaler->label_min);
  EXPECT_GE(r.scaler->label_max, g.scaler->label_max);
  EXPECT_NE(r.params, g.params);
}

TEST(Recalibrate, RejectsWrongParents) {
  const auto& b = small_pair().b.data;
  const auto cfg = recal_config_from(quick_config(), 1);
  auto s = generic_model();
  s.meta.variant = Variant::S;
  EXPECT_EQ(code_of([&] { recalibrate(s, b, {50.0}, cfg); }), Errc::VariantMismatch);
  auto raw = generic_model();
  raw.meta.epochs_trained = 0;
  EXPECT_EQ(code_of([&] { recalibrate(raw, b, {50.0}, cfg); }), Errc::UntrainedModel);
  EXPECT_EQ(code_of([&] { recalibrate(generic_model(), b, {0.0}, cfg); }), Errc::SliceTooLong);
}

TEST(Recalibrate, FrozenBlocksStayPut) {
  auto cfg = recal_config_from(quick_config(), 1);
  cfg.freeze = {"w_x", "u_h", "b_h"};
  const auto& g = generic_model();
  const auto r = recalibrate(g, small_pair().b.data, {50.0}, cfg).model;
  EXPECT_EQ(r.params.w_x(), g.params.w_x());
  EXPECT_EQ(r.params.u_h(), g.params.u_h());
}

TEST(Recalibrate, WideningKeepsPredictionAtTheAnchor) {
  auto m = generic_model();
  const auto lw = domain_windows(small_pair().b.data.train, {m.meta.radius_m}).at(30);
  const double before = m.predict_eps(lw.window);
  const double z0 = forward(m.params, m.scaler->apply(lw.window)).cache.z;
  const double lo = m.scaler->label_min - 0.7;
  const double hi = m.scaler->label_max + 0.2;
  detail::widen_label_range(m, lo, hi, z0);
  EXPECT_EQ(m.scaler->label_min, lo);
  EXPECT_EQ(m.scaler->label_max, hi);
  EXPECT_NEAR(m.predict_eps(lw.window), before, 1e-9);
  // nearby windows move only to second order
  const auto other = domain_windows(small_pair().b.data.train, {m.meta.radius_m}).at(31);
  EXPECT_NEAR(m.predict_eps(other.window), generic_model().predict_eps(other.window), 0.05);
}

TEST(Recalibrate, WideningIsANoOpInsideTheRange) {
  auto m = generic_model();
  detail::widen_label_range(m, m.scaler->label_min + 0.01, m.scaler->label_max - 0.01, 0.3);
  EXPECT_EQ(m, generic_model());
}

TEST(FeatureShift, IdenticalSetsShowNoShift) {
  const auto w = feature_windows(small_pair().a.data.train);
  const auto r = feature_shift_stats(w, w);
  EXPECT_EQ(r.summary, 0.0);
  EXPECT_TRUE(r.clamp_risk.empty());
  for (double x : r.std_ratio) EXPECT_NEAR(x, 1.0, 1e-12);
  for (double x : r.outside_fraction) EXPECT_EQ(x, 0.0);
}

TEST(FeatureShift, TargetVehicleStandsOutAgainstBootstrap) {
  const auto& p = small_pair();
  const auto r = feature_shift_stats(p.a.data, p.b.data);
  const auto base = bootstrap_shift_baseline(feature_windows(p.a.data.train), 20, 3);
  EXPECT_GT(r.summary, 0.0);
  EXPECT_GT(r.rear_summary, base);
  EXPECT_EQ(r.mean_abs_diff.size(), kWindowFeatures);
}

TEST(FeatureShift, DisjointSpeedRangesFlagClampRisk) {
  const auto slow = generate_drive(exact_vehicle(), constant_script(5.0, 20));
  const auto fast = generate_drive(exact_vehicle(), constant_script(20.0, 20));
  const auto r = feature_shift_stats(feature_windows(std::span(&slow.drive, 1)), feature_windows(std::span(&fast.drive, 1)));
  EXPECT_EQ(r.clamp_risk.size(), kWindowFeatures);
  for (double x : r.std_ratio) EXPECT_TRUE(std::isfinite(x));
  for (double x : r.outside_fraction) EXPECT_EQ(x, 1.0);
  EXPECT_NEAR(r.summary, 15.0 / 0.30, 1e-6);
  EXPECT_EQ(code_of([&] { feature_shift_stats(std::span<const FeatureWindow>{}, feature_windows(std::span(&fast.drive, 1))); }),
            Errc::EmptyDataset);
}
