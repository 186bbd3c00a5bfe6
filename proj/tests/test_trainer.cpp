#include <gtest/gtest.h>

#include "tasks.hpp"
#include "wheelodo/model_io.hpp"
#include "wheelodo/trainer.hpp"

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

TEST(TrainConfig, DefaultsAndValidation) {
  const TrainConfig c;
  EXPECT_EQ(c.learning_rate, 0.0007);
  EXPECT_EQ(c.dropout_rate, 0.05);
  EXPECT_EQ(c.hidden_size, 32);
  EXPECT_EQ(c.adamax.beta1, 0.9);
  EXPECT_EQ(c.adamax.beta2, 0.999);
  EXPECT_EQ(c.adamax.epsilon, 1e-8);
  TrainConfig bad;
  bad.dropout_rate = 1.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::InvalidConfig);
  bad = {};
  bad.learning_rate = 0.0;
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::InvalidConfig);
  EXPECT_NE(TrainConfig{}.hash(), bad.hash());
}

TEST(Train, AffineErrorTaskConverges) {
  const auto data = affine_error_task(1);
  TrainConfig c;
  c.hidden_size = 8;
  const auto r = train(data, c);
  ASSERT_EQ(r.log.epochs.size(), 200u);
  EXPECT_EQ(r.log.epochs.front().epoch, 1);
  EXPECT_EQ(r.log.epochs.back().epoch, 200);
  EXPECT_LT(r.log.epochs.back().mae_metres, 0.05);
  EXPECT_LT(r.log.epochs.back().mae_metres, r.log.epochs.front().mae_metres);
  EXPECT_EQ(r.model.meta.epochs_trained, 200);
  EXPECT_TRUE(r.model.trained());
  EXPECT_NEAR(evaluate_mae(r.model, data).mae_metres, r.log.epochs.back().mae_metres, 1e-15);
}

TEST(Train, SameSeedIsBitIdentical) {
  const auto data = affine_error_task(2);
  TrainConfig c;
  c.epochs = 5;
  c.seed = 42;
  const auto a = train(data, c);
  const auto b = train(data, c);
  EXPECT_EQ(model_to_string(a.model), model_to_string(b.model));
  EXPECT_EQ(a.log.to_csv(), b.log.to_csv());
  c.seed = 43;
  EXPECT_NE(model_to_string(train(data, c).model), model_to_string(a.model));
}

TEST(Train, ZeroEpochs) {
  const auto data = affine_error_task(3);
  TrainConfig c;
  c.epochs = 0;
  const auto raw = train(data, c);
  EXPECT_TRUE(raw.log.epochs.empty());
  EXPECT_EQ(raw.model.params, init_params(40, 32, c.seed));
  EXPECT_FALSE(raw.model.trained());

  c.epochs = 3;
  const auto trained = train(data, c);
  c.epochs = 0;
  const auto same = train(data, c, &trained.model);
  EXPECT_EQ(same.model.params, trained.model.params);
  EXPECT_EQ(same.model.scaler, trained.model.scaler);
}

TEST(Train, ContinuationAccumulatesEpochs) {
  const auto data = affine_error_task(3);
  TrainConfig c;
  c.epochs = 2;
  const auto first = train(data, c);
  const auto second = train(data, c, &first.model);
  EXPECT_EQ(second.model.meta.epochs_trained, 4);
  EXPECT_EQ(second.log.epochs.front().epoch, 3);
  EXPECT_EQ(second.model.scaler, first.model.scaler);
}

TEST(Train, FrozenBlocksStayFixed) {
  const auto data = affine_error_task(4);
  TrainConfig c;
  c.epochs = 3;
  const auto first = train(data, c);
  c.freeze = {"w_x", "u_h", "b_h"};
  const auto tuned = train(data, c, &first.model);
  EXPECT_EQ(tuned.model.params.w_x(), first.model.params.w_x());
  EXPECT_EQ(tuned.model.params.u_h(), first.model.params.u_h());
  EXPECT_NE(tuned.model.params.w_o(), first.model.params.w_o());
  c.freeze = {"gates"};
  EXPECT_EQ(code_of([&] { train(data, c, &first.model); }), Errc::InvalidConfig);
}

TEST(Train, Errors) {
  TrainConfig c;
  EXPECT_EQ(code_of([&] { train(std::vector<LabeledWindow>{}, c); }), Errc::EmptyDataset);
  const auto data = affine_error_task(5);
  c.epochs = 1;
  const auto m = train(data, c);
  c.hidden_size = 16;
  EXPECT_EQ(code_of([&] { train(data, c, &m.model); }), Errc::ShapeMismatch);
}

TEST(Train, LogCsv) {
  TrainingLog log;
  log.epochs.push_back({1, 0.5, 0.25});
  EXPECT_EQ(log.to_csv(), "epoch,mae_norm,mae_m\n1,0.5,0.25\n");
}
