#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wheelodo/error.hpp"
#include "wheelodo/features.hpp"
#include "wheelodo/hash.hpp"
#include "wheelodo/model.hpp"
#include "wheelodo/random.hpp"
#include "wheelodo/rnn.hpp"

namespace wheelodo {

struct TrainConfig {
  double learning_rate = 0.0007;
  double dropout_rate = 0.05;
  int epochs = 200;
  int batch_size = 64;
  int hidden_size = 32;
  std::uint64_t seed = 1;
  AdamaxConfig adamax;
  std::vector<std::string> freeze;  // parameter blocks held fixed

  void validate() const {
    if (!(learning_rate > 0.0)) fail(Errc::InvalidConfig, "learning_rate must be > 0");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail(Errc::InvalidConfig, "dropout_rate must be in [0, 1)");
    if (epochs < 0) fail(Errc::InvalidConfig, "epochs must be >= 0");
    if (batch_size < 1) fail(Errc::InvalidConfig, "batch_size must be >= 1");
    if (hidden_size < 1) fail(Errc::InvalidConfig, "hidden_size must be >= 1");
  }

  nlohmann::json to_json() const {
    return {{"learning_rate", learning_rate}, {"dropout_rate", dropout_rate}, {"loss", "mae"},
            {"optimizer", "adamax"},          {"beta1", adamax.beta1},       {"beta2", adamax.beta2},
            {"epsilon", adamax.epsilon},      {"epochs", epochs},            {"batch_size", batch_size},
            {"hidden_size", hidden_size},     {"seed", seed},                {"freeze", freeze}};
  }

  std::string hash() const { return hex_digest(fnv1a(to_json().dump())); }
};

struct EpochStats {
  int epoch = 0;
  double mae_norm = 0.0;    // on normalized targets, no dropout
  double mae_metres = 0.0;  // denormalized
};

struct TrainingLog {
  std::vector<EpochStats> epochs;

  std::string to_csv() const {
    std::string out = "epoch,mae_norm,mae_m\n";
    char buf[96];
    for (const auto& e : epochs) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", e.epoch, e.mae_norm, e.mae_metres);
      out += buf;
    }
    return out;
  }
};

struct TrainResult {
  RnnModel model;
  TrainingLog log;
};

/// Clean (no dropout) MAE over a labelled set, in normalized units and metres.
inline EpochStats evaluate_mae(const RnnModel& model, std::span<const LabeledWindow> data) {
  if (!model.scaler) fail(Errc::ScalerMissing, "model has no fitted scaler");
  if (data.empty()) fail(Errc::EmptyInput, "MAE of zero windows");
  ForwardCache cache;
  double norm = 0.0, metres = 0.0;
  for (const auto& lw : data) {
    const auto x = model.scaler->apply(lw.window);
    forward_into(model.params, window_matrix(x), nullptr, cache);
    norm += std::abs(cache.y - model.scaler->apply_label(lw.eps));
    metres += std::abs(model.scaler->invert_label(cache.y) - lw.eps);
  }
  const auto n = static_cast<double>(data.size());
  return {0, norm / n, metres / n};
}

/// Mini-batch BPTT with MAE loss and Adamax. Fully determined by
/// (data, config, init): no wall clock or global RNG is consulted.
///
/// Without `init` the weights are freshly initialised and a scaler is fitted
/// on `data`. With `init` its weights and scaler (if any) are the starting
/// point; a missing scaler is fitted.
inline TrainResult train(std::span<const LabeledWindow> data, const TrainConfig& config,
                         const RnnModel* init = nullptr) {
  config.validate();
  if (data.empty()) fail(Errc::EmptyDataset, "training set is empty");

  TrainResult result;
  RnnModel& model = result.model;
  if (init) {
    if (init->hidden_size() != config.hidden_size ||
        init->params.input_size() != static_cast<Index>(kStepFeatures)) {
      fail(Errc::ShapeMismatch, "initial model has hidden size " + std::to_string(init->hidden_size()) +
                                    ", config expects " + std::to_string(config.hidden_size));
    }
    model = *init;
  } else {
    model.params = init_params(static_cast<Index>(kStepFeatures), config.hidden_size, config.seed);
    model.meta.seed = config.seed;
  }
  model.meta.config_hash = config.hash();
  if (config.epochs == 0) return result;
  if (!model.scaler) model.scaler = Scaler::fit(data);

  const Scaler& scaler = *model.scaler;
  std::vector<FeatureWindow> inputs;
  std::vector<double> targets;
  inputs.reserve(data.size());
  targets.reserve(data.size());
  for (const auto& lw : data) {
    inputs.push_back(scaler.apply(lw.window));
    targets.push_back(scaler.apply_label(lw.eps));
  }

  VectorXd trainable;
  const VectorXd* trainable_ptr = nullptr;
  if (!config.freeze.empty()) {
    trainable = VectorXd::Ones(model.params.size());
    for (const auto& name : config.freeze) {
      const auto [off, len] = model.params.block(name);
      trainable.segment(off, len).setZero();
    }
    trainable_ptr = &trainable;
  }

  Rng order_rng(mix_seed(config.seed, 0x5eed));
  Rng dropout_rng(mix_seed(config.seed, 0xd209));
  AdamaxState opt(model.params.size());
  Gradients grad(model.params.input_size(), model.params.hidden_size());
  ForwardCache cache;
  VectorXd mask(model.params.hidden_size());
  const double keep = 1.0 - config.dropout_rate;
  const bool use_dropout = config.dropout_rate > 0.0;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      const auto n = static_cast<double>(stop - start);
      grad.flat().setZero();
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        if (use_dropout) {
          for (Index j = 0; j < mask.size(); ++j) mask[j] = dropout_rng.uniform() < keep ? 1.0 / keep : 0.0;
        }
        forward_into(model.params, window_matrix(inputs[i]), use_dropout ? &mask : nullptr, cache);
        backward_into(model.params, cache, mae_subgradient(cache.y, targets[i]) / n, grad);
      }
      adamax_step(model.params, opt, grad, config.learning_rate, config.adamax, trainable_ptr);
    }
    auto stats = evaluate_mae(model, data);
    stats.epoch = model.meta.epochs_trained + epoch;
    result.log.epochs.push_back(stats);
  }
  model.meta.epochs_trained += config.epochs;
  return result;
}

}  // namespace wheelodo
