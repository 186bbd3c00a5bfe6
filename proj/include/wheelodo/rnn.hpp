#pragma once

// Single-layer Elman RNN with a sigmoid regression head:
//   h_t = tanh(U_h h_{t-1} + W_x x_t + b_h),  y = sigmoid(W_o h_T + b_o)
// trained by backpropagation through time on an MAE loss with Adamax.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wheelodo/error.hpp"
#include "wheelodo/features.hpp"
#include "wheelodo/random.hpp"

namespace wheelodo {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// All trainable parameters in one flat vector, exposed through typed views.
/// Layout: W_x (H x I, column-major), U_h (H x H), b_h (H), W_o (H), b_o (1).
class RnnParams {
 public:
  using MatMap = Eigen::Map<MatrixXd>;
  using ConstMatMap = Eigen::Map<const MatrixXd>;
  using VecMap = Eigen::Map<VectorXd>;
  using ConstVecMap = Eigen::Map<const VectorXd>;

  RnnParams() = default;
  RnnParams(Index input, Index hidden)
      : input_(input), hidden_(hidden), flat_(VectorXd::Zero(flat_size(input, hidden))) {
    if (input < 1 || hidden < 1) fail(Errc::ShapeMismatch, "RNN dimensions must be >= 1");
  }

  static Index flat_size(Index input, Index hidden) { return hidden * input + hidden * hidden + 2 * hidden + 1; }

  Index input_size() const { return input_; }
  Index hidden_size() const { return hidden_; }
  Index size() const { return flat_.size(); }

  MatMap w_x() { return {flat_.data(), hidden_, input_}; }
  MatMap u_h() { return {flat_.data() + off_u(), hidden_, hidden_}; }
  VecMap b_h() { return {flat_.data() + off_bh(), hidden_}; }
  VecMap w_o() { return {flat_.data() + off_wo(), hidden_}; }
  double& b_o() { return flat_[off_bo()]; }

  ConstMatMap w_x() const { return {flat_.data(), hidden_, input_}; }
  ConstMatMap u_h() const { return {flat_.data() + off_u(), hidden_, hidden_}; }
  ConstVecMap b_h() const { return {flat_.data() + off_bh(), hidden_}; }
  ConstVecMap w_o() const { return {flat_.data() + off_wo(), hidden_}; }
  double b_o() const { return flat_[off_bo()]; }

  VectorXd& flat() { return flat_; }
  const VectorXd& flat() const { return flat_; }

  /// Bumped by every optimizer step; caches from older generations are stale.
  std::uint64_t generation() const { return generation_; }
  void touch() { ++generation_; }

  /// Offsets/extent of a named block ("w_x", "u_h", "b_h", "w_o", "b_o").
  std::pair<Index, Index> block(const std::string& name) const {
    if (name == "w_x") return {0, off_u()};
    if (name == "u_h") return {off_u(), hidden_ * hidden_};
    if (name == "b_h") return {off_bh(), hidden_};
    if (name == "w_o") return {off_wo(), hidden_};
    if (name == "b_o") return {off_bo(), 1};
    fail(Errc::InvalidConfig, "unknown parameter block '" + name + "'");
  }

  bool operator==(const RnnParams& o) const {
    return input_ == o.input_ && hidden_ == o.hidden_ && flat_ == o.flat_;
  }

 private:
  Index off_u() const { return hidden_ * input_; }
  Index off_bh() const { return off_u() + hidden_ * hidden_; }
  Index off_wo() const { return off_bh() + hidden_; }
  Index off_bo() const { return off_wo() + hidden_; }

  Index input_ = 0;
  Index hidden_ = 0;
  VectorXd flat_;
  std::uint64_t generation_ = 0;
};

using Gradients = RnnParams;

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct ForwardCache {
  MatrixXd inputs;  // I x T
  MatrixXd hidden;  // H x (T + 1); column 0 is the zero initial state
  VectorXd mask;    // empty, or H scaled keep-mask on the final hidden state
  double z = 0.0;
  double y = 0.0;
  const RnnParams* owner = nullptr;
  std::uint64_t generation = 0;
};

/// Runs the recurrence over the columns of `inputs` (oldest first). `mask`,
/// when given, is the inverted-dropout multiplier on the hidden units feeding
/// the output layer.
inline void forward_into(const RnnParams& p, const Eigen::Ref<const MatrixXd>& inputs, const VectorXd* mask,
                         ForwardCache& cache) {
  if (inputs.rows() != p.input_size() || inputs.cols() < 1) {
    fail(Errc::ShapeMismatch, "window has " + std::to_string(inputs.rows()) + " features, model expects " +
                                  std::to_string(p.input_size()));
  }
  if (mask && mask->size() != p.hidden_size()) fail(Errc::ShapeMismatch, "dropout mask size != hidden size");
  const Index steps = inputs.cols();
  const Index h = p.hidden_size();
  cache.inputs = inputs;
  cache.hidden.resize(h, steps + 1);
  cache.hidden.col(0).setZero();
  const auto w_x = p.w_x();
  const auto u_h = p.u_h();
  const auto b_h = p.b_h();
  for (Index t = 0; t < steps; ++t) {
    cache.hidden.col(t + 1) = (u_h * cache.hidden.col(t) + w_x * inputs.col(t) + b_h).array().tanh().matrix();
  }
  if (mask) {
    cache.mask = *mask;
    cache.z = p.w_o().dot(cache.hidden.col(steps).cwiseProduct(*mask)) + p.b_o();
  } else {
    cache.mask.resize(0);
    cache.z = p.w_o().dot(cache.hidden.col(steps)) + p.b_o();
  }
  cache.y = sigmoid(cache.z);
  cache.owner = &p;
  cache.generation = p.generation();
}

struct ForwardResult {
  double y = 0.0;
  ForwardCache cache;
};

inline Eigen::Map<const MatrixXd> window_matrix(const FeatureWindow& w) {
  return {w.values.data(), static_cast<Index>(kStepFeatures), static_cast<Index>(kWindowSteps)};
}

inline ForwardResult forward(const RnnParams& p, const FeatureWindow& normalized, const VectorXd* mask = nullptr) {
  ForwardResult r;
  forward_into(p, window_matrix(normalized), mask, r.cache);
  r.y = r.cache.y;
  return r;
}

/// Accumulates d(loss)/d(params) into `grad` given d(loss)/dy.
inline void backward_into(const RnnParams& p, const ForwardCache& cache, double d_y, Gradients& grad) {
  if (cache.owner != &p || cache.generation != p.generation()) {
    fail(Errc::StaleCache, "forward cache does not match the current parameters");
  }
  if (grad.input_size() != p.input_size() || grad.hidden_size() != p.hidden_size()) {
    fail(Errc::ShapeMismatch, "gradient buffer shape mismatch");
  }
  const Index steps = cache.inputs.cols();
  const double d_z = d_y * cache.y * (1.0 - cache.y);
  const bool masked = cache.mask.size() != 0;

  VectorXd d_h;
  if (masked) {
    grad.w_o() += d_z * cache.hidden.col(steps).cwiseProduct(cache.mask);
    d_h = d_z * p.w_o().cwiseProduct(cache.mask);
  } else {
    grad.w_o() += d_z * cache.hidden.col(steps);
    d_h = d_z * p.w_o();
  }
  grad.b_o() += d_z;

  auto g_wx = grad.w_x();
  auto g_uh = grad.u_h();
  auto g_bh = grad.b_h();
  const auto u_h = p.u_h();
  for (Index t = steps; t >= 1; --t) {
    const VectorXd d_a = d_h.cwiseProduct((1.0 - cache.hidden.col(t).array().square()).matrix());
    g_wx.noalias() += d_a * cache.inputs.col(t - 1).transpose();
    g_uh.noalias() += d_a * cache.hidden.col(t - 1).transpose();
    g_bh += d_a;
    if (t > 1) d_h.noalias() = u_h.transpose() * d_a;
  }
}

inline Gradients backward(const RnnParams& p, const ForwardCache& cache, double d_y) {
  Gradients g(p.input_size(), p.hidden_size());
  backward_into(p, cache, d_y, g);
  return g;
}

inline double mae_loss(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size()) fail(Errc::LengthMismatch, "prediction/target lengths differ");
  if (preds.empty()) fail(Errc::EmptyInput, "MAE of zero pairs");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - targets[i]);
  return s / static_cast<double>(preds.size());
}

/// d|pred - target|/d pred with the subgradient at zero taken as 0.
inline double mae_subgradient(double pred, double target) {
  const double d = pred - target;
  return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
}

struct AdamaxConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamaxState {
  VectorXd m;
  VectorXd u;
  long step = 0;

  explicit AdamaxState(Index n = 0) : m(VectorXd::Zero(n)), u(VectorXd::Zero(n)) {}
};

/// One Adamax update. `trainable` (optional) holds 1 for updated and 0 for
/// frozen entries.
inline void adamax_step(RnnParams& params, AdamaxState& state, const Gradients& grad, double lr,
                        const AdamaxConfig& cfg = {}, const VectorXd* trainable = nullptr) {
  auto& theta = params.flat();
  const auto& g = grad.flat();
  if (g.size() != theta.size() || state.m.size() != theta.size()) fail(Errc::ShapeMismatch, "optimizer state shape");
  ++state.step;
  const double step_size = lr / (1.0 - std::pow(cfg.beta1, static_cast<double>(state.step)));
  for (Index i = 0; i < theta.size(); ++i) {
    if (trainable && (*trainable)[i] == 0.0) continue;
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g[i];
    state.u[i] = std::max(cfg.beta2 * state.u[i], std::abs(g[i]));
    theta[i] -= step_size * state.m[i] / (state.u[i] + cfg.epsilon);
  }
  params.touch();
}

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per block; biases start at zero.
inline RnnParams init_params(Index input, Index hidden, std::uint64_t seed) {
  RnnParams p(input, hidden);
  Rng rng(mix_seed(seed, 0x1417));
  auto fill = [&rng](auto block, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (Index c = 0; c < block.cols(); ++c)
      for (Index r = 0; r < block.rows(); ++r) block(r, c) = rng.uniform(-bound, bound);
  };
  fill(p.w_x(), static_cast<double>(input));
  fill(p.u_h(), static_cast<double>(hidden));
  fill(p.w_o(), static_cast<double>(hidden));
  return p;
}

}  // namespace wheelodo
