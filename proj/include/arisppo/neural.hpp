#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "arisppo/errors.hpp"
#include "arisppo/rng.hpp"

namespace arisppo {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation { identity, tanh };

/// Fully-connected feed-forward network.
///
/// All parameters live in one contiguous vector, layer by layer, each layer
/// as its weight matrix (out x in, column-major) followed by its bias. The
/// optimizer and checkpoint code treat the network as that flat vector.
class Mlp {
 public:
  /// Intermediates of one forward pass, needed by backward().
  struct Cache {
    const Mlp* owner = nullptr;
    std::uint64_t version = 0;
    std::vector<MatrixXd> activations;  // [0] is the input, [l + 1] the output of layer l
  };

  Mlp() = default;

  /// sizes = {input, hidden..., output}. Hidden layers use `hidden`, the last
  /// layer uses `output`.
  Mlp(std::vector<int> sizes, Activation hidden, Activation output) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw ShapeError("Mlp: need at least input and output sizes");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw ShapeError("Mlp: layer sizes must be >= 1");
      offsets_.push_back(total);
      total += static_cast<std::size_t>(sizes_[l] * sizes_[l + 1] + sizes_[l + 1]);
      activations_.push_back(l + 2 == sizes_.size() ? output : hidden);
    }
    params_ = VectorXd::Zero(static_cast<Eigen::Index>(total));
  }

  [[nodiscard]] int input_size() const noexcept { return sizes_.front(); }
  [[nodiscard]] int output_size() const noexcept { return sizes_.back(); }
  [[nodiscard]] std::size_t num_layers() const noexcept { return offsets_.size(); }
  [[nodiscard]] const std::vector<int>& sizes() const noexcept { return sizes_; }
  [[nodiscard]] Activation activation(std::size_t layer) const { return activations_.at(layer); }
  [[nodiscard]] std::size_t num_params() const noexcept { return static_cast<std::size_t>(params_.size()); }
  /// Number of weight-matrix entries (what the multiply count refers to).
  [[nodiscard]] std::size_t num_weights() const noexcept {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) n += static_cast<std::size_t>(sizes_[l] * sizes_[l + 1]);
    return n;
  }

  [[nodiscard]] const VectorXd& params() const noexcept { return params_; }
  /// Any write access invalidates outstanding caches.
  VectorXd& mutable_params() noexcept {
    ++version_;
    return params_;
  }

  [[nodiscard]] Eigen::Map<const MatrixXd> weight(std::size_t l) const {
    return {params_.data() + offsets_.at(l), sizes_[l + 1], sizes_[l]};
  }
  [[nodiscard]] Eigen::Map<const VectorXd> bias(std::size_t l) const {
    return {params_.data() + offsets_.at(l) + sizes_[l] * sizes_[l + 1], sizes_[l + 1]};
  }
  Eigen::Map<MatrixXd> weight(std::size_t l) {
    ++version_;
    return {params_.data() + offsets_.at(l), sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<VectorXd> bias(std::size_t l) {
    ++version_;
    return {params_.data() + offsets_.at(l) + sizes_[l] * sizes_[l + 1], sizes_[l + 1]};
  }

  /// Orthogonal initialization: hidden layers scaled by hidden_gain, the
  /// output layer by output_gain, zero biases.
  void init_orthogonal(Rng& rng, double hidden_gain, double output_gain) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const int rows = sizes_[l + 1];
      const int cols = sizes_[l];
      const bool tall = rows >= cols;
      MatrixXd g(tall ? rows : cols, tall ? cols : rows);
      for (Eigen::Index j = 0; j < g.cols(); ++j) {
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
      }
      Eigen::HouseholderQR<MatrixXd> qr(g);
      MatrixXd q = qr.householderQ() * MatrixXd::Identity(g.rows(), g.cols());
      const MatrixXd r = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
      for (Eigen::Index j = 0; j < q.cols(); ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
      }
      const double gain = l + 1 == num_layers() ? output_gain : hidden_gain;
      weight(l) = gain * (tall ? q : MatrixXd(q.transpose()));
      bias(l).setZero();
    }
  }

  /// Batched forward; x is input_size x batch.
  [[nodiscard]] MatrixXd forward(const MatrixXd& x, Cache* cache = nullptr) const {
    if (x.rows() != input_size()) {
      throw ShapeError("Mlp::forward: input has " + std::to_string(x.rows()) + " rows, expected " +
                       std::to_string(input_size()));
    }
    if (cache) {
      cache->owner = this;
      cache->version = version_;
      cache->activations.clear();
      cache->activations.push_back(x);
    }
    MatrixXd a = x;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      MatrixXd z = weight(l) * a;
      z.colwise() += bias(l);
      if (activations_[l] == Activation::tanh) z = z.array().tanh().matrix();
      a = std::move(z);
      if (cache) cache->activations.push_back(a);
    }
    return a;
  }

  [[nodiscard]] VectorXd forward(const VectorXd& x) const { return forward(MatrixXd(x)).col(0); }

  /// Reverse-mode pass. Adds parameter gradients into grad_params (same
  /// layout as params()) and returns the gradient w.r.t. the input.
  MatrixXd backward(const Cache& cache, const MatrixXd& grad_out, VectorXd& grad_params) const {
    if (cache.owner != this || cache.version != version_ || cache.activations.size() != num_layers() + 1) {
      throw StateError("Mlp::backward: cache does not belong to the current parameters");
    }
    if (grad_params.size() != params_.size()) throw ShapeError("Mlp::backward: gradient buffer size mismatch");
    if (grad_out.rows() != output_size() || grad_out.cols() != cache.activations.back().cols()) {
      throw ShapeError("Mlp::backward: grad_out shape mismatch");
    }
    MatrixXd delta = grad_out;
    for (std::size_t l = num_layers(); l-- > 0;) {
      const MatrixXd& out = cache.activations[l + 1];
      const MatrixXd& in = cache.activations[l];
      if (activations_[l] == Activation::tanh) delta = (delta.array() * (1.0 - out.array().square())).matrix();
      Eigen::Map<MatrixXd> gw(grad_params.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
      Eigen::Map<VectorXd> gb(grad_params.data() + offsets_[l] + sizes_[l] * sizes_[l + 1], sizes_[l + 1]);
      gw.noalias() += delta * in.transpose();
      gb += delta.rowwise().sum();
      delta = weight(l).transpose() * delta;
    }
    return delta;
  }

 private:
  std::vector<int> sizes_;
  std::vector<Activation> activations_;
  std::vector<std::size_t> offsets_;
  VectorXd params_;
  std::uint64_t version_ = 0;
};

// ---------------------------------------------------------------------------
// Distributions

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
inline const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

inline double clamp_log_std(double v) noexcept { return std::clamp(v, kLogStdMin, kLogStdMax); }

/// Max-subtracted log-softmax.
inline VectorXd log_softmax(const VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

inline VectorXd softmax(const VectorXd& logits) { return log_softmax(logits).array().exp().matrix(); }

inline double categorical_entropy(const VectorXd& logits) {
  const VectorXd lp = log_softmax(logits);
  return -(lp.array().exp() * lp.array()).sum();
}

/// Sum of independent Gaussian log-densities. log_std is clamped.
inline double gaussian_log_prob(const VectorXd& x, const VectorXd& mean, const VectorXd& log_std) {
  double lp = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double ls = clamp_log_std(log_std[j]);
    const double z = (x[j] - mean[j]) * std::exp(-ls);
    lp += -0.5 * z * z - ls - kHalfLog2Pi;
  }
  return lp;
}

inline double gaussian_entropy(const VectorXd& log_std) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < log_std.size(); ++j) h += clamp_log_std(log_std[j]) + 0.5 + kHalfLog2Pi;
  return h;
}

/// Policy head outputs for one state.
struct PolicyOutput {
  VectorXd logits;   // maneuver logits; empty when the maneuver is not learned
  VectorXd mean;     // raw continuous means
  VectorXd log_std;  // state-independent, clamped to [-5, 2]
};

struct LogProbs {
  double logp_discrete = 0.0;
  double logp_continuous = 0.0;
  double entropy_discrete = 0.0;
  double entropy_continuous = 0.0;
};

inline LogProbs log_prob_and_entropy(const PolicyOutput& out, int maneuver, const VectorXd& raw) {
  LogProbs r;
  if (out.logits.size() > 0) {
    const VectorXd lp = log_softmax(out.logits);
    r.logp_discrete = lp[maneuver];
    r.entropy_discrete = -(lp.array().exp() * lp.array()).sum();
  }
  r.logp_continuous = gaussian_log_prob(raw, out.mean, out.log_std);
  r.entropy_continuous = gaussian_entropy(out.log_std);
  return r;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double lr = 2.75e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  VectorXd m;
  VectorXd v;
  long step = 0;
  AdamConfig config;

  AdamState() = default;
  AdamState(Eigen::Index n, AdamConfig cfg) : m(VectorXd::Zero(n)), v(VectorXd::Zero(n)), config(cfg) {}
};

/// Bias-corrected Adam update in place. Returns false, leaving parameters and
/// moments untouched, if any gradient entry is non-finite.
inline bool adam_step(VectorXd& params, const VectorXd& grads, AdamState& s) {
  if (params.size() != grads.size() || s.m.size() != params.size() || s.v.size() != params.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment sizes differ");
  }
  if (!grads.allFinite()) return false;
  const auto& c = s.config;
  ++s.step;
  s.m = c.beta1 * s.m + (1.0 - c.beta1) * grads;
  s.v = c.beta2 * s.v + (1.0 - c.beta2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.step));
  params.array() -= c.lr * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + c.eps);
  return true;
}

// ---------------------------------------------------------------------------
// Complexity

/// sum_q n_q * n_{q-1} over a layer-size chain.
inline long weight_multiplies(std::span<const int> sizes) {
  long n = 0;
  for (std::size_t q = 1; q < sizes.size(); ++q) n += static_cast<long>(sizes[q]) * sizes[q - 1];
  return n;
}

/// Layer-size chains of the sub-networks. Head chains start at the trunk's
/// output width.
struct NetworkSizes {
  std::vector<int> shared;
  std::vector<int> discrete;
  std::vector<int> continuous;
  std::vector<int> critic;
};

struct ParameterCount {
  long shared = 0;
  long discrete = 0;
  long continuous = 0;
  long critic = 0;

  /// The actor total used as the per-iteration multiply count.
  [[nodiscard]] long actor() const noexcept { return shared + discrete + continuous; }
};

inline ParameterCount parameter_count(const NetworkSizes& s) {
  return {weight_multiplies(s.shared), weight_multiplies(s.discrete), weight_multiplies(s.continuous),
          weight_multiplies(s.critic)};
}

}  // namespace arisppo
