#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "arisppo/neural.hpp"

namespace arisppo {

struct ActorCriticConfig {
  int obs_dim = 9;
  int hidden = 64;
  int trunk_layers = 2;
  int critic_layers = 2;
  int discrete_dim = 5;  // 0 disables the maneuver head
  int continuous_dim = 18;
  double init_log_std = 0.0;
  bool shared_critic = false;  // value head on the actor trunk instead of a separate network
};

/// Shared-trunk dual-head actor plus critic.
///
/// Parameter groups, in order: trunk, discrete_head, continuous_head,
/// log_std, critic. The discrete head is absent (zero parameters) when
/// discrete_dim is 0.
class ActorCritic {
 public:
  static constexpr int kNumGroups = 5;
  enum Group { trunk = 0, discrete_head = 1, continuous_head = 2, log_std = 3, critic = 4 };
  static constexpr const char* group_name(int g) {
    constexpr const char* names[] = {"trunk", "discrete_head", "continuous_head", "log_std", "critic"};
    return names[g];
  }

  using Gradients = std::array<VectorXd, kNumGroups>;

  struct Batch {
    MatrixXd logits;  // discrete_dim x B
    MatrixXd mean;    // continuous_dim x B
    VectorXd log_std;  // clamped
    VectorXd values;  // B
    Mlp::Cache trunk_cache, discrete_cache, continuous_cache, critic_cache;
  };

  ActorCritic() = default;

  ActorCritic(const ActorCriticConfig& cfg, Rng& init_rng) : cfg_(cfg) {
    if (cfg.obs_dim < 1 || cfg.hidden < 1 || cfg.trunk_layers < 1 || cfg.critic_layers < 1 ||
        cfg.continuous_dim < 1 || cfg.discrete_dim < 0) {
      throw ShapeError("ActorCritic: invalid network configuration");
    }
    std::vector<int> trunk_sizes{cfg.obs_dim};
    for (int i = 0; i < cfg.trunk_layers; ++i) trunk_sizes.push_back(cfg.hidden);
    trunk_ = Mlp(trunk_sizes, Activation::tanh, Activation::tanh);
    if (cfg.discrete_dim > 0) discrete_ = Mlp({cfg.hidden, cfg.discrete_dim}, Activation::identity, Activation::identity);
    continuous_ = Mlp({cfg.hidden, cfg.continuous_dim}, Activation::identity, Activation::identity);
    if (cfg.shared_critic) {
      critic_ = Mlp({cfg.hidden, 1}, Activation::identity, Activation::identity);
    } else {
      std::vector<int> critic_sizes{cfg.obs_dim};
      for (int i = 0; i < cfg.critic_layers; ++i) critic_sizes.push_back(cfg.hidden);
      critic_sizes.push_back(1);
      critic_ = Mlp(critic_sizes, Activation::tanh, Activation::identity);
    }
    log_std_ = VectorXd::Constant(cfg.continuous_dim, cfg.init_log_std);

    const double hidden_gain = std::sqrt(2.0);
    trunk_.init_orthogonal(init_rng, hidden_gain, hidden_gain);
    if (has_discrete()) discrete_.init_orthogonal(init_rng, hidden_gain, 0.01);
    continuous_.init_orthogonal(init_rng, hidden_gain, 0.01);
    critic_.init_orthogonal(init_rng, hidden_gain, 1.0);
  }

  [[nodiscard]] const ActorCriticConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] bool has_discrete() const noexcept { return cfg_.discrete_dim > 0; }

  [[nodiscard]] const Mlp& trunk_net() const noexcept { return trunk_; }
  [[nodiscard]] const Mlp& discrete_net() const noexcept { return discrete_; }
  [[nodiscard]] const Mlp& continuous_net() const noexcept { return continuous_; }
  [[nodiscard]] const Mlp& critic_net() const noexcept { return critic_; }

  [[nodiscard]] const VectorXd& group(int g) const {
    switch (g) {
      case trunk: return trunk_.params();
      case discrete_head: return discrete_.params();
      case continuous_head: return continuous_.params();
      case log_std: return log_std_;
      case critic: return critic_.params();
      default: throw std::out_of_range("ActorCritic::group");
    }
  }
  VectorXd& mutable_group(int g) {
    switch (g) {
      case trunk: return trunk_.mutable_params();
      case discrete_head: return discrete_.mutable_params();
      case continuous_head: return continuous_.mutable_params();
      case log_std: return log_std_;
      case critic: return critic_.mutable_params();
      default: throw std::out_of_range("ActorCritic::mutable_group");
    }
  }

  [[nodiscard]] Gradients zero_gradients() const {
    Gradients g;
    for (int i = 0; i < kNumGroups; ++i) g[static_cast<std::size_t>(i)] = VectorXd::Zero(group(i).size());
    return g;
  }

  [[nodiscard]] std::size_t num_params() const {
    std::size_t n = 0;
    for (int i = 0; i < kNumGroups; ++i) n += static_cast<std::size_t>(group(i).size());
    return n;
  }

  /// obs is obs_dim x B.
  [[nodiscard]] Batch forward(const MatrixXd& obs) const {
    Batch b;
    const MatrixXd features = trunk_.forward(obs, &b.trunk_cache);
    if (has_discrete()) b.logits = discrete_.forward(features, &b.discrete_cache);
    b.mean = continuous_.forward(features, &b.continuous_cache);
    b.log_std = log_std_.unaryExpr([](double v) { return clamp_log_std(v); });
    const MatrixXd v = cfg_.shared_critic ? critic_.forward(features, &b.critic_cache)
                                          : critic_.forward(obs, &b.critic_cache);
    b.values = v.row(0).transpose();
    return b;
  }

  [[nodiscard]] PolicyOutput policy(const VectorXd& obs) const {
    const Batch b = forward(MatrixXd(obs));
    PolicyOutput out;
    if (has_discrete()) out.logits = b.logits.col(0);
    out.mean = b.mean.col(0);
    out.log_std = b.log_std;
    return out;
  }

  [[nodiscard]] double value(const VectorXd& obs) const {
    const MatrixXd v = cfg_.shared_critic ? critic_.forward(trunk_.forward(MatrixXd(obs))) : critic_.forward(MatrixXd(obs));
    return v(0, 0);
  }

  /// Backpropagates loss gradients w.r.t. the batch outputs. d_log_std is
  /// w.r.t. the clamped value; it is zeroed where the clamp is active.
  [[nodiscard]] Gradients backward(const Batch& b, const MatrixXd& d_logits, const MatrixXd& d_mean,
                                   const VectorXd& d_log_std, const VectorXd& d_values) const {
    Gradients g = zero_gradients();
    MatrixXd d_features = continuous_.backward(b.continuous_cache, d_mean, g[continuous_head]);
    if (has_discrete()) d_features += discrete_.backward(b.discrete_cache, d_logits, g[discrete_head]);
    const MatrixXd dv = d_values.transpose();
    if (cfg_.shared_critic) {
      d_features += critic_.backward(b.critic_cache, dv, g[critic]);
    } else {
      (void)critic_.backward(b.critic_cache, dv, g[critic]);
    }
    (void)trunk_.backward(b.trunk_cache, d_features, g[trunk]);
    for (Eigen::Index j = 0; j < log_std_.size(); ++j) {
      const bool inside = log_std_[j] > kLogStdMin && log_std_[j] < kLogStdMax;
      g[log_std][j] = inside ? d_log_std[j] : 0.0;
    }
    return g;
  }

  /// Sub-network layer-size chains, for the multiply-count formula.
  [[nodiscard]] NetworkSizes sizes() const {
    NetworkSizes s;
    s.shared = trunk_.sizes();
    if (has_discrete()) s.discrete = discrete_.sizes();
    s.continuous = continuous_.sizes();
    s.critic = critic_.sizes();
    return s;
  }

 private:
  ActorCriticConfig cfg_;
  Mlp trunk_;
  Mlp discrete_;
  Mlp continuous_;
  Mlp critic_;
  VectorXd log_std_;
};

}  // namespace arisppo
