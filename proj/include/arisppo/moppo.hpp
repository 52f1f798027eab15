#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "arisppo/actor_critic.hpp"
#include "arisppo/env.hpp"
#include "arisppo/errors.hpp"
#include "arisppo/neural.hpp"
#include "arisppo/rng.hpp"
#include "arisppo/scenario.hpp"

namespace arisppo {

// ---------------------------------------------------------------------------
// Policy variants

/// Full MO-PPO and the comparators built from it.
enum class Variant {
  moppo,         // maneuver + phases + power learned, NOMA rates
  hover,         // maneuver fixed to hover
  random_phase,  // phases drawn uniformly each slot, not learned
  oma,           // full MO-PPO scored with the OMA rate model
};

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::moppo: return "moppo";
    case Variant::hover: return "hppo";
    case Variant::random_phase: return "random-ps";
    case Variant::oma: return "oma";
  }
  return "?";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "moppo") return Variant::moppo;
  if (s == "hppo") return Variant::hover;
  if (s == "random-ps") return Variant::random_phase;
  if (s == "oma") return Variant::oma;
  throw ConfigError("unknown policy '" + s + "' (expected moppo, hppo, random-ps or oma)");
}

inline RateModel rate_model_for(Variant v) noexcept { return v == Variant::oma ? RateModel::oma : RateModel::noma; }

/// Which parts of the hybrid action the policy emits.
struct ActionLayout {
  bool learn_maneuver = true;
  bool learn_phases = true;
  int ris_elements = 16;
  int cells = 2;

  [[nodiscard]] int discrete_dim() const noexcept { return learn_maneuver ? kNumManeuvers : 0; }
  /// Raw continuous vector: [phases (if learned), splits].
  [[nodiscard]] int continuous_dim() const noexcept { return (learn_phases ? ris_elements : 0) + cells; }
};

inline ActionLayout layout_for(Variant v, const Scenario& s) {
  return {v != Variant::hover, v != Variant::random_phase, s.ris_elements, s.num_cells()};
}

// ---------------------------------------------------------------------------
// Configuration

struct TrainConfig {
  int episodes = 750;
  int epochs = 20;
  int batch_size = 128;
  int segment = 50;  // n-step horizon for the advantage
  double clip = 0.1;
  double gamma = 0.98;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double lr = 2.75e-4;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  bool normalize_advantages = true;
  double reward_scale = 0.002;  // applied to rewards seen by the learner only
  int hidden = 64;
  double init_log_std = -0.5;
  bool shared_critic = false;

  void validate(const Scenario& s) const {
    auto require = [](bool ok, const char* field, const char* what) {
      if (!ok) throw ConfigError(std::string("train.") + field + ": " + what);
    };
    require(episodes >= 1, "episodes", "must be >= 1");
    require(epochs >= 1, "epochs", "must be >= 1");
    require(batch_size >= 1, "batch_size", "must be >= 1");
    require(segment >= 1, "segment", "must be >= 1");
    require(segment <= s.slots_per_episode, "segment", "must not exceed slots_per_episode");
    require(clip > 0.0 && clip < 1.0, "clip", "must lie in (0, 1)");
    require(gamma > 0.0 && gamma <= 1.0, "gamma", "must lie in (0, 1]");
    require(std::isfinite(value_coef) && value_coef >= 0.0, "value_coef", "must be >= 0");
    require(std::isfinite(entropy_coef) && entropy_coef >= 0.0, "entropy_coef", "must be >= 0");
    require(std::isfinite(lr) && lr >= 0.0, "lr", "must be >= 0");
    require(std::isfinite(max_grad_norm), "max_grad_norm", "must be finite");
    require(std::isfinite(reward_scale) && reward_scale > 0.0, "reward_scale", "must be > 0");
    require(hidden >= 1, "hidden", "must be >= 1");
    require(std::isfinite(init_log_std), "init_log_std", "must be finite");
  }
};

inline json to_json(const TrainConfig& c) {
  return json{{"episodes", c.episodes},         {"epochs", c.epochs},
              {"batch_size", c.batch_size},     {"segment", c.segment},
              {"clip", c.clip},                 {"gamma", c.gamma},
              {"value_coef", c.value_coef},     {"entropy_coef", c.entropy_coef},
              {"lr", c.lr},                     {"max_grad_norm", c.max_grad_norm},
              {"normalize_advantages", c.normalize_advantages},
              {"reward_scale", c.reward_scale}, {"hidden", c.hidden},
              {"init_log_std", c.init_log_std}, {"shared_critic", c.shared_critic}};
}

inline TrainConfig train_config_from_json(const json& doc) {
  using detail::get_number;
  const std::string w = "train";
  detail::reject_unknown(doc,
                         {"episodes", "epochs", "batch_size", "segment", "clip", "gamma", "value_coef",
                          "entropy_coef", "lr", "max_grad_norm", "normalize_advantages", "reward_scale",
                          "hidden", "init_log_std", "shared_critic"},
                         w);
  TrainConfig c;
  c.episodes = get_number(doc, "episodes", c.episodes, w);
  c.epochs = get_number(doc, "epochs", c.epochs, w);
  c.batch_size = get_number(doc, "batch_size", c.batch_size, w);
  c.segment = get_number(doc, "segment", c.segment, w);
  c.clip = get_number(doc, "clip", c.clip, w);
  c.gamma = get_number(doc, "gamma", c.gamma, w);
  c.value_coef = get_number(doc, "value_coef", c.value_coef, w);
  c.entropy_coef = get_number(doc, "entropy_coef", c.entropy_coef, w);
  c.lr = get_number(doc, "lr", c.lr, w);
  c.max_grad_norm = get_number(doc, "max_grad_norm", c.max_grad_norm, w);
  c.normalize_advantages = get_number(doc, "normalize_advantages", c.normalize_advantages, w);
  c.reward_scale = get_number(doc, "reward_scale", c.reward_scale, w);
  c.hidden = get_number(doc, "hidden", c.hidden, w);
  c.init_log_std = get_number(doc, "init_log_std", c.init_log_std, w);
  c.shared_critic = get_number(doc, "shared_critic", c.shared_critic, w);
  return c;
}

// ---------------------------------------------------------------------------
// Estimators and objectives

/// n-step advantages for one contiguous segment.
///
/// Entry t uses the rewards from t to the segment end and bootstraps with
/// `bootstrap` (the value of the state after the segment, 0 if the episode
/// ended there):
///   A_t = sum_{k=t}^{n-1} gamma^{k-t} r_k + gamma^{n-t} V_boot - V(s_t)
inline std::vector<double> advantage_nstep(std::span<const double> rewards, std::span<const double> values,
                                           double bootstrap, double gamma) {
  if (rewards.empty()) throw StateError("advantage_nstep: empty segment");
  if (values.size() != rewards.size()) throw ShapeError("advantage_nstep: rewards and values differ in length");
  std::vector<double> adv(rewards.size());
  double ret = bootstrap;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    ret = rewards[t] + gamma * ret;
    adv[t] = ret - values[t];
  }
  return adv;
}

inline double clip_ratio(double ratio, double epsilon) noexcept {
  return std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
}

/// min(r A, clip(r, 1-eps, 1+eps) A).
inline double clipped_objective(double ratio, double advantage, double epsilon) noexcept {
  return std::min(ratio * advantage, clip_ratio(ratio, epsilon) * advantage);
}

/// Per-sample loss: the negated clipped surrogate, r = exp(logp_new - logp_old).
inline double clipped_loss(double logp_new, double logp_old, double advantage, double epsilon) noexcept {
  return -clipped_objective(std::exp(logp_new - logp_old), advantage, epsilon);
}

/// d(clipped_loss)/d(logp_new); zero where the clipped branch is the minimum.
inline double clipped_loss_grad(double logp_new, double logp_old, double advantage, double epsilon) noexcept {
  const double r = std::exp(logp_new - logp_old);
  return r * advantage <= clip_ratio(r, epsilon) * advantage ? -r * advantage : 0.0;
}

// ---------------------------------------------------------------------------
// Agent

/// Trained networks plus the action layout they were trained for.
class Agent {
 public:
  struct Decision {
    int maneuver = static_cast<int>(Maneuver::hover);
    VectorXd raw;  // continuous sample in raw (pre-squash) space
    HybridAction action;
    double logp_discrete = 0.0;
    double logp_continuous = 0.0;
    double value = 0.0;
  };

  Agent() = default;
  Agent(Variant variant, ActionLayout layout, ActorCritic net)
      : variant_(variant), layout_(layout), net_(std::move(net)) {}

  static Agent create(Variant variant, const Scenario& s, const TrainConfig& cfg, Rng& init_rng) {
    const ActionLayout layout = layout_for(variant, s);
    ActorCriticConfig ac;
    ac.obs_dim = s.observation_dim();
    ac.hidden = cfg.hidden;
    ac.discrete_dim = layout.discrete_dim();
    ac.continuous_dim = layout.continuous_dim();
    ac.init_log_std = cfg.init_log_std;
    ac.shared_critic = cfg.shared_critic;
    return Agent(variant, layout, ActorCritic(ac, init_rng));
  }

  [[nodiscard]] Variant variant() const noexcept { return variant_; }
  [[nodiscard]] const ActionLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] const ActorCritic& net() const noexcept { return net_; }
  ActorCritic& net() noexcept { return net_; }

  /// Turns a sampled (maneuver, raw) pair into an environment action. Phases
  /// that are not learned are drawn uniformly on [-pi, pi) from phase_rng.
  [[nodiscard]] HybridAction to_action(int maneuver, const VectorXd& raw, Rng& phase_rng) const {
    const int k = layout_.ris_elements;
    HybridAction a;
    a.maneuver = layout_.learn_maneuver ? static_cast<Maneuver>(maneuver) : Maneuver::hover;
    std::vector<double> theta(static_cast<std::size_t>(k));
    const int split_offset = layout_.learn_phases ? k : 0;
    for (int i = 0; i < k; ++i) {
      theta[static_cast<std::size_t>(i)] = layout_.learn_phases
                                                ? squash_phase(raw[i])
                                                : phase_rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
    std::vector<double> lambda(static_cast<std::size_t>(layout_.cells));
    for (int i = 0; i < layout_.cells; ++i) lambda[static_cast<std::size_t>(i)] = squash_split(raw[split_offset + i]);
    a.phases = PhaseConfig(std::move(theta));
    a.split = PowerSplit(std::move(lambda));
    return a;
  }

  /// Samples (or, when deterministic, takes the argmax / mean of) the policy.
  [[nodiscard]] Decision act(const std::vector<double>& obs, Rng& policy_rng, Rng& phase_rng,
                             bool deterministic) const {
    const VectorXd x = Eigen::Map<const VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
    const auto batch = net_.forward(MatrixXd(x));
    Decision d;
    d.value = batch.values[0];
    if (net_.has_discrete()) {
      const VectorXd logits = batch.logits.col(0);
      const VectorXd lp = log_softmax(logits);
      if (deterministic) {
        Eigen::Index best = 0;
        logits.maxCoeff(&best);
        d.maneuver = static_cast<int>(best);
      } else {
        const double u = policy_rng.uniform();
        double acc = 0.0;
        d.maneuver = static_cast<int>(lp.size()) - 1;
        for (Eigen::Index j = 0; j < lp.size(); ++j) {
          acc += std::exp(lp[j]);
          if (u < acc) {
            d.maneuver = static_cast<int>(j);
            break;
          }
        }
      }
      d.logp_discrete = lp[d.maneuver];
    }
    const VectorXd mean = batch.mean.col(0);
    d.raw = mean;
    if (!deterministic) {
      for (Eigen::Index j = 0; j < mean.size(); ++j) d.raw[j] = mean[j] + std::exp(batch.log_std[j]) * policy_rng.normal();
    }
    d.logp_continuous = gaussian_log_prob(d.raw, mean, batch.log_std);
    d.action = to_action(d.maneuver, d.raw, phase_rng);
    return d;
  }

 private:
  Variant variant_ = Variant::moppo;
  ActionLayout layout_;
  ActorCritic net_;
};

// ---------------------------------------------------------------------------
// Training

struct Transition {
  VectorXd obs;
  int maneuver = 0;
  VectorXd raw;
  double logp_d_old = 0.0;
  double logp_c_old = 0.0;
  double reward = 0.0;  // as returned by the environment (unscaled)
  double value = 0.0;
  bool done = false;
  double bootstrap_value = 0.0;  // V of the state after this transition's segment
  double advantage = 0.0;
  double value_target = 0.0;
};

struct EpisodeMetrics {
  int episode = 0;
  double cumulative_reward = 0.0;
  double mean_sum_rate = 0.0;
  double qos_violation_fraction = 0.0;
  int safety_violations = 0;
  double loss_discrete = 0.0;
  double loss_continuous = 0.0;
  double value_loss = 0.0;
  double entropy_discrete = 0.0;
  double entropy_continuous = 0.0;
  double final_x = 0.0;
  double final_y = 0.0;
};

struct UpdateStats {
  double loss_discrete = 0.0;
  double loss_continuous = 0.0;
  double value_loss = 0.0;
  double entropy_discrete = 0.0;
  double entropy_continuous = 0.0;
  int skipped_steps = 0;
};

/// Per-batch loss terms and their gradients w.r.t. the network outputs.
struct LossBreakdown {
  double loss_discrete = 0.0;
  double loss_continuous = 0.0;
  double value_loss = 0.0;
  double entropy_discrete = 0.0;
  double entropy_continuous = 0.0;
  MatrixXd d_logits;
  MatrixXd d_mean;
  VectorXd d_log_std;
  VectorXd d_values;

  [[nodiscard]] double total(const TrainConfig& c) const {
    return loss_discrete + loss_continuous + c.value_coef * value_loss -
           c.entropy_coef * (entropy_discrete + entropy_continuous);
  }
};

/// Which terms of the overall objective to differentiate. Used to check that
/// the two actor objectives stay decoupled.
struct LossTerms {
  bool discrete = true;
  bool continuous = true;
  bool value = true;
  bool entropy = true;
};

/// Overall objective L_d + L_c + c_v * MSE - c_e * (H_d + H_c) on one batch,
/// each a mean over the batch.
inline LossBreakdown ppo_loss(const ActorCritic::Batch& b, std::span<const Transition* const> samples,
                              std::span<const double> advantages, const TrainConfig& c, LossTerms terms = {}) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  LossBreakdown out;
  out.d_logits = MatrixXd::Zero(b.logits.rows(), n);
  out.d_mean = MatrixXd::Zero(b.mean.rows(), n);
  out.d_log_std = VectorXd::Zero(b.log_std.size());
  out.d_values = VectorXd::Zero(n);
  const VectorXd inv_std = (-b.log_std.array()).exp().matrix();

  for (Eigen::Index s = 0; s < n; ++s) {
    const Transition& tr = *samples[static_cast<std::size_t>(s)];
    const double adv = advantages[static_cast<std::size_t>(s)];

    if (b.logits.rows() > 0) {
      const VectorXd lp = log_softmax(b.logits.col(s));
      const VectorXd p = lp.array().exp().matrix();
      const double logp = lp[tr.maneuver];
      out.loss_discrete += inv_n * clipped_loss(logp, tr.logp_d_old, adv, c.clip);
      const double ent = -(p.array() * lp.array()).sum();
      out.entropy_discrete += inv_n * ent;
      if (terms.discrete) {
        const double g = inv_n * clipped_loss_grad(logp, tr.logp_d_old, adv, c.clip);
        out.d_logits.col(s) -= g * p;
        out.d_logits(tr.maneuver, s) += g;
      }
      if (terms.entropy) {
        // dH/dz_k = -p_k (log p_k + H)
        const double scale = -c.entropy_coef * inv_n;
        out.d_logits.col(s) += scale * (-(p.array() * (lp.array() + ent))).matrix();
      }
    }

    double logp_c = 0.0;
    VectorXd z(b.mean.rows());
    for (Eigen::Index j = 0; j < b.mean.rows(); ++j) {
      z[j] = (tr.raw[j] - b.mean(j, s)) * inv_std[j];
      logp_c += -0.5 * z[j] * z[j] - b.log_std[j] - kHalfLog2Pi;
    }
    out.loss_continuous += inv_n * clipped_loss(logp_c, tr.logp_c_old, adv, c.clip);
    if (terms.continuous) {
      const double g = inv_n * clipped_loss_grad(logp_c, tr.logp_c_old, adv, c.clip);
      for (Eigen::Index j = 0; j < b.mean.rows(); ++j) {
        out.d_mean(j, s) += g * z[j] * inv_std[j];
        out.d_log_std[j] += g * (z[j] * z[j] - 1.0);
      }
    }

    const double err = b.values[s] - tr.value_target;
    out.value_loss += inv_n * err * err;
    if (terms.value) out.d_values[s] = c.value_coef * 2.0 * err * inv_n;
  }
  out.entropy_continuous = gaussian_entropy(b.log_std);
  if (terms.entropy) out.d_log_std.array() -= c.entropy_coef;
  return out;
}

inline std::uint64_t episode_seed(std::uint64_t seed, int episode) {
  return Rng(seed, Stream::channel).substream(static_cast<std::uint64_t>(episode)).next_u64();
}

/// Runs the MO-PPO loop: collect one episode with the sampling policy,
/// compute segment advantages, optimize for E epochs, synchronize, clear.
class Trainer {
 public:
  Trainer(Scenario scenario, TrainConfig config, Variant variant, std::uint64_t seed)
      : scenario_(std::move(scenario)),
        config_(config),
        seed_(seed),
        env_(scenario_, rate_model_for(variant)),
        policy_rng_(seed, Stream::policy),
        phase_rng_(seed, Stream::phases),
        batch_rng_(seed, Stream::minibatch) {
    config_.validate(scenario_);
    Rng init(seed, Stream::init);
    agent_ = Agent::create(variant, scenario_, config_, init);
    sampler_ = agent_;
    AdamConfig adam;
    adam.lr = config_.lr;
    for (int g = 0; g < ActorCritic::kNumGroups; ++g) {
      adam_[static_cast<std::size_t>(g)] = AdamState(agent_.net().group(g).size(), adam);
    }
  }

  [[nodiscard]] const Agent& agent() const noexcept { return agent_; }
  Agent& agent() noexcept { return agent_; }
  [[nodiscard]] const Agent& sampling_agent() const noexcept { return sampler_; }
  [[nodiscard]] const std::vector<Transition>& buffer() const noexcept { return buffer_; }
  [[nodiscard]] const std::array<AdamState, ActorCritic::kNumGroups>& adam() const noexcept { return adam_; }
  std::array<AdamState, ActorCritic::kNumGroups>& adam() noexcept { return adam_; }
  [[nodiscard]] const TrainConfig& config() const noexcept { return config_; }
  [[nodiscard]] const Scenario& scenario() const noexcept { return scenario_; }
  [[nodiscard]] int episodes_done() const noexcept { return episode_; }

  /// Plays one episode with the sampling policy into the buffer and fills
  /// in advantages segment by segment.
  EpisodeMetrics collect_episode() {
    buffer_.clear();
    EpisodeMetrics m;
    m.episode = episode_ + 1;
    auto obs = env_.reset(episode_seed(seed_, episode_));
    std::size_t segment_start = 0;
    double rate_sum = 0.0;
    int violations = 0;
    while (!env_.done()) {
      const auto d = sampler_.act(obs, policy_rng_, phase_rng_, false);
      const auto out = env_.step(d.action);
      Transition tr;
      tr.obs = Eigen::Map<const VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
      tr.maneuver = d.maneuver;
      tr.raw = d.raw;
      tr.logp_d_old = d.logp_discrete;
      tr.logp_c_old = d.logp_continuous;
      tr.reward = out.reward;
      tr.value = d.value;
      tr.done = out.done;
      buffer_.push_back(std::move(tr));

      m.cumulative_reward += out.reward;
      rate_sum += out.rate_report.sum;
      for (int f : out.qos_flags) violations += f;
      m.safety_violations += out.safety_flag ? 1 : 0;
      obs = out.next_obs;

      const bool segment_full = buffer_.size() - segment_start == static_cast<std::size_t>(config_.segment);
      if (segment_full || out.done) {
        const VectorXd next = Eigen::Map<const VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
        const double bootstrap = out.done ? 0.0 : sampler_.net().value(next);
        finish_segment(segment_start, bootstrap);
        segment_start = buffer_.size();
      }
    }
    const double slots = static_cast<double>(buffer_.size());
    m.mean_sum_rate = rate_sum / slots;
    m.qos_violation_fraction = violations / (slots * scenario_.num_users());
    m.final_x = env_.uav_position().x;
    m.final_y = env_.uav_position().y;
    return m;
  }

  /// E epochs of shuffled mini-batches over the buffer.
  UpdateStats update() {
    if (buffer_.empty()) throw StateError("Trainer::update: no collected transitions");
    std::vector<double> adv(buffer_.size());
    for (std::size_t i = 0; i < buffer_.size(); ++i) adv[i] = buffer_[i].advantage;
    if (config_.normalize_advantages && adv.size() > 1) {
      const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(adv.size());
      double var = 0.0;
      for (double a : adv) var += (a - mean) * (a - mean);
      const double sd = std::sqrt(var / static_cast<double>(adv.size()));
      for (double& a : adv) a = (a - mean) / (sd + 1e-8);
    }

    UpdateStats stats;
    int batches = 0;
    std::vector<std::size_t> order(buffer_.size());
    const std::size_t bs = static_cast<std::size_t>(config_.batch_size);
    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[batch_rng_.below(i)]);
      for (std::size_t start = 0; start < order.size(); start += bs) {
        const std::size_t end = std::min(order.size(), start + bs);
        std::vector<const Transition*> samples;
        std::vector<double> sample_adv;
        MatrixXd obs(buffer_.front().obs.size(), static_cast<Eigen::Index>(end - start));
        for (std::size_t j = start; j < end; ++j) {
          samples.push_back(&buffer_[order[j]]);
          sample_adv.push_back(adv[order[j]]);
          obs.col(static_cast<Eigen::Index>(j - start)) = buffer_[order[j]].obs;
        }
        const auto batch = agent_.net().forward(obs);
        const auto loss = ppo_loss(batch, samples, sample_adv, config_);
        if (!std::isfinite(loss.total(config_))) {
          throw NumericError("Trainer::update: non-finite loss at episode " + std::to_string(episode_ + 1));
        }
        auto grads = agent_.net().backward(batch, loss.d_logits, loss.d_mean, loss.d_log_std, loss.d_values);
        clip_gradients(grads);
        for (int g = 0; g < ActorCritic::kNumGroups; ++g) {
          auto& params = agent_.net().mutable_group(g);
          if (params.size() == 0) continue;
          if (!adam_step(params, grads[static_cast<std::size_t>(g)], adam_[static_cast<std::size_t>(g)])) {
            ++stats.skipped_steps;
          }
        }
        stats.loss_discrete += loss.loss_discrete;
        stats.loss_continuous += loss.loss_continuous;
        stats.value_loss += loss.value_loss;
        stats.entropy_discrete += loss.entropy_discrete;
        stats.entropy_continuous += loss.entropy_continuous;
        ++batches;
      }
    }
    const double inv = 1.0 / batches;
    stats.loss_discrete *= inv;
    stats.loss_continuous *= inv;
    stats.value_loss *= inv;
    stats.entropy_discrete *= inv;
    stats.entropy_continuous *= inv;
    return stats;
  }

  /// theta_old <- theta.
  void synchronize() { sampler_ = agent_; }

  void clear() { buffer_.clear(); }

  EpisodeMetrics run_episode() {
    EpisodeMetrics m = collect_episode();
    const UpdateStats u = update();
    synchronize();
    clear();
    ++episode_;
    m.loss_discrete = u.loss_discrete;
    m.loss_continuous = u.loss_continuous;
    m.value_loss = u.value_loss;
    m.entropy_discrete = u.entropy_discrete;
    m.entropy_continuous = u.entropy_continuous;
    return m;
  }

  /// Runs the remaining episodes of the configured budget.
  std::vector<EpisodeMetrics> train(const std::function<void(const EpisodeMetrics&)>& on_episode = {}) {
    std::vector<EpisodeMetrics> log;
    while (episode_ < config_.episodes) {
      log.push_back(run_episode());
      if (on_episode) on_episode(log.back());
    }
    return log;
  }

  /// Importance ratios pi_theta / pi_theta_old of every buffered transition,
  /// recomputed under the current parameters; {discrete, continuous}.
  [[nodiscard]] std::pair<std::vector<double>, std::vector<double>> importance_ratios() const {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (const auto& tr : buffer_) {
      const auto p = agent_.net().policy(tr.obs);
      const auto lp = log_prob_and_entropy(p, tr.maneuver, tr.raw);
      out.first.push_back(std::exp(lp.logp_discrete - tr.logp_d_old));
      out.second.push_back(std::exp(lp.logp_continuous - tr.logp_c_old));
    }
    return out;
  }

  /// Re-evaluates old log-probs under the sampling policy (used after
  /// synchronize() to check the ratios reset to one).
  void refresh_old_log_probs() {
    for (auto& tr : buffer_) {
      const auto p = sampler_.net().policy(tr.obs);
      const auto lp = log_prob_and_entropy(p, tr.maneuver, tr.raw);
      tr.logp_d_old = lp.logp_discrete;
      tr.logp_c_old = lp.logp_continuous;
    }
  }

 private:
  void finish_segment(std::size_t start, double bootstrap) {
    std::vector<double> rewards;
    std::vector<double> values;
    for (std::size_t i = start; i < buffer_.size(); ++i) {
      rewards.push_back(buffer_[i].reward * config_.reward_scale);
      values.push_back(buffer_[i].value);
    }
    const auto adv = advantage_nstep(rewards, values, bootstrap, config_.gamma);
    for (std::size_t i = start; i < buffer_.size(); ++i) {
      auto& tr = buffer_[i];
      tr.bootstrap_value = bootstrap;
      tr.advantage = adv[i - start];
      tr.value_target = tr.advantage + tr.value;
    }
  }

  void clip_gradients(ActorCritic::Gradients& grads) const {
    if (config_.max_grad_norm <= 0.0) return;
    double sq = 0.0;
    for (const auto& g : grads) sq += g.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > config_.max_grad_norm) {
      const double scale = config_.max_grad_norm / (norm + 1e-12);
      for (auto& g : grads) g *= scale;
    }
  }

  Scenario scenario_;
  TrainConfig config_;
  std::uint64_t seed_;
  Environment env_;
  Rng policy_rng_;
  Rng phase_rng_;
  Rng batch_rng_;
  Agent agent_;
  Agent sampler_;
  std::array<AdamState, ActorCritic::kNumGroups> adam_;
  std::vector<Transition> buffer_;
  int episode_ = 0;
};

// ---------------------------------------------------------------------------
// Evaluation

struct EvalConfig {
  int episodes = 10;
  bool deterministic = true;
  std::uint64_t seed = 1;
};

struct EpisodeTrace {
  std::vector<StepOutcome> steps;
  double cumulative_reward = 0.0;
  double mean_sum_rate = 0.0;
};

struct EvalResult {
  double mean_cumulative_reward = 0.0;
  double mean_sum_rate = 0.0;
  std::vector<EpisodeTrace> episodes;
  /// Per-slot mean UAV position; entry 0 is the start position.
  std::vector<std::array<double, 2>> mean_trajectory;
};

/// Rolls out a frozen agent. Episode e of any agent evaluated with the same
/// seed sees the same fading sequence, so comparisons share randomness.
inline EvalResult evaluate(const Agent& agent, const Scenario& s, const EvalConfig& cfg) {
  if (agent.net().config().obs_dim != s.observation_dim() || agent.layout().ris_elements != s.ris_elements ||
      agent.layout().cells != s.num_cells()) {
    throw ShapeError("evaluate: agent dimensions do not match the scenario");
  }
  Environment env(s, rate_model_for(agent.variant()));
  EvalResult res;
  const auto slots = static_cast<std::size_t>(s.slots_per_episode);
  res.mean_trajectory.assign(slots + 1, {0.0, 0.0});
  for (int e = 0; e < cfg.episodes; ++e) {
    Rng base = Rng(cfg.seed, Stream::evaluation).substream(static_cast<std::uint64_t>(e));
    Rng policy_rng = base.substream(1);
    Rng phase_rng = base.substream(2);
    auto obs = env.reset(base.next_u64());
    EpisodeTrace trace;
    res.mean_trajectory[0][0] += env.uav_position().x;
    res.mean_trajectory[0][1] += env.uav_position().y;
    while (!env.done()) {
      const auto d = agent.act(obs, policy_rng, phase_rng, cfg.deterministic);
      auto out = env.step(d.action);
      trace.cumulative_reward += out.reward;
      trace.mean_sum_rate += out.rate_report.sum;
      res.mean_trajectory[static_cast<std::size_t>(out.slot)][0] += out.uav.x;
      res.mean_trajectory[static_cast<std::size_t>(out.slot)][1] += out.uav.y;
      obs = out.next_obs;
      trace.steps.push_back(std::move(out));
    }
    trace.mean_sum_rate /= static_cast<double>(trace.steps.size());
    res.mean_cumulative_reward += trace.cumulative_reward;
    res.mean_sum_rate += trace.mean_sum_rate;
    res.episodes.push_back(std::move(trace));
  }
  const double n = cfg.episodes;
  res.mean_cumulative_reward /= n;
  res.mean_sum_rate /= n;
  for (auto& p : res.mean_trajectory) {
    p[0] /= n;
    p[1] /= n;
  }
  return res;
}

}  // namespace arisppo
