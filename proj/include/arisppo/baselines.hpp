#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "arisppo/moppo.hpp"

namespace arisppo {

// ---------------------------------------------------------------------------
// Learned comparators

struct TrainedPolicy {
  Agent agent;
  std::vector<EpisodeMetrics> log;
  std::array<AdamState, ActorCritic::kNumGroups> adam{};
};

inline TrainedPolicy train_policy(const Scenario& s, const TrainConfig& cfg, Variant variant, std::uint64_t seed,
                                  const std::function<void(const EpisodeMetrics&)>& on_episode = {}) {
  Trainer t(s, cfg, variant, seed);
  TrainedPolicy out;
  out.log = t.train(on_episode);
  out.agent = t.agent();
  out.adam = t.adam();
  return out;
}

/// Phases drawn uniformly each slot; maneuver and power split learned.
inline TrainedPolicy run_random_ps(const Scenario& s, const TrainConfig& cfg, std::uint64_t seed) {
  return train_policy(s, cfg, Variant::random_phase, seed);
}

/// UAV held at its start position; phases and power split learned.
inline TrainedPolicy run_hover(const Scenario& s, const TrainConfig& cfg, std::uint64_t seed) {
  return train_policy(s, cfg, Variant::hover, seed);
}

/// Full MO-PPO trained and scored with the OMA rate model.
inline TrainedPolicy run_oma(const Scenario& s, const TrainConfig& cfg, std::uint64_t seed) {
  return train_policy(s, cfg, Variant::oma, seed);
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

struct OracleGrid {
  std::vector<std::array<double, 2>> positions;  // UAV (x, y); altitude from the scenario
  int phase_levels = 4;                          // theta in {-pi + 2 pi l / L}
  std::vector<double> lambda_levels{0.6, 0.75, 0.9};
  bool per_bs_lambda = true;  // false: one lambda shared by every BS
  double budget = 1e7;        // cap on evaluated combinations per slot

  [[nodiscard]] double phase(int level) const noexcept {
    return -std::numbers::pi + 2.0 * std::numbers::pi * level / phase_levels;
  }

  /// Position count x phase combinations x lambda combinations.
  [[nodiscard]] double combinations(int ris_elements, int cells) const {
    const double lam = per_bs_lambda ? std::pow(static_cast<double>(lambda_levels.size()), cells)
                                     : static_cast<double>(lambda_levels.size());
    return static_cast<double>(positions.size()) * std::pow(static_cast<double>(phase_levels), ris_elements) * lam;
  }
};

/// Square grid of n x n UAV positions spanning [-extent, extent]^2.
inline std::vector<std::array<double, 2>> square_positions(int n, double extent) {
  std::vector<std::array<double, 2>> out;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const double fx = n == 1 ? 0.0 : -extent + 2.0 * extent * ix / (n - 1);
      const double fy = n == 1 ? 0.0 : -extent + 2.0 * extent * iy / (n - 1);
      out.push_back({fx, fy});
    }
  }
  return out;
}

struct OracleControls {
  int position = 0;
  std::vector<int> phase_levels;
  std::vector<double> lambda;
};

struct OracleSlot {
  double max_sum_rate = 0.0;  // over the whole grid, QoS ignored
  OracleControls argmax;
  bool feasible = false;  // some grid point meets every R^min
  double max_feasible_sum_rate = std::numeric_limits<double>::quiet_NaN();
  OracleControls feasible_argmax;
  /// Continuous-phase reference: phases aligned to one BS->edge cascade,
  /// best over grid positions, lambda levels and the BS chosen.
  double aligned_bound = 0.0;
};

namespace detail {

inline void validate_grid(const OracleGrid& g, const Scenario& s) {
  if (g.positions.empty()) throw ConfigError("oracle.positions: must not be empty");
  if (g.phase_levels < 1) throw ConfigError("oracle.phase_levels: must be >= 1");
  if (g.lambda_levels.empty()) throw ConfigError("oracle.lambda_levels: must not be empty");
  for (double l : g.lambda_levels) {
    if (!(l > 0.5 && l < 1.0)) throw ConfigError("oracle.lambda_levels: each level must lie in (0.5, 1)");
  }
  const double n = g.combinations(s.ris_elements, s.num_cells());
  if (n > g.budget) {
    throw StateError("oracle: grid has " + std::to_string(n) + " combinations, budget is " +
                     std::to_string(g.budget));
  }
}

/// Every lambda vector the grid allows, in lexicographic index order.
inline std::vector<PowerSplit> lambda_combinations(const OracleGrid& g, int cells) {
  std::vector<PowerSplit> out;
  const auto levels = g.lambda_levels.size();
  if (!g.per_bs_lambda) {
    for (double l : g.lambda_levels) out.push_back(PowerSplit::uniform(static_cast<std::size_t>(cells), l));
    return out;
  }
  std::vector<std::size_t> idx(static_cast<std::size_t>(cells), 0);
  while (true) {
    std::vector<double> lam;
    for (std::size_t i : idx) lam.push_back(g.lambda_levels[i]);
    out.emplace_back(std::move(lam));
    std::size_t d = idx.size();
    while (d > 0 && ++idx[d - 1] == levels) idx[--d] = 0;
    if (d == 0) break;
  }
  return out;
}

inline bool meets_qos(const RateReport& r, const Scenario& s) {
  for (const auto& cell : r.center_rates) {
    for (double v : cell) {
      if (v <= s.qos_min_center) return false;
    }
  }
  for (double v : r.edge_rates) {
    if (v <= s.qos_min_edge) return false;
  }
  return true;
}

}  // namespace detail

/// Greedy per-slot maximum over the grid for one fading draw. `fading` is a
/// snapshot of the channel stream; every grid position replays it, so all
/// candidates see the same small-scale fading. Ties keep the lowest index
/// (position-major, then phase combination, then lambda combination).
inline OracleSlot oracle_slot(const Scenario& s, const OracleGrid& g, const Rng& fading,
                              RateModel model = RateModel::noma) {
  detail::validate_grid(g, s);
  const int k = s.ris_elements;
  const auto splits = detail::lambda_combinations(g, s.num_cells());
  const double rho = s.transmit_snr();
  OracleSlot best;
  best.max_sum_rate = -std::numeric_limits<double>::infinity();
  best.aligned_bound = -std::numeric_limits<double>::infinity();

  auto score = [&](const EffectiveGains& eg, const PowerSplit& split) {
    return model == RateModel::noma ? rates_from_gains(eg, split, rho) : rates_oma_from_gains(eg, rho);
  };

  for (std::size_t p = 0; p < g.positions.size(); ++p) {
    Rng rng = fading;
    const Position3 uav{g.positions[p][0], g.positions[p][1], s.uav_altitude};
    const auto ch = realize_slot(s, uav, rng);

    std::vector<int> level(static_cast<std::size_t>(k), 0);
    std::vector<double> theta(static_cast<std::size_t>(k));
    while (true) {
      for (int i = 0; i < k; ++i) theta[static_cast<std::size_t>(i)] = g.phase(level[static_cast<std::size_t>(i)]);
      const auto eg = effective_gains(ch, PhaseConfig(theta), s);
      for (const auto& split : splits) {
        const auto r = score(eg, split);
        auto controls = [&] {
          return OracleControls{static_cast<int>(p), level, std::vector<double>(split.values().begin(), split.values().end())};
        };
        if (r.sum > best.max_sum_rate) {
          best.max_sum_rate = r.sum;
          best.argmax = controls();
        }
        if (detail::meets_qos(r, s) && (!best.feasible || r.sum > best.max_feasible_sum_rate)) {
          best.feasible = true;
          best.max_feasible_sum_rate = r.sum;
          best.feasible_argmax = controls();
        }
      }
      std::size_t d = level.size();
      while (d > 0 && ++level[d - 1] == g.phase_levels) level[--d] = 0;
      if (d == 0) break;
    }

    for (std::size_t i = 0; i < ch.bs_to_ris.size(); ++i) {
      for (std::size_t f = 0; f < static_cast<std::size_t>(s.num_edge_users()); ++f) {
        const auto& h_ru = ch.ris_to_user[static_cast<std::size_t>(s.num_center_users()) + f];
        const PhaseConfig aligned = aligning_phases(h_ru, ch.bs_to_ris[i]);
        const auto eg = effective_gains(ch, aligned, s);
        for (const auto& split : splits) best.aligned_bound = std::max(best.aligned_bound, score(eg, split).sum);
      }
    }
  }
  return best;
}

struct OracleRun {
  std::vector<OracleSlot> slots;
  double mean_max_sum_rate = 0.0;
  double mean_feasible_sum_rate = 0.0;  // over feasible slots only
  int feasible_slots = 0;
  double mean_aligned_bound = 0.0;
};

/// Oracle over `slots` consecutive fading draws of the channel stream seeded
/// like Environment::reset(seed).
inline OracleRun run_oracle(const Scenario& s, const OracleGrid& g, int slots, std::uint64_t seed,
                            RateModel model = RateModel::noma) {
  if (slots < 1) throw ConfigError("oracle.slots: must be >= 1");
  detail::validate_grid(g, s);
  Rng stream(seed, Stream::channel);
  OracleRun run;
  for (int t = 0; t < slots; ++t) {
    run.slots.push_back(oracle_slot(s, g, stream, model));
    // advance by one slot's worth of draws (position does not change the count)
    (void)realize_slot(s, s.uav_initial, stream);
    const auto& o = run.slots.back();
    run.mean_max_sum_rate += o.max_sum_rate;
    run.mean_aligned_bound += o.aligned_bound;
    if (o.feasible) {
      run.mean_feasible_sum_rate += o.max_feasible_sum_rate;
      ++run.feasible_slots;
    }
  }
  run.mean_max_sum_rate /= slots;
  run.mean_aligned_bound /= slots;
  if (run.feasible_slots > 0) run.mean_feasible_sum_rate /= run.feasible_slots;
  return run;
}

// ---------------------------------------------------------------------------
// Policy vs oracle on shared fading

/// Snaps continuous controls onto the oracle grid.
struct ProjectedControls {
  int position = 0;
  std::vector<int> phase_levels;
  PowerSplit split;
};

inline ProjectedControls project_to_grid(const OracleGrid& g, const Position3& uav, const HybridAction& a) {
  ProjectedControls out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < g.positions.size(); ++p) {
    const double d = std::hypot(g.positions[p][0] - uav.x, g.positions[p][1] - uav.y);
    if (d < best) {
      best = d;
      out.position = static_cast<int>(p);
    }
  }
  const double step = 2.0 * std::numbers::pi / g.phase_levels;
  for (std::size_t i = 0; i < a.phases.size(); ++i) {
    const long l = std::lround((a.phases[i] + std::numbers::pi) / step);
    out.phase_levels.push_back(static_cast<int>(((l % g.phase_levels) + g.phase_levels) % g.phase_levels));
  }
  std::vector<double> lam;
  for (std::size_t i = 0; i < a.split.size(); ++i) {
    double v = g.lambda_levels.front();
    for (double l : g.lambda_levels) {
      if (std::abs(l - a.split[i]) < std::abs(v - a.split[i])) v = l;
    }
    lam.push_back(v);
  }
  if (!g.per_bs_lambda) {
    // the shared grid cannot express distinct lambdas; use the first BS's level
    std::fill(lam.begin(), lam.end(), lam.front());
  }
  out.split = PowerSplit(std::move(lam));
  return out;
}

struct OracleComparison {
  std::vector<double> policy_sum_rate;  // grid-projected controls
  std::vector<double> oracle_sum_rate;  // unconstrained grid maximum
  double mean_policy = 0.0;
  double mean_oracle = 0.0;
  [[nodiscard]] double ratio() const { return mean_policy / mean_oracle; }
};

/// Rolls a frozen agent out for `slots` steps. At each slot the policy's
/// controls are projected onto the grid and scored on the same fading draw
/// the oracle enumerates.
inline OracleComparison compare_with_oracle(const Agent& agent, const Scenario& s, const OracleGrid& g, int slots,
                                            std::uint64_t seed, bool deterministic = true) {
  detail::validate_grid(g, s);
  if (slots < 1) throw ConfigError("oracle.slots: must be >= 1");
  const RateModel model = rate_model_for(agent.variant());
  Environment env(s, model);
  Rng base = Rng(seed, Stream::evaluation);
  Rng policy_rng = base.substream(1);
  Rng phase_rng = base.substream(2);
  auto obs = env.reset(base.next_u64());
  OracleComparison cmp;
  for (int t = 0; t < slots; ++t) {
    if (env.done()) obs = env.reset(base.next_u64());
    const Rng fading = env.channel_rng();
    const auto d = agent.act(obs, policy_rng, phase_rng, deterministic);
    const auto out = env.step(d.action);

    const auto proj = project_to_grid(g, out.uav, d.action);
    Rng replay = fading;
    const Position3 p{g.positions[static_cast<std::size_t>(proj.position)][0],
                      g.positions[static_cast<std::size_t>(proj.position)][1], s.uav_altitude};
    const auto ch = realize_slot(s, p, replay);
    std::vector<double> theta;
    for (int l : proj.phase_levels) theta.push_back(g.phase(l));
    const double policy = env.score(ch, PhaseConfig(theta), proj.split).sum;
    const double oracle = oracle_slot(s, g, fading, model).max_sum_rate;
    cmp.policy_sum_rate.push_back(policy);
    cmp.oracle_sum_rate.push_back(oracle);
    cmp.mean_policy += policy;
    cmp.mean_oracle += oracle;
    obs = out.next_obs;
  }
  cmp.mean_policy /= slots;
  cmp.mean_oracle /= slots;
  return cmp;
}

}  // namespace arisppo
