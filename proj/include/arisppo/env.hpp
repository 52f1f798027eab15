#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "arisppo/channel.hpp"
#include "arisppo/errors.hpp"
#include "arisppo/phy.hpp"
#include "arisppo/rng.hpp"
#include "arisppo/scenario.hpp"

namespace arisppo {

/// UAV moves, in the order the discrete policy head emits them.
enum class Maneuver : int { left = 0, right = 1, down = 2, up = 3, hover = 4 };
inline constexpr int kNumManeuvers = 5;

inline constexpr std::array<std::array<int, 2>, kNumManeuvers> kManeuverDirections{{
    {-1, 0}, {1, 0}, {0, -1}, {0, 1}, {0, 0}}};

/// Which rate model scores a slot.
enum class RateModel { noma, oma };

struct HybridAction {
  Maneuver maneuver = Maneuver::hover;
  PhaseConfig phases;
  PowerSplit split;
};

/// Maps an unbounded raw value onto (-pi, pi).
inline double squash_phase(double raw) noexcept { return wrap_phase(std::numbers::pi * std::tanh(raw)); }

/// Maps an unbounded raw value onto the open interval (0.5, 1); raw 0 -> 0.75.
inline double squash_split(double raw) noexcept {
  static const double lo = std::nextafter(0.5, 1.0);
  static const double hi = std::nextafter(1.0, 0.0);
  if (std::isnan(raw)) return 0.75;
  return std::clamp(0.75 + 0.25 * std::tanh(raw), lo, hi);
}

/// Decodes a maneuver index plus [K raw phases, I raw splits].
inline HybridAction decode_action(int maneuver_index, std::span<const double> raw_continuous, int k, int cells) {
  if (maneuver_index < 0 || maneuver_index >= kNumManeuvers) {
    throw std::out_of_range("decode_action: maneuver index " + std::to_string(maneuver_index) +
                            " outside [0, 5)");
  }
  if (raw_continuous.size() != static_cast<std::size_t>(k + cells)) {
    throw ShapeError("decode_action: expected " + std::to_string(k + cells) + " continuous values, got " +
                     std::to_string(raw_continuous.size()));
  }
  std::vector<double> theta(static_cast<std::size_t>(k));
  std::vector<double> lambda(static_cast<std::size_t>(cells));
  for (int i = 0; i < k; ++i) theta[static_cast<std::size_t>(i)] = squash_phase(raw_continuous[static_cast<std::size_t>(i)]);
  for (int i = 0; i < cells; ++i) {
    lambda[static_cast<std::size_t>(i)] = squash_split(raw_continuous[static_cast<std::size_t>(k + i)]);
  }
  return {static_cast<Maneuver>(maneuver_index), PhaseConfig(std::move(theta)), PowerSplit(std::move(lambda))};
}

/// R_sum * (1 - violations / |U|) - safety * K_viol.
inline double compute_reward(double sum_rate, int qos_violations, int num_users, bool safety_violated,
                             double penalty) noexcept {
  return sum_rate * (1.0 - static_cast<double>(qos_violations) / num_users) - (safety_violated ? penalty : 0.0);
}

struct StepOutcome {
  std::vector<double> next_obs;
  double reward = 0.0;
  RateReport rate_report;
  std::vector<int> qos_flags;  // 1 when R_u <= R_u^min
  bool safety_flag = false;    // movement was canceled
  bool done = false;
  Position3 uav{};
  int slot = 0;  // 1-based index of the slot just played
};

/// Episodic MDP over one scenario. Single owner; not thread-safe.
class Environment {
 public:
  explicit Environment(Scenario scenario, RateModel model = RateModel::noma)
      : scenario_(std::move(scenario)), model_(model) {
    validate(scenario_);
    reset(scenario_.seed);
  }

  /// Starts a new episode; returns the initial observation.
  std::vector<double> reset(std::uint64_t seed) {
    channel_rng_ = Rng(seed, Stream::channel);
    uav_ = scenario_.uav_initial;
    slot_ = 0;
    split_ = PowerSplit::uniform(static_cast<std::size_t>(scenario_.num_cells()));
    const auto ch = realize_slot(scenario_, uav_, channel_rng_);
    last_rates_ = score(ch, PhaseConfig(static_cast<std::size_t>(scenario_.ris_elements)), split_).user_rates();
    return observe();
  }

  /// Flat state: [x, y, obstacle distances, lambdas, last rates].
  [[nodiscard]] std::vector<double> observe() const {
    const Scenario& s = scenario_;
    const bool norm = s.normalize_observations;
    const double pos_scale = norm ? s.area_half_extent : 1.0;
    const double dist_scale = norm ? 2.0 * std::numbers::sqrt2 * s.area_half_extent : 1.0;
    const double rate_scale = norm ? s.rate_scale : 1.0;
    std::vector<double> obs;
    obs.reserve(static_cast<std::size_t>(s.observation_dim()));
    obs.push_back(uav_.x / pos_scale);
    obs.push_back(uav_.y / pos_scale);
    for (const auto& o : s.obstacle_positions) obs.push_back(s.obstacle_distance(uav_, o) / dist_scale);
    for (double l : split_.values()) obs.push_back(l);
    for (double r : last_rates_) obs.push_back(r / rate_scale);
    return obs;
  }

  StepOutcome step(const HybridAction& action) {
    if (done()) throw StateError("Environment::step: episode already finished");
    const Scenario& s = scenario_;
    if (action.phases.size() != static_cast<std::size_t>(s.ris_elements) ||
        action.split.size() != static_cast<std::size_t>(s.num_cells())) {
      throw ShapeError("Environment::step: action dimensions do not match the scenario");
    }

    StepOutcome out;
    const auto& dir = kManeuverDirections[static_cast<std::size_t>(action.maneuver)];
    Position3 next = uav_;
    next.x += s.uav_step * dir[0];
    next.y += s.uav_step * dir[1];
    if (!s.inside_area(next.x, next.y) || s.inside_forbidden_zone(next)) {
      out.safety_flag = true;
    } else {
      uav_ = next;
    }

    split_ = action.split;
    const auto ch = realize_slot(s, uav_, channel_rng_);
    out.rate_report = score(ch, action.phases, split_);
    last_rates_ = out.rate_report.user_rates();

    int violations = 0;
    out.qos_flags.reserve(last_rates_.size());
    for (std::size_t u = 0; u < last_rates_.size(); ++u) {
      const bool edge = u >= static_cast<std::size_t>(s.num_center_users());
      const int flag = last_rates_[u] <= (edge ? s.qos_min_edge : s.qos_min_center) ? 1 : 0;
      out.qos_flags.push_back(flag);
      violations += flag;
    }
    out.reward = compute_reward(out.rate_report.sum, violations, s.num_users(), out.safety_flag, s.penalty_viol);
    ++slot_;
    out.done = done();
    out.uav = uav_;
    out.slot = slot_;
    out.next_obs = observe();
    return out;
  }

  [[nodiscard]] bool done() const noexcept { return slot_ >= scenario_.slots_per_episode; }
  [[nodiscard]] int slot() const noexcept { return slot_; }
  [[nodiscard]] const Position3& uav_position() const noexcept { return uav_; }
  [[nodiscard]] const PowerSplit& power_split() const noexcept { return split_; }
  [[nodiscard]] const std::vector<double>& last_rates() const noexcept { return last_rates_; }
  [[nodiscard]] const Scenario& scenario() const noexcept { return scenario_; }
  [[nodiscard]] RateModel rate_model() const noexcept { return model_; }
  /// Snapshot of the fading stream the next step will draw from.
  [[nodiscard]] Rng channel_rng() const noexcept { return channel_rng_; }

  [[nodiscard]] RateReport score(const ChannelRealization& ch, const PhaseConfig& phases,
                                 const PowerSplit& split) const {
    return model_ == RateModel::noma ? rates(ch, phases, split, scenario_) : rates_oma(ch, phases, scenario_);
  }

 private:
  Scenario scenario_;
  RateModel model_;
  Rng channel_rng_{0};
  Position3 uav_{};
  int slot_ = 0;
  PowerSplit split_;
  std::vector<double> last_rates_;
};

/// One trajectory-trace record.
inline json trace_record(const StepOutcome& o) {
  json flags = json::array();
  for (int f : o.qos_flags) flags.push_back(f);
  return json{{"slot", o.slot},
              {"x", o.uav.x},
              {"y", o.uav.y},
              {"reward", o.reward},
              {"sum_rate", o.rate_report.sum},
              {"rates", o.rate_report.user_rates()},
              {"qos_flags", flags},
              {"safety", o.safety_flag ? 1 : 0}};
}

}  // namespace arisppo
