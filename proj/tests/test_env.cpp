#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "arisppo/env.hpp"
#include "oracles.hpp"

using namespace arisppo;
using std::numbers::pi;

namespace {

HybridAction hover_action(const Scenario& s, Maneuver m = Maneuver::hover) {
  return {m, PhaseConfig(static_cast<std::size_t>(s.ris_elements)), PowerSplit::uniform(2)};
}

HybridAction random_action(const Scenario& s, Rng& rng) {
  std::vector<double> raw(static_cast<std::size_t>(s.ris_elements + s.num_cells()));
  for (auto& r : raw) r = 4.0 * rng.normal();
  return decode_action(static_cast<int>(rng.below(kNumManeuvers)), raw, s.ris_elements, s.num_cells());
}

}  // namespace

TEST(Reward, UnitCases) {
  EXPECT_EQ(compute_reward(4.0, 0, 3, false, 7.0), 4.0);
  EXPECT_NEAR(compute_reward(4.0, 1, 3, false, 7.0), 8.0 / 3.0, 1e-12);
  EXPECT_EQ(compute_reward(4.0, 0, 3, true, 7.0), -3.0);
  EXPECT_EQ(compute_reward(4.0, 3, 3, true, 7.0), -7.0);
}

TEST(Decode, SquashingCentresAndLimits) {
  EXPECT_EQ(squash_split(0.0), 0.75);
  EXPECT_EQ(squash_phase(0.0), 0.0);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_LT(squash_split(inf), 1.0);
  EXPECT_GT(squash_split(inf), 0.999);
  EXPECT_GT(squash_split(-inf), 0.5);
  EXPECT_LT(squash_phase(1e9), pi);
  EXPECT_GE(squash_phase(-1e9), -pi);
}

TEST(Decode, RandomRawActionsSatisfyBoxConstraints) {
  Rng rng(1);
  const Scenario s;
  for (int i = 0; i < 20000; ++i) {
    const auto a = random_action(s, rng);
    for (double t : a.phases.angles()) {
      ASSERT_GE(t, -pi);
      ASSERT_LT(t, pi);
    }
    for (double l : a.split.values()) {
      ASSERT_GT(l, 0.5);
      ASSERT_LT(l, 1.0);
    }
  }
}

TEST(Decode, Errors) {
  std::vector<double> raw(18, 0.0);
  EXPECT_THROW((void)decode_action(5, raw, 16, 2), std::out_of_range);
  EXPECT_THROW((void)decode_action(-1, raw, 16, 2), std::out_of_range);
  EXPECT_THROW((void)decode_action(0, raw, 15, 2), ShapeError);
}

TEST(Environment, ResetState) {
  const Scenario s;
  Environment env(s);
  const auto obs = env.reset(3);
  ASSERT_EQ(obs.size(), 9u);
  EXPECT_EQ(env.uav_position(), s.uav_initial);
  EXPECT_DOUBLE_EQ(obs[0] * s.area_half_extent, 0.0);
  EXPECT_DOUBLE_EQ(obs[1] * s.area_half_extent, 35.0);
  EXPECT_EQ(obs[4], 0.75);
  EXPECT_EQ(obs[5], 0.75);
  EXPECT_EQ(env.slot(), 0);
  EXPECT_EQ(env.reset(3), obs);
}

TEST(Environment, RawObservationMatchesGeometry) {
  Scenario s;
  s.normalize_observations = false;
  Environment env(s);
  const auto obs = env.reset(4);
  EXPECT_EQ(obs[0], 0.0);
  EXPECT_EQ(obs[1], 35.0);
  EXPECT_DOUBLE_EQ(obs[2], distance(s.uav_initial, s.obstacle_positions[0]));
  EXPECT_DOUBLE_EQ(obs[3], distance(s.uav_initial, s.obstacle_positions[1]));
  // initial rates come from a zero-phase, midpoint-split realization
  Rng rng(4, Stream::channel);
  const auto ch = realize_slot(s, s.uav_initial, rng);
  const auto r = rates(ch, PhaseConfig(16), PowerSplit::uniform(2), s).user_rates();
  for (int u = 0; u < 3; ++u) EXPECT_EQ(obs[6 + u], r[u]);
}

TEST(Environment, HoverKeepsPositionAndMovesStepOtherwise) {
  const Scenario s;
  Environment env(s);
  auto out = env.step(hover_action(s));
  EXPECT_EQ(out.uav, s.uav_initial);
  EXPECT_FALSE(out.safety_flag);
  out = env.step(hover_action(s, Maneuver::left));
  EXPECT_EQ(out.uav.x, -3.0);
  out = env.step(hover_action(s, Maneuver::down));
  EXPECT_EQ(out.uav.y, 32.0);
}

TEST(Environment, LeavingTheAreaIsCanceledAndPenalized) {
  Scenario s;
  s.uav_initial = {0.0, 74.0, 50.0};
  Environment env(s);
  const auto out = env.step(hover_action(s, Maneuver::up));
  EXPECT_TRUE(out.safety_flag);
  EXPECT_EQ(out.uav, s.uav_initial);
  const auto rates = out.rate_report.user_rates();
  const double expect = oracle::reward(rates, 2, s.qos_min_center, s.qos_min_edge, true, 7.0);
  EXPECT_NEAR(out.reward, expect, 1e-12);
}

TEST(Environment, EnteringAForbiddenZoneIsCanceled) {
  Scenario s;
  s.zone_metric = ZoneMetric::horizontal_2d;
  s.uav_initial = {18.0, 39.0, 50.0};  // 11 m north of an obstacle
  Environment env(s);
  const auto out = env.step(hover_action(s, Maneuver::down));
  EXPECT_TRUE(out.safety_flag);
  EXPECT_EQ(out.uav, s.uav_initial);
}

TEST(Environment, QosFlagsUseLessOrEqual) {
  Scenario s;
  Environment env(s);
  const auto out = env.step(hover_action(s));
  const auto r = out.rate_report.user_rates();
  for (int u = 0; u < 3; ++u) {
    const double thr = u < 2 ? s.qos_min_center : s.qos_min_edge;
    EXPECT_EQ(out.qos_flags[u], r[u] <= thr ? 1 : 0);
  }
}

TEST(Environment, EpisodeLengthAndTermination) {
  Scenario s;
  s.slots_per_episode = 7;
  Environment env(s);
  for (int t = 1; t <= 7; ++t) {
    const auto out = env.step(hover_action(s));
    EXPECT_EQ(out.slot, t);
    EXPECT_EQ(out.done, t == 7);
  }
  EXPECT_THROW((void)env.step(hover_action(s)), StateError);
  env.reset(1);
  EXPECT_NO_THROW((void)env.step(hover_action(s)));
}

TEST(Environment, RejectsMismatchedActions) {
  const Scenario s;
  Environment env(s);
  HybridAction a{Maneuver::hover, PhaseConfig(3), PowerSplit::uniform(2)};
  EXPECT_THROW((void)env.step(a), ShapeError);
}

TEST(Environment, SameSeedAndActionsReplayExactly) {
  const Scenario s;
  Environment a(s), b(s);
  a.reset(11);
  b.reset(11);
  Rng r1(5), r2(5);
  for (int t = 0; t < 100; ++t) {
    const auto x = a.step(random_action(s, r1));
    const auto y = b.step(random_action(s, r2));
    ASSERT_EQ(x.next_obs, y.next_obs);
    ASSERT_EQ(x.reward, y.reward);
  }
}

TEST(Environment, RandomWalkNeverViolatesSafetyConstraints) {
  for (auto metric : {ZoneMetric::full_3d, ZoneMetric::horizontal_2d}) {
    Scenario s;
    s.zone_metric = metric;
    s.slots_per_episode = 500;
    Environment env(s);
    Rng rng(7);
    for (int i = 0; i < 20000; ++i) {
      if (env.done()) env.reset(rng.next_u64());
      const auto out = env.step(random_action(s, rng));
      ASSERT_TRUE(s.inside_area(out.uav.x, out.uav.y));
      ASSERT_FALSE(s.inside_forbidden_zone(out.uav));
      const auto rates = out.rate_report.user_rates();
      ASSERT_NEAR(out.reward, oracle::reward(rates, 2, s.qos_min_center, s.qos_min_edge, out.safety_flag, 7.0), 1e-12);
      ASSERT_GE(out.reward, -s.penalty_viol);
      ASSERT_LE(out.reward, out.rate_report.sum);
    }
  }
}

TEST(Environment, ChannelSnapshotReplaysTheNextSlot) {
  const Scenario s;
  Environment env(s);
  Rng snap = env.channel_rng();
  const auto out = env.step(hover_action(s));
  const auto ch = realize_slot(s, out.uav, snap);
  EXPECT_EQ(rates(ch, PhaseConfig(16), PowerSplit::uniform(2), s).sum, out.rate_report.sum);
}

TEST(Trace, RecordFields) {
  const Scenario s;
  Environment env(s);
  const auto out = env.step(hover_action(s, Maneuver::right));
  const json j = trace_record(out);
  EXPECT_EQ(j.at("slot").get<int>(), 1);
  EXPECT_EQ(j.at("x").get<double>(), 3.0);
  EXPECT_EQ(j.at("rates").size(), 3u);
  EXPECT_EQ(j.at("qos_flags").size(), 3u);
  EXPECT_EQ(j.at("safety").get<int>(), 0);
}
