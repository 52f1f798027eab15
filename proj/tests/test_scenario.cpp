#include <gtest/gtest.h>

#include <cmath>

#include "arisppo/scenario.hpp"

using namespace arisppo;

TEST(Units, DecibelConversions) {
  EXPECT_DOUBLE_EQ(dbm_to_linear(0.0), 1.0);
  EXPECT_NEAR(db_to_linear(-30.0), 1e-3, 1e-18);
  const double sigma = thermal_noise_dbm(1e7);
  EXPECT_NEAR(sigma, -104.0, 1e-12);
  EXPECT_NEAR(dbm_to_linear(sigma) / std::pow(10.0, -10.4), 1.0, 1e-12);
}

TEST(Units, RoundTripIsIdentity) {
  for (double db = -200.0; db <= 200.0; db += 0.37) {
    EXPECT_NEAR(linear_to_db(db_to_linear(db)), db, 1e-12 * std::max(1.0, std::abs(db)));
    const double lin = std::pow(10.0, db / 37.0);
    EXPECT_NEAR(db_to_linear(linear_to_db(lin)) / lin, 1.0, 1e-12);
  }
}

TEST(Geometry, Distances) {
  EXPECT_DOUBLE_EQ(distance({0, 0, 0}, {3, 4, 0}), 5.0);
  const Position3 p{1.5, -2.0, 7.0};
  EXPECT_EQ(distance(p, p), 0.0);
  const Position3 bs1{-35, -35, 25}, uav{0, 35, 50};
  EXPECT_DOUBLE_EQ(distance(bs1, uav), std::sqrt(35.0 * 35 + 70.0 * 70 + 25.0 * 25));
  EXPECT_DOUBLE_EQ(distance(bs1, uav), distance(uav, bs1));
}

TEST(Scenario, DefaultsMatchTheReferenceSetup) {
  const Scenario s = load_scenario("");
  EXPECT_EQ(s.slots_per_episode, 250);
  EXPECT_EQ(s.penalty_viol, 7.0);
  EXPECT_EQ(s.d_min, 10.0);
  EXPECT_EQ(s.qos_min_edge, 0.2);
  EXPECT_EQ(s.qos_min_center, 0.5);
  EXPECT_EQ(s.rician_k_db, 3.0);
  EXPECT_EQ(s.pathloss_ref_db, -30.0);
  EXPECT_EQ(s.area_half_extent, 75.0);
  EXPECT_EQ(s.exponents.direct, 3.0);
  EXPECT_EQ(s.exponents.reflect, 2.2);
  EXPECT_EQ(s.exponents.interference, 3.5);
  EXPECT_EQ(s.uav_initial, (Position3{0, 35, 50}));
  EXPECT_EQ(s.bs_positions[0], (Position3{-35, -35, 25}));
  EXPECT_EQ(s.bs_positions[1], (Position3{35, 35, 25}));
  EXPECT_NEAR(s.noise_dbm, -104.0, 1e-12);
  EXPECT_EQ(s.observation_dim(), 9);
  EXPECT_EQ(s.action_dim(), 2 + s.ris_elements + 2);
}

TEST(Scenario, AcceptsGeometryOverrides) {
  const Scenario s = load_scenario(R"({"uav_initial": [0, 35, 50],
      "bs_positions": [[-35, -35, 25], [35, 35, 25]]})");
  EXPECT_EQ(s, Scenario{});
}

TEST(Scenario, RejectsNegativeDminNamingTheField) {
  try {
    (void)load_scenario(R"({"d_min": -1})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("d_min"), std::string::npos);
  }
}

TEST(Scenario, RejectsInvariantViolations) {
  EXPECT_THROW((void)load_scenario(R"({"ris_elements": 0})"), ConfigError);
  EXPECT_THROW((void)load_scenario(R"({"slots_per_episode": 0})"), ConfigError);
  EXPECT_THROW((void)load_scenario(R"({"uav_step": 0})"), ConfigError);
  EXPECT_THROW((void)load_scenario(R"({"pathloss_exponents": {"direct": 1.5}})"), ConfigError);
  EXPECT_THROW((void)load_scenario(R"({"bs_positions": [[0, 0, 25]], "center_user_positions": [[[1, 1, 0]]]})"),
               ConfigError);
  EXPECT_THROW((void)load_scenario(R"({"uav_initial": [100, 0, 50]})"), ConfigError);
  EXPECT_THROW((void)load_scenario(R"({"uav_initial": [0, 35, 40]})"), ConfigError);
  // start inside a forbidden zone (2-D mode makes the zone binding)
  EXPECT_THROW((void)load_scenario(R"({"forbidden_zone_metric": "2d", "uav_initial": [18, 30, 50]})"), ConfigError);
  EXPECT_THROW((void)load_scenario(R"({"edge_user_positions": [[0, 0, -1]]})"), ConfigError);
}

TEST(Scenario, RejectsUnknownKeysAndBadSyntax) {
  EXPECT_THROW((void)load_scenario(R"({"bogus": 1})"), ConfigError);
  EXPECT_THROW((void)load_scenario(R"({"observation": {"bogus": 1}})"), ConfigError);
  EXPECT_THROW((void)load_scenario("{not json"), ConfigError);
  EXPECT_THROW((void)load_scenario(R"({"ris_elements": 1.5})"), ConfigError);
}

TEST(Scenario, NoiseFollowsBandwidthUnlessGiven) {
  const Scenario a = load_scenario(R"({"bandwidth_hz": 1e6})");
  EXPECT_NEAR(a.noise_dbm, -114.0, 1e-12);
  const Scenario b = load_scenario(R"({"bandwidth_hz": 1e6, "noise_dbm": -90})");
  EXPECT_EQ(b.noise_dbm, -90.0);
}

TEST(Scenario, TwoLoadsAreIdenticalAndJsonRoundTrips) {
  const std::string doc = R"({"ris_elements": 8, "tx_power_dbm": 13.5, "forbidden_zone_metric": "2d"})";
  const Scenario a = load_scenario(doc);
  const Scenario b = load_scenario(doc);
  EXPECT_EQ(a, b);
  EXPECT_EQ(scenario_from_json(to_json(a)), a);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Scenario, ForbiddenZoneMetrics) {
  Scenario s;
  const Position3 above{18, 28, 50};  // 20 m above an obstacle point at 30 m
  EXPECT_FALSE(s.inside_forbidden_zone(above));  // 3-D distance 20 > d_min
  s.zone_metric = ZoneMetric::horizontal_2d;
  EXPECT_TRUE(s.inside_forbidden_zone(above));
  EXPECT_FALSE(s.inside_forbidden_zone({18, 38, 50}));  // exactly d_min away is allowed
  EXPECT_TRUE(s.inside_forbidden_zone({18, 37.9, 50}));
}

TEST(Hash, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xCBF29CE484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xAF63DC4C8601EC8CULL);
  EXPECT_EQ(hex64(0xAF63DC4C8601EC8CULL), "af63dc4c8601ec8c");
}
