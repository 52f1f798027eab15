#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "arisppo/channel.hpp"

using namespace arisppo;
using std::numbers::pi;

namespace {

double mean_power(const ComplexVector& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return s;
}

}  // namespace

TEST(PathGain, ReferenceCases) {
  EXPECT_DOUBLE_EQ(path_gain(1.0, 3.7, 1e-3), 1e-3);
  EXPECT_NEAR(path_gain(10.0, 2.0, 1e-3), 1e-5, 1e-20);
  EXPECT_NEAR(path_gain(10.0, 3.0, 1e-3), 1e-6, 1e-20);
  EXPECT_DOUBLE_EQ(path_gain(0.2, 3.0, 1e-3), 1e-3);  // clamped to 1 m
}

TEST(Rayleigh, MomentsOverManyDraws) {
  Rng rng(1);
  const int n = 100000;
  double p = 0.0, re = 0.0, im = 0.0, p2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto v = draw_rayleigh(rng);
    p += std::norm(v);
    p2 += std::norm(v) * std::norm(v);
    re += v.real();
    im += v.imag();
  }
  EXPECT_NEAR(p / n, 1.0, 0.02);
  EXPECT_NEAR(re / n, 0.0, 0.02);
  EXPECT_NEAR(im / n, 0.0, 0.02);
  // |v|^2 is Exp(1): E|v|^4 = 2, so Var|v|^2 = 1; component variance 1/2 each
  const double var = p2 / n - (p / n) * (p / n);
  EXPECT_NEAR(var, 1.0, 0.03 * 2);
}

TEST(Rayleigh, ComponentVarianceIsHalf) {
  Rng rng(2);
  const int n = 100000;
  double vr = 0.0, vi = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto v = draw_rayleigh(rng);
    vr += v.real() * v.real();
    vi += v.imag() * v.imag();
  }
  // total variance 1 +- 3%
  EXPECT_NEAR((vr + vi) / n, 1.0, 0.03);
  EXPECT_NEAR(vr / n, 0.5, 0.015);
  EXPECT_NEAR(vi / n, 0.5, 0.015);
}

TEST(Rayleigh, FixedSeedIsReproducible) {
  Rng a(5), b(5);
  EXPECT_EQ(draw_rayleigh(a), draw_rayleigh(b));
}

TEST(Steering, HandComputedVectors) {
  for (const auto& e : steering_vector(4, 0.0)) EXPECT_NEAR(std::abs(e - ComplexGain(1, 0)), 0.0, 1e-15);
  const auto half = steering_vector(4, pi / 2);
  const double expect[] = {1, -1, 1, -1};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(half[k] - ComplexGain(expect[k], 0)), 0.0, 1e-12);
  const auto sixth = steering_vector(2, pi / 6);
  EXPECT_NEAR(std::abs(sixth[0] - ComplexGain(1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(sixth[1] - ComplexGain(0, 1)), 0.0, 1e-12);
  for (const auto& e : steering_vector(16, 0.3)) EXPECT_NEAR(std::abs(e), 1.0, 1e-15);
  EXPECT_THROW((void)steering_vector(0, 0.0), ShapeError);
}

TEST(Rician, PureLosLimit) {
  Rng rng(3);
  const auto h = draw_rician(rng, 8, 0.4, 1e12, 2.5);
  const auto a = steering_vector(8, 0.4);
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(std::abs(h[k] - std::sqrt(2.5) * a[k]), 0.0, 1e-5);
}

TEST(Rician, ZeroKappaPerElementPower) {
  Rng rng(4);
  const int n = 100000;
  double p = 0.0;
  for (int i = 0; i < n; ++i) p += std::norm(draw_rician(rng, 1, 0.2, 0.0, 3e-4)[0]);
  EXPECT_NEAR(p / n / 3e-4, 1.0, 0.02);
}

TEST(Rician, TotalPowerIsKTimesGain) {
  Rng rng(5);
  const int n = 100000;
  double p = 0.0;
  for (int i = 0; i < n; ++i) p += mean_power(draw_rician(rng, 8, 0.7, 2.0, 0.5));
  EXPECT_NEAR(p / n / (8 * 0.5), 1.0, 0.02);
}

TEST(Rician, LosNlosPowerSplit) {
  // E[h] = sqrt(gain kappa/(1+kappa)) a, so |E h|^2 / E|h|^2 = kappa / (1+kappa)
  Rng rng(6);
  const double kappa = db_to_linear(3.0);
  const int n = 100000;
  ComplexGain mean{};
  double p = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto h = draw_rician(rng, 1, 0.3, kappa, 1.0);
    mean += h[0];
    p += std::norm(h[0]);
  }
  mean /= n;
  p /= n;
  EXPECT_NEAR(std::norm(mean) / p, kappa / (1 + kappa), 0.03 * kappa / (1 + kappa));
  EXPECT_NEAR((p - std::norm(mean)) / p, 1 / (1 + kappa), 0.03 / (1 + kappa) * 1.0 + 0.01);
}

TEST(Rician, ConsumesKDrawsRegardlessOfKappa) {
  Rng a(8), b(8);
  (void)draw_rician(a, 5, 0.1, 0.0, 1.0);
  (void)draw_rician(b, 5, 1.2, 1e9, 7.0);
  EXPECT_EQ(a, b);
}

TEST(Cascade, HandArithmetic) {
  const ComplexVector ones{1.0, 1.0};
  EXPECT_NEAR(std::abs(cascaded_gain(ones, PhaseConfig(2), ones) - ComplexGain(2, 0)), 0.0, 1e-15);
  const ComplexVector h_br{1.0, -1.0};
  EXPECT_NEAR(std::abs(cascaded_gain(ones, PhaseConfig(std::vector<double>{0.0, pi}), h_br) - ComplexGain(2, 0)), 0.0,
              1e-12);
  EXPECT_THROW((void)cascaded_gain(ComplexVector{1.0}, PhaseConfig(2), ones), ShapeError);
}

TEST(Cascade, AlignmentAttainsTheTriangleBound) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    ComplexVector h_ru(12), h_br(12);
    for (auto& x : h_ru) x = draw_rayleigh(rng);
    for (auto& x : h_br) x = draw_rayleigh(rng);
    const double bound = aligned_cascade_magnitude(h_ru, h_br);
    EXPECT_NEAR(std::abs(cascaded_gain(h_ru, aligning_phases(h_ru, h_br), h_br)), bound, 1e-12 * bound);
    std::vector<double> theta(12);
    for (auto& t : theta) t = rng.uniform(-pi, pi);
    EXPECT_LE(std::abs(cascaded_gain(h_ru, PhaseConfig(theta), h_br)), bound * (1 + 1e-12));
  }
}

TEST(Phase, WrapIntoHalfOpenInterval) {
  EXPECT_EQ(wrap_phase(pi), -pi);
  EXPECT_EQ(wrap_phase(-pi), -pi);
  EXPECT_NEAR(wrap_phase(3 * pi / 2), -pi / 2, 1e-12);
  EXPECT_NEAR(wrap_phase(-7.0), -7.0 + 2 * pi, 1e-12);
  Rng rng(10);
  for (int i = 0; i < 10000; ++i) {
    const double t = rng.uniform(-1e3, 1e3);
    const double w = wrap_phase(t);
    ASSERT_GE(w, -pi);
    ASSERT_LT(w, pi);
    ASSERT_NEAR(std::remainder(t - w, 2 * pi), 0.0, 1e-9);
    ASSERT_LT(wrap_phase(std::nextafter(pi, 0.0)), pi);
  }
}

TEST(Phase, CascadeInvariantUnderTwoPiShifts) {
  Rng rng(11);
  ComplexVector h_ru(6), h_br(6);
  for (auto& x : h_ru) x = draw_rayleigh(rng);
  for (auto& x : h_br) x = draw_rayleigh(rng);
  std::vector<double> theta(6);
  for (auto& t : theta) t = rng.uniform(-pi, pi);
  const auto base = cascaded_gain(h_ru, PhaseConfig(theta), h_br);
  for (int k = 0; k < 6; ++k) {
    auto shifted = theta;
    shifted[k] += 2 * pi * (k % 2 ? 3 : -2);
    EXPECT_NEAR(std::abs(cascaded_gain(h_ru, PhaseConfig(shifted), h_br) - base), 0.0, 1e-12);
  }
}

TEST(Realize, EdgeDirectLinksAreZeroAndShapesMatch) {
  const Scenario s;
  Rng rng(12);
  const auto ch = realize_slot(s, s.uav_initial, rng);
  for (const auto& per_bs : ch.direct_edge) {
    for (const auto& g : per_bs) EXPECT_EQ(g, ComplexGain(0.0, 0.0));
  }
  ASSERT_EQ(ch.bs_to_ris.size(), 2u);
  ASSERT_EQ(ch.ris_to_user.size(), 3u);
  for (const auto& v : ch.bs_to_ris) EXPECT_EQ(v.size(), static_cast<std::size_t>(s.ris_elements));
  EXPECT_EQ(ch.interference[0][0][0], ComplexGain(0.0, 0.0));
  EXPECT_NE(ch.interference[0][0][1], ComplexGain(0.0, 0.0));
}

TEST(Realize, IdenticalRngStateGivesIdenticalRealization) {
  const Scenario s;
  Rng a(13), b(13);
  const auto x = realize_slot(s, s.uav_initial, a);
  const auto y = realize_slot(s, s.uav_initial, b);
  EXPECT_EQ(x.bs_to_ris, y.bs_to_ris);
  EXPECT_EQ(x.ris_to_user, y.ris_to_user);
  EXPECT_EQ(x.direct_center, y.direct_center);
}

TEST(Realize, DrawCountIndependentOfPosition) {
  const Scenario s;
  Rng a(14), b(14);
  (void)realize_slot(s, {0, 35, 50}, a);
  (void)realize_slot(s, {-60, -70, 50}, b);
  EXPECT_EQ(a, b);
}

TEST(Realize, BsToRisPowerGrowsAsTheUavApproaches) {
  const Scenario s;
  const int n = 20000;
  auto mean_link_power = [&](Position3 uav) {
    Rng rng(15);
    double p = 0.0;
    for (int i = 0; i < n; ++i) p += mean_power(realize_slot(s, uav, rng).bs_to_ris[1]);
    return p / n;
  };
  const double far = mean_link_power({-60, -60, 50});
  const double mid = mean_link_power({0, 0, 50});
  const double near = mean_link_power({30, 30, 50});
  EXPECT_LT(far, mid);
  EXPECT_LT(mid, near);
  // exact expectation: K * path gain
  const double g = path_gain(distance(s.bs_positions[1], {30, 30, 50}), s.exponents.reflect, s.pathloss_ref_linear());
  EXPECT_NEAR(near / (s.ris_elements * g), 1.0, 0.02);
}

TEST(Geometry, ElevationAngle) {
  EXPECT_NEAR(elevation_angle({0, 0, 0}, {0, 0, 10}), pi / 2, 1e-15);
  EXPECT_NEAR(elevation_angle({0, 0, 0}, {10, 0, 10}), pi / 4, 1e-15);
  EXPECT_NEAR(elevation_angle({0, 0, 10}, {10, 0, 0}), -pi / 4, 1e-15);
  EXPECT_EQ(elevation_angle({1, 2, 3}, {1, 2, 3}), 0.0);
}
