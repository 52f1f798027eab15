#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "arisppo/errors.hpp"
#include "arisppo/rng.hpp"
#include "arisppo/scenario.hpp"

namespace arisppo {

using ComplexGain = std::complex<double>;
using ComplexVector = std::vector<ComplexGain>;

/// Wraps any finite angle into [-pi, pi).
inline double wrap_phase(double theta) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(theta + std::numbers::pi, two_pi);
  if (w < 0.0) w += two_pi;
  w -= std::numbers::pi;
  // fmod rounding can land exactly on +pi for inputs just below it
  if (w >= std::numbers::pi) w = -std::numbers::pi;
  return w;
}

/// RIS phase shifts with unit-amplitude reflection; angles kept in [-pi, pi).
class PhaseConfig {
 public:
  PhaseConfig() = default;
  explicit PhaseConfig(std::size_t k) : theta_(k, 0.0) {}
  explicit PhaseConfig(std::vector<double> theta) : theta_(std::move(theta)) {
    for (double& t : theta_) t = wrap_phase(t);
  }

  [[nodiscard]] std::size_t size() const noexcept { return theta_.size(); }
  [[nodiscard]] std::span<const double> angles() const noexcept { return theta_; }
  [[nodiscard]] double operator[](std::size_t k) const noexcept { return theta_[k]; }
  void set(std::size_t k, double theta) { theta_.at(k) = wrap_phase(theta); }

 private:
  std::vector<double> theta_;
};

/// Reference-distance path gain rho_o / d^alpha, with d clamped to >= 1 m.
inline double path_gain(double d, double alpha, double rho_o) noexcept {
  return rho_o / std::pow(std::max(d, 1.0), alpha);
}

/// Circularly-symmetric CN(0, 1) sample.
inline ComplexGain draw_rayleigh(Rng& rng) noexcept {
  const double r = std::sqrt(-std::log(rng.uniform_open_low()));
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  return {r * std::cos(phi), r * std::sin(phi)};
}

/// Half-wavelength ULA response; element k (0-based) is exp(j k pi sin(omega)).
inline ComplexVector steering_vector(int k, double omega) {
  if (k < 1) throw ShapeError("steering_vector: K must be >= 1");
  const double step = std::numbers::pi * std::sin(omega);
  ComplexVector out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = std::polar(1.0, i * step);
  return out;
}

/// Rician vector channel sqrt(gain) * (sqrt(kappa/(1+kappa)) a(omega) + sqrt(1/(1+kappa)) g_nlos).
/// Always consumes exactly K Rayleigh draws, independent of kappa.
inline ComplexVector draw_rician(Rng& rng, int k, double omega, double kappa, double gain) {
  if (kappa < 0.0) throw ConfigError("draw_rician: kappa must be >= 0");
  const double amp = std::sqrt(gain);
  const double los = std::sqrt(kappa / (1.0 + kappa));
  const double nlos = std::sqrt(1.0 / (1.0 + kappa));
  ComplexVector h = steering_vector(k, omega);
  for (auto& e : h) e = amp * (los * e + nlos * draw_rayleigh(rng));
  return h;
}

/// h_ru^T diag(e^{j theta}) h_br.
inline ComplexGain cascaded_gain(std::span<const ComplexGain> h_ru, const PhaseConfig& phases,
                                 std::span<const ComplexGain> h_br) {
  if (h_ru.size() != phases.size() || h_br.size() != phases.size()) {
    throw ShapeError("cascaded_gain: expected " + std::to_string(phases.size()) +
                     " elements, got h_ru=" + std::to_string(h_ru.size()) +
                     " h_br=" + std::to_string(h_br.size()));
  }
  ComplexGain acc{0.0, 0.0};
  for (std::size_t k = 0; k < h_ru.size(); ++k) {
    acc += h_ru[k] * std::polar(1.0, phases[k]) * h_br[k];
  }
  return acc;
}

/// Upper bound on |cascaded_gain| over all phase configurations.
inline double aligned_cascade_magnitude(std::span<const ComplexGain> h_ru, std::span<const ComplexGain> h_br) {
  double acc = 0.0;
  for (std::size_t k = 0; k < std::min(h_ru.size(), h_br.size()); ++k) acc += std::abs(h_ru[k]) * std::abs(h_br[k]);
  return acc;
}

/// Phases that co-phase every element of one cascaded link.
inline PhaseConfig aligning_phases(std::span<const ComplexGain> h_ru, std::span<const ComplexGain> h_br) {
  std::vector<double> theta(h_ru.size());
  for (std::size_t k = 0; k < h_ru.size(); ++k) theta[k] = -std::arg(h_ru[k] * h_br[k]);
  return PhaseConfig(std::move(theta));
}

/// Elevation angle of the segment from -> to, in [-pi/2, pi/2].
inline double elevation_angle(const Position3& from, const Position3& to) noexcept {
  const double d = distance(from, to);
  if (d <= 0.0) return 0.0;
  return std::asin(std::clamp((to.z - from.z) / d, -1.0, 1.0));
}

/// Every complex gain for one time slot.
///
/// Users are indexed globally: center users cell by cell, then edge users.
struct ChannelRealization {
  /// direct_center[i][c]: BS i to its own c-th center user.
  std::vector<std::vector<ComplexGain>> direct_center;
  /// interference[i][c][j]: BS j to center user c of cell i. Entry j == i is zero.
  std::vector<std::vector<std::vector<ComplexGain>>> interference;
  /// direct_edge[i][f]: always zero (blocked).
  std::vector<std::vector<ComplexGain>> direct_edge;
  /// bs_to_ris[i]: K gains.
  std::vector<ComplexVector> bs_to_ris;
  /// ris_to_user[u]: K gains, global user index.
  std::vector<ComplexVector> ris_to_user;
};

/// Draws the channel state at one UAV position.
///
/// Draw order is fixed (direct, interference, BS->RIS, RIS->user) and the
/// number of draws does not depend on the position, so a copy of the rng
/// replayed at another position sees the same small-scale fading.
inline ChannelRealization realize_slot(const Scenario& s, const Position3& uav, Rng& rng) {
  const int cells = s.num_cells();
  const int k = s.ris_elements;
  const double rho_o = s.pathloss_ref_linear();
  const double kappa = s.rician_k_linear();

  ChannelRealization out;
  out.direct_center.resize(static_cast<std::size_t>(cells));
  out.interference.resize(static_cast<std::size_t>(cells));
  out.direct_edge.assign(static_cast<std::size_t>(cells),
                         std::vector<ComplexGain>(static_cast<std::size_t>(s.num_edge_users()), ComplexGain{}));

  for (int i = 0; i < cells; ++i) {
    const auto& bs = s.bs_positions[static_cast<std::size_t>(i)];
    for (const auto& user : s.center_user_positions[static_cast<std::size_t>(i)]) {
      const double g = path_gain(distance(bs, user), s.exponents.direct, rho_o);
      out.direct_center[static_cast<std::size_t>(i)].push_back(std::sqrt(g) * draw_rayleigh(rng));
    }
  }
  for (int i = 0; i < cells; ++i) {
    auto& per_user = out.interference[static_cast<std::size_t>(i)];
    for (const auto& user : s.center_user_positions[static_cast<std::size_t>(i)]) {
      std::vector<ComplexGain> from_bs(static_cast<std::size_t>(cells), ComplexGain{});
      for (int j = 0; j < cells; ++j) {
        if (j == i) continue;
        const double g = path_gain(distance(s.bs_positions[static_cast<std::size_t>(j)], user),
                                   s.exponents.interference, rho_o);
        from_bs[static_cast<std::size_t>(j)] = std::sqrt(g) * draw_rayleigh(rng);
      }
      per_user.push_back(std::move(from_bs));
    }
  }
  for (int i = 0; i < cells; ++i) {
    const auto& bs = s.bs_positions[static_cast<std::size_t>(i)];
    const double g = path_gain(distance(bs, uav), s.exponents.reflect, rho_o);
    out.bs_to_ris.push_back(draw_rician(rng, k, elevation_angle(bs, uav), kappa, g));
  }
  auto add_user = [&](const Position3& user) {
    const double g = path_gain(distance(uav, user), s.exponents.reflect, rho_o);
    out.ris_to_user.push_back(draw_rician(rng, k, elevation_angle(user, uav), kappa, g));
  };
  for (const auto& cell : s.center_user_positions) {
    for (const auto& user : cell) add_user(user);
  }
  for (const auto& user : s.edge_user_positions) add_user(user);
  return out;
}

}  // namespace arisppo
