#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "arisppo/channel.hpp"
#include "arisppo/scenario.hpp"

namespace arisppo {

/// Edge-user power fraction per BS, each strictly inside (0.5, 1).
class PowerSplit {
 public:
  PowerSplit() = default;
  explicit PowerSplit(std::vector<double> lambda) : lambda_(std::move(lambda)) {
    for (double l : lambda_) {
      if (!(l > 0.5 && l < 1.0)) {
        throw std::invalid_argument("PowerSplit: lambda must lie in (0.5, 1), got " + std::to_string(l));
      }
    }
  }
  static PowerSplit uniform(std::size_t cells, double lambda = 0.75) {
    return PowerSplit(std::vector<double>(cells, lambda));
  }

  [[nodiscard]] std::size_t size() const noexcept { return lambda_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return lambda_[i]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return lambda_; }

 private:
  std::vector<double> lambda_;
};

/// Non-coherent JT-CoMP SINR at an edge user.
///   sum_i lambda_i g_i / (sum_i (1 - lambda_i) g_i + 1/rho)
inline double sinr_edge(std::span<const double> gains, std::span<const double> lambda, double rho) {
  double signal = 0.0;
  double intra = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    signal += lambda[i] * gains[i];
    intra += (1.0 - lambda[i]) * gains[i];
  }
  return signal / (intra + 1.0 / rho);
}

/// SINR at a center user while decoding the edge user's layer (before SIC).
inline double sinr_sic_at_center(double gain, double ici, double lambda, double rho) noexcept {
  return lambda * gain / ((1.0 - lambda) * gain + ici + 1.0 / rho);
}

/// SINR at a center user for its own layer after SIC.
inline double sinr_center(double gain, double ici, double lambda, double rho) noexcept {
  return (1.0 - lambda) * gain / (ici + 1.0 / rho);
}

inline double shannon_rate(double sinr) noexcept { return std::log2(1.0 + sinr); }

/// Channel powers that the rate formulas consume.
struct EffectiveGains {
  std::vector<std::vector<double>> center;      // |H_{i,c}|^2, direct + cascaded
  std::vector<std::vector<double>> center_ici;  // sum over other BSs of |h_{j,c}|^2
  std::vector<std::vector<double>> edge;        // edge[f][i] = |H_{i,f}|^2, cascaded only
};

inline EffectiveGains effective_gains(const ChannelRealization& ch, const PhaseConfig& phases, const Scenario& s) {
  const auto cells = static_cast<std::size_t>(s.num_cells());
  EffectiveGains g;
  g.center.resize(cells);
  g.center_ici.resize(cells);
  std::size_t user = 0;
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t c = 0; c < ch.direct_center[i].size(); ++c, ++user) {
      const ComplexGain h = ch.direct_center[i][c] + cascaded_gain(ch.ris_to_user[user], phases, ch.bs_to_ris[i]);
      g.center[i].push_back(std::norm(h));
      double ici = 0.0;
      for (std::size_t j = 0; j < cells; ++j) {
        if (j != i) ici += std::norm(ch.interference[i][c][j]);
      }
      g.center_ici[i].push_back(ici);
    }
  }
  for (std::size_t f = 0; f < static_cast<std::size_t>(s.num_edge_users()); ++f, ++user) {
    std::vector<double> per_bs(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      per_bs[i] = std::norm(ch.direct_edge[i][f] + cascaded_gain(ch.ris_to_user[user], phases, ch.bs_to_ris[i]));
    }
    g.edge.push_back(std::move(per_bs));
  }
  return g;
}

/// Per-user rates and the SINRs behind them. For OMA reports the SIC SINRs
/// are zero (no superposition).
struct RateReport {
  std::vector<std::vector<double>> center_rates;
  std::vector<double> edge_rates;
  double sum = 0.0;
  std::vector<double> sinr_edge;
  std::vector<std::vector<double>> sinr_center;
  std::vector<std::vector<double>> sinr_sic;

  /// Rates in global user order (center users cell by cell, then edge users).
  [[nodiscard]] std::vector<double> user_rates() const {
    std::vector<double> out;
    for (const auto& cell : center_rates) out.insert(out.end(), cell.begin(), cell.end());
    out.insert(out.end(), edge_rates.begin(), edge_rates.end());
    return out;
  }
};

inline RateReport rates_from_gains(const EffectiveGains& g, const PowerSplit& split, double rho) {
  RateReport r;
  const std::size_t cells = g.center.size();
  r.center_rates.resize(cells);
  r.sinr_center.resize(cells);
  r.sinr_sic.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t c = 0; c < g.center[i].size(); ++c) {
      const double own = sinr_center(g.center[i][c], g.center_ici[i][c], split[i], rho);
      r.sinr_center[i].push_back(own);
      r.sinr_sic[i].push_back(sinr_sic_at_center(g.center[i][c], g.center_ici[i][c], split[i], rho));
      r.center_rates[i].push_back(shannon_rate(own));
      r.sum += r.center_rates[i].back();
    }
  }
  for (const auto& edge : g.edge) {
    const double gamma = sinr_edge(edge, split.values(), rho);
    r.sinr_edge.push_back(gamma);
    r.edge_rates.push_back(shannon_rate(gamma));
    r.sum += r.edge_rates.back();
  }
  return r;
}

/// Equal-time TDMA comparator: center users in one half-slot (ICI from the
/// neighbour cell's center transmission), edge users in the other with every
/// BS transmitting its signal at full power, powers combined non-coherently.
inline RateReport rates_oma_from_gains(const EffectiveGains& g, double rho) {
  RateReport r;
  const std::size_t cells = g.center.size();
  r.center_rates.resize(cells);
  r.sinr_center.resize(cells);
  r.sinr_sic.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t c = 0; c < g.center[i].size(); ++c) {
      const double snr = g.center[i][c] / (g.center_ici[i][c] + 1.0 / rho);
      r.sinr_center[i].push_back(snr);
      r.sinr_sic[i].push_back(0.0);
      r.center_rates[i].push_back(0.5 * shannon_rate(snr));
      r.sum += r.center_rates[i].back();
    }
  }
  for (const auto& edge : g.edge) {
    const double snr = rho * std::accumulate(edge.begin(), edge.end(), 0.0);
    r.sinr_edge.push_back(snr);
    r.edge_rates.push_back(0.5 * shannon_rate(snr));
    r.sum += r.edge_rates.back();
  }
  return r;
}

inline RateReport rates(const ChannelRealization& ch, const PhaseConfig& phases, const PowerSplit& split,
                        const Scenario& s) {
  if (split.size() != static_cast<std::size_t>(s.num_cells())) {
    throw ShapeError("rates: power split has " + std::to_string(split.size()) + " entries, expected " +
                     std::to_string(s.num_cells()));
  }
  return rates_from_gains(effective_gains(ch, phases, s), split, s.transmit_snr());
}

inline RateReport rates_oma(const ChannelRealization& ch, const PhaseConfig& phases, const Scenario& s) {
  return rates_oma_from_gains(effective_gains(ch, phases, s), s.transmit_snr());
}

}  // namespace arisppo
