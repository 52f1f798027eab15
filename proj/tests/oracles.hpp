#pragma once
// Independent reference implementations used by the unit and acceptance
// tests. They work from powers in mW rather than the library's SNR form and
// share no helpers with the code under test beyond the channel containers.

#include <cmath>
#include <complex>
#include <vector>

#include "arisppo/channel.hpp"
#include "arisppo/scenario.hpp"

namespace oracle {

struct Rates {
  std::vector<double> per_user;  // global user order
  double sum = 0.0;
};

inline std::complex<double> reflect(const arisppo::ComplexVector& ru, const std::vector<double>& theta,
                                    const arisppo::ComplexVector& br) {
  std::complex<double> acc = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    acc += ru[k] * std::exp(std::complex<double>(0.0, theta[k])) * br[k];
  }
  return acc;
}

/// NOMA rates; noma=false gives the equal-time OMA comparator.
inline Rates rates(const arisppo::ChannelRealization& ch, const std::vector<double>& theta,
                   const std::vector<double>& lambda, double p_mw, double noise_mw, bool noma = true) {
  Rates r;
  const std::size_t cells = ch.bs_to_ris.size();
  std::size_t u = 0;
  for (std::size_t i = 0; i < cells; ++i) {
    for (std::size_t c = 0; c < ch.direct_center[i].size(); ++c, ++u) {
      const double g = std::norm(ch.direct_center[i][c] + reflect(ch.ris_to_user[u], theta, ch.bs_to_ris[i]));
      double ici = 0.0;
      for (std::size_t j = 0; j < cells; ++j) {
        if (j != i) ici += p_mw * std::norm(ch.interference[i][c][j]);
      }
      const double rate = noma ? std::log2(1.0 + (1.0 - lambda[i]) * p_mw * g / (ici + noise_mw))
                               : 0.5 * std::log2(1.0 + p_mw * g / (ici + noise_mw));
      r.per_user.push_back(rate);
    }
  }
  const std::size_t edges = ch.ris_to_user.size() - u;
  for (std::size_t f = 0; f < edges; ++f, ++u) {
    double wanted = 0.0, intra = 0.0, total = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      const double g = std::norm(reflect(ch.ris_to_user[u], theta, ch.bs_to_ris[i]));
      wanted += lambda[i] * p_mw * g;
      intra += (1.0 - lambda[i]) * p_mw * g;
      total += p_mw * g;
    }
    r.per_user.push_back(noma ? std::log2(1.0 + wanted / (intra + noise_mw))
                              : 0.5 * std::log2(1.0 + total / noise_mw));
  }
  for (double v : r.per_user) r.sum += v;
  return r;
}

/// Penalized sum-rate reward written out from scratch.
inline double reward(const std::vector<double>& user_rates, int center_users, double rc_min, double rf_min,
                     bool safety, double k_viol) {
  double sum = 0.0;
  int viol = 0;
  for (std::size_t u = 0; u < user_rates.size(); ++u) {
    sum += user_rates[u];
    const double thr = static_cast<int>(u) < center_users ? rc_min : rf_min;
    if (!(user_rates[u] > thr)) ++viol;
  }
  return sum - sum * viol / static_cast<double>(user_rates.size()) - (safety ? k_viol : 0.0);
}

}  // namespace oracle
