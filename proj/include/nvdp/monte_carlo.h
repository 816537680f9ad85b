//
// Copyright 2026 The NVDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Monte-Carlo estimate of D_lambda(Q || Q') straight from the defining
// integral, plus the log-density of the ordered posterior sampling procedure.
// Used as an independent check of every closed form.

#ifndef NVDP_MONTE_CARLO_H_
#define NVDP_MONTE_CARLO_H_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "nvdp/errors.h"
#include "nvdp/posterior.h"
#include "nvdp/renyi.h"
#include "nvdp/samplers.h"
#include "nvdp/special_functions.h"

namespace nvdp {

inline constexpr double kZ99 = 2.5758293035489004;

struct MonteCarloEstimate {
  double estimate = 0.0;
  double ci99 = 0.0;  // half-width of the 99% interval (delta method)
  bool infinite = false;

  bool Contains(double value, double slack = 0.0) const {
    return std::abs(value - estimate) <= ci99 + slack;
  }
};

// (1 / (lambda - 1)) ln E_{z ~ Q}[exp((lambda - 1)(ln Q(z) - ln Q'(z)))].
// `sampler(Rng&)` draws z ~ Q; `log_q(z)` and `log_q_prime(z)` evaluate the
// log densities.
template <typename Sampler, typename LogQ, typename LogQPrime>
MonteCarloEstimate RdMonteCarlo(Sampler&& sampler, LogQ&& log_q, LogQPrime&& log_q_prime,
                                RenyiOrder order, std::int64_t n_draws, RngState rng_state) {
  if (n_draws < 10000) throw ArgumentError("RdMonteCarlo: need at least 1e4 draws");
  const double lm1 = order.value() - 1.0;
  Rng rng(rng_state);
  std::vector<double> log_w(static_cast<std::size_t>(n_draws));
  for (std::int64_t k = 0; k < n_draws; ++k) {
    const auto z = sampler(rng);
    const double lq = log_q(z);
    const double lqp = log_q_prime(z);
    if (lqp == -kInf && lq > -kInf) return {kInf, 0.0, true};
    log_w[static_cast<std::size_t>(k)] = lm1 * (lq - lqp);
  }
  double max = -kInf;
  for (double v : log_w) max = std::max(max, v);
  // Welford on the shifted weights for mean and variance.
  double mean = 0.0;
  double m2 = 0.0;
  std::int64_t count = 0;
  for (double v : log_w) {
    const double w = std::exp(v - max);
    ++count;
    const double delta = w - mean;
    mean += delta / count;
    m2 += delta * (w - mean);
  }
  const double var = m2 / (count - 1);
  MonteCarloEstimate out;
  out.estimate = (max + std::log(mean)) / lm1;
  out.ci99 = kZ99 * std::sqrt(var / count) / mean / lm1;
  return out;
}

// ln of the Dirichlet density over slot weights times the Gaussian densities
// of each slot's vector. Slots with zero pseudo-count must carry weight 0;
// anything off the support gives -inf.
inline double RdDpLogDensity(const DPPosterior& q, const WeightedVectorSample& s) {
  const int m = q.slots();
  if (s.m() != m || s.d() != q.d()) throw ArgumentError("RdDpLogDensity: sample shape mismatch");
  const Vector slot_alpha = SlotAlpha(q);
  const bool have_log = s.log_pi.size() == m;
  double total_alpha = 0.0;
  int positive = 0;
  double log_density = 0.0;
  for (int k = 0; k < m; ++k) {
    const double log_pi = have_log ? s.log_pi[k] : std::log(s.pi[k]);
    if (slot_alpha[k] == 0.0) {
      if (log_pi > -kInf) return -kInf;
      continue;
    }
    if (log_pi == -kInf) return -kInf;
    ++positive;
    total_alpha += slot_alpha[k];
    log_density += (slot_alpha[k] - 1.0) * log_pi - LogGamma(slot_alpha[k]);
  }
  // A single live slot is a point mass at pi = 1; it adds nothing.
  log_density = positive > 1 ? log_density + LogGamma(total_alpha) : 0.0;

  constexpr double kHalfLog2Pi = 0.9189385332046728;
  int slot = 0;
  for (int i = 0; i < q.components(); ++i) {
    for (int r = 0; r < q.kappa[i]; ++r, ++slot) {
      for (int c = 0; c < q.d(); ++c) {
        const double sd = q.sigma(i, c);
        const double u = (s.z(slot, c) - q.mu(i, c)) / sd;
        log_density += -0.5 * u * u - std::log(sd) - kHalfLog2Pi;
      }
    }
  }
  return log_density;
}

// Monte-Carlo check of RdDpPosteriors under the ordered sampling procedure.
inline MonteCarloEstimate RdDpMonteCarlo(const DPPosterior& q, const DPPosterior& q_prime,
                                         RenyiOrder order, std::int64_t n_draws,
                                         RngState rng_state) {
  return RdMonteCarlo([&](Rng& rng) { return SampleEmbedding(q, rng); },
                      [&](const WeightedVectorSample& s) { return RdDpLogDensity(q, s); },
                      [&](const WeightedVectorSample& s) { return RdDpLogDensity(q_prime, s); },
                      order, n_draws, rng_state);
}

// Monte-Carlo check of diagonal-Gaussian divergences.
inline MonteCarloEstimate RdGaussianMonteCarlo(const Vector& mu, const Vector& sigma,
                                               const Vector& mu_prime, const Vector& sigma_prime,
                                               RenyiOrder order, std::int64_t n_draws,
                                               RngState rng_state) {
  auto log_density = [](const Vector& z, const Vector& m, const Vector& s) {
    return (-0.5 * ((z - m).array() / s.array()).square() - s.array().log() -
            0.9189385332046728)
        .sum();
  };
  return RdMonteCarlo(
      [&](Rng& rng) {
        Vector z(mu.size());
        for (Eigen::Index c = 0; c < z.size(); ++c) z[c] = mu[c] + sigma[c] * rng.Normal();
        return z;
      },
      [&](const Vector& z) { return log_density(z, mu, sigma); },
      [&](const Vector& z) { return log_density(z, mu_prime, sigma_prime); }, order, n_draws,
      rng_state);
}

}  // namespace nvdp

#endif  // NVDP_MONTE_CARLO_H_
