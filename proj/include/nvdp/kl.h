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

// KL divergences in closed form. These are the lambda -> 1 limits of the
// Renyi blocks and double as the training regularizers.

#ifndef NVDP_KL_H_
#define NVDP_KL_H_

#include <cmath>

#include "nvdp/errors.h"
#include "nvdp/posterior.h"
#include "nvdp/special_functions.h"
#include "nvdp/types.h"

namespace nvdp {

// KL(Dir(a) || Dir(b)). Slots with a_i = b_i = 0 are absent from both.
inline double DirichletKl(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ArgumentError("DirichletKl: length mismatch");
  double total_a = 0.0;
  double total_b = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if ((a[i] == 0.0) != (b[i] == 0.0)) return kInf;
    total_a += a[i];
    total_b += b[i];
  }
  const double psi_total = Digamma(total_a);
  double kl = LogGamma(total_a) - LogGamma(total_b);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    kl += LogGamma(b[i]) - LogGamma(a[i]) + (a[i] - b[i]) * (Digamma(a[i]) - psi_total);
  }
  return kl;
}

// KL(N(mu, diag sigma^2) || N(mu', diag sigma'^2)).
inline double GaussianKlDiag(const RowVector& mu, const RowVector& sigma, const RowVector& mu_prime,
                             const RowVector& sigma_prime) {
  const auto var_ratio = (sigma.array() / sigma_prime.array()).square();
  const auto mean_term = ((mu - mu_prime).array() / sigma_prime.array()).square();
  return 0.5 * (var_ratio + mean_term - 1.0 - var_ratio.log()).sum();
}

// Dirichlet part of KL between the ordered sampling distributions.
inline double PosteriorDirichletKl(const DPPosterior& q, const DPPosterior& q_prime) {
  if (q.components() != q_prime.components() || q.kappa != q_prime.kappa) {
    throw ArgumentError("PosteriorDirichletKl: shape mismatch");
  }
  return DirichletKl(SlotAlpha(q), SlotAlpha(q_prime));
}

// Gaussian part: sum_i kappa_i KL(N_i || N'_i).
inline double PosteriorGaussianKl(const DPPosterior& q, const DPPosterior& q_prime) {
  if (q.components() != q_prime.components() || q.d() != q_prime.d()) {
    throw ArgumentError("PosteriorGaussianKl: shape mismatch");
  }
  double kl = 0.0;
  for (int i = 0; i < q.components(); ++i) {
    kl += q.kappa[i] *
          GaussianKlDiag(q.mu.row(i), q.sigma.row(i), q_prime.mu.row(i), q_prime.sigma.row(i));
  }
  return kl;
}

inline double PosteriorKl(const DPPosterior& q, const DPPosterior& q_prime) {
  return PosteriorDirichletKl(q, q_prime) + PosteriorGaussianKl(q, q_prime);
}

}  // namespace nvdp

#endif  // NVDP_KL_H_
