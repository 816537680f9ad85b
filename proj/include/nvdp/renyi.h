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

// Closed-form Renyi divergences D_lambda(Q || Q') for the four sharing
// mechanisms: Dirichlet-Process posteriors sampled in token order, per-token
// diagonal Gaussians, and fixed / learned Gaussian noise on pooled vectors.
//
// Infinite divergences are ordinary results (value = +inf, valid = false),
// never exceptions; worst-case aggregation depends on them propagating.

#ifndef NVDP_RENYI_H_
#define NVDP_RENYI_H_

#include <algorithm>
#include <cmath>
#include <string>

#include "nvdp/errors.h"
#include "nvdp/posterior.h"
#include "nvdp/special_functions.h"
#include "nvdp/types.h"

namespace nvdp {

class RenyiOrder {
 public:
  explicit RenyiOrder(double lambda) : lambda_(lambda) {
    if (!(lambda > 1.0) || !std::isfinite(lambda)) {
      throw ArgumentError("Renyi order must be finite and > 1, got " + std::to_string(lambda));
    }
  }
  // Order used as a stand-in for the KL limit.
  static RenyiOrder NearKl() { return RenyiOrder(1.0 + 1e-4); }

  double value() const { return lambda_; }

 private:
  double lambda_;
};

struct RenyiResult {
  double value = 0.0;
  double dirichlet_total = 0.0;
  double dirichlet_components = 0.0;
  double gaussian_components = 0.0;
  bool valid = true;

  bool finite() const { return std::isfinite(value); }

  static RenyiResult Infinite() { return {kInf, 0.0, 0.0, 0.0, false}; }
};

// How the per-dimension Gaussian term is evaluated.
//   kExact: sigma*^2 = lambda sigma'^2 + (1 - lambda) sigma^2 and the log
//     term ln(sigma* / (sigma^(1-lambda) sigma'^lambda)); the exact order-lambda
//     divergence of N(mu, sigma^2) from N(mu', sigma'^2).
//   kAsPrinted: the mixture mirrored, sigma*^2 = (1 - lambda) sigma'^2 +
//     lambda sigma^2, with ln(sigma* / (sigma'^(1-lambda) sigma^lambda)). This
//     is D_lambda(Q' || Q) and disagrees with Monte Carlo unless sigma = sigma'.
//   kAsPrintedPriorSigma: kAsPrinted with the prior sigma in place of sigma'
//     inside the log term. Diagnostic only.
enum class GaussianForm { kExact, kAsPrinted, kAsPrintedPriorSigma };

namespace internal {

// One dimension of the Gaussian term; returns +inf if the mixture variance
// is not positive.
inline double GaussianRdTerm(double mu, double sigma, double mu_prime, double sigma_prime,
                             double lambda, GaussianForm form, double prior_sigma) {
  if (mu == mu_prime && sigma == sigma_prime && form != GaussianForm::kAsPrintedPriorSigma) {
    return 0.0;
  }
  double mix2;
  double log_ref;
  switch (form) {
    case GaussianForm::kExact:
      mix2 = lambda * sigma_prime * sigma_prime + (1.0 - lambda) * sigma * sigma;
      log_ref = (1.0 - lambda) * std::log(sigma) + lambda * std::log(sigma_prime);
      break;
    case GaussianForm::kAsPrinted:
      mix2 = (1.0 - lambda) * sigma_prime * sigma_prime + lambda * sigma * sigma;
      log_ref = (1.0 - lambda) * std::log(sigma_prime) + lambda * std::log(sigma);
      break;
    case GaussianForm::kAsPrintedPriorSigma:
    default:
      mix2 = (1.0 - lambda) * sigma_prime * sigma_prime + lambda * sigma * sigma;
      log_ref = (1.0 - lambda) * std::log(prior_sigma) + lambda * std::log(sigma);
      break;
  }
  if (!(mix2 > 0.0)) return kInf;
  const double diff = mu - mu_prime;
  return 0.5 * lambda * diff * diff / mix2 + (0.5 * std::log(mix2) - log_ref) / (1.0 - lambda);
}

// Dirichlet term for one pair of pseudo-counts (a from Q, b from Q').
// Both zero means the slot is absent from both samples and contributes 0.
inline double DirichletRdTerm(double a, double b, double lambda) {
  if (a == 0.0 && b == 0.0) return 0.0;
  if (a == 0.0 || b == 0.0) return kInf;
  if (a == b) return 0.0;
  const double c = lambda * a - (lambda - 1.0) * b;
  if (!(c > 0.0)) return kInf;
  return LogGamma(c) / (lambda - 1.0) + LogGamma(b) - lambda / (lambda - 1.0) * LogGamma(a);
}

}  // namespace internal

// D_lambda between the ordered sampling distributions of two posteriors with
// equal length, dimension and kappa (pad first with PadToLength). The sum of
// a total-count block, per-component Dirichlet blocks and per-component
// Gaussian blocks; each component's blocks are scaled by kappa_i.
inline RenyiResult RdDpPosteriors(const DPPosterior& q, const DPPosterior& q_prime,
                                  RenyiOrder order, const PriorParams& prior,
                                  GaussianForm form = GaussianForm::kExact) {
  if (q.components() != q_prime.components() || q.d() != q_prime.d()) {
    throw ArgumentError("RdDpPosteriors: shape mismatch (" + std::to_string(q.n()) + "x" +
                        std::to_string(q.d()) + " vs " + std::to_string(q_prime.n()) + "x" +
                        std::to_string(q_prime.d()) + "); pad to a common length first");
  }
  if (q.kappa != q_prime.kappa) throw ArgumentError("RdDpPosteriors: kappa mismatch");
  if (form == GaussianForm::kAsPrintedPriorSigma && prior.sigma.size() != q.d()) {
    throw ArgumentError("RdDpPosteriors: prior dimension mismatch");
  }
  const double lambda = order.value();
  RenyiResult r;

  const double total_q = q.total_alpha();
  const double total_p = q_prime.total_alpha();
  const double c0 = lambda * total_q - (lambda - 1.0) * total_p;
  if (!(c0 > 0.0)) return RenyiResult::Infinite();
  if (total_q != total_p) {
    r.dirichlet_total = -(LogGamma(c0) / (lambda - 1.0) + LogGamma(total_p) -
                          lambda / (lambda - 1.0) * LogGamma(total_q));
  }

  for (int i = 0; i < q.components(); ++i) {
    const double kappa = q.kappa[i];
    const double term = internal::DirichletRdTerm(q.alpha[i] / kappa, q_prime.alpha[i] / kappa, lambda);
    if (!std::isfinite(term)) return RenyiResult::Infinite();
    r.dirichlet_components += kappa * term;

    double gaussian = 0.0;
    for (int c = 0; c < q.d(); ++c) {
      const double prior_sigma = form == GaussianForm::kAsPrintedPriorSigma ? prior.sigma[c] : 1.0;
      gaussian += internal::GaussianRdTerm(q.mu(i, c), q.sigma(i, c), q_prime.mu(i, c),
                                           q_prime.sigma(i, c), lambda, form, prior_sigma);
    }
    if (!std::isfinite(gaussian)) return RenyiResult::Infinite();
    r.gaussian_components += kappa * gaussian;
  }
  r.value = r.dirichlet_total + r.dirichlet_components + r.gaussian_components;
  return r;
}

// Pads the shorter posterior (pads get pad_alpha) and evaluates RdDpPosteriors.
inline RenyiResult RdDpPosteriorsAligned(const DPPosterior& q, const DPPosterior& q_prime,
                                         RenyiOrder order, const PriorParams& prior,
                                         double pad_alpha = kAuditPadFloor,
                                         GaussianForm form = GaussianForm::kExact) {
  const int n = std::max(q.n(), q_prime.n());
  return RdDpPosteriors(PadToLength(q, n, pad_alpha), PadToLength(q_prime, n, pad_alpha), order,
                        prior, form);
}

// Per-token diagonal Gaussian mechanism: D_lambda(N(mu, sigma_q^2) || N(mu', sigma_ref^2)).
inline RenyiResult RdGaussianDiag(const Vector& mu, const Vector& sigma_q, const Vector& mu_prime,
                                  const Vector& sigma_prime_ref, RenyiOrder order,
                                  GaussianForm form = GaussianForm::kExact) {
  if (mu.size() != sigma_q.size() || mu.size() != mu_prime.size() ||
      mu.size() != sigma_prime_ref.size()) {
    throw ArgumentError("RdGaussianDiag: length mismatch");
  }
  if ((sigma_q.array() <= 0.0).any() || (sigma_prime_ref.array() <= 0.0).any()) {
    throw ArgumentError("RdGaussianDiag: sigma must be > 0");
  }
  if (form == GaussianForm::kAsPrintedPriorSigma) {
    throw ArgumentError("RdGaussianDiag: prior-sigma form needs a prior");
  }
  RenyiResult r;
  for (Eigen::Index c = 0; c < mu.size(); ++c) {
    r.gaussian_components += internal::GaussianRdTerm(mu[c], sigma_q[c], mu_prime[c],
                                                      sigma_prime_ref[c], order.value(), form, 1.0);
  }
  if (!std::isfinite(r.gaussian_components)) return RenyiResult::Infinite();
  r.value = r.gaussian_components;
  return r;
}

// Fixed isotropic noise on pooled vectors: lambda ||mu - mu'||^2 / (2 sigma^2).
inline double RdGaussianIsotropic(const Vector& mu, const Vector& mu_prime, double sigma,
                                  RenyiOrder order) {
  if (mu.size() != mu_prime.size()) throw ArgumentError("RdGaussianIsotropic: length mismatch");
  if (!(sigma > 0.0)) throw ArgumentError("RdGaussianIsotropic: sigma must be > 0");
  return order.value() * (mu - mu_prime).squaredNorm() / (2.0 * sigma * sigma);
}

// Learned per-dimension noise shared by all inputs: (lambda / 2) ||(mu - mu') / sigma||^2.
inline double RdGaussianLearned(const Vector& mu, const Vector& mu_prime, const Vector& sigma,
                                RenyiOrder order) {
  if (mu.size() != mu_prime.size() || mu.size() != sigma.size()) {
    throw ArgumentError("RdGaussianLearned: length mismatch");
  }
  if ((sigma.array() <= 0.0).any()) throw ArgumentError("RdGaussianLearned: sigma must be > 0");
  return 0.5 * order.value() * ((mu - mu_prime).array() / sigma.array()).square().sum();
}

}  // namespace nvdp

#endif  // NVDP_RENYI_H_
