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

// Regularized incomplete gamma in log space and the inverse-CDF Gamma sampler
// with implicit reparameterization gradients.
//
// A Gamma(a, 1) variate is produced from a uniform base variate u as
// z = P^{-1}(a, u). Holding u fixed, dz/da = -(dP/da) / p(z; a), which is the
// implicit reparameterization gradient. Everything is carried as t = ln z so
// that very small shapes (z far below the smallest double) stay representable.

#ifndef NVDP_GAMMA_REPARAM_H_
#define NVDP_GAMMA_REPARAM_H_

#include <cmath>
#include <limits>

#include "nvdp/errors.h"
#include "nvdp/special_functions.h"

namespace nvdp {

namespace internal {

inline constexpr int kMaxSeriesTerms = 100000;

// ln of sum_{n>=0} z^n / ((a+1)...(a+n)).
inline double LogLowerGammaSeries(double a, double z) {
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < kMaxSeriesTerms; ++n) {
    term *= z / (a + n);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::log(sum);
}

// ln Q(a, z) by modified Lentz continued fraction; use for z >= a + 1.
inline double LogUpperGammaFraction(double a, double z) {
  constexpr double kTiny = 1e-300;
  double b = z + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxSeriesTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return -z + a * std::log(z) - LogGamma(a) + std::log(h);
}

// ln P(a, e^t); stays finite when e^t underflows.
inline double LogGammaPAtLog(double a, double t) {
  const double z = std::exp(t);
  if (std::isinf(z)) return 0.0;
  if (z < a + 1.0) {
    return a * t - z - LogGamma(a + 1.0) + LogLowerGammaSeries(a, z);
  }
  return std::log1p(-std::exp(LogUpperGammaFraction(a, z)));
}

// d/da ln P(a, e^t), see LogRegularizedGammaPDerivShape.
inline double LogGammaPDerivShapeAtLog(double a, double t) {
  const double z = std::exp(t);
  double ratio = 1.0;
  double psi = Digamma(a + 1.0);
  double weight_sum = 1.0;
  double psi_sum = psi;
  for (int n = 1; n < kMaxSeriesTerms; ++n) {
    psi += 1.0 / (a + n);
    ratio *= z / (a + n);
    weight_sum += ratio;
    psi_sum += ratio * psi;
    if (weight_sum > 1e250) {
      ratio *= 1e-250;
      weight_sum *= 1e-250;
      psi_sum *= 1e-250;
    }
    if (n > z - a && ratio < weight_sum * 1e-17) break;
  }
  return t - psi_sum / weight_sum;
}

}  // namespace internal

// ln P(a, z), the log of the regularized lower incomplete gamma function.
inline double LogRegularizedGammaP(double a, double z) {
  internal::CheckPositive(a, "LogRegularizedGammaP");
  if (z <= 0.0) return -kInf;
  return internal::LogGammaPAtLog(a, std::log(z));
}

// d/da ln P(a, z) at fixed z. Uses P = sum_n T_n with
// T_n = z^(a+n) e^-z / Gamma(a+n+1), so the derivative is
// ln z - (sum_n T_n psi(a+n+1)) / (sum_n T_n).
inline double LogRegularizedGammaPDerivShape(double a, double z) {
  internal::CheckPositive(a, "LogRegularizedGammaPDerivShape");
  if (!(z > 0.0)) throw DomainError("LogRegularizedGammaPDerivShape: z <= 0");
  return internal::LogGammaPDerivShapeAtLog(a, std::log(z));
}

// t = ln z with P(a, z) = u, for u in (0, 1).
inline double LogGammaQuantile(double a, double u) {
  internal::CheckPositive(a, "LogGammaQuantile");
  if (!(u > 0.0 && u < 1.0)) {
    throw ArgumentError("LogGammaQuantile: u must lie in (0, 1)");
  }
  const double log_u = std::log(u);
  const double lgamma_a = LogGamma(a);
  // ln P(a, z) <= a ln z - ln Gamma(a+1), so this start is left of the root.
  // ln P is concave in t, hence Newton iterates increase monotonically.
  double t = (log_u + LogGamma(a + 1.0)) / a;
  for (int iter = 0; iter < 500; ++iter) {
    const double z = std::exp(t);
    const double log_p = internal::LogGammaPAtLog(a, t);
    const double slope = std::exp(a * t - z - lgamma_a - log_p);
    if (!(slope > 0.0) || !std::isfinite(slope)) break;
    const double step = (log_u - log_p) / slope;
    t += step;
    if (std::abs(step) <= 2e-16 * std::max(1.0, std::abs(t))) break;
  }
  if (!std::isfinite(t)) {
    throw NumericalError("LogGammaQuantile: did not converge");
  }
  return t;
}

struct ReparamGamma {
  double log_value;        // t = ln z
  double dlog_value_dshape;  // dt/da at fixed base variate u
};

// Gamma(a, 1) variate from base uniform u, with its implicit gradient.
inline ReparamGamma SampleGammaReparam(double a, double u) {
  const double t = LogGammaQuantile(a, u);
  const double z = std::exp(t);
  const double log_p = internal::LogGammaPAtLog(a, t);
  const double dlogp_dt = std::exp(a * t - z - LogGamma(a) - log_p);
  const double dlogp_da = internal::LogGammaPDerivShapeAtLog(a, t);
  return {t, -dlogp_da / dlogp_dt};
}

}  // namespace nvdp

#endif  // NVDP_GAMMA_REPARAM_H_
