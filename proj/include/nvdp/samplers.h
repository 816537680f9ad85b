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

// Seeded samplers for Gaussian, Gamma and Dirichlet variates.

#ifndef NVDP_SAMPLERS_H_
#define NVDP_SAMPLERS_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "nvdp/errors.h"
#include "nvdp/special_functions.h"

namespace nvdp {

// Identifies one reproducible variate stream. Equal (seed, stream) pairs give
// bitwise-equal sequences; distinct streams are statistically independent.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

namespace internal {

inline std::uint64_t SplitMix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace internal

class Rng {
 public:
  explicit Rng(RngState state) : state_(state) {
    std::uint64_t mix = state.seed;
    const std::uint64_t a = internal::SplitMix64(mix);
    mix ^= state.stream * 0xd1342543de82ef95ULL;
    const std::uint64_t b = internal::SplitMix64(mix);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
  }

  const RngState& state() const { return state_; }

  // Child stream derived from this one; used for per-example / per-pair work.
  static RngState Derive(RngState parent, std::uint64_t index) {
    std::uint64_t mix = parent.stream ^ (index * 0x9e3779b97f4a7c15ULL);
    return {parent.seed, internal::SplitMix64(mix) ^ index};
  }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double Uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  // Standard normal via the Marsaglia polar method.
  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * Uniform() - 1.0;
      v = 2.0 * Uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

 private:
  RngState state_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// mu + sigma * eps for a given standard-normal draw eps.
inline std::vector<double> AffineGaussian(std::span<const double> mu,
                                          std::span<const double> sigma,
                                          std::span<const double> eps) {
  if (mu.size() != sigma.size() || mu.size() != eps.size()) {
    throw ArgumentError("AffineGaussian: length mismatch");
  }
  std::vector<double> out(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw ArgumentError("AffineGaussian: sigma must be > 0");
    out[i] = mu[i] + sigma[i] * eps[i];
  }
  return out;
}

inline std::vector<double> SampleGaussian(Rng& rng, std::span<const double> mu,
                                          std::span<const double> sigma) {
  if (mu.size() != sigma.size()) throw ArgumentError("SampleGaussian: length mismatch");
  std::vector<double> eps(mu.size());
  for (double& e : eps) e = rng.Normal();
  return AffineGaussian(mu, sigma, eps);
}

// ln of a Gamma(shape, 1) variate (Marsaglia-Tsang). Working in log space
// keeps tiny shapes from underflowing to exactly zero.
inline double SampleLogGamma(Rng& rng, double shape) {
  if (!(shape > 0.0)) throw ArgumentError("SampleGamma: shape must be > 0");
  double boost = 0.0;
  if (shape < 1.0) {
    boost = std::log(rng.Uniform()) / shape;
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = rng.Normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.Uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x ||
        std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return std::log(d * v) + boost;
    }
  }
}

inline double SampleGamma(Rng& rng, double shape) {
  return std::exp(SampleLogGamma(rng, shape));
}

// ln pi for pi ~ Dir(alpha). Zero pseudo-counts give ln pi = -inf exactly.
inline std::vector<double> SampleLogDirichlet(Rng& rng, std::span<const double> alpha) {
  std::vector<double> log_pi(alpha.size(), -kInf);
  bool any_positive = false;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] < 0.0 || std::isnan(alpha[i])) {
      throw ArgumentError("SampleDirichlet: pseudo-counts must be >= 0");
    }
    if (alpha[i] > 0.0) {
      log_pi[i] = SampleLogGamma(rng, alpha[i]);
      any_positive = true;
    }
  }
  if (!any_positive) throw ArgumentError("SampleDirichlet: all pseudo-counts are zero");
  const double norm = LogSumExp(log_pi);
  for (double& v : log_pi) v -= norm;
  return log_pi;
}

inline std::vector<double> SampleDirichlet(Rng& rng, std::span<const double> alpha) {
  std::vector<double> pi = SampleLogDirichlet(rng, alpha);
  double total = 0.0;
  for (double& v : pi) {
    v = std::exp(v);
    total += v;
  }
  for (double& v : pi) v /= total;
  return pi;
}

}  // namespace nvdp

#endif  // NVDP_SAMPLERS_H_
