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

// Dirichlet-Process posteriors over weighted-vector sequences.
//
// A posterior over n tokens carries n + 1 components; the last one is always
// the prior base component (alpha0_p, mu_p, sigma_p). A sample S = (pi, Z)
// holds one weighted vector per sampling slot, slots ordered by component
// (token order, prior last), with kappa_i slots per component.

#ifndef NVDP_POSTERIOR_H_
#define NVDP_POSTERIOR_H_

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nvdp/binary_io.h"
#include "nvdp/errors.h"
#include "nvdp/samplers.h"
#include "nvdp/types.h"

namespace nvdp {

struct PriorParams {
  double alpha0 = 1.0;
  Vector mu;
  Vector sigma;

  static PriorParams Standard(int d) {
    return {1.0, Vector::Zero(d), Vector::Ones(d)};
  }
  int d() const { return static_cast<int>(mu.size()); }
};

struct TokenParams {
  double alpha = 0.0;
  Vector mu;
  Vector sigma;
};

struct DPPosterior {
  Vector alpha;            // n + 1 pseudo-counts, prior component last
  Matrix mu;               // (n + 1) x d
  Matrix sigma;            // (n + 1) x d, strictly positive
  std::vector<int> kappa;  // n + 1 slot counts, all 1 by default

  int n() const { return static_cast<int>(alpha.size()) - 1; }
  int d() const { return static_cast<int>(mu.cols()); }
  int components() const { return static_cast<int>(alpha.size()); }
  int slots() const { return std::accumulate(kappa.begin(), kappa.end(), 0); }
  double total_alpha() const { return alpha.sum(); }

  // Throws ArgumentError unless shapes and domains are consistent.
  void Validate() const {
    const auto m = alpha.size();
    if (m < 1) throw ArgumentError("posterior needs at least the prior component");
    if (static_cast<std::size_t>(mu.rows()) != static_cast<std::size_t>(m) ||
        sigma.rows() != mu.rows() || sigma.cols() != mu.cols() ||
        kappa.size() != static_cast<std::size_t>(m)) {
      throw ArgumentError("posterior shape mismatch");
    }
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      if (!(alpha[i] >= 0.0) || !std::isfinite(alpha[i])) {
        throw ArgumentError("posterior pseudo-counts must be finite and >= 0");
      }
      if (kappa[i] < 1) throw ArgumentError("kappa entries must be >= 1");
    }
    if (!(alpha.sum() > 0.0)) throw ArgumentError("posterior total pseudo-count must be > 0");
    if (!mu.allFinite() || !sigma.allFinite() || (sigma.array() <= 0.0).any()) {
      throw ArgumentError("posterior mu must be finite and sigma > 0");
    }
  }

  bool operator==(const DPPosterior& other) const {
    return alpha.size() == other.alpha.size() && mu.cols() == other.mu.cols() &&
           alpha == other.alpha && mu == other.mu && sigma == other.sigma &&
           kappa == other.kappa;
  }
};

struct WeightedVectorSample {
  Vector pi;     // m slot weights on the simplex
  Matrix z;      // m x d sampled vectors
  Vector log_pi; // ln pi, kept separately so tiny weights stay informative

  int m() const { return static_cast<int>(pi.size()); }
  int d() const { return static_cast<int>(z.cols()); }
};

// Appends the prior as component n + 1.
inline DPPosterior BuildPosterior(std::span<const TokenParams> tokens, const PriorParams& prior) {
  const int d = prior.d();
  if (prior.sigma.size() != d || !(prior.alpha0 > 0.0)) {
    throw ArgumentError("BuildPosterior: invalid prior");
  }
  const int n = static_cast<int>(tokens.size());
  DPPosterior q{Vector(n + 1), Matrix(n + 1, d), Matrix(n + 1, d), std::vector<int>(n + 1, 1)};
  for (int i = 0; i < n; ++i) {
    const TokenParams& t = tokens[i];
    if (t.mu.size() != d || t.sigma.size() != d) {
      throw ArgumentError("BuildPosterior: token " + std::to_string(i) +
                          " has dimension " + std::to_string(t.mu.size()) + ", expected " +
                          std::to_string(d));
    }
    q.alpha[i] = t.alpha;
    q.mu.row(i) = t.mu.transpose();
    q.sigma.row(i) = t.sigma.transpose();
  }
  q.alpha[n] = prior.alpha0;
  q.mu.row(n) = prior.mu.transpose();
  q.sigma.row(n) = prior.sigma.transpose();
  q.Validate();
  return q;
}

// Prior-only reference with alpha0_p spread evenly over n + 1 components; the
// target of the Dirichlet regularizer.
inline DPPosterior SymmetricPriorPosterior(const PriorParams& prior, int n) {
  const int d = prior.d();
  DPPosterior q{Vector::Constant(n + 1, prior.alpha0 / (n + 1)), Matrix(n + 1, d),
                Matrix(n + 1, d), std::vector<int>(n + 1, 1)};
  for (int i = 0; i <= n; ++i) {
    q.mu.row(i) = prior.mu.transpose();
    q.sigma.row(i) = prior.sigma.transpose();
  }
  return q;
}

inline constexpr double kAuditPadFloor = 1e-4;

// Inserts pad components (alpha = pad_alpha, mu = 0, sigma = 1) before the
// prior component so that q has target_n token components.
inline DPPosterior PadToLength(const DPPosterior& q, int target_n, double pad_alpha = 0.0) {
  if (target_n < q.n()) {
    throw ArgumentError("PadToLength: target length " + std::to_string(target_n) +
                        " is shorter than " + std::to_string(q.n()));
  }
  if (!(pad_alpha >= 0.0)) throw ArgumentError("PadToLength: pad pseudo-count must be >= 0");
  if (target_n == q.n()) return q;
  const int n = q.n();
  const int d = q.d();
  DPPosterior out{Vector(target_n + 1), Matrix(target_n + 1, d), Matrix(target_n + 1, d),
                  std::vector<int>(target_n + 1, 1)};
  for (int i = 0; i < n; ++i) {
    out.alpha[i] = q.alpha[i];
    out.mu.row(i) = q.mu.row(i);
    out.sigma.row(i) = q.sigma.row(i);
    out.kappa[i] = q.kappa[i];
  }
  for (int i = n; i < target_n; ++i) {
    out.alpha[i] = pad_alpha;
    out.mu.row(i).setZero();
    out.sigma.row(i).setOnes();
  }
  out.alpha[target_n] = q.alpha[n];
  out.mu.row(target_n) = q.mu.row(n);
  out.sigma.row(target_n) = q.sigma.row(n);
  out.kappa[target_n] = q.kappa[n];
  return out;
}

// Per-slot Dirichlet parameters: alpha_i / kappa_i repeated kappa_i times.
inline Vector SlotAlpha(const DPPosterior& q) {
  Vector out(q.slots());
  int s = 0;
  for (int i = 0; i < q.components(); ++i) {
    for (int k = 0; k < q.kappa[i]; ++k) out[s++] = q.alpha[i] / q.kappa[i];
  }
  return out;
}

// Builds S from given slot log-weights and standard-normal noise (one row per
// slot): Z_s = mu_i + sigma_i * eps_s for the component i owning slot s.
inline WeightedVectorSample ComposeSample(const DPPosterior& q, const Vector& log_pi,
                                          const Matrix& eps) {
  const int m = q.slots();
  if (log_pi.size() != m || eps.rows() != m || eps.cols() != q.d()) {
    throw ArgumentError("ComposeSample: noise shape mismatch");
  }
  WeightedVectorSample s{Vector(m), Matrix(m, q.d()), log_pi};
  // std::exp keeps exp(-inf) == 0 exactly.
  for (int k = 0; k < m; ++k) s.pi[k] = std::exp(log_pi[k]);
  int slot = 0;
  for (int i = 0; i < q.components(); ++i) {
    for (int k = 0; k < q.kappa[i]; ++k, ++slot) {
      s.z.row(slot) = q.mu.row(i).array() + q.sigma.row(i).array() * eps.row(slot).array();
    }
  }
  return s;
}

// Draws S ~ Q: pi ~ Dir(slot alphas), Z_s ~ N(mu_i, sigma_i^2), token order.
inline WeightedVectorSample SampleEmbedding(const DPPosterior& q, Rng& rng) {
  const Vector slot_alpha = SlotAlpha(q);
  const std::vector<double> log_pi =
      SampleLogDirichlet(rng, std::span<const double>(slot_alpha.data(), slot_alpha.size()));
  Matrix eps(q.slots(), q.d());
  for (Eigen::Index r = 0; r < eps.rows(); ++r) {
    for (Eigen::Index c = 0; c < eps.cols(); ++c) eps(r, c) = rng.Normal();
  }
  return ComposeSample(q, Eigen::Map<const Vector>(log_pi.data(), log_pi.size()), eps);
}

inline constexpr std::string_view kPosteriorMagic = "NVDPQ1";

// ".dpq": magic, u32 n, u32 d, then per component alpha, mu[0..d), sigma[0..d)
// as little-endian float64. kappa is not stored (always 1 on disk).
inline std::string SerializePosterior(const DPPosterior& q) {
  for (int k : q.kappa) {
    if (k != 1) throw ArgumentError("SerializePosterior: only kappa = 1 is representable");
  }
  ByteWriter w;
  w.Bytes(kPosteriorMagic);
  w.U32(static_cast<std::uint32_t>(q.n()));
  w.U32(static_cast<std::uint32_t>(q.d()));
  for (int i = 0; i < q.components(); ++i) {
    w.F64(q.alpha[i]);
    for (int c = 0; c < q.d(); ++c) w.F64(q.mu(i, c));
    for (int c = 0; c < q.d(); ++c) w.F64(q.sigma(i, c));
  }
  return w.Take();
}

inline DPPosterior DeserializePosterior(std::string_view bytes) {
  ByteReader r(bytes);
  ExpectMagic(r, kPosteriorMagic);
  const std::uint32_t n = r.U32();
  const std::uint32_t d = r.U32();
  const std::uint64_t expected = (static_cast<std::uint64_t>(n) + 1) * (1 + 2ULL * d) * 8;
  if (r.remaining() != expected) {
    throw FormatError("posterior payload is " + std::to_string(r.remaining()) +
                      " bytes, expected " + std::to_string(expected) + " at byte offset " +
                      std::to_string(r.offset()));
  }
  const int m = static_cast<int>(n) + 1;
  DPPosterior q{Vector(m), Matrix(m, d), Matrix(m, d), std::vector<int>(m, 1)};
  for (int i = 0; i < m; ++i) {
    q.alpha[i] = r.F64();
    for (std::uint32_t c = 0; c < d; ++c) q.mu(i, c) = r.F64();
    for (std::uint32_t c = 0; c < d; ++c) q.sigma(i, c) = r.F64();
  }
  try {
    q.Validate();
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("invalid posterior contents: ") + e.what());
  }
  return q;
}

}  // namespace nvdp

#endif  // NVDP_POSTERIOR_H_
