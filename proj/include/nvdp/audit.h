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

// Pairwise privacy audit over a set of posteriors for each of the four
// mechanisms, evaluated on a bounded worker pool.

#ifndef NVDP_AUDIT_H_
#define NVDP_AUDIT_H_

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "nvdp/accountant.h"
#include "nvdp/errors.h"
#include "nvdp/posterior.h"
#include "nvdp/renyi.h"
#include "nvdp/samplers.h"

namespace nvdp {

enum class Mechanism {
  kNvdp,        // DP posteriors
  kVtdp,        // per-token diagonal Gaussians
  kVibFixed,    // pooled mean, fixed isotropic sigma
  kVibLearned,  // pooled mean, global per-dimension sigma
};

inline Mechanism ParseMechanism(const std::string& name) {
  if (name == "nvdp") return Mechanism::kNvdp;
  if (name == "vtdp") return Mechanism::kVtdp;
  if (name == "vib-fixed") return Mechanism::kVibFixed;
  if (name == "vib-learned") return Mechanism::kVibLearned;
  throw ArgumentError("unknown mechanism \"" + name + "\" (nvdp, vtdp, vib-fixed, vib-learned)");
}

inline std::string MechanismName(Mechanism m) {
  switch (m) {
    case Mechanism::kNvdp:
      return "nvdp";
    case Mechanism::kVtdp:
      return "vtdp";
    case Mechanism::kVibFixed:
      return "vib-fixed";
    case Mechanism::kVibLearned:
      return "vib-learned";
  }
  return "";
}

inline constexpr double kVibFixedSigma = 0.55;

struct AuditOptions {
  Mechanism mechanism = Mechanism::kNvdp;
  double pad_floor = kAuditPadFloor;
  double sigma = kVibFixedSigma;     // vib-fixed
  std::optional<Vector> sigma_vec;   // vib-learned; default: mean token sigma
  std::int64_t max_pairs = 0;        // 0 evaluates every ordered pair
  std::uint64_t seed = 0;            // pair subsampling
  int threads = 1;
};

// Mean of the token means (prior row excluded).
inline Vector PooledMean(const DPPosterior& q) {
  if (q.n() < 1) return q.mu.row(q.n()).transpose();
  return q.mu.topRows(q.n()).colwise().mean().transpose();
}

// Component-wise mean of every token sigma across the set.
inline Vector GlobalTokenSigma(std::span<const DPPosterior> qs) {
  if (qs.empty()) throw ArgumentError("GlobalTokenSigma: no posteriors");
  Vector sum = Vector::Zero(qs[0].d());
  int count = 0;
  for (const DPPosterior& q : qs) {
    for (int i = 0; i < q.n(); ++i) {
      sum += q.sigma.row(i).transpose();
      ++count;
    }
  }
  if (count == 0) throw ArgumentError("GlobalTokenSigma: no token components");
  return sum / count;
}

// The ordered pairs (i, j), i != j, to evaluate; all of them unless capped.
inline std::vector<std::pair<int, int>> AuditPairs(int m, std::int64_t max_pairs, std::uint64_t seed) {
  const std::int64_t total = static_cast<std::int64_t>(m) * (m - 1);
  std::vector<std::pair<int, int>> pairs;
  const auto decode = [m](std::int64_t k) {
    const int i = static_cast<int>(k / (m - 1));
    int j = static_cast<int>(k % (m - 1));
    if (j >= i) ++j;
    return std::pair<int, int>(i, j);
  };
  if (max_pairs <= 0 || max_pairs >= total) {
    pairs.reserve(total);
    for (std::int64_t k = 0; k < total; ++k) pairs.push_back(decode(k));
    return pairs;
  }
  // Floyd's algorithm: a uniform max_pairs-subset of [0, total).
  Rng rng({seed, 0x7061'6972ULL});
  std::unordered_set<std::int64_t> chosen;
  for (std::int64_t k = total - max_pairs; k < total; ++k) {
    const std::int64_t r = static_cast<std::int64_t>(rng.NextU64() % static_cast<std::uint64_t>(k + 1));
    chosen.insert(chosen.count(r) ? k : r);
  }
  std::vector<std::int64_t> sorted(chosen.begin(), chosen.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::int64_t k : sorted) pairs.push_back(decode(k));
  return pairs;
}

// Runs fn(k) for k in [0, count) on up to `threads` workers. The first
// exception is rethrown after all workers stop.
template <typename F>
void ParallelFor(std::int64_t count, int threads, F&& fn) {
  const int workers = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(threads, count)));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto work = [&] {
    for (std::int64_t k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

// D_lambda(mechanism(x_i) || mechanism(x_j)) for one ordered pair.
inline double MechanismRd(const DPPosterior& q, const DPPosterior& q_prime, RenyiOrder order,
                          const PriorParams& prior, const AuditOptions& options, const Vector& sigma_vec) {
  switch (options.mechanism) {
    case Mechanism::kNvdp:
      return RdDpPosteriorsAligned(q, q_prime, order, prior, options.pad_floor).value;
    case Mechanism::kVtdp: {
      const int n = std::max(q.n(), q_prime.n());
      const DPPosterior a = PadToLength(q, n, options.pad_floor);
      const DPPosterior b = PadToLength(q_prime, n, options.pad_floor);
      const auto flat = [](const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); };
      return RdGaussianDiag(flat(a.mu), flat(a.sigma), flat(b.mu), flat(b.sigma), order).value;
    }
    case Mechanism::kVibFixed:
      return RdGaussianIsotropic(PooledMean(q), PooledMean(q_prime), options.sigma, order);
    case Mechanism::kVibLearned:
      return RdGaussianLearned(PooledMean(q), PooledMean(q_prime), sigma_vec, order);
  }
  return kInf;
}

inline PairwiseRDMatrix PairwiseRd(std::span<const DPPosterior> qs, double lambda, const PriorParams& prior,
                                   const AuditOptions& options) {
  const int m = static_cast<int>(qs.size());
  if (m < 2) throw ArgumentError("audit needs at least 2 examples, got " + std::to_string(m));
  for (const DPPosterior& q : qs) {
    if (q.d() != prior.d()) throw ArgumentError("posterior dimension does not match the prior");
  }
  const RenyiOrder order(lambda);
  const Vector sigma_vec = options.mechanism != Mechanism::kVibLearned ? Vector()
                           : options.sigma_vec                         ? *options.sigma_vec
                                                                       : GlobalTokenSigma(qs);
  const std::vector<std::pair<int, int>> pairs = AuditPairs(m, options.max_pairs, options.seed);
  PairwiseRDMatrix matrix(m, lambda);
  ParallelFor(static_cast<std::int64_t>(pairs.size()), options.threads, [&](std::int64_t k) {
    const auto [i, j] = pairs[k];
    matrix.at(i, j) = MechanismRd(qs[i], qs[j], order, prior, options, sigma_vec);
  });
  return matrix;
}

// Fixed-order audit, or the tightest order over the grid when lambda_grid is
// non-empty.
inline PrivacyReport AuditPosteriors(std::span<const DPPosterior> qs, double lambda, double delta_mu,
                                     const PriorParams& prior, const AuditOptions& options,
                                     std::span<const double> lambda_grid = {}) {
  PrivacyReport report =
      lambda_grid.empty()
          ? MakeReport(PairwiseRd(qs, lambda, prior, options), delta_mu)
          : BdpOptimize([&](double l) { return PairwiseRd(qs, l, prior, options); }, lambda_grid, delta_mu);
  report.mechanism = MechanismName(options.mechanism);
  report.epsilon_alpha_floor = options.pad_floor;
  report.max_pairs = options.max_pairs;
  return report;
}

}  // namespace nvdp

#endif  // NVDP_AUDIT_H_
