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

// Toy-scale NVDP network: a projection from an embedding sequence to a
// Dirichlet-process posterior, a denoising multi-head attention layer over a
// sample of that posterior (no residual path), mean pooling and a linear head.
// Gradients are derived by hand; the Dirichlet weights are differentiated
// through the implicit reparameterization of their Gamma draws.

#ifndef NVDP_MODEL_H_
#define NVDP_MODEL_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nvdp/binary_io.h"
#include "nvdp/errors.h"
#include "nvdp/gamma_reparam.h"
#include "nvdp/kl.h"
#include "nvdp/posterior.h"
#include "nvdp/samplers.h"
#include "nvdp/special_functions.h"
#include "nvdp/types.h"

namespace nvdp {

// Attention maps are d x d; head k owns columns [k * d/h, (k + 1) * d/h).
// c >= 2 outputs means classification, c == 1 means scalar regression.
struct ModelParams {
  int d = 0;
  int h = 1;
  int c = 2;
  Vector w_alpha;
  double b_alpha = 0.0;
  Matrix w_mu;
  Vector b_mu;
  Matrix w_logvar;  // log sigma^2 projection
  Vector b_logvar;
  Matrix w_query;
  Matrix w_key;
  Matrix w_value;
  Matrix w_out;
  Matrix w_head;  // d x c
  Vector b_head;

  static ModelParams Zeros(int d, int h, int c) {
    if (d < 1 || h < 1 || c < 1) throw ArgumentError("ModelParams: d, h, c must be positive");
    if (d % h != 0) {
      throw ArgumentError("ModelParams: " + std::to_string(h) + " heads do not divide d = " +
                          std::to_string(d));
    }
    ModelParams p;
    p.d = d;
    p.h = h;
    p.c = c;
    p.w_alpha = Vector::Zero(d);
    p.w_mu = Matrix::Zero(d, d);
    p.b_mu = Vector::Zero(d);
    p.w_logvar = Matrix::Zero(d, d);
    p.b_logvar = Vector::Zero(d);
    p.w_query = Matrix::Zero(d, d);
    p.w_key = Matrix::Zero(d, d);
    p.w_value = Matrix::Zero(d, d);
    p.w_out = Matrix::Zero(d, d);
    p.w_head = Matrix::Zero(d, c);
    p.b_head = Vector::Zero(c);
    return p;
  }

  // Gaussian weights with variance 1/fan_in; pseudo-counts start near 1.
  static ModelParams Initialize(int d, int h, int c, RngState state) {
    ModelParams p = Zeros(d, h, c);
    Rng rng(state);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    p.ForEachTensor([&](std::string_view name, double* data, int size) {
      if (name.starts_with("b_")) return;
      for (int i = 0; i < size; ++i) data[i] = scale * rng.Normal();
    });
    p.w_alpha *= 0.1;
    p.b_alpha = std::log(std::expm1(1.0));
    return p;
  }

  int head_dim() const { return d / h; }

  // Visits every tensor in checkpoint order as (name, data, size).
  template <typename F>
  void ForEachTensor(F&& f) {
    f("w_alpha", w_alpha.data(), static_cast<int>(w_alpha.size()));
    f("b_alpha", &b_alpha, 1);
    f("w_mu", w_mu.data(), static_cast<int>(w_mu.size()));
    f("b_mu", b_mu.data(), static_cast<int>(b_mu.size()));
    f("w_logvar", w_logvar.data(), static_cast<int>(w_logvar.size()));
    f("b_logvar", b_logvar.data(), static_cast<int>(b_logvar.size()));
    f("w_query", w_query.data(), static_cast<int>(w_query.size()));
    f("w_key", w_key.data(), static_cast<int>(w_key.size()));
    f("w_value", w_value.data(), static_cast<int>(w_value.size()));
    f("w_out", w_out.data(), static_cast<int>(w_out.size()));
    f("w_head", w_head.data(), static_cast<int>(w_head.size()));
    f("b_head", b_head.data(), static_cast<int>(b_head.size()));
  }
  template <typename F>
  void ForEachTensor(F&& f) const {
    const_cast<ModelParams*>(this)->ForEachTensor(
        [&](std::string_view name, double* data, int size) { f(name, static_cast<const double*>(data), size); });
  }

  int size() const {
    int total = 0;
    ForEachTensor([&](std::string_view, const double*, int n) { total += n; });
    return total;
  }

  Vector Flatten() const {
    Vector out(size());
    int k = 0;
    ForEachTensor([&](std::string_view, const double* data, int n) {
      for (int i = 0; i < n; ++i) out[k++] = data[i];
    });
    return out;
  }

  void Unflatten(const Vector& flat) {
    if (flat.size() != size()) throw ArgumentError("ModelParams::Unflatten: size mismatch");
    int k = 0;
    ForEachTensor([&](std::string_view, double* data, int n) {
      for (int i = 0; i < n; ++i) data[i] = flat[k++];
    });
  }

  // Name and flat index of the first non-finite entry, or empty if none.
  std::string FirstNonFinite() const {
    std::string where;
    ForEachTensor([&](std::string_view name, const double* data, int n) {
      for (int i = 0; i < n && where.empty(); ++i) {
        if (!std::isfinite(data[i])) where = std::string(name) + "[" + std::to_string(i) + "]";
      }
    });
    return where;
  }

  bool operator==(const ModelParams& other) const {
    return d == other.d && h == other.h && c == other.c && Flatten() == other.Flatten();
  }
};

// Target: class index for classification, value for regression.
struct Example {
  Matrix x;
  double target = 0.0;
};

enum class GaussianPenalty {
  kSum,                  // sum over components of KL to the prior
  kPseudoCountWeighted,  // alpha-weighted mean over components
};

struct LossWeights {
  double lambda_d = 0.0;
  double lambda_g = 0.0;
  double task_weight = 1.0;  // 0 isolates the regularizers
  GaussianPenalty gaussian_penalty = GaussianPenalty::kSum;
};

struct LossParts {
  double total = 0.0;
  double task = 0.0;
  double dirichlet = 0.0;
  double gaussian = 0.0;
  double accuracy = 0.0;  // classification only
};

// Base randomness for one example: standard-normal eps and Gamma base
// uniforms u, one row / entry per component (prior last).
struct ExampleNoise {
  Matrix eps;
  Vector u;
};

inline ExampleNoise DrawNoise(int n, int d, Rng& rng) {
  ExampleNoise noise{Matrix(n + 1, d), Vector(n + 1)};
  for (int i = 0; i <= n; ++i) {
    for (int c = 0; c < d; ++c) noise.eps(i, c) = rng.Normal();
  }
  for (int i = 0; i <= n; ++i) noise.u[i] = rng.Uniform();
  return noise;
}

inline std::vector<ExampleNoise> DrawBatchNoise(std::span<const Example> batch, int d, RngState state) {
  std::vector<ExampleNoise> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Rng rng(Rng::Derive(state, i));
    out.push_back(DrawNoise(static_cast<int>(batch[i].x.rows()), d, rng));
  }
  return out;
}

namespace internal {

inline double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline void CheckInput(const Matrix& x, int d) {
  if (x.rows() < 1) throw ArgumentError("input sequence is empty");
  if (x.cols() != d) {
    throw ArgumentError("input dimension " + std::to_string(x.cols()) + " does not match model d = " +
                        std::to_string(d));
  }
  if (!x.allFinite()) throw ArgumentError("input contains non-finite values");
}

struct Projection {
  Vector pre_alpha;  // n
  Vector alpha;      // n + 1, prior last
  Matrix mu;         // (n + 1) x d
  Matrix sigma;      // (n + 1) x d
};

inline Projection Project(const Matrix& x, const ModelParams& p, const PriorParams& prior) {
  CheckInput(x, p.d);
  if (prior.d() != p.d) throw ArgumentError("prior dimension does not match model");
  const int n = static_cast<int>(x.rows());
  Projection out{x * p.w_alpha + Vector::Constant(n, p.b_alpha), Vector(n + 1), Matrix(n + 1, p.d),
                 Matrix(n + 1, p.d)};
  for (int i = 0; i < n; ++i) out.alpha[i] = Softplus(out.pre_alpha[i]);
  out.alpha[n] = prior.alpha0;
  out.mu.topRows(n) = (x * p.w_mu).rowwise() + p.b_mu.transpose();
  out.mu.row(n) = prior.mu.transpose();
  const Matrix logvar = (x * p.w_logvar).rowwise() + p.b_logvar.transpose();
  out.sigma.topRows(n) = (0.5 * logvar.array()).exp().matrix();
  out.sigma.row(n) = prior.sigma.transpose();
  return out;
}

struct AttentionCache {
  Matrix q, k, v;         // projected queries (nq x d), keys and values (m x d)
  std::vector<Matrix> p;  // per-head attention probabilities, nq x m
  Matrix o;               // concatenated head outputs, nq x d
};

// Row-wise softmax; -inf logits get probability exactly 0.
inline Matrix SoftmaxRows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      out(r, c) = std::exp(logits(r, c) - mx);
      total += out(r, c);
    }
    out.row(r) /= total;
  }
  return out;
}

inline Matrix AttentionForward(const Matrix& query_src, const Matrix& z, const Vector& log_pi,
                               const ModelParams& p, AttentionCache* cache) {
  const int dh = p.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  AttentionCache local;
  AttentionCache& c = cache != nullptr ? *cache : local;
  c.q = query_src * p.w_query;
  c.k = z * p.w_key;
  c.v = z * p.w_value;
  c.o.resize(query_src.rows(), p.d);
  c.p.clear();
  for (int head = 0; head < p.h; ++head) {
    const int col = head * dh;
    Matrix logits = scale * c.q.middleCols(col, dh) * c.k.middleCols(col, dh).transpose();
    logits.rowwise() += log_pi.transpose();
    c.p.push_back(SoftmaxRows(logits));
    c.o.middleCols(col, dh) = c.p.back() * c.v.middleCols(col, dh);
  }
  return c.o * p.w_out;
}

}  // namespace internal

// Builds the posterior for one sequence: alpha_i = softplus(w_alpha . x_i +
// b_alpha), mu_i = W_mu x_i + b_mu, sigma_i = exp((W_logvar x_i + b_logvar)/2),
// with the prior component appended.
inline DPPosterior ProjectPosterior(const Matrix& x, const ModelParams& p, const PriorParams& prior) {
  internal::Projection proj = internal::Project(x, p, prior);
  DPPosterior q{std::move(proj.alpha), std::move(proj.mu), std::move(proj.sigma),
                std::vector<int>(x.rows() + 1, 1)};
  q.Validate();
  return q;
}

// Scaled dot-product attention of query_src over the sampled vectors Z with
// an additive ln(pi) bias. There is no residual: the output depends on
// query_src only through the mixing weights over Z.
inline Matrix DenoisingAttention(const Matrix& query_src, const WeightedVectorSample& s,
                                 const ModelParams& p) {
  if (query_src.cols() != p.d || s.d() != p.d) throw ArgumentError("DenoisingAttention: dimension mismatch");
  if (!(s.pi.array() > 0.0).any()) throw ArgumentError("DenoisingAttention: all weights are zero");
  return internal::AttentionForward(query_src, s.z, s.log_pi, p, nullptr);
}

// Head outputs for a released sample. Queries are the token rows of Z (all
// but the trailing prior row), so a receiver needs nothing beyond S.
inline RowVector HeadOutputs(const WeightedVectorSample& s, const ModelParams& p) {
  if (s.m() < 2) throw ArgumentError("HeadOutputs: sample needs at least one token row");
  const Matrix y = DenoisingAttention(s.z.topRows(s.m() - 1), s, p);
  const RowVector pooled = y.colwise().mean();
  return pooled * p.w_head + p.b_head.transpose();
}

inline int PredictClass(const RowVector& outputs) {
  Eigen::Index best = 0;
  outputs.maxCoeff(&best);
  return static_cast<int>(best);
}

inline WeightedVectorSample Sanitize(const Matrix& x, const ModelParams& p, const PriorParams& prior,
                                     Rng& rng) {
  return SampleEmbedding(ProjectPosterior(x, p, prior), rng);
}

// L_D: KL of the posterior Dirichlet against the symmetric prior Dirichlet.
inline double DirichletRegularizer(const Vector& alpha, const PriorParams& prior) {
  const Vector target = Vector::Constant(alpha.size(), prior.alpha0 / alpha.size());
  return DirichletKl(alpha, target);
}

// L_G for one posterior (prior component last, contributing zero KL).
inline double GaussianRegularizer(const DPPosterior& q, const PriorParams& prior,
                                  GaussianPenalty form = GaussianPenalty::kSum) {
  double sum = 0.0;
  double weighted = 0.0;
  for (int i = 0; i < q.components(); ++i) {
    const double kl = GaussianKlDiag(q.mu.row(i), q.sigma.row(i), prior.mu.transpose(),
                                     prior.sigma.transpose());
    sum += kl;
    weighted += q.alpha[i] * kl;
  }
  return form == GaussianPenalty::kSum ? sum : weighted / q.total_alpha();
}

namespace internal {

inline void CheckExample(const Example& ex, const ModelParams& p) {
  CheckInput(ex.x, p.d);
  if (p.c >= 2) {
    const double t = ex.target;
    if (!(t >= 0.0 && t < p.c && t == std::floor(t))) {
      throw ArgumentError("label " + std::to_string(t) + " is not a class index below " +
                          std::to_string(p.c));
    }
  } else if (!std::isfinite(ex.target)) {
    throw ArgumentError("regression target is not finite");
  }
}

// Loss for one example under fixed noise. When grad is non-null, adds
// scale * dLoss/dparams into it.
inline LossParts ExampleLoss(const Example& ex, const ExampleNoise& noise, const ModelParams& p,
                             const LossWeights& w, const PriorParams& prior, double scale,
                             ModelParams* grad) {
  CheckExample(ex, p);
  const Matrix& x = ex.x;
  const int n = static_cast<int>(x.rows());
  const int m = n + 1;
  const int d = p.d;
  if (noise.eps.rows() != m || noise.eps.cols() != d || noise.u.size() != m) {
    throw ArgumentError("noise shape does not match the example");
  }
  const Projection proj = Project(x, p, prior);

  // Reparameterized sample.
  const Matrix z = proj.mu + (proj.sigma.array() * noise.eps.array()).matrix();
  for (int j = 0; j < n; ++j) {
    if (!(proj.alpha[j] > 0.0 && std::isfinite(proj.alpha[j])) || !proj.sigma.row(j).allFinite() ||
        !(proj.sigma.row(j).array() > 0.0).all()) {
      throw NumericalError("degenerate posterior at token " + std::to_string(j) +
                           " (alpha = " + std::to_string(proj.alpha[j]) + ")");
    }
  }
  Vector t(m), dt(m);
  for (int j = 0; j < m; ++j) {
    const ReparamGamma g = SampleGammaReparam(proj.alpha[j], noise.u[j]);
    t[j] = g.log_value;
    dt[j] = g.dlog_value_dshape;
  }
  const double lse = LogSumExp(std::span<const double>(t.data(), t.size()));
  Vector log_pi = t.array() - lse;
  Vector pi(m);
  for (int j = 0; j < m; ++j) pi[j] = std::exp(log_pi[j]);

  // Attention, pooling, head.
  AttentionCache cache;
  const Matrix query_src = z.topRows(n);
  const Matrix y = AttentionForward(query_src, z, log_pi, p, &cache);
  const RowVector pooled = y.colwise().mean();
  const RowVector out = pooled * p.w_head + p.b_head.transpose();

  LossParts parts;
  RowVector g_out(p.c);
  if (p.c >= 2) {
    const int label = static_cast<int>(ex.target);
    const double mx = out.maxCoeff();
    double total = 0.0;
    for (int k = 0; k < p.c; ++k) total += std::exp(out[k] - mx);
    const double log_norm = mx + std::log(total);
    parts.task = log_norm - out[label];
    for (int k = 0; k < p.c; ++k) g_out[k] = std::exp(out[k] - log_norm);
    g_out[label] -= 1.0;
    parts.accuracy = PredictClass(out) == label ? 1.0 : 0.0;
  } else {
    const double r = out[0] - ex.target;
    parts.task = r * r;
    g_out[0] = 2.0 * r;
  }

  // Regularizers.
  const Vector target_alpha = Vector::Constant(m, prior.alpha0 / m);
  parts.dirichlet = DirichletKl(proj.alpha, target_alpha);
  Vector kl_rows(m);
  for (int i = 0; i < m; ++i) {
    kl_rows[i] = GaussianKlDiag(proj.mu.row(i), proj.sigma.row(i), prior.mu.transpose(),
                                prior.sigma.transpose());
  }
  const double total_alpha = proj.alpha.sum();
  parts.gaussian = w.gaussian_penalty == GaussianPenalty::kSum
                       ? kl_rows.sum()
                       : proj.alpha.dot(kl_rows) / total_alpha;
  parts.total =
      w.task_weight * parts.task + w.lambda_d * parts.dirichlet + w.lambda_g * parts.gaussian;
  if (grad == nullptr) return parts;
  g_out *= w.task_weight;

  // Head and pooling.
  grad->w_head.noalias() += scale * pooled.transpose() * g_out;
  grad->b_head += scale * g_out.transpose();
  const RowVector g_pooled = g_out * p.w_head.transpose();
  const Matrix g_y = Matrix::Ones(n, 1) * (g_pooled / n);

  // Attention.
  const int dh = p.head_dim();
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  grad->w_out.noalias() += scale * cache.o.transpose() * g_y;
  const Matrix g_o = g_y * p.w_out.transpose();
  Matrix g_q(n, d), g_k(m, d), g_v(m, d);
  Vector g_log_pi = Vector::Zero(m);
  for (int head = 0; head < p.h; ++head) {
    const int col = head * dh;
    const Matrix& prob = cache.p[head];
    const Matrix g_prob = g_o.middleCols(col, dh) * cache.v.middleCols(col, dh).transpose();
    g_v.middleCols(col, dh) = prob.transpose() * g_o.middleCols(col, dh);
    const Vector row_dot = (g_prob.array() * prob.array()).rowwise().sum();
    const Matrix g_logits = (prob.array() * (g_prob.colwise() - row_dot).array()).matrix();
    g_q.middleCols(col, dh) = att_scale * g_logits * cache.k.middleCols(col, dh);
    g_k.middleCols(col, dh) = att_scale * g_logits.transpose() * cache.q.middleCols(col, dh);
    g_log_pi += g_logits.colwise().sum().transpose();
  }
  grad->w_query.noalias() += scale * query_src.transpose() * g_q;
  grad->w_key.noalias() += scale * z.transpose() * g_k;
  grad->w_value.noalias() += scale * z.transpose() * g_v;
  Matrix g_z = g_k * p.w_key.transpose() + g_v * p.w_value.transpose();
  g_z.topRows(n) += g_q * p.w_query.transpose();

  // Sample -> posterior parameters (token rows only; the prior is fixed).
  const double g_log_pi_sum = g_log_pi.sum();
  Vector g_alpha(n);
  for (int j = 0; j < n; ++j) g_alpha[j] = (g_log_pi[j] - pi[j] * g_log_pi_sum) * dt[j];
  Matrix g_mu = g_z.topRows(n);
  Matrix g_logvar =
      (g_z.topRows(n).array() * noise.eps.topRows(n).array() * proj.sigma.topRows(n).array() * 0.5)
          .matrix();

  // Regularizer gradients.
  if (w.lambda_d != 0.0) {
    const double total_target = prior.alpha0;
    const double common = (total_alpha - total_target) * Trigamma(total_alpha);
    for (int j = 0; j < n; ++j) {
      g_alpha[j] += w.lambda_d *
                    ((proj.alpha[j] - target_alpha[j]) * Trigamma(proj.alpha[j]) - common);
    }
  }
  if (w.lambda_g != 0.0) {
    const RowVector prior_var = prior.sigma.array().square().transpose();
    for (int i = 0; i < n; ++i) {
      const double weight =
          w.gaussian_penalty == GaussianPenalty::kSum ? 1.0 : proj.alpha[i] / total_alpha;
      const RowVector var = proj.sigma.row(i).array().square();
      g_mu.row(i) += w.lambda_g * weight *
                     ((proj.mu.row(i) - prior.mu.transpose()).array() / prior_var.array()).matrix();
      g_logvar.row(i) += w.lambda_g * weight * (0.5 * (var.array() / prior_var.array() - 1.0)).matrix();
      if (w.gaussian_penalty == GaussianPenalty::kPseudoCountWeighted) {
        g_alpha[i] += w.lambda_g * (kl_rows[i] - parts.gaussian) / total_alpha;
      }
    }
  }

  // Projection.
  Vector g_pre(n);
  for (int j = 0; j < n; ++j) g_pre[j] = g_alpha[j] * Sigmoid(proj.pre_alpha[j]);
  grad->w_alpha.noalias() += scale * x.transpose() * g_pre;
  grad->b_alpha += scale * g_pre.sum();
  grad->w_mu.noalias() += scale * x.transpose() * g_mu;
  grad->b_mu += scale * g_mu.colwise().sum().transpose();
  grad->w_logvar.noalias() += scale * x.transpose() * g_logvar;
  grad->b_logvar += scale * g_logvar.colwise().sum().transpose();
  return parts;
}

}  // namespace internal

// Batch-mean loss under fixed noise, with the gradient written to grad when
// non-null. Throws NumericalError naming the first non-finite gradient entry.
inline LossParts LossWithNoise(std::span<const Example> batch, std::span<const ExampleNoise> noise,
                               const ModelParams& p, const LossWeights& w, const PriorParams& prior,
                               ModelParams* grad = nullptr) {
  if (batch.empty()) throw ArgumentError("loss: empty batch");
  if (noise.size() != batch.size()) throw ArgumentError("loss: noise count does not match batch");
  if (!(w.lambda_d >= 0.0 && w.lambda_g >= 0.0)) throw ArgumentError("loss: negative weight");
  if (grad != nullptr) *grad = ModelParams::Zeros(p.d, p.h, p.c);
  const double scale = 1.0 / static_cast<double>(batch.size());
  LossParts sum;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const LossParts e = internal::ExampleLoss(batch[i], noise[i], p, w, prior, scale, grad);
    sum.task += e.task;
    sum.dirichlet += e.dirichlet;
    sum.gaussian += e.gaussian;
    sum.accuracy += e.accuracy;
  }
  LossParts mean{0.0, sum.task * scale, sum.dirichlet * scale, sum.gaussian * scale,
                 sum.accuracy * scale};
  mean.total = w.task_weight * mean.task + w.lambda_d * mean.dirichlet + w.lambda_g * mean.gaussian;
  if (grad != nullptr) {
    const std::string where = grad->FirstNonFinite();
    if (!where.empty()) throw NumericalError("non-finite gradient at " + where);
  }
  return mean;
}

// Loss with noise drawn from per-example streams derived from state.
inline LossParts Loss(std::span<const Example> batch, const ModelParams& p, const LossWeights& w,
                      const PriorParams& prior, RngState state) {
  const std::vector<ExampleNoise> noise = DrawBatchNoise(batch, p.d, state);
  return LossWithNoise(batch, noise, p, w, prior);
}

inline constexpr std::string_view kCheckpointMagic = "NVDPM1";

// Checkpoint: magic, u32 d, h, c, then every tensor (ForEachTensor order,
// row-major) as little-endian float64.
inline std::string SerializeModel(const ModelParams& p) {
  ByteWriter w;
  w.Bytes(kCheckpointMagic);
  w.U32(static_cast<std::uint32_t>(p.d));
  w.U32(static_cast<std::uint32_t>(p.h));
  w.U32(static_cast<std::uint32_t>(p.c));
  p.ForEachTensor([&](std::string_view, const double* data, int n) {
    for (int i = 0; i < n; ++i) w.F64(data[i]);
  });
  return w.Take();
}

inline ModelParams DeserializeModel(std::string_view bytes) {
  ByteReader r(bytes);
  ExpectMagic(r, kCheckpointMagic);
  const std::uint32_t d = r.U32();
  const std::uint32_t h = r.U32();
  const std::uint32_t c = r.U32();
  if (d == 0 || h == 0 || c == 0 || d % h != 0 || d > 65536 || c > 65536) {
    throw FormatError("checkpoint header (d=" + std::to_string(d) + ", h=" + std::to_string(h) +
                      ", c=" + std::to_string(c) + ") is invalid");
  }
  ModelParams p = ModelParams::Zeros(static_cast<int>(d), static_cast<int>(h), static_cast<int>(c));
  const std::size_t expected = static_cast<std::size_t>(p.size()) * 8;
  if (r.remaining() != expected) {
    throw FormatError("checkpoint payload is " + std::to_string(r.remaining()) + " bytes, expected " +
                      std::to_string(expected) + " at byte offset " + std::to_string(r.offset()));
  }
  p.ForEachTensor([&](std::string_view, double* data, int n) {
    for (int i = 0; i < n; ++i) data[i] = r.F64();
  });
  const std::string where = p.FirstNonFinite();
  if (!where.empty()) throw FormatError("checkpoint has a non-finite value at " + where);
  return p;
}

}  // namespace nvdp

#endif  // NVDP_MODEL_H_
