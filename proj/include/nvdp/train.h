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

// Mini-batch gradient descent for the NVDP model with best-validation
// selection and NaN abort.

#ifndef NVDP_TRAIN_H_
#define NVDP_TRAIN_H_

#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nvdp/errors.h"
#include "nvdp/model.h"
#include "nvdp/posterior.h"
#include "nvdp/samplers.h"

namespace nvdp {

struct TrainConfig {
  double learning_rate = 1e-2;
  int batch_size = 32;
  int epochs = 100;
  std::uint64_t seed = 0;
  double warmup_fraction = 0.0;  // linear learning-rate warm-up over this share of steps
  double clip_norm = 5.0;        // global gradient-norm cap; 0 disables

  void Validate() const {
    if (!(learning_rate > 0.0) || batch_size < 1 || epochs < 0 || !(warmup_fraction >= 0.0) ||
        warmup_fraction > 1.0 || !(clip_norm >= 0.0)) {
      throw ArgumentError("invalid training configuration");
    }
  }
};

struct EpochLog {
  int epoch = 0;
  LossParts train;  // means over the epoch's batches
  LossParts val;    // fixed validation noise across epochs
};

struct TrainResult {
  ModelParams params;  // best validation loss (or last good params on abort)
  std::vector<EpochLog> log;
  int best_epoch = 0;
  bool aborted = false;
  std::string abort_reason;
};

inline constexpr std::uint64_t kValidationStream = 0x7661'6c69'6461'7465ULL;

// Validation loss and sampled-forward accuracy with noise fixed by the seed,
// so epochs are compared under common random numbers.
inline LossParts EvaluateLoss(std::span<const Example> data, const ModelParams& p, const LossWeights& w,
                              const PriorParams& prior, std::uint64_t seed) {
  if (data.empty()) return {};
  return Loss(data, p, w, prior, {seed, kValidationStream});
}

inline void WriteTrainingLogCsv(std::ostream& out, std::span<const EpochLog> log) {
  out << "epoch,L,L_T,L_D,L_G,train_acc,val_acc\n";
  out.precision(10);
  for (const EpochLog& e : log) {
    out << e.epoch << ',' << e.train.total << ',' << e.train.task << ',' << e.train.dirichlet << ','
        << e.train.gaussian << ',' << e.train.accuracy << ',' << e.val.accuracy << '\n';
  }
}

// Epoch 0 is the initialization; it competes for best-validation too, so a
// 0-epoch run returns the initial parameters unchanged.
inline TrainResult Train(std::span<const Example> train, std::span<const Example> val, ModelParams init,
                         const TrainConfig& config, const LossWeights& w, const PriorParams& prior) {
  config.Validate();
  if (train.empty()) throw ArgumentError("training set is empty");
  for (const Example& ex : train) internal::CheckExample(ex, init);
  for (const Example& ex : val) internal::CheckExample(ex, init);
  std::span<const Example> selection = val.empty() ? train : val;
  TrainResult result;
  result.params = init;
  ModelParams params = std::move(init);
  double best = EvaluateLoss(selection, params, w, prior, config.seed).total;

  const int n = static_cast<int>(train.size());
  const int batches = (n + config.batch_size - 1) / config.batch_size;
  const double warmup_steps = config.warmup_fraction * config.epochs * batches;
  std::vector<int> order(n);
  std::vector<Example> batch;
  ModelParams grad;
  std::int64_t step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle(Rng::Derive({config.seed, 1}, epoch));
    for (int i = n - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle.NextU64() % static_cast<std::uint64_t>(i + 1)]);
    }
    EpochLog entry;
    entry.epoch = epoch;
    const ModelParams last_good = params;
    try {
      for (int b = 0; b < batches; ++b, ++step) {
        const int begin = b * config.batch_size;
        const int end = std::min(n, begin + config.batch_size);
        batch.clear();
        for (int i = begin; i < end; ++i) batch.push_back(train[order[i]]);
        const RngState noise_state = Rng::Derive(Rng::Derive({config.seed, 2}, epoch), b);
        const std::vector<ExampleNoise> noise = DrawBatchNoise(batch, params.d, noise_state);
        const LossParts parts = LossWithNoise(batch, noise, params, w, prior, &grad);
        if (!std::isfinite(parts.total)) throw NumericalError("non-finite loss");
        const double share = static_cast<double>(end - begin) / n;
        entry.train.total += share * parts.total;
        entry.train.task += share * parts.task;
        entry.train.dirichlet += share * parts.dirichlet;
        entry.train.gaussian += share * parts.gaussian;
        entry.train.accuracy += share * parts.accuracy;

        Vector g = grad.Flatten();
        const double norm = g.norm();
        if (config.clip_norm > 0.0 && norm > config.clip_norm) g *= config.clip_norm / norm;
        double lr = config.learning_rate;
        if (warmup_steps > 0.0 && step < warmup_steps) lr *= (step + 1) / warmup_steps;
        params.Unflatten(params.Flatten() - lr * g);
        const std::string where = params.FirstNonFinite();
        if (!where.empty()) throw NumericalError("non-finite parameter at " + where);
      }
      entry.val = EvaluateLoss(selection, params, w, prior, config.seed);
      if (!std::isfinite(entry.val.total)) throw NumericalError("non-finite validation loss");
    } catch (const NumericalError& e) {
      result.aborted = true;
      result.abort_reason = "epoch " + std::to_string(epoch) + ": " + e.what();
      result.params = last_good;
      return result;
    }
    result.log.push_back(entry);
    if (entry.val.total < best) {
      best = entry.val.total;
      result.params = params;
      result.best_epoch = epoch;
    }
  }
  return result;
}

}  // namespace nvdp

#endif  // NVDP_TRAIN_H_
