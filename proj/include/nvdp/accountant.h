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

// Aggregation of pairwise Renyi divergences into privacy measures: worst-case
// RDP (max over ordered pairs) and Bayesian DP (epsilon_mu, delta_mu), where
// the expectation runs over the empirical distribution of alternative inputs.

#ifndef NVDP_ACCOUNTANT_H_
#define NVDP_ACCOUNTANT_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nvdp/errors.h"
#include "nvdp/renyi.h"
#include "nvdp/special_functions.h"

namespace nvdp {

inline constexpr double kDefaultDeltaMu = 1e-5;
inline constexpr double kDefaultAuditLambda = 1.1;

inline std::vector<double> DefaultLambdaGrid() { return {1.1, 1.5, 2, 4, 8, 16, 32, 64}; }

// Entry (i, j) = D_lambda(Q_i || Q_j). NaN marks pairs that were not
// evaluated (pair subsampling); they are ignored by every aggregate.
struct PairwiseRDMatrix {
  int m = 0;
  double lambda = kDefaultAuditLambda;
  std::vector<double> values;  // row-major m x m

  PairwiseRDMatrix() = default;
  PairwiseRDMatrix(int size, double order)
      : m(size), lambda(order), values(static_cast<std::size_t>(size) * size,
                                       std::numeric_limits<double>::quiet_NaN()) {
    for (int i = 0; i < m; ++i) at(i, i) = 0.0;
  }

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * m + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * m + j]; }

  std::vector<double> OffDiagonalRow(int i) const {
    std::vector<double> row;
    for (int j = 0; j < m; ++j) {
      if (j != i && !std::isnan(at(i, j))) row.push_back(at(i, j));
    }
    return row;
  }
};

struct RdpSummary {
  double rd_max = 0.0;
  double rd_avg = 0.0;
  std::int64_t infinite_pair_count = 0;
  std::int64_t evaluated_pairs = 0;
};

// Max over all entries and mean over the finite ones.
inline RdpSummary SummarizeEntries(std::span<const double> entries) {
  RdpSummary s;
  double sum = 0.0;
  std::int64_t finite = 0;
  for (double v : entries) {
    if (std::isnan(v)) continue;
    ++s.evaluated_pairs;
    s.rd_max = std::max(s.rd_max, v);
    if (std::isinf(v)) {
      ++s.infinite_pair_count;
    } else {
      sum += v;
      ++finite;
    }
  }
  s.rd_avg = finite > 0 ? sum / finite : 0.0;
  return s;
}

// Worst case and average over the off-diagonal entries, i.e. both directions
// of every pair.
inline RdpSummary SummarizeRdp(const PairwiseRDMatrix& matrix) {
  if (matrix.m < 2) throw ArgumentError("RDP summary needs at least 2 examples");
  std::vector<double> entries;
  entries.reserve(static_cast<std::size_t>(matrix.m) * (matrix.m - 1));
  for (int i = 0; i < matrix.m; ++i) {
    for (int j = 0; j < matrix.m; ++j) {
      if (i != j) entries.push_back(matrix.at(i, j));
    }
  }
  return SummarizeEntries(entries);
}

// epsilon_mu(lambda) = (1/(lambda-1)) ln mean_j exp((lambda-1) D_j)
//                      + ln(1/delta_mu) / (lambda-1).
inline double BdpEpsilon(std::span<const double> rd_row, RenyiOrder order, double delta_mu) {
  if (rd_row.empty()) throw ArgumentError("BdpEpsilon: empty row");
  if (!(delta_mu > 0.0 && delta_mu < 1.0)) throw ArgumentError("BdpEpsilon: delta_mu must be in (0, 1)");
  const double lm1 = order.value() - 1.0;
  std::vector<double> scaled(rd_row.size());
  for (std::size_t j = 0; j < rd_row.size(); ++j) {
    if (std::isinf(rd_row[j])) return kInf;
    scaled[j] = lm1 * rd_row[j];
  }
  const double log_mean = LogSumExp(scaled) - std::log(static_cast<double>(rd_row.size()));
  return log_mean / lm1 + std::log(1.0 / delta_mu) / lm1;
}

// Largest per-example epsilon_mu over the rows of the matrix.
inline double WorstCaseBdpEpsilon(const PairwiseRDMatrix& matrix, double delta_mu) {
  if (matrix.m < 2) throw ArgumentError("BDP accounting needs at least 2 examples");
  const RenyiOrder order(matrix.lambda);
  double worst = 0.0;
  for (int i = 0; i < matrix.m; ++i) {
    const std::vector<double> row = matrix.OffDiagonalRow(i);
    if (row.empty()) continue;
    worst = std::max(worst, BdpEpsilon(row, order, delta_mu));
  }
  return worst;
}

struct PrivacyReport {
  std::string dataset;
  std::string mechanism = "nvdp";
  double lambda = kDefaultAuditLambda;
  double delta_mu = kDefaultDeltaMu;
  double rd_max = 0.0;
  double rd_avg = 0.0;
  double epsilon_mu = 0.0;
  int n_examples = 0;
  double epsilon_alpha_floor = 0.0;
  std::vector<double> lambda_grid;
  std::vector<double> epsilon_grid;  // epsilon_mu at each grid order
  std::int64_t infinite_pair_count = 0;
  std::int64_t evaluated_pairs = 0;
  std::int64_t max_pairs = 0;  // 0 = all pairs
};

inline PrivacyReport MakeReport(const PairwiseRDMatrix& matrix, double delta_mu) {
  const RdpSummary summary = SummarizeRdp(matrix);
  PrivacyReport report;
  report.lambda = matrix.lambda;
  report.delta_mu = delta_mu;
  report.rd_max = summary.rd_max;
  report.rd_avg = summary.rd_avg;
  report.infinite_pair_count = summary.infinite_pair_count;
  report.evaluated_pairs = summary.evaluated_pairs;
  report.epsilon_mu = WorstCaseBdpEpsilon(matrix, delta_mu);
  report.n_examples = matrix.m;
  return report;
}

// Evaluates the worst-case epsilon_mu at every grid order and reports the
// tightest one.
inline PrivacyReport BdpOptimize(const std::function<PairwiseRDMatrix(double)>& rd_matrix_fn,
                                 std::span<const double> lambda_grid, double delta_mu) {
  if (lambda_grid.empty()) throw ArgumentError("BdpOptimize: empty lambda grid");
  for (double l : lambda_grid) RenyiOrder check(l);
  PrivacyReport best;
  std::vector<double> epsilons;
  bool have_best = false;
  for (double l : lambda_grid) {
    PrivacyReport report = MakeReport(rd_matrix_fn(l), delta_mu);
    epsilons.push_back(report.epsilon_mu);
    if (!have_best || report.epsilon_mu < best.epsilon_mu) {
      best = std::move(report);
      have_best = true;
    }
  }
  best.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
  best.epsilon_grid = std::move(epsilons);
  return best;
}

namespace internal {

// JSON has no infinity; infinite values are written as the string "inf".
inline nlohmann::json ExtendedReal(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline std::string CsvNumber(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace internal

inline nlohmann::json ReportToJson(const PrivacyReport& r) {
  nlohmann::json j;
  j["dataset"] = r.dataset;
  j["mechanism"] = r.mechanism;
  j["lambda"] = r.lambda;
  j["delta_mu"] = r.delta_mu;
  j["rd_max"] = internal::ExtendedReal(r.rd_max);
  j["rd_avg"] = internal::ExtendedReal(r.rd_avg);
  j["epsilon_mu"] = internal::ExtendedReal(r.epsilon_mu);
  j["n_examples"] = r.n_examples;
  j["epsilon_alpha_floor"] = r.epsilon_alpha_floor;
  j["infinite_pairs"] = r.infinite_pair_count;
  j["evaluated_pairs"] = r.evaluated_pairs;
  j["max_pairs"] = r.max_pairs;
  if (!r.lambda_grid.empty()) {
    j["lambda_grid"] = r.lambda_grid;
    nlohmann::json eps = nlohmann::json::array();
    for (double e : r.epsilon_grid) eps.push_back(internal::ExtendedReal(e));
    j["epsilon_grid"] = eps;
  }
  return j;
}

inline constexpr const char* kReportCsvHeader =
    "dataset,lambda,delta_mu,rd_max,rd_avg,epsilon_mu,infinite_pairs,epsilon_alpha_floor";

inline std::string ReportToCsvRow(const PrivacyReport& r) {
  using internal::CsvNumber;
  return r.dataset + "," + CsvNumber(r.lambda) + "," + CsvNumber(r.delta_mu) + "," +
         CsvNumber(r.rd_max) + "," + CsvNumber(r.rd_avg) + "," + CsvNumber(r.epsilon_mu) + "," +
         std::to_string(r.infinite_pair_count) + "," + CsvNumber(r.epsilon_alpha_floor);
}

}  // namespace nvdp

#endif  // NVDP_ACCOUNTANT_H_
