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

#include "nvdp/accountant.h"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace nvdp {
namespace {

PairwiseRDMatrix ConstantMatrix(int m, double lambda, double c) {
  PairwiseRDMatrix matrix(m, lambda);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i != j) matrix.at(i, j) = c;
    }
  }
  return matrix;
}

TEST(SummarizeRdpTest, AllZero) {
  const RdpSummary s = SummarizeRdp(ConstantMatrix(4, 1.1, 0.0));
  EXPECT_EQ(s.rd_max, 0.0);
  EXPECT_EQ(s.rd_avg, 0.0);
  EXPECT_EQ(s.evaluated_pairs, 12);
}

TEST(SummarizeRdpTest, TwoByTwoArithmetic) {
  PairwiseRDMatrix matrix(2, 1.1);
  matrix.at(0, 1) = 0.1;
  matrix.at(1, 0) = 0.3;
  const std::vector<double> entries = {0.1, 0.3, 0.2, 0.05};
  const RdpSummary s = SummarizeEntries(entries);
  EXPECT_DOUBLE_EQ(s.rd_max, 0.3);
  EXPECT_DOUBLE_EQ(s.rd_avg, 0.1625);
  EXPECT_DOUBLE_EQ(SummarizeRdp(matrix).rd_avg, 0.2);
}

TEST(SummarizeRdpTest, InfiniteEntryIsCountedSeparately) {
  PairwiseRDMatrix matrix = ConstantMatrix(3, 1.1, 0.5);
  matrix.at(2, 0) = kInf;
  const RdpSummary s = SummarizeRdp(matrix);
  EXPECT_EQ(s.rd_max, kInf);
  EXPECT_DOUBLE_EQ(s.rd_avg, 0.5);
  EXPECT_EQ(s.infinite_pair_count, 1);
  EXPECT_LE(s.rd_avg, s.rd_max);
}

TEST(SummarizeRdpTest, SkippedPairsAreIgnored) {
  PairwiseRDMatrix matrix(3, 1.1);
  matrix.at(0, 1) = 0.4;
  matrix.at(2, 1) = 0.2;
  const RdpSummary s = SummarizeRdp(matrix);
  EXPECT_EQ(s.evaluated_pairs, 2);
  EXPECT_DOUBLE_EQ(s.rd_avg, 0.3);
}

TEST(SummarizeRdpTest, TooFewExamples) {
  EXPECT_THROW(SummarizeRdp(PairwiseRDMatrix(1, 1.1)), ArgumentError);
}

TEST(BdpEpsilonTest, ZeroRowGivesTailTerm) {
  const std::vector<double> row(9, 0.0);
  EXPECT_NEAR(BdpEpsilon(row, RenyiOrder(1.1), 1e-5), std::log(1e5) / 0.1, 1e-9);
  EXPECT_NEAR(BdpEpsilon(row, RenyiOrder(1.1), 1e-5), 115.129, 1e-3);
}

TEST(BdpEpsilonTest, ConstantRowCollapses) {
  for (double c : {0.0, 0.37, 5.0, 250.0}) {
    for (double lambda : {1.1, 2.0, 32.0}) {
      const std::vector<double> row(7, c);
      EXPECT_NEAR(BdpEpsilon(row, RenyiOrder(lambda), 1e-5), c + std::log(1e5) / (lambda - 1), 1e-9);
    }
  }
}

TEST(BdpEpsilonTest, TwoEntryExample) {
  const std::vector<double> row = {0.0, 1.0};
  EXPECT_NEAR(BdpEpsilon(row, RenyiOrder(2.0), 1e-2), 5.2253, 1e-3);
  EXPECT_NEAR(BdpEpsilon(row, RenyiOrder(2.0), 1e-2),
              std::log((1.0 + std::exp(1.0)) / 2.0) + std::log(100.0), 1e-12);
}

TEST(BdpEpsilonTest, LargeEntriesDoNotOverflow) {
  const std::vector<double> row = {1e4, 1e4};
  EXPECT_NEAR(BdpEpsilon(row, RenyiOrder(64.0), 1e-5), 1e4 + std::log(1e5) / 63.0, 1e-9);
}

TEST(BdpEpsilonTest, InfinityPropagates) {
  const std::vector<double> row = {0.1, kInf};
  EXPECT_EQ(BdpEpsilon(row, RenyiOrder(1.1), 1e-5), kInf);
}

TEST(BdpEpsilonTest, MonotoneAndBounded) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> entry(0.0, 3.0);
  std::uniform_real_distribution<double> bump(1e-6, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    const double lambda = 1.0 + std::exp(std::uniform_real_distribution<double>(-3.0, 4.0)(gen));
    std::vector<double> row(6);
    for (double& v : row) v = entry(gen);
    const RenyiOrder order(lambda);
    const double base = BdpEpsilon(row, order, 1e-5);
    const double tail = std::log(1e5) / (lambda - 1);
    EXPECT_GE(base, tail - 1e-12);
    EXPECT_LE(base, *std::max_element(row.begin(), row.end()) + tail + 1e-12);
    std::vector<double> bumped = row;
    bumped[trial % row.size()] += bump(gen);
    EXPECT_GE(BdpEpsilon(bumped, order, 1e-5), base);
  }
}

TEST(BdpEpsilonTest, Errors) {
  EXPECT_THROW(BdpEpsilon({}, RenyiOrder(2.0), 1e-5), ArgumentError);
  const std::vector<double> row = {0.0};
  EXPECT_THROW(BdpEpsilon(row, RenyiOrder(2.0), 0.0), ArgumentError);
  EXPECT_THROW(BdpEpsilon(row, RenyiOrder(2.0), 1.0), ArgumentError);
}

TEST(WorstCaseBdpEpsilonTest, TakesLargestRow) {
  PairwiseRDMatrix matrix = ConstantMatrix(3, 2.0, 0.0);
  matrix.at(1, 0) = 1.0;
  const std::vector<double> row = {1.0, 0.0};
  EXPECT_DOUBLE_EQ(WorstCaseBdpEpsilon(matrix, 1e-2), BdpEpsilon(row, RenyiOrder(2.0), 1e-2));
}

TEST(MakeReportTest, FillsFields) {
  const PrivacyReport r = MakeReport(ConstantMatrix(5, 1.1, 0.0), 1e-5);
  EXPECT_EQ(r.n_examples, 5);
  EXPECT_EQ(r.rd_max, 0.0);
  EXPECT_NEAR(r.epsilon_mu, std::log(1e5) / 0.1, 1e-9);
  EXPECT_TRUE(r.lambda_grid.empty());
}

TEST(BdpOptimizeTest, ZeroDivergencePicksLargestOrder) {
  const std::vector<double> grid = DefaultLambdaGrid();
  const PrivacyReport r =
      BdpOptimize([](double l) { return ConstantMatrix(3, l, 0.0); }, grid, 1e-5);
  EXPECT_EQ(r.lambda, 64.0);
  EXPECT_EQ(r.lambda_grid, grid);
  ASSERT_EQ(r.epsilon_grid.size(), grid.size());
  EXPECT_NEAR(r.epsilon_mu, std::log(1e5) / 63.0, 1e-9);
}

TEST(BdpOptimizeTest, SingleOrderMatchesFixedAccounting) {
  const PairwiseRDMatrix matrix = ConstantMatrix(4, 1.1, 0.2);
  const std::vector<double> grid = {1.1};
  const PrivacyReport r = BdpOptimize([&](double) { return matrix; }, grid, 1e-5);
  EXPECT_DOUBLE_EQ(r.epsilon_mu, MakeReport(matrix, 1e-5).epsilon_mu);
}

TEST(BdpOptimizeTest, LinearGrowthHasInteriorMinimizer) {
  const double slope = 0.5;
  const std::vector<double> grid = DefaultLambdaGrid();
  const PrivacyReport r =
      BdpOptimize([&](double l) { return ConstantMatrix(3, l, slope * l); }, grid, 1e-5);
  // Brute-force scan of the constant-row form.
  double best_lambda = grid[0];
  double best = kInf;
  for (double l : grid) {
    const double eps = slope * l + std::log(1e5) / (l - 1);
    if (eps < best) {
      best = eps;
      best_lambda = l;
    }
  }
  EXPECT_EQ(r.lambda, best_lambda);
  EXPECT_NE(best_lambda, grid.front());
  EXPECT_NE(best_lambda, grid.back());
  EXPECT_NEAR(r.epsilon_mu, best, 1e-9);
}

TEST(BdpOptimizeTest, Errors) {
  const auto fn = [](double l) { return ConstantMatrix(2, l, 0.0); };
  EXPECT_THROW(BdpOptimize(fn, std::vector<double>{}, 1e-5), ArgumentError);
  EXPECT_THROW(BdpOptimize(fn, std::vector<double>{2.0, 1.0}, 1e-5), ArgumentError);
}

TEST(ReportSerializationTest, JsonWritesInfinityAsString) {
  PrivacyReport r;
  r.dataset = "toy";
  r.rd_max = kInf;
  r.epsilon_mu = kInf;
  r.rd_avg = 0.25;
  const nlohmann::json j = ReportToJson(r);
  EXPECT_EQ(j["rd_max"], "inf");
  EXPECT_EQ(j["epsilon_mu"], "inf");
  EXPECT_EQ(j["rd_avg"], 0.25);
  EXPECT_EQ(j["dataset"], "toy");
  EXPECT_FALSE(j.contains("lambda_grid"));
  EXPECT_NO_THROW(nlohmann::json::parse(j.dump()));
}

TEST(ReportSerializationTest, CsvRow) {
  PrivacyReport r;
  r.dataset = "toy";
  r.rd_max = kInf;
  r.rd_avg = 0.5;
  r.epsilon_mu = 2.0;
  r.infinite_pair_count = 3;
  r.epsilon_alpha_floor = 1e-4;
  EXPECT_EQ(std::string(kReportCsvHeader),
            "dataset,lambda,delta_mu,rd_max,rd_avg,epsilon_mu,infinite_pairs,epsilon_alpha_floor");
  EXPECT_EQ(ReportToCsvRow(r), "toy,1.1000000000000001,1.0000000000000001e-05,inf,0.5,2,3,0.0001");
}

}  // namespace
}  // namespace nvdp
