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

#include "nvdp/cli.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "test_util.h"

namespace nvdp {
namespace {

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("nvdp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string File(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Nvdp(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

// Report values may be the string "inf".
double Extended(const nlohmann::json& v) {
  return v.is_string() ? std::stod(v.get<std::string>()) : v.get<double>();
}

void ExpectOk(const CliRun& r) { ASSERT_EQ(r.code, kExitOk) << r.err; }

std::string Gen(const TempDir& dir, const std::string& name, int n, std::vector<std::string> extra = {}) {
  const std::string path = dir.File(name);
  std::vector<std::string> args = {"gen", "--out", path, "--n", std::to_string(n), "--n-min", "4", "--n-max", "4"};
  args.insert(args.end(), extra.begin(), extra.end());
  const CliRun r = Nvdp(args);
  EXPECT_EQ(r.code, kExitOk) << r.err;
  return path;
}

TEST(CliGen, WritesRequestedRecords) {
  TempDir dir;
  ExpectOk(Nvdp({"gen", "--out", dir.File("d.emb"), "--n", "200", "--dim", "8", "--classes", "2", "--sep", "6",
                 "--seed", "1"}));
  const std::vector<EmbeddingRecord> records = ReadEmbeddings(dir.File("d.emb"));
  ASSERT_EQ(records.size(), 200u);
  EXPECT_EQ(records[0].x.cols(), 8);
}

TEST(CliGen, MissingOutIsUsageError) {
  const CliRun r = Nvdp({"gen", "--n", "5"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("--out"), std::string::npos);
}

TEST(CliGen, NoSubcommandIsUsageError) { EXPECT_EQ(Nvdp({}).code, kExitUsage); }

TEST(CliGen, HelpExitsZero) { EXPECT_EQ(Nvdp({"--help"}).code, kExitOk); }

TEST(CliGen, SeedFromEnvironment) {
  TempDir dir;
  ::setenv("NVDP_SEED", "17", 1);
  ExpectOk(Nvdp({"gen", "--out", dir.File("env.emb"), "--n", "6"}));
  ::unsetenv("NVDP_SEED");
  ExpectOk(Nvdp({"gen", "--out", dir.File("flag.emb"), "--n", "6", "--seed", "17"}));
  ExpectOk(Nvdp({"gen", "--out", dir.File("other.emb"), "--n", "6", "--seed", "18"}));
  EXPECT_EQ(ReadFile(dir.File("env.emb")), ReadFile(dir.File("flag.emb")));
  EXPECT_NE(ReadFile(dir.File("env.emb")), ReadFile(dir.File("other.emb")));
}

TEST(CliConfig, FileValuesAndFlagOverride) {
  TempDir dir;
  WriteFile(dir.File("run.ini"), "[gen]\nn=7\nseed=4\n");
  ExpectOk(Nvdp({"--config", dir.File("run.ini"), "gen", "--out", dir.File("a.emb")}));
  EXPECT_EQ(ReadEmbeddings(dir.File("a.emb")).size(), 7u);
  ExpectOk(Nvdp({"--config", dir.File("run.ini"), "gen", "--out", dir.File("b.emb"), "--n", "3"}));
  EXPECT_EQ(ReadEmbeddings(dir.File("b.emb")).size(), 3u);
}

TEST(CliConfig, UnknownKeyIsUsageError) {
  TempDir dir;
  WriteFile(dir.File("bad.ini"), "[gen]\nsamples=7\n");
  EXPECT_EQ(Nvdp({"--config", dir.File("bad.ini"), "gen", "--out", dir.File("a.emb")}).code, kExitUsage);
}

TEST(CliTrain, ZeroEpochsWritesInitialization) {
  TempDir dir;
  const std::string data = Gen(dir, "d.emb", 12);
  ExpectOk(Nvdp({"train", "--data", data, "--out", dir.File("m.ckpt"), "--epochs", "0", "--seed", "9"}));
  const ModelParams p = DeserializeModel(ReadFile(dir.File("m.ckpt")));
  EXPECT_EQ(p, ModelParams::Initialize(8, 2, 2, {9, 1}));
}

TEST(CliTrain, WritesLogWithOneRowPerEpoch) {
  TempDir dir;
  const std::string data = Gen(dir, "d.emb", 30);
  ExpectOk(Nvdp({"train", "--data", data, "--out", dir.File("m.ckpt"), "--log", dir.File("log.csv"), "--epochs",
                 "3"}));
  std::istringstream log(ReadFile(dir.File("log.csv")));
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) ++lines;
  EXPECT_EQ(lines, 4);
}

TEST(CliTrain, DivergenceExitsThreeWithCheckpoint) {
  TempDir dir;
  const std::string data = Gen(dir, "d.emb", 30);
  const CliRun r = Nvdp({"train", "--data", data, "--out", dir.File("m.ckpt"), "--epochs", "5", "--lr", "1e12",
                      "--clip", "0"});
  EXPECT_EQ(r.code, kExitNumerical);
  const ModelParams p = DeserializeModel(ReadFile(dir.File("m.ckpt")));
  EXPECT_EQ(p.FirstNonFinite(), "");
}

TEST(CliTrain, BadArgumentsAreUsageErrors) {
  TempDir dir;
  const std::string data = Gen(dir, "d.emb", 12);
  EXPECT_EQ(Nvdp({"train", "--data", data, "--out", dir.File("m"), "--heads", "3"}).code, kExitUsage);
  EXPECT_EQ(Nvdp({"train", "--data", data, "--out", dir.File("m"), "--gaussian-penalty", "max"}).code,
            kExitUsage);
  EXPECT_EQ(Nvdp({"train", "--data", data, "--out", dir.File("m"), "--epochs", "x"}).code, kExitUsage);
}

TEST(CliTrain, MissingDataIsFormatError) {
  TempDir dir;
  EXPECT_EQ(Nvdp({"train", "--data", dir.File("none.emb"), "--out", dir.File("m")}).code, kExitFormat);
}

TEST(CliSanitize, DeterministicStructuredOutput) {
  TempDir dir;
  const std::string data = Gen(dir, "d.emb", 10);
  ExpectOk(Nvdp({"train", "--data", data, "--out", dir.File("m.ckpt"), "--epochs", "2"}));
  for (const char* name : {"a.nvs", "b.nvs"}) {
    ExpectOk(Nvdp({"sanitize", "--model", dir.File("m.ckpt"), "--data", data, "--out", dir.File(name), "--seed",
                   "3", "--emit-posteriors", dir.File("arch")}));
  }
  EXPECT_EQ(ReadFile(dir.File("a.nvs")), ReadFile(dir.File("b.nvs")));
  ExpectOk(Nvdp({"sanitize", "--model", dir.File("m.ckpt"), "--data", data, "--out", dir.File("c.nvs"), "--seed",
                 "4"}));
  EXPECT_NE(ReadFile(dir.File("a.nvs")), ReadFile(dir.File("c.nvs")));

  const std::vector<EmbeddingRecord> records = ReadEmbeddings(data);
  const std::vector<SanitizedRecord> sanitized = ReadSanitized(dir.File("a.nvs"));
  ASSERT_EQ(sanitized.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(sanitized[i].id, records[i].id);
    EXPECT_EQ(sanitized[i].sample.m(), records[i].x.rows() + 1);
    EXPECT_NEAR(sanitized[i].sample.pi.sum(), 1.0, 1e-12);
  }
  const std::vector<ArchivedPosterior> archive = ReadPosteriorArchive(dir.File("arch"));
  ASSERT_EQ(archive.size(), records.size());
  EXPECT_EQ(archive[3].id, records[3].id);
  EXPECT_EQ(archive[3].q.components(), 5);
}

TEST(CliSanitize, DimensionMismatchIsFormatError) {
  TempDir dir;
  const std::string data = Gen(dir, "d.emb", 10);
  const std::string small = Gen(dir, "d4.emb", 10, {"--dim", "4"});
  ExpectOk(Nvdp({"train", "--data", data, "--out", dir.File("m.ckpt"), "--epochs", "0"}));
  const CliRun r = Nvdp({"sanitize", "--model", dir.File("m.ckpt"), "--data", small, "--out", dir.File("s.nvs")});
  EXPECT_EQ(r.code, kExitFormat);
  EXPECT_NE(r.err.find("d = 8"), std::string::npos);
}

// Archive of n copies of one posterior.
std::string IdenticalArchive(const TempDir& dir, int n) {
  const std::vector<TokenParams> tokens = {{0.7, Vector::Constant(3, 0.2), Vector::Constant(3, 0.9)},
                                           {1.3, Vector::Constant(3, -0.4), Vector::Ones(3)}};
  const DPPosterior q = BuildPosterior(tokens, PriorParams::Standard(3));
  std::vector<ArchivedPosterior> items;
  for (int i = 0; i < n; ++i) items.push_back({"r" + std::to_string(i), q});
  WritePosteriorArchive(dir.File("same"), items);
  return dir.File("same");
}

TEST(CliAudit, IdenticalPosteriorsGiveAccountantConstant) {
  TempDir dir;
  const CliRun r = Nvdp({"audit", "--archive", IdenticalArchive(dir, 4)});
  ExpectOk(r);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["rd_max"].get<double>(), 0.0);
  EXPECT_EQ(j["rd_avg"].get<double>(), 0.0);
  EXPECT_NEAR(j["epsilon_mu"].get<double>(), std::log(1e5) / 0.1, 1e-9);
  EXPECT_EQ(j["evaluated_pairs"].get<int>(), 12);
  EXPECT_EQ(j["dataset"], "same");
}

TEST(CliAudit, VibFixedMatchesHandArithmetic) {
  TempDir dir;
  // Single-token posteriors, so the pooled mean is the token mean.
  const std::vector<double> shifts = {0.0, 1.0, 3.0};
  std::vector<ArchivedPosterior> items;
  for (double s : shifts) {
    const std::vector<TokenParams> token = {{1.0, Vector::Constant(2, s), Vector::Ones(2)}};
    items.push_back({"p", BuildPosterior(token, PriorParams::Standard(2))});
  }
  WritePosteriorArchive(dir.File("arch"), items);
  const CliRun r = Nvdp({"audit", "--archive", dir.File("arch"), "--mechanism", "vib-fixed", "--sigma", "0.55",
                      "--lambda", "1.1"});
  ExpectOk(r);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  // Squared distances 2, 18, 8 (each both ways), so rd = 1.1 * |dmu|^2 / (2 * 0.3025).
  const double unit = 1.1 / (2.0 * 0.55 * 0.55);
  EXPECT_NEAR(j["rd_max"].get<double>(), 18.0 * unit, 1e-9);
  EXPECT_NEAR(j["rd_avg"].get<double>(), (2.0 + 18.0 + 8.0) / 3.0 * unit, 1e-9);
}

TEST(CliAudit, HigherOrderDoesNotLowerRdMax) {
  TempDir dir;
  std::mt19937_64 gen(21);
  // Narrow ranges keep every order below finite.
  const testing::PosteriorRanges ranges{1.0, 1.9, -1.0, 1.0, 0.8, 1.1};
  std::vector<ArchivedPosterior> items;
  for (int i = 0; i < 5; ++i) items.push_back({"q" + std::to_string(i), testing::RandomPosterior(gen, 3, 4, ranges)});
  WritePosteriorArchive(dir.File("arch"), items);
  double previous = 0.0;
  for (const char* order : {"1.1", "1.5", "2"}) {
    const CliRun r = Nvdp({"audit", "--archive", dir.File("arch"), "--lambda", order});
    ExpectOk(r);
    const double rd_max = Extended(nlohmann::json::parse(r.out)["rd_max"]);
    EXPECT_GE(rd_max, previous) << order;
    previous = rd_max;
  }
  EXPECT_TRUE(std::isfinite(previous));
}

TEST(CliAudit, ModelAndDataMatchArchive) {
  TempDir dir;
  const std::string data = Gen(dir, "d.emb", 6);
  ExpectOk(Nvdp({"train", "--data", data, "--out", dir.File("m.ckpt"), "--epochs", "1"}));
  ExpectOk(Nvdp({"sanitize", "--model", dir.File("m.ckpt"), "--data", data, "--out", dir.File("s.nvs"),
                 "--emit-posteriors", dir.File("arch")}));
  ExpectOk(Nvdp({"audit", "--archive", dir.File("arch"), "--dataset", "x", "--json", dir.File("a.json"), "--csv",
                 dir.File("a.csv")}));
  ExpectOk(Nvdp({"audit", "--model", dir.File("m.ckpt"), "--data", data, "--dataset", "x", "--json",
                 dir.File("b.json"), "--csv", dir.File("b.csv")}));
  EXPECT_EQ(ReadFile(dir.File("a.json")), ReadFile(dir.File("b.json")));
  EXPECT_EQ(ReadFile(dir.File("a.csv")), ReadFile(dir.File("b.csv")));
}

TEST(CliAudit, OptimizeLambdaReportsGrid) {
  TempDir dir;
  const CliRun r = Nvdp({"audit", "--archive", IdenticalArchive(dir, 3), "--optimize-lambda"});
  ExpectOk(r);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["lambda_grid"].size(), DefaultLambdaGrid().size());
  EXPECT_EQ(j["lambda"].get<double>(), 64.0);
}

TEST(CliAudit, Errors) {
  TempDir dir;
  EXPECT_EQ(Nvdp({"audit", "--archive", IdenticalArchive(dir, 1)}).code, kExitUsage);
  EXPECT_EQ(Nvdp({"audit"}).code, kExitUsage);
  EXPECT_EQ(Nvdp({"audit", "--archive", IdenticalArchive(dir, 3), "--mechanism", "laplace"}).code, kExitUsage);
  EXPECT_EQ(Nvdp({"audit", "--archive", IdenticalArchive(dir, 3), "--lambda", "1"}).code, kExitUsage);
  EXPECT_EQ(Nvdp({"audit", "--archive", IdenticalArchive(dir, 3), "--mechanism", "vib-learned", "--sigma-vec",
                  "1,2"})
                .code,
            kExitUsage);
  EXPECT_EQ(Nvdp({"audit", "--archive", dir.File("missing")}).code, kExitFormat);
}

TEST(CliSweep, EmptyGridIsUsageError) {
  TempDir dir;
  const std::string data = Gen(dir, "d.emb", 12);
  EXPECT_EQ(Nvdp({"sweep", "--data", data, "--out", dir.File("t.csv"), "--lambda-d", ""}).code, kExitUsage);
}

TEST(CliSweep, RowsPerCellAndSeed) {
  TempDir dir;
  const std::string data = Gen(dir, "d.emb", 12);
  ExpectOk(Nvdp({"sweep", "--data", data, "--out", dir.File("t.csv"), "--plot", dir.File("p.csv"), "--lambda-d",
                 "0.01,1", "--lambda-g", "0.1,1,2", "--seeds", "1,2", "--epochs", "1"}));
  auto count_lines = [](const std::string& text) { return std::count(text.begin(), text.end(), '\n'); };
  EXPECT_EQ(count_lines(ReadFile(dir.File("t.csv"))), 1 + 2 * 3 * 2);
  EXPECT_EQ(count_lines(ReadFile(dir.File("p.csv"))), 1 + 2 * 3 * 2);
  ExpectOk(Nvdp({"sweep", "--data", data, "--out", dir.File("tied.csv"), "--lambda-d", "0.01,1", "--lambda-g",
                 "0.01,1", "--tie-weights", "--epochs", "1"}));
  EXPECT_EQ(count_lines(ReadFile(dir.File("tied.csv"))), 1 + 2);
}

TEST(CliSweep, FailedCellsAreSkipped) {
  TempDir dir;
  const std::string data = Gen(dir, "d.emb", 12);
  const CliRun r = Nvdp({"sweep", "--data", data, "--out", dir.File("t.csv"), "--lambda-d", "0", "--lambda-g", "0",
                      "--epochs", "3", "--lr", "1e12", "--clip", "0"});
  EXPECT_EQ(r.code, kExitNumerical);
  EXPECT_NE(r.err.find("failed"), std::string::npos);
  EXPECT_EQ(ReadFile(dir.File("t.csv")), "lambda_d,lambda_g,seed,acc,rd_max,rd_avg,epsilon_mu\n");
}

// One cell equals training, sanitizing the validation split and auditing it.
TEST(CliSweep, SingleCellComposesCommands) {
  TempDir dir;
  const std::string data = Gen(dir, "d.emb", 24, {"--seed", "5"});
  ExpectOk(Nvdp({"sweep", "--data", data, "--out", dir.File("t.csv"), "--lambda-d", "0.1", "--lambda-g", "0.1",
                 "--seeds", "7", "--epochs", "4", "--val-fraction", "0.5", "--pad-floor", "1"}));

  ExpectOk(Nvdp({"train", "--data", data, "--out", dir.File("m.ckpt"), "--lambda-d", "0.1", "--lambda-g", "0.1",
                 "--seed", "7", "--epochs", "4", "--val-fraction", "0.5"}));
  std::vector<EmbeddingRecord> records = ReadEmbeddings(data);
  const std::vector<EmbeddingRecord> val(records.begin() + 12, records.end());
  WriteEmbeddings(dir.File("val.emb"), 8, val);
  ExpectOk(Nvdp({"sanitize", "--model", dir.File("m.ckpt"), "--data", dir.File("val.emb"), "--out",
                 dir.File("val.nvs"), "--seed", "7"}));
  const CliRun audit = Nvdp({"audit", "--model", dir.File("m.ckpt"), "--data", dir.File("val.emb"), "--pad-floor", "1"});
  ExpectOk(audit);
  const nlohmann::json report = nlohmann::json::parse(audit.out);

  const ModelParams p = DeserializeModel(ReadFile(dir.File("m.ckpt")));
  const std::vector<SanitizedRecord> samples = ReadSanitized(dir.File("val.nvs"));
  int correct = 0;
  for (std::size_t i = 0; i < val.size(); ++i) {
    correct += PredictClass(HeadOutputs(samples[i].sample, p)) == std::get<std::int64_t>(val[i].label);
  }

  std::istringstream table(ReadFile(dir.File("t.csv")));
  std::string header, row;
  std::getline(table, header);
  std::getline(table, row);
  std::vector<std::string> cols;
  std::stringstream cells(row);
  for (std::string c; std::getline(cells, c, ',');) cols.push_back(c);
  ASSERT_EQ(cols.size(), 7u);
  EXPECT_EQ(cols[2], "7");
  EXPECT_DOUBLE_EQ(std::stod(cols[3]), static_cast<double>(correct) / val.size());
  EXPECT_EQ(std::stod(cols[4]), Extended(report["rd_max"]));
  EXPECT_EQ(std::stod(cols[5]), Extended(report["rd_avg"]));
  EXPECT_EQ(std::stod(cols[6]), Extended(report["epsilon_mu"]));
}

}  // namespace
}  // namespace nvdp
