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

// The nvdp command line: gen, train, sanitize, audit and sweep.
//
// Exit codes: 0 success, 2 usage or invalid argument, 3 numerical abort,
// 4 format error.

#ifndef NVDP_CLI_H_
#define NVDP_CLI_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nvdp/accountant.h"
#include "nvdp/audit.h"
#include "nvdp/embedding_io.h"
#include "nvdp/errors.h"
#include "nvdp/model.h"
#include "nvdp/posterior.h"
#include "nvdp/samplers.h"
#include "nvdp/train.h"

namespace nvdp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitFormat = 4;

// Stream for per-record sanitization noise.
inline constexpr std::uint64_t kSanitizeStream = 0x7361'6e69ULL;

namespace cli {

struct GenFlags {
  std::string out;
  SyntheticConfig config;
};

struct ModelFlags {
  int heads = 2;
  int classes = 0;  // 0 infers from the labels
  double alpha0 = 1.0;
  double val_fraction = 1.0 / 3.0;
  std::string gaussian_penalty = "sum";
};

struct TrainFlags {
  std::string data;
  std::string out;
  std::string log;
  ModelFlags model;
  TrainConfig config;
  LossWeights weights;
};

struct SanitizeFlags {
  std::string model;
  std::string data;
  std::string out;
  std::string emit_posteriors;
  double alpha0 = 1.0;
  std::uint64_t seed = 0;
};

struct AuditFlags {
  std::string archive;
  std::string model;
  std::string data;
  std::string dataset;
  std::string json;
  std::string csv;
  std::string mechanism = "nvdp";
  std::vector<double> sigma_vec;
  double lambda = kDefaultAuditLambda;
  double delta = kDefaultDeltaMu;
  double alpha0 = 1.0;
  bool optimize_lambda = false;
  AuditOptions options;
};

struct SweepFlags {
  std::string data;
  std::string out;
  std::string plot;
  std::vector<double> lambda_d = {1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> lambda_g = {1e-3, 1e-2, 1e-1, 1.0};
  std::vector<std::uint64_t> seeds = {1};
  bool tie_weights = false;
  ModelFlags model;
  TrainConfig config;
  double lambda = kDefaultAuditLambda;
  double delta = kDefaultDeltaMu;
  AuditOptions audit;
};

inline int InferClasses(std::span<const EmbeddingRecord> records) {
  std::int64_t max_label = 0;
  for (const EmbeddingRecord& r : records) {
    if (!std::holds_alternative<std::int64_t>(r.label)) return 1;
    const std::int64_t l = std::get<std::int64_t>(r.label);
    if (l < 0) throw ArgumentError("record \"" + r.id + "\" has a negative class label");
    max_label = std::max(max_label, l);
  }
  return static_cast<int>(std::max<std::int64_t>(2, max_label + 1));
}

inline GaussianPenalty ParsePenalty(const std::string& name) {
  if (name == "sum") return GaussianPenalty::kSum;
  if (name == "weighted") return GaussianPenalty::kPseudoCountWeighted;
  throw ArgumentError("unknown Gaussian penalty \"" + name + "\" (sum, weighted)");
}

inline PriorParams Prior(int d, double alpha0) {
  if (!(alpha0 > 0.0)) throw ArgumentError("--alpha0 must be positive");
  PriorParams prior = PriorParams::Standard(d);
  prior.alpha0 = alpha0;
  return prior;
}

struct Dataset {
  int d = 0;
  std::vector<EmbeddingRecord> records;
  std::vector<Example> train;
  std::vector<Example> val;
  std::size_t train_count = 0;
};

// The last ceil(val_fraction * N) records form the validation split.
inline Dataset LoadDataset(const std::string& path, double val_fraction) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ArgumentError("--val-fraction must be in [0, 1)");
  Dataset ds;
  EmbeddingReader reader(path);
  ds.d = reader.d();
  while (auto r = reader.Next()) ds.records.push_back(std::move(*r));
  const std::size_t n = ds.records.size();
  const std::size_t val = static_cast<std::size_t>(std::ceil(val_fraction * n));
  ds.train_count = n - val;
  const std::vector<Example> all = ToExamples(ds.records);
  ds.train.assign(all.begin(), all.begin() + ds.train_count);
  ds.val.assign(all.begin() + ds.train_count, all.end());
  return ds;
}

inline ModelParams LoadModel(const std::string& path, int data_d) {
  ModelParams p = DeserializeModel(ReadFile(path));
  if (p.d != data_d) {
    throw FormatError("checkpoint has d = " + std::to_string(p.d) + " but the embedding file has d = " +
                      std::to_string(data_d));
  }
  return p;
}

inline void WriteText(const std::string& path, const std::string& text) { WriteFile(path, text); }

inline int RunGen(const GenFlags& f, std::ostream& out) {
  const std::vector<EmbeddingRecord> records = GenerateSynthetic(f.config);
  WriteEmbeddings(f.out, f.config.d, records);
  out << "wrote " << records.size() << " records (d=" << f.config.d << ", classes=" << f.config.n_classes
      << ", sep=" << f.config.class_separation << ") to " << f.out << "\n";
  return kExitOk;
}

inline int RunTrain(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  const Dataset ds = LoadDataset(f.data, f.model.val_fraction);
  const int classes = f.model.classes > 0 ? f.model.classes : InferClasses(ds.records);
  const PriorParams prior = Prior(ds.d, f.model.alpha0);
  LossWeights weights = f.weights;
  weights.gaussian_penalty = ParsePenalty(f.model.gaussian_penalty);
  const ModelParams init = ModelParams::Initialize(ds.d, f.model.heads, classes, {f.config.seed, 1});
  const TrainResult result = Train(ds.train, ds.val, init, f.config, weights, prior);
  WriteFile(f.out, SerializeModel(result.params));
  std::ostringstream log;
  WriteTrainingLogCsv(log, result.log);
  WriteText(f.log.empty() ? f.out + ".log.csv" : f.log, log.str());
  if (result.aborted) {
    err << "training aborted (" << result.abort_reason << "); wrote last good checkpoint to " << f.out
        << "\n";
    return kExitNumerical;
  }
  out << "trained " << f.config.epochs << " epochs on " << ds.train.size() << " examples; best epoch "
      << result.best_epoch;
  if (!result.log.empty()) out << ", final val_acc " << result.log.back().val.accuracy;
  out << "\n";
  return kExitOk;
}

inline int RunSanitize(const SanitizeFlags& f, std::ostream& out) {
  EmbeddingReader reader(f.data);
  const ModelParams p = LoadModel(f.model, reader.d());
  const PriorParams prior = Prior(reader.d(), f.alpha0);
  SanitizedWriter writer(f.out, reader.d());
  std::vector<ArchivedPosterior> archive;
  std::uint64_t index = 0;
  while (auto r = reader.Next()) {
    const DPPosterior q = ProjectPosterior(r->x, p, prior);
    Rng rng(Rng::Derive({f.seed, kSanitizeStream}, index++));
    writer.Write({r->id, SampleEmbedding(q, rng)});
    if (!f.emit_posteriors.empty()) archive.push_back({r->id, q});
  }
  writer.Close();
  if (!f.emit_posteriors.empty()) WritePosteriorArchive(f.emit_posteriors, archive);
  out << "sanitized " << index << " records to " << f.out << "\n";
  return kExitOk;
}

inline std::vector<DPPosterior> PosteriorsFromModel(std::span<const Example> data, const ModelParams& p,
                                                    const PriorParams& prior) {
  std::vector<DPPosterior> qs;
  qs.reserve(data.size());
  for (const Example& ex : data) qs.push_back(ProjectPosterior(ex.x, p, prior));
  return qs;
}

inline void EmitReport(const PrivacyReport& r, const std::string& json, const std::string& csv,
                       std::ostream& out) {
  const std::string text = ReportToJson(r).dump(2) + "\n";
  if (json.empty()) {
    out << text;
  } else {
    WriteText(json, text);
  }
  if (!csv.empty()) WriteText(csv, std::string(kReportCsvHeader) + "\n" + ReportToCsvRow(r) + "\n");
}

inline int RunAudit(const AuditFlags& f, std::ostream& out) {
  std::vector<DPPosterior> qs;
  std::string dataset = f.dataset;
  int d = 0;
  if (!f.archive.empty()) {
    if (!f.model.empty() || !f.data.empty()) throw ArgumentError("use either --archive or --model/--data");
    for (ArchivedPosterior& a : ReadPosteriorArchive(f.archive)) qs.push_back(std::move(a.q));
    if (dataset.empty()) dataset = std::filesystem::path(f.archive).filename().string();
    if (qs.empty()) throw ArgumentError("audit needs at least 2 examples, got 0");
    d = qs[0].d();
    for (const DPPosterior& q : qs) {
      if (q.d() != d) throw FormatError("archive mixes posterior dimensions");
    }
  } else {
    if (f.model.empty() || f.data.empty()) throw ArgumentError("audit needs --archive or both --model and --data");
    const std::vector<EmbeddingRecord> records = ReadEmbeddings(f.data);
    EmbeddingReader header(f.data);
    d = header.d();
    const ModelParams p = LoadModel(f.model, d);
    qs = PosteriorsFromModel(ToExamples(records), p, Prior(d, f.alpha0));
    if (dataset.empty()) dataset = std::filesystem::path(f.data).stem().string();
  }
  AuditOptions options = f.options;
  options.mechanism = ParseMechanism(f.mechanism);
  if (!f.sigma_vec.empty()) {
    if (static_cast<int>(f.sigma_vec.size()) != d) throw ArgumentError("--sigma-vec length must equal d");
    options.sigma_vec = Eigen::Map<const Vector>(f.sigma_vec.data(), d);
  }
  const std::vector<double> grid = f.optimize_lambda ? DefaultLambdaGrid() : std::vector<double>{};
  PrivacyReport r = AuditPosteriors(qs, f.lambda, f.delta, Prior(d, f.alpha0), options, grid);
  r.dataset = dataset;
  EmitReport(r, f.json, f.csv, out);
  return kExitOk;
}

inline int RunSweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
  if (f.lambda_d.empty() || f.lambda_g.empty() || f.seeds.empty()) throw ArgumentError("sweep grids must be non-empty");
  if (f.tie_weights && f.lambda_d != f.lambda_g) {
    throw ArgumentError("--tie-weights needs identical --lambda-d and --lambda-g lists");
  }
  const Dataset ds = LoadDataset(f.data, f.model.val_fraction);
  if (ds.val.size() < 2) throw ArgumentError("sweep needs at least 2 validation examples");
  const int classes = f.model.classes > 0 ? f.model.classes : InferClasses(ds.records);
  if (classes < 2) throw ArgumentError("sweep reports accuracy and needs a classification dataset");
  const PriorParams prior = Prior(ds.d, f.model.alpha0);
  const GaussianPenalty penalty = ParsePenalty(f.model.gaussian_penalty);
  std::vector<std::pair<double, double>> cells;
  for (std::size_t i = 0; i < f.lambda_d.size(); ++i) {
    if (f.tie_weights) {
      cells.emplace_back(f.lambda_d[i], f.lambda_g[i]);
    } else {
      for (double g : f.lambda_g) cells.emplace_back(f.lambda_d[i], g);
    }
  }
  std::ostringstream table;
  std::ostringstream plot;
  table << "lambda_d,lambda_g,seed,acc,rd_max,rd_avg,epsilon_mu\n";
  plot << "epsilon_mu,accuracy\n";
  int rows = 0;
  for (const auto& [ld, lg] : cells) {
    for (std::uint64_t seed : f.seeds) {
      try {
        TrainConfig config = f.config;
        config.seed = seed;
        const ModelParams init = ModelParams::Initialize(ds.d, f.model.heads, classes, {seed, 1});
        const TrainResult result = Train(ds.train, ds.val, init, config, {ld, lg, 1.0, penalty}, prior);
        if (result.aborted) throw NumericalError(result.abort_reason);
        int correct = 0;
        for (std::size_t i = 0; i < ds.val.size(); ++i) {
          Rng rng(Rng::Derive({seed, kSanitizeStream}, i));
          const WeightedVectorSample s = Sanitize(ds.val[i].x, result.params, prior, rng);
          correct += PredictClass(HeadOutputs(s, result.params)) == static_cast<int>(ds.val[i].target);
        }
        const double acc = static_cast<double>(correct) / ds.val.size();
        AuditOptions audit = f.audit;
        audit.seed = seed;
        const PrivacyReport r =
            AuditPosteriors(PosteriorsFromModel(ds.val, result.params, prior), f.lambda, f.delta, prior, audit);
        using internal::CsvNumber;
        table << CsvNumber(ld) << ',' << CsvNumber(lg) << ',' << seed << ',' << CsvNumber(acc) << ','
              << CsvNumber(r.rd_max) << ',' << CsvNumber(r.rd_avg) << ',' << CsvNumber(r.epsilon_mu) << '\n';
        plot << CsvNumber(r.epsilon_mu) << ',' << CsvNumber(acc) << '\n';
        ++rows;
        out << "cell lambda_d=" << ld << " lambda_g=" << lg << " seed=" << seed << ": acc " << acc
            << ", rd_max " << r.rd_max << ", epsilon_mu " << r.epsilon_mu << "\n";
      } catch (const std::exception& e) {
        err << "cell lambda_d=" << ld << " lambda_g=" << lg << " seed=" << seed << " failed: " << e.what()
            << "\n";
      }
    }
  }
  WriteText(f.out, table.str());
  if (!f.plot.empty()) WriteText(f.plot, plot.str());
  if (rows == 0) {
    err << "every sweep cell failed\n";
    return kExitNumerical;
  }
  return kExitOk;
}

inline const CLI::Validator kNonEmpty(
    [](std::string& v) { return v.empty() ? std::string("empty list entry") : std::string(); }, "", "NONEMPTY");

inline void AddModelFlags(CLI::App* cmd, ModelFlags& m) {
  cmd->add_option("--heads", m.heads, "attention heads (must divide d)")->capture_default_str();
  cmd->add_option("--classes", m.classes, "output classes; 0 infers, 1 means regression")->capture_default_str();
  cmd->add_option("--alpha0", m.alpha0, "prior pseudo-count")->capture_default_str();
  cmd->add_option("--val-fraction", m.val_fraction, "trailing share of records used for validation")
      ->capture_default_str();
  cmd->add_option("--gaussian-penalty", m.gaussian_penalty, "L_G form: sum or weighted")->capture_default_str();
}

inline void AddTrainConfigFlags(CLI::App* cmd, TrainConfig& c) {
  cmd->add_option("--epochs", c.epochs)->capture_default_str();
  cmd->add_option("--lr", c.learning_rate, "learning rate")->capture_default_str();
  cmd->add_option("--batch-size", c.batch_size)->capture_default_str();
  cmd->add_option("--warmup", c.warmup_fraction, "warm-up share of all steps")->capture_default_str();
  cmd->add_option("--clip", c.clip_norm, "gradient-norm cap, 0 disables")->capture_default_str();
}

inline void AddAuditFlags(CLI::App* cmd, AuditOptions& a, double& lambda, double& delta) {
  cmd->add_option("--lambda", lambda, "Renyi order")->capture_default_str();
  cmd->add_option("--delta", delta, "delta_mu")->capture_default_str();
  cmd->add_option("--pad-floor", a.pad_floor, "pseudo-count given to padding components")->capture_default_str();
  cmd->add_option("--sigma", a.sigma, "vib-fixed noise scale")->capture_default_str();
  cmd->add_option("--max-pairs", a.max_pairs, "cap on ordered pairs, 0 = all")->capture_default_str();
  cmd->add_option("--threads", a.threads, "audit worker threads")->capture_default_str();
}

}  // namespace cli

// Runs the command line; args excludes the program name.
inline int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Privacy-preserving sharing of multivector embeddings", "nvdp");
  app.set_config("--config", "", "INI file: key=value lines under [subcommand] sections");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  cli::GenFlags gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic embedding file");
  gen_cmd->add_option("--out", gen.out, "output .emb file")->required();
  gen_cmd->add_option("--n", gen.config.n_examples, "records")->capture_default_str();
  gen_cmd->add_option("--dim", gen.config.d, "embedding dimension")->capture_default_str();
  gen_cmd->add_option("--classes", gen.config.n_classes)->capture_default_str();
  gen_cmd->add_option("--sep", gen.config.class_separation, "distance between class means")->capture_default_str();
  gen_cmd->add_option("--n-min", gen.config.n_min, "shortest sequence")->capture_default_str();
  gen_cmd->add_option("--n-max", gen.config.n_max, "longest sequence")->capture_default_str();
  gen_cmd->add_option("--seed", gen.config.seed)->envname("NVDP_SEED");

  cli::TrainFlags train;
  CLI::App* train_cmd = app.add_subcommand("train", "train one (lambda_D, lambda_G) configuration");
  train_cmd->add_option("--data", train.data, "input .emb file")->required();
  train_cmd->add_option("--out", train.out, "output checkpoint")->required();
  train_cmd->add_option("--log", train.log, "training log CSV (default: <out>.log.csv)");
  train_cmd->add_option("--lambda-d", train.weights.lambda_d, "Dirichlet KL weight")->capture_default_str();
  train_cmd->add_option("--lambda-g", train.weights.lambda_g, "Gaussian KL weight")->capture_default_str();
  train_cmd->add_option("--seed", train.config.seed)->envname("NVDP_SEED");
  cli::AddModelFlags(train_cmd, train.model);
  cli::AddTrainConfigFlags(train_cmd, train.config);

  cli::SanitizeFlags sanitize;
  CLI::App* sanitize_cmd = app.add_subcommand("sanitize", "release one posterior sample per record");
  sanitize_cmd->add_option("--model", sanitize.model, "checkpoint")->required();
  sanitize_cmd->add_option("--data", sanitize.data, "input .emb file")->required();
  sanitize_cmd->add_option("--out", sanitize.out, "output .nvs file")->required();
  sanitize_cmd->add_option("--emit-posteriors", sanitize.emit_posteriors, "write a .dpq archive to this directory");
  sanitize_cmd->add_option("--alpha0", sanitize.alpha0, "prior pseudo-count")->capture_default_str();
  sanitize_cmd->add_option("--seed", sanitize.seed)->envname("NVDP_SEED");

  cli::AuditFlags audit;
  CLI::App* audit_cmd = app.add_subcommand("audit", "pairwise Renyi divergences and BDP accounting");
  audit_cmd->add_option("--archive", audit.archive, "posterior archive directory");
  audit_cmd->add_option("--model", audit.model, "checkpoint (with --data)");
  audit_cmd->add_option("--data", audit.data, ".emb file (with --model)");
  audit_cmd->add_option("--dataset", audit.dataset, "dataset name in the report");
  audit_cmd->add_option("--json", audit.json, "write the JSON report here instead of stdout");
  audit_cmd->add_option("--csv", audit.csv, "also write a CSV report");
  audit_cmd->add_option("--mechanism", audit.mechanism, "nvdp, vtdp, vib-fixed or vib-learned")
      ->capture_default_str();
  audit_cmd->add_option("--sigma-vec", audit.sigma_vec, "vib-learned per-dimension sigma")->delimiter(',')->check(cli::kNonEmpty);
  audit_cmd->add_option("--alpha0", audit.alpha0, "prior pseudo-count")->capture_default_str();
  audit_cmd->add_flag("--optimize-lambda", audit.optimize_lambda, "minimize epsilon_mu over the order grid");
  audit_cmd->add_option("--seed", audit.options.seed, "pair subsampling seed")->envname("NVDP_SEED");
  cli::AddAuditFlags(audit_cmd, audit.options, audit.lambda, audit.delta);

  cli::SweepFlags sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "regularization-weight sweep: accuracy vs privacy");
  sweep_cmd->add_option("--data", sweep.data, "input .emb file")->required();
  sweep_cmd->add_option("--out", sweep.out, "trade-off table CSV")->required();
  sweep_cmd->add_option("--plot", sweep.plot, "(epsilon_mu, accuracy) points CSV");
  sweep_cmd->add_option("--lambda-d", sweep.lambda_d, "Dirichlet KL weights")->delimiter(',')->check(cli::kNonEmpty)->capture_default_str();
  sweep_cmd->add_option("--lambda-g", sweep.lambda_g, "Gaussian KL weights")->delimiter(',')->check(cli::kNonEmpty)->capture_default_str();
  sweep_cmd->add_option("--seeds", sweep.seeds, "training seeds")->delimiter(',')->check(cli::kNonEmpty)->capture_default_str();
  sweep_cmd->add_flag("--tie-weights", sweep.tie_weights, "pair the weight lists instead of crossing them");
  cli::AddModelFlags(sweep_cmd, sweep.model);
  cli::AddTrainConfigFlags(sweep_cmd, sweep.config);
  cli::AddAuditFlags(sweep_cmd, sweep.audit, sweep.lambda, sweep.delta);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cli::RunGen(gen, out);
    if (train_cmd->parsed()) return cli::RunTrain(train, out, err);
    if (sanitize_cmd->parsed()) return cli::RunSanitize(sanitize, out);
    if (audit_cmd->parsed()) return cli::RunAudit(audit, out);
    if (sweep_cmd->parsed()) return cli::RunSweep(sweep, out, err);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "format error: " << e.what() << "\n";
    return kExitFormat;
  }
  return kExitUsage;
}

}  // namespace nvdp

#endif  // NVDP_CLI_H_
