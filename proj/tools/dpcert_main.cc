// Copyright 2026 The dpcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// dpcert: certified robustness radii against data poisoning for ensembles of
// DP-SGD models. Exit status 0 on success, 1 on a usage error, 2 when the
// requested work fails.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "dpcert/attack_oracle.h"
#include "dpcert/certifier.h"
#include "dpcert/config.h"
#include "dpcert/confidence.h"
#include "dpcert/dp_trainer.h"
#include "dpcert/io.h"
#include "dpcert/pipeline.h"
#include "dpcert/sgm_accountant.h"

namespace dpcert {
namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

// Result of a subcommand: a usage error is the caller's mistake, anything
// else non-OK is a runtime failure.
struct Outcome {
  int code = 0;
  std::string message;
};

Outcome Usage(std::string message) { return {kUsageError, std::move(message)}; }

Outcome Failure(const absl::Status& status) {
  return {kRuntimeError, std::string(status.message())};
}

#define CLI_ASSIGN_OR_FAIL(lhs, expr)          \
  auto lhs##_or = (expr);                      \
  if (!lhs##_or.ok()) return Failure(lhs##_or.status()); \
  auto lhs = *std::move(lhs##_or)

// Config problems are the caller's input, so they are usage errors.
#define CLI_ASSIGN_OR_USAGE(lhs, expr)                                  \
  auto lhs##_or = (expr);                                               \
  if (!lhs##_or.ok()) return Usage(std::string(lhs##_or.status().message())); \
  auto lhs = *std::move(lhs##_or)

#define CLI_VALIDATE_CONFIG(config)                                   \
  do {                                                                \
    if (absl::Status _st = ValidateRunConfig(config); !_st.ok()) {    \
      return Usage(std::string(_st.message()));                       \
    }                                                                 \
  } while (0)

#define CLI_RETURN_IF_ERROR(expr)                      \
  do {                                                 \
    if (absl::Status _st = (expr); !_st.ok()) return Failure(_st); \
  } while (0)

absl::StatusOr<RunConfig> LoadConfig(const std::string& path) {
  if (path.empty()) return DefaultRunConfig();
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  absl::StatusOr<RunConfig> config = ParseConfig(*text);
  if (!config.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": ", config.status().message()));
  }
  return config;
}

absl::StatusOr<Dataset> LoadDataset(const std::string& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  absl::StatusOr<Dataset> data = ParseDatasetCsv(*text);
  if (!data.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": ", data.status().message()));
  }
  return data;
}

// Writes to `path`, or to stdout when it is empty or "-".
absl::Status Emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    return absl::OkStatus();
  }
  return WriteFile(path, contents);
}

absl::StatusOr<std::vector<double>> ParseOrderList(const std::string& text) {
  absl::StatusOr<RunConfig> c = ParseConfig("orders=" + text);
  if (!c.ok()) return c.status();
  return c->orders;
}

// ---------------------------------------------------------------- accountant

struct AccountantArgs {
  std::string config;
  std::optional<double> q, sigma;
  std::optional<int64_t> steps;
  int64_t radius = 1;
  std::string orders;
  std::optional<double> delta;
  std::string out;
};

Outcome RunAccountant(const AccountantArgs& a) {
  CLI_ASSIGN_OR_USAGE(config, LoadConfig(a.config));
  PrivacyParams& p = config.train.privacy;
  if (a.q) p.sampling_ratio = *a.q;
  if (a.sigma) p.noise_multiplier = *a.sigma;
  if (a.steps) p.steps = *a.steps;
  if (a.delta) config.delta = *a.delta;
  if (!a.orders.empty()) {
    CLI_ASSIGN_OR_USAGE(orders, ParseOrderList(a.orders));
    config.orders = orders;
  }
  CLI_VALIDATE_CONFIG(config);
  if (a.radius < 1) return Usage("--radius must be >= 1");
  const std::vector<double> orders =
      config.orders.empty() ? DefaultOrders() : config.orders;
  CLI_ASSIGN_OR_FAIL(curve, GroupRdpCurve(p, a.radius, orders));
  CLI_ASSIGN_OR_FAIL(adp, RdpToAdp(curve, config.delta));
  CsvTable table;
  table.header = {"alpha", "epsilon"};
  for (size_t i = 0; i < curve.size(); ++i) {
    table.rows.push_back(
        {FormatDouble(curve.orders[i]), FormatDouble(curve.epsilons[i])});
  }
  CLI_RETURN_IF_ERROR(Emit(a.out, FormatCsv(table)));
  std::cout << "adp epsilon=" << FormatDouble(adp.epsilon)
            << " delta=" << FormatDouble(adp.delta)
            << " order=" << FormatDouble(adp.order)
            << " radius=" << a.radius << "\n";
  return {};
}

// --------------------------------------------------------------------- synth

struct SynthArgs {
  int64_t n = 200;
  int64_t features = 2;
  int labels = 2;
  double separation = 4.0;
  uint64_t seed = 1;
  std::string out;
};

Outcome RunSynth(const SynthArgs& a) {
  CLI_ASSIGN_OR_FAIL(data, MakeGaussianMixture(a.n, a.features, a.labels,
                                               a.separation, a.seed));
  CLI_RETURN_IF_ERROR(Emit(a.out, FormatDatasetCsv(data)));
  return {};
}

// --------------------------------------------------------------------- train

struct TrainArgs {
  std::string data, config, out;
  std::optional<int64_t> instances, subset_size, threads;
  std::optional<uint64_t> seed;
};

Outcome RunTrain(const TrainArgs& a) {
  CLI_ASSIGN_OR_USAGE(config, LoadConfig(a.config));
  if (a.instances) config.instances = *a.instances;
  if (a.subset_size) config.subset_size = *a.subset_size;
  if (a.seed) config.seed = *a.seed;
  if (a.threads) config.threads = static_cast<int>(*a.threads);
  CLI_VALIDATE_CONFIG(config);
  CLI_ASSIGN_OR_FAIL(data, LoadDataset(a.data));
  CLI_ASSIGN_OR_FAIL(ensemble,
                     TrainEnsemble(data, config.train, config.instances,
                                   config.subset_size, config.seed,
                                   config.threads));
  CLI_RETURN_IF_ERROR(SaveEnsemble(ensemble, a.out));
  std::cerr << "trained " << ensemble.instances.size() << " of "
            << config.instances << " instances";
  if (!ensemble.failures.empty()) {
    std::cerr << " (" << ensemble.failures.size() << " failed, see manifest)";
  }
  std::cerr << "\n";
  return {};
}

// --------------------------------------------------------------------- infer

struct InferArgs {
  std::string ensemble, data, votes_out, scores_out, truth_out;
};

Outcome RunInfer(const InferArgs& a) {
  if (a.votes_out.empty() && a.scores_out.empty()) {
    return Usage("infer needs --votes-out or --scores-out");
  }
  CLI_ASSIGN_OR_FAIL(ensemble, LoadEnsemble(a.ensemble));
  CLI_ASSIGN_OR_FAIL(data, LoadDataset(a.data));
  VoteTable votes;
  ScoreTable scores;
  CLI_RETURN_IF_ERROR(InferDataset(ensemble, data, &votes, &scores));
  if (!a.votes_out.empty()) {
    CLI_RETURN_IF_ERROR(WriteFile(a.votes_out, FormatVotesCsv(votes)));
  }
  if (!a.scores_out.empty()) {
    CLI_RETURN_IF_ERROR(WriteFile(a.scores_out, FormatScoresCsv(scores)));
  }
  if (!a.truth_out.empty()) {
    CLI_RETURN_IF_ERROR(WriteFile(a.truth_out, FormatTruthCsv(data)));
  }
  return {};
}

// ------------------------------------------------------------------- certify

struct CertifyArgs {
  std::string votes, scores, config, method, ensemble, out;
  std::optional<double> eta;
  std::optional<int64_t> r_max, train_size, threads;
};

Outcome RunCertify(const CertifyArgs& a) {
  if (a.votes.empty() == a.scores.empty()) {
    return Usage("certify needs exactly one of --votes and --scores");
  }
  CLI_ASSIGN_OR_USAGE(config, LoadConfig(a.config));
  if (!a.method.empty()) {
    absl::StatusOr<CertMethod> m = ParseCertMethod(a.method);
    if (!m.ok()) return Usage(std::string(m.status().message()));
    config.method = *m;
  }
  if (a.eta) config.eta = *a.eta;
  if (a.r_max) config.r_max = *a.r_max;
  if (a.threads) config.threads = static_cast<int>(*a.threads);
  CLI_VALIDATE_CONFIG(config);
  if (UsesScores(config.method) != !a.scores.empty()) {
    return Usage(absl::StrCat("method ", std::string(CertMethodName(config.method)),
                              " needs --", UsesScores(config.method) ? "scores" : "votes"));
  }

  // The guarantee comes from the ensemble manifest when one is given, so
  // subset accounting uses the size the models were trained on.
  PrivacyParams params = config.train.privacy;
  std::optional<int64_t> train_size = a.train_size;
  if (!a.ensemble.empty()) {
    CLI_ASSIGN_OR_FAIL(ensemble, LoadEnsemble(a.ensemble));
    CLI_ASSIGN_OR_FAIL(accounted, ensemble.AccountedParams());
    params = accounted;
    if (!train_size) train_size = ensemble.train_size;
  } else if (config.subset_size) {
    if (!train_size) return Usage("subset_size needs --train-size or --ensemble");
    CLI_ASSIGN_OR_FAIL(adjusted,
                       AdjustForSubset(params, *config.subset_size, *train_size));
    params = adjusted;
  }
  if (!config.r_max && !train_size) {
    return Usage("r_max=auto needs --train-size or --ensemble");
  }
  const int64_t r_max = config.RadiusLimit(train_size.value_or(0));

  CLI_ASSIGN_OR_FAIL(evaluator, RadiusEvaluator::Create(params, config.method,
                                                        config.delta,
                                                        config.orders));
  std::vector<Certificate> certs;
  if (!a.votes.empty()) {
    CLI_ASSIGN_OR_FAIL(text, ReadFile(a.votes));
    CLI_ASSIGN_OR_FAIL(votes, ParseVotesCsv(text));
    CLI_ASSIGN_OR_FAIL(out, CertifyVotes(votes, evaluator, config.eta, r_max,
                                         config.threads));
    certs = std::move(out);
  } else {
    CLI_ASSIGN_OR_FAIL(text, ReadFile(a.scores));
    CLI_ASSIGN_OR_FAIL(scores, ParseScoresCsv(text));
    CLI_ASSIGN_OR_FAIL(out, CertifyScores(scores, evaluator, config.score_bound,
                                          config.eta, r_max, config.threads));
    certs = std::move(out);
  }
  for (const Certificate& c : certs) {
    if (!c.status.ok()) {
      return Failure(absl::Status(
          c.status.code(),
          absl::StrCat("sample ", c.sample_id, ": ", c.status.message())));
    }
  }
  CLI_RETURN_IF_ERROR(Emit(a.out, FormatCertsCsv(certs)));
  return {};
}

// --------------------------------------------------------------------- curve

struct CurveArgs {
  std::string certs, truth, out;
};

Outcome RunCurve(const CurveArgs& a) {
  CLI_ASSIGN_OR_FAIL(certs_text, ReadFile(a.certs));
  CLI_ASSIGN_OR_FAIL(certs, ParseCertsCsv(certs_text));
  CLI_ASSIGN_OR_FAIL(truth_text, ReadFile(a.truth));
  CLI_ASSIGN_OR_FAIL(truth, ParseTruthCsv(truth_text));
  CLI_ASSIGN_OR_FAIL(curve, ComputeCertifiedAccuracy(certs, truth));
  CLI_ASSIGN_OR_FAIL(summary, SummarizeRadii(certs, truth));
  CLI_RETURN_IF_ERROR(Emit(a.out, FormatCurveCsv(curve)));
  auto opt = [](const std::optional<int64_t>& v) {
    return v ? std::to_string(*v) : std::string("none");
  };
  std::cerr << "median_radius=" << opt(summary.median)
            << " max_radius=" << opt(summary.max) << "\n";
  return {};
}

// -------------------------------------------------------------- attack-check

struct AttackArgs {
  std::string data, pool, ops = "delete", config, test, sample, certs, out;
  int64_t radius = 1;
  int64_t trials = 100;
  std::optional<int64_t> threads;
  std::optional<uint64_t> seed;
};

Outcome RunAttack(const AttackArgs& a) {
  CLI_ASSIGN_OR_USAGE(config, LoadConfig(a.config));
  if (a.seed) config.seed = *a.seed;
  if (a.threads) config.threads = static_cast<int>(*a.threads);
  NeighborSpec spec;
  spec.radius = a.radius;
  if (absl::Status s = ParseOps(a.ops, &spec); !s.ok()) {
    return Usage(std::string(s.message()));
  }
  if (a.trials < 30) return Usage("--trials must be >= 30");
  CLI_ASSIGN_OR_FAIL(data, LoadDataset(a.data));
  if (!a.pool.empty()) {
    CLI_ASSIGN_OR_FAIL(pool, LoadDataset(a.pool));
    spec.pool = std::move(pool);
  } else if (spec.allow_insert || spec.allow_modify) {
    return Usage("insert and modify need --pool");
  }
  CLI_ASSIGN_OR_FAIL(test, LoadDataset(a.test));
  absl::StatusOr<int64_t> row = ParseInt(a.sample);
  if (!row.ok() || *row < 0 || *row >= test.n) {
    return Usage(absl::StrCat("--sample must be a row index of ", a.test,
                              " in [0, ", test.n, ")"));
  }
  FlipCheckOptions options;
  options.rule = UsesScores(config.method) ? InferenceRule::kScores
                                           : InferenceRule::kMultinomial;
  options.seed = config.seed;
  options.threads = config.threads;
  CLI_ASSIGN_OR_FAIL(report, EmpiricalFlipCheck(data, spec, config.train,
                                                test.row(*row), a.trials,
                                                options));
  report.sample_id = a.sample;
  if (!a.certs.empty()) {
    CLI_ASSIGN_OR_FAIL(text, ReadFile(a.certs));
    CLI_ASSIGN_OR_FAIL(certs, ParseCertsCsv(text));
    for (const Certificate& c : certs) {
      if (c.sample_id == a.sample) report.certified_radius = c.radius;
    }
  }
  CLI_RETURN_IF_ERROR(Emit(a.out, FormatFlipCsv({report})));
  std::cerr << "flips " << report.flip_count << " of " << report.neighbor_count
            << " neighbors, frequency " << FormatDouble(report.flip_frequency())
            << " (se " << FormatDouble(report.standard_error()) << ")\n";
  return {};
}

// ------------------------------------------------------------------ pipeline

struct PipelineArgs {
  std::string config, data, test, out_dir;
};

Outcome RunPipelineCommand(const PipelineArgs& a) {
  CLI_ASSIGN_OR_USAGE(config, LoadConfig(a.config));
  CLI_ASSIGN_OR_FAIL(result, RunPipeline(config, a.data, a.test, a.out_dir));
  auto opt = [](const std::optional<int64_t>& v) {
    return v ? std::to_string(*v) : std::string("none");
  };
  std::cout << "median_radius=" << opt(result.summary.median)
            << " max_radius=" << opt(result.summary.max)
            << " clean_certified_accuracy="
            << FormatDouble(result.curve.accuracy[0]) << "\n";
  return {};
}

int Main(int argc, char** argv) {
  CLI::App app{"Certified robustness against data poisoning for DP-SGD "
               "ensembles",
               "dpcert"};
  app.set_version_flag("--version", DPCERT_VERSION);
  app.require_subcommand(1);
  Outcome outcome;

  AccountantArgs acc;
  CLI::App* c_acc = app.add_subcommand(
      "accountant", "Group RDP curve alpha,epsilon and its (epsilon, delta) form");
  c_acc->add_option("--config", acc.config, "key=value config file");
  c_acc->add_option("--q", acc.q, "sampling ratio (overrides config)");
  c_acc->add_option("--sigma", acc.sigma, "noise multiplier (overrides config)");
  c_acc->add_option("--steps", acc.steps, "number of updates (overrides config)");
  c_acc->add_option("--radius", acc.radius, "group size r >= 1")
      ->capture_default_str();
  c_acc->add_option("--orders", acc.orders, "comma-separated RDP orders");
  c_acc->add_option("--delta", acc.delta, "delta for the conversion");
  c_acc->add_option("--out", acc.out, "CSV output (default stdout)");
  c_acc->callback([&] { outcome = RunAccountant(acc); });

  SynthArgs syn;
  CLI::App* c_syn =
      app.add_subcommand("synth", "Write a synthetic Gaussian-mixture dataset");
  c_syn->add_option("--n", syn.n, "rows")->capture_default_str();
  c_syn->add_option("--features", syn.features, "features")->capture_default_str();
  c_syn->add_option("--labels", syn.labels, "labels")->capture_default_str();
  c_syn->add_option("--separation", syn.separation, "distance between means")
      ->capture_default_str();
  c_syn->add_option("--seed", syn.seed, "seed")->capture_default_str();
  c_syn->add_option("--out", syn.out, "CSV output (default stdout)");
  c_syn->callback([&] { outcome = RunSynth(syn); });

  TrainArgs tr;
  CLI::App* c_tr = app.add_subcommand("train", "Train a DP-SGD ensemble");
  c_tr->add_option("--data", tr.data, "training dataset CSV")->required();
  c_tr->add_option("--config", tr.config, "key=value config file");
  c_tr->add_option("--instances,-P", tr.instances, "ensemble size");
  c_tr->add_option("--subset-size", tr.subset_size, "per-instance subset size");
  c_tr->add_option("--seed", tr.seed, "master seed");
  c_tr->add_option("--threads", tr.threads, "worker threads (0 = all cores)");
  c_tr->add_option("--out", tr.out, "ensemble directory")->required();
  c_tr->callback([&] { outcome = RunTrain(tr); });

  InferArgs inf;
  CLI::App* c_inf =
      app.add_subcommand("infer", "Vote and score tables of an ensemble");
  c_inf->add_option("--ensemble", inf.ensemble, "ensemble directory")->required();
  c_inf->add_option("--data", inf.data, "test dataset CSV")->required();
  c_inf->add_option("--votes-out", inf.votes_out, "votes CSV");
  c_inf->add_option("--scores-out", inf.scores_out, "scores CSV");
  c_inf->add_option("--truth-out", inf.truth_out, "truth CSV for `curve`");
  c_inf->callback([&] { outcome = RunInfer(inf); });

  CertifyArgs cer;
  CLI::App* c_cer =
      app.add_subcommand("certify", "Certified radius per test sample");
  c_cer->add_option("--votes", cer.votes, "votes CSV");
  c_cer->add_option("--scores", cer.scores, "scores CSV");
  c_cer->add_option("--config", cer.config, "key=value config file");
  c_cer->add_option("--method", cer.method,
                    "adp-multinomial, rdp-multinomial, adp-scores or rdp-scores");
  c_cer->add_option("--eta", cer.eta, "failure probability of the bounds");
  c_cer->add_option("--r-max", cer.r_max, "largest radius searched");
  c_cer->add_option("--train-size", cer.train_size,
                    "training-set size (r_max=auto and subset accounting)");
  c_cer->add_option("--ensemble", cer.ensemble,
                    "ensemble directory supplying the trained privacy parameters");
  c_cer->add_option("--threads", cer.threads, "worker threads (0 = all cores)");
  c_cer->add_option("--out", cer.out, "certificate CSV (default stdout)");
  c_cer->callback([&] { outcome = RunCertify(cer); });

  CurveArgs cur;
  CLI::App* c_cur = app.add_subcommand("curve", "Certified accuracy by radius");
  c_cur->add_option("--certs", cur.certs, "certificate CSV")->required();
  c_cur->add_option("--truth", cur.truth, "truth CSV sample_id,label")->required();
  c_cur->add_option("--out", cur.out, "curve CSV (default stdout)");
  c_cur->callback([&] { outcome = RunCurve(cur); });

  AttackArgs att;
  CLI::App* c_att = app.add_subcommand(
      "attack-check", "Brute-force flip check over all neighbors within a radius");
  c_att->add_option("--data", att.data, "training dataset CSV")->required();
  c_att->add_option("--pool", att.pool, "candidate insertions CSV");
  c_att->add_option("--radius", att.radius, "edit budget")->capture_default_str();
  c_att->add_option("--ops", att.ops, "comma list of insert, delete, modify")
      ->capture_default_str();
  c_att->add_option("--config", att.config, "key=value config file");
  c_att->add_option("--test", att.test, "test dataset CSV")->required();
  c_att->add_option("--sample", att.sample, "row index into --test")->required();
  c_att->add_option("--trials", att.trials, "instances trained per neighbor")
      ->capture_default_str();
  c_att->add_option("--certs", att.certs, "certificate CSV for the report");
  c_att->add_option("--seed", att.seed, "master seed");
  c_att->add_option("--threads", att.threads, "worker threads (0 = all cores)");
  c_att->add_option("--out", att.out, "flip report CSV (default stdout)");
  c_att->callback([&] { outcome = RunAttack(att); });

  PipelineArgs pip;
  CLI::App* c_pip = app.add_subcommand(
      "pipeline", "Train, infer, bound, certify and curve in one run");
  c_pip->add_option("--config", pip.config, "key=value config file");
  c_pip->add_option("--data", pip.data, "training dataset CSV")->required();
  c_pip->add_option("--test", pip.test, "test dataset CSV")->required();
  c_pip->add_option("--out-dir", pip.out_dir, "output directory")->required();
  c_pip->callback([&] { outcome = RunPipelineCommand(pip); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }
  if (outcome.code != 0) {
    std::cerr << "dpcert: " << outcome.message << "\n";
  }
  return outcome.code;
}

}  // namespace
}  // namespace dpcert

int main(int argc, char** argv) { return dpcert::Main(argc, argv); }
