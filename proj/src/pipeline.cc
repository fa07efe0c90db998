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

#include "dpcert/pipeline.h"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <filesystem>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "dpcert/io.h"
#include "dpcert/status_macros.h"

namespace dpcert {
namespace {

namespace fs = std::filesystem;

#define DPCERT_STAGE(stage, expr)                                  \
  do {                                                             \
    if (absl::Status _st = (expr); !_st.ok()) {                    \
      return StageError(stage, _st);                               \
    }                                                              \
  } while (0)

std::string Join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

absl::Status WithPath(const std::string& path, const absl::Status& status) {
  return absl::Status(status.code(), absl::StrCat(path, ": ", status.message()));
}

}  // namespace

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(),
             nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string FormatManifest(const RunManifest& manifest) {
  std::string out = absl::StrCat("version=", manifest.version, "\n",
                                 "started_at=", manifest.started_at, "\n",
                                 "finished_at=", manifest.finished_at, "\n");
  for (const auto& [path, digest] : manifest.input_digests) {
    absl::StrAppend(&out, "input=", path, " sha256:", digest, "\n");
  }
  for (absl::string_view line :
       absl::StrSplit(manifest.config, '\n', absl::SkipEmpty())) {
    absl::StrAppend(&out, "config.", line, "\n");
  }
  return out;
}

absl::StatusOr<std::vector<std::pair<std::string, std::string>>> DigestInputs(
    const std::vector<std::string>& paths) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const std::string& p : paths) {
    DPCERT_ASSIGN_OR_RETURN(std::string bytes, ReadFile(p));
    out.emplace_back(p, Sha256Hex(bytes));
  }
  return out;
}

std::string UtcNow() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

absl::Status StageError(std::string_view stage, const absl::Status& status) {
  return absl::Status(status.code(), absl::StrCat("[", std::string(stage), "] ",
                                                  status.message()));
}

absl::StatusOr<PipelineResult> RunPipeline(const RunConfig& config,
                                           const std::string& train_path,
                                           const std::string& test_path,
                                           const std::string& out_dir) {
  PipelineResult result;
  result.manifest.started_at = UtcNow();
  result.manifest.config = SerializeConfig(config);
  DPCERT_STAGE("config", ValidateRunConfig(config));

  // input
  absl::StatusOr<std::vector<std::pair<std::string, std::string>>> digests =
      DigestInputs({train_path, test_path});
  DPCERT_STAGE("input", digests.status());
  result.manifest.input_digests = *digests;
  absl::StatusOr<std::string> train_text = ReadFile(train_path);
  DPCERT_STAGE("input", train_text.status());
  absl::StatusOr<std::string> test_text = ReadFile(test_path);
  DPCERT_STAGE("input", test_text.status());
  absl::StatusOr<Dataset> train = ParseDatasetCsv(*train_text);
  if (!train.ok()) {
    return StageError("input", WithPath(train_path, train.status()));
  }
  absl::StatusOr<Dataset> test = ParseDatasetCsv(*test_text);
  if (!test.ok()) {
    return StageError("input", WithPath(test_path, test.status()));
  }
  if (test->m != train->m) {
    return StageError("input", absl::InvalidArgumentError(absl::StrCat(
                                   "test data has ", test->m,
                                   " features, training data ", train->m)));
  }
  // Test labels may exceed the training labels only if the model can
  // represent them.
  train->num_labels = test->num_labels =
      std::max(train->num_labels, test->num_labels);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    return StageError("write", absl::PermissionDeniedError(absl::StrCat(
                                   "cannot create ", out_dir, ": ", ec.message())));
  }
  DPCERT_STAGE("write", WriteFile(Join(out_dir, "config.txt"),
                                  result.manifest.config));

  // train
  absl::StatusOr<Ensemble> ensemble =
      TrainEnsemble(*train, config.train, config.instances, config.subset_size,
                    config.seed, config.threads);
  DPCERT_STAGE("train", ensemble.status());
  DPCERT_STAGE("train", SaveEnsemble(*ensemble, Join(out_dir, "ensemble")));

  // infer
  VoteTable votes;
  ScoreTable scores;
  DPCERT_STAGE("infer", InferDataset(*ensemble, *test, &votes, &scores));
  DPCERT_STAGE("write", WriteFile(Join(out_dir, "votes.csv"),
                                  FormatVotesCsv(votes)));
  DPCERT_STAGE("write", WriteFile(Join(out_dir, "scores.csv"),
                                  FormatScoresCsv(scores)));

  // bound
  std::vector<BoundsRow> bounds;
  for (size_t i = 0; i < votes.sample_ids.size(); ++i) {
    absl::StatusOr<ConfidenceBounds> b;
    if (!UsesScores(config.method)) {
      b = SimuEmBounds(votes.counts[i], config.eta);
    } else if (config.score_bound == ScoreBound::kHoeffding) {
      b = HoeffdingBounds(scores.scores[i], config.eta);
    } else {
      b = EmpiricalBernsteinBounds(scores.scores[i], config.eta);
    }
    DPCERT_STAGE("bound", b.status());
    bounds.push_back({votes.sample_ids[i], *b});
  }
  DPCERT_STAGE("write", WriteFile(Join(out_dir, "bounds.csv"),
                                  FormatBoundsCsv(bounds)));

  // certify
  absl::StatusOr<PrivacyParams> accounted = ensemble->AccountedParams();
  DPCERT_STAGE("certify", accounted.status());
  absl::StatusOr<RadiusEvaluator> evaluator = RadiusEvaluator::Create(
      *accounted, config.method, config.delta, config.orders);
  DPCERT_STAGE("certify", evaluator.status());
  const int64_t r_max = config.RadiusLimit(train->n);
  for (const BoundsRow& row : bounds) {
    Certificate cert = CertifySample(row.sample_id, row.bounds, *evaluator, r_max);
    DPCERT_STAGE("certify", cert.status);
    result.certs.push_back(std::move(cert));
  }
  DPCERT_STAGE("write", WriteFile(Join(out_dir, "certs.csv"),
                                  FormatCertsCsv(result.certs)));

  // curve
  const std::string truth_csv = FormatTruthCsv(*test);
  DPCERT_STAGE("write", WriteFile(Join(out_dir, "truth.csv"), truth_csv));
  absl::StatusOr<TruthMap> truth = ParseTruthCsv(truth_csv);
  DPCERT_STAGE("curve", truth.status());
  absl::StatusOr<CertifiedAccuracyCurve> curve =
      ComputeCertifiedAccuracy(result.certs, *truth);
  DPCERT_STAGE("curve", curve.status());
  result.curve = *std::move(curve);
  absl::StatusOr<RadiusSummary> summary = SummarizeRadii(result.certs, *truth);
  DPCERT_STAGE("curve", summary.status());
  result.summary = *summary;
  DPCERT_STAGE("write", WriteFile(Join(out_dir, "curve.csv"),
                                  FormatCurveCsv(result.curve)));
  auto opt = [](const std::optional<int64_t>& v) {
    return v ? std::to_string(*v) : std::string("none");
  };
  DPCERT_STAGE("write",
               WriteFile(Join(out_dir, "summary.txt"),
                         absl::StrCat("median_radius=", opt(result.summary.median),
                                      "\nmax_radius=", opt(result.summary.max),
                                      "\nclean_certified_accuracy=",
                                      FormatDouble(result.curve.accuracy[0]),
                                      "\n")));

  result.manifest.finished_at = UtcNow();
  DPCERT_STAGE("write", WriteFile(Join(out_dir, "manifest.txt"),
                                  FormatManifest(result.manifest)));
  return result;
}

}  // namespace dpcert
