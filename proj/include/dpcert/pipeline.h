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

// End-to-end runs (train, infer, bound, certify, curve) and the manifests
// that make them reproducible.

#ifndef DPCERT_PIPELINE_H_
#define DPCERT_PIPELINE_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpcert/certifier.h"
#include "dpcert/config.h"

#define DPCERT_VERSION "0.1.0"

namespace dpcert {

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view bytes);

struct RunManifest {
  std::string config;  // SerializeConfig output
  std::vector<std::pair<std::string, std::string>> input_digests;  // path, hex
  std::string version = DPCERT_VERSION;
  std::string started_at;   // UTC, ISO 8601
  std::string finished_at;  // UTC, ISO 8601
};

// key=value text; config lines are prefixed with "config.".
std::string FormatManifest(const RunManifest& manifest);

// Reads each path and records its digest.
absl::StatusOr<std::vector<std::pair<std::string, std::string>>> DigestInputs(
    const std::vector<std::string>& paths);

std::string UtcNow();

// Prefixes the message with "[stage] ", keeping the code.
absl::Status StageError(std::string_view stage, const absl::Status& status);

struct PipelineResult {
  std::vector<Certificate> certs;
  CertifiedAccuracyCurve curve;
  RadiusSummary summary;
  RunManifest manifest;
};

// Trains on `train_path`, certifies every row of `test_path` and writes into
// `out_dir`: ensemble/, votes.csv, scores.csv, bounds.csv, certs.csv,
// truth.csv, curve.csv, summary.txt, config.txt and manifest.txt. Everything
// except the manifest timestamps is a deterministic function of the inputs.
absl::StatusOr<PipelineResult> RunPipeline(const RunConfig& config,
                                           const std::string& train_path,
                                           const std::string& test_path,
                                           const std::string& out_dir);

}  // namespace dpcert

#endif  // DPCERT_PIPELINE_H_
