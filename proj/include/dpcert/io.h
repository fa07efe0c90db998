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

// Readers and writers for every file the tool exchanges. Tables are
// RFC 4180 CSV with a header row and CRLF line endings; readers also accept
// LF and report malformed input with its line number.
//
//   dataset   label,f_0,...,f_{m-1}
//   votes     sample_id,count_0,...,count_{L-1}
//   scores    sample_id,instance_id,score_0,...,score_{L-1}
//   bounds    sample_id,top_label,p_lower,rival_label,p_upper
//   certs     sample_id,predicted,radius,abstain
//   curve     radius,certified_accuracy
//   truth     sample_id,label
//   flips     sample_id,certified_radius,tested_radius,trials,flip_count,
//             neighbor_count,clean_label
//
// An ensemble is a directory holding manifest.txt (key=value) and one
// instance_NNNNN.txt per model: a `seed=` line, then one parameter per line.

#ifndef DPCERT_IO_H_
#define DPCERT_IO_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpcert/attack_oracle.h"
#include "dpcert/certifier.h"
#include "dpcert/confidence.h"
#include "dpcert/dp_trainer.h"

namespace dpcert {

using CsvRow = std::vector<std::string>;

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;
  std::vector<int> line_numbers;  // source line of each row, 1-based
};

// Parses RFC 4180 text. Every record must have as many fields as the header.
absl::StatusOr<CsvTable> ParseCsv(std::string_view text);
std::string FormatCsv(const CsvTable& table);

absl::StatusOr<std::string> ReadFile(const std::string& path);
// Writes through a temporary file and renames it into place.
absl::Status WriteFile(const std::string& path, std::string_view contents);

absl::StatusOr<Dataset> ParseDatasetCsv(std::string_view text);
std::string FormatDatasetCsv(const Dataset& data);

absl::StatusOr<VoteTable> ParseVotesCsv(std::string_view text);
std::string FormatVotesCsv(const VoteTable& votes);

absl::StatusOr<ScoreTable> ParseScoresCsv(std::string_view text);
std::string FormatScoresCsv(const ScoreTable& scores);

struct BoundsRow {
  std::string sample_id;
  ConfidenceBounds bounds;
};
std::string FormatBoundsCsv(const std::vector<BoundsRow>& rows);

// Certificates carry eta and method from the caller; the file does not.
absl::StatusOr<std::vector<Certificate>> ParseCertsCsv(std::string_view text);
std::string FormatCertsCsv(const std::vector<Certificate>& certs);

std::string FormatCurveCsv(const CertifiedAccuracyCurve& curve);

absl::StatusOr<TruthMap> ParseTruthCsv(std::string_view text);
// Truth for `test`, keyed by row index as InferDataset assigns ids.
std::string FormatTruthCsv(const Dataset& test);

std::string FormatFlipCsv(const std::vector<FlipReport>& reports);

absl::Status SaveEnsemble(const Ensemble& ensemble, const std::string& dir);
absl::StatusOr<Ensemble> LoadEnsemble(const std::string& dir);

}  // namespace dpcert

#endif  // DPCERT_IO_H_
