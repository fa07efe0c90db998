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

// Run configuration as plain `key=value` text. Blank lines and `#` comments
// are ignored; unknown or repeated keys are errors. Keys and defaults:
//
//   q=0.1  sigma=1  steps=1  clip=1  eta=0.001  delta=1e-05
//   instances=50  method=rdp-multinomial  score_bound=hoeffding
//   orders=default  subset_size=none  seed=0  r_max=auto
//   architecture=logistic  hidden=32  optimizer=adam  lr=0.01  threads=0
//
// r_max=auto means the training-set size. threads=0 uses every core and
// never changes results.

#ifndef DPCERT_CONFIG_H_
#define DPCERT_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpcert/certifier.h"
#include "dpcert/dp_trainer.h"

namespace dpcert {

struct RunConfig {
  TrainConfig train;
  double eta = 0.001;
  double delta = 1e-5;
  int64_t instances = 50;
  CertMethod method = CertMethod::kRdpMultinomial;
  ScoreBound score_bound = ScoreBound::kHoeffding;
  std::vector<double> orders;  // empty: the default grid
  std::optional<int64_t> subset_size;
  uint64_t seed = 0;
  std::optional<int64_t> r_max;  // empty: training-set size
  int threads = 0;

  // r_max, or `train_size` when unset.
  int64_t RadiusLimit(int64_t train_size) const {
    return r_max.value_or(train_size);
  }
};

RunConfig DefaultRunConfig();

absl::Status ValidateRunConfig(const RunConfig& config);

absl::StatusOr<RunConfig> ParseConfig(std::string_view text);

// Every key in canonical order, one per line. Numbers use the shortest
// representation that parses back exactly.
std::string SerializeConfig(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

// Shortest round-trip decimal form of a double.
std::string FormatDouble(double value);

// Strict numeric parsing of a whole token.
absl::StatusOr<double> ParseDouble(std::string_view text);
absl::StatusOr<int64_t> ParseInt(std::string_view text);
absl::StatusOr<uint64_t> ParseUint(std::string_view text);

}  // namespace dpcert

#endif  // DPCERT_CONFIG_H_
