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

// Brute-force poisoning oracle for tiny datasets. It enumerates every
// dataset within a symmetric-difference budget, retrains a randomised
// ensemble on each and reports how often the ensemble prediction changes.
// It can refute a certificate, never prove one.
//
// Costs follow the symmetric difference: deleting an example costs 1,
// inserting a pool point costs 1, modifying an example (replace it by a pool
// point) costs 2.

#ifndef DPCERT_ATTACK_ORACLE_H_
#define DPCERT_ATTACK_ORACLE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpcert/dp_trainer.h"

namespace dpcert {

struct NeighborSpec {
  int64_t radius = 1;
  bool allow_insert = false;
  bool allow_delete = true;
  bool allow_modify = false;
  Dataset pool;  // insertion candidates, each usable once
  int64_t cap = 100000;
};

// Parses a comma-separated subset of {insert, delete, modify} into `spec`.
absl::Status ParseOps(std::string_view ops, NeighborSpec* spec);

// One dataset in the ball: training rows removed and pool rows added.
// Modifications appear as a deletion paired with an insertion.
struct Neighbor {
  std::vector<int64_t> deleted;   // ascending row indices of the data
  std::vector<int64_t> inserted;  // ascending row indices of the pool

  int64_t cost() const {
    return static_cast<int64_t>(deleted.size() + inserted.size());
  }
};

// Number of neighbors (including the dataset itself) of an n-row dataset.
absl::StatusOr<int64_t> CountNeighbors(int64_t n, const NeighborSpec& spec);

// Every neighbor in the ball, the unmodified dataset first. Fails if the
// count exceeds spec.cap.
absl::StatusOr<std::vector<Neighbor>> EnumerateNeighbors(
    const Dataset& data, const NeighborSpec& spec);

// The dataset described by `neighbor`: surviving rows in order, then the
// inserted pool rows.
absl::StatusOr<Dataset> ApplyEdit(const Dataset& data, const Dataset& pool,
                                  const Neighbor& neighbor);

enum class InferenceRule { kMultinomial, kScores };

struct FlipReport {
  std::string sample_id;
  std::optional<int64_t> certified_radius;
  int64_t tested_radius = 0;
  int64_t trials = 0;  // instances trained per neighbor
  int64_t flip_count = 0;
  int64_t neighbor_count = 0;
  int clean_label = 0;

  double flip_frequency() const;
  // Binomial standard error of the flip frequency over neighbors.
  double standard_error() const;
};

struct FlipCheckOptions {
  InferenceRule rule = InferenceRule::kMultinomial;
  uint64_t seed = 0;
  int threads = 0;
};

// Trains `trials` instances on the clean data and on every neighbor (the same
// instance seeds each time) and counts the neighbors whose ensemble
// prediction at x differs from the clean one. trials >= 30.
absl::StatusOr<FlipReport> EmpiricalFlipCheck(const Dataset& data,
                                              const NeighborSpec& spec,
                                              const TrainConfig& config,
                                              std::span<const double> x,
                                              int64_t trials,
                                              const FlipCheckOptions& options);

}  // namespace dpcert

#endif  // DPCERT_ATTACK_ORACLE_H_
