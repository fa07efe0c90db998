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

#include "dpcert/attack_oracle.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "dpcert/status_macros.h"

namespace dpcert {
namespace {

// Whether `deletions` and `insertions` are reachable with the allowed
// operations: unpaired deletions need `delete`, unpaired insertions need
// `insert`, and matched pairs need either both or `modify`.
bool Reachable(const NeighborSpec& spec, int64_t deletions,
               int64_t insertions) {
  if (spec.allow_insert && spec.allow_delete) return true;
  const int64_t paired = spec.allow_modify ? std::min(deletions, insertions) : 0;
  const int64_t extra_del = deletions - paired;
  const int64_t extra_ins = insertions - paired;
  return (extra_del == 0 || spec.allow_delete) &&
         (extra_ins == 0 || spec.allow_insert);
}

absl::Status ValidateSpec(const NeighborSpec& spec) {
  if (spec.radius < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("radius must be >= 0, got ", spec.radius));
  }
  if (!spec.allow_insert && !spec.allow_delete && !spec.allow_modify) {
    return absl::InvalidArgumentError("no edit operations allowed");
  }
  return absl::OkStatus();
}

// C(n, k) saturating at `limit` + 1.
int64_t Binomial(int64_t n, int64_t k, int64_t limit) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long double value = 1.0L;
  for (int64_t i = 1; i <= k; ++i) {
    value = value * static_cast<long double>(n - k + i) / i;
    if (value > static_cast<long double>(limit)) return limit + 1;
  }
  return static_cast<int64_t>(std::llround(value));
}

// Calls fn on each ascending k-subset of [0, n).
template <typename Fn>
void ForEachSubset(int64_t n, int64_t k, Fn&& fn) {
  std::vector<int64_t> idx(k);
  for (int64_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    int64_t i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int64_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

int ArgmaxIndex(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

absl::StatusOr<int> EnsemblePrediction(const Dataset& data,
                                       const TrainConfig& config,
                                       std::span<const double> x,
                                       int64_t trials,
                                       const FlipCheckOptions& options) {
  DPCERT_ASSIGN_OR_RETURN(
      Ensemble e, TrainEnsemble(data, config, trials, std::nullopt,
                                options.seed, options.threads));
  if (!e.failures.empty()) {
    return absl::InternalError(
        absl::StrCat("instance ", e.failures[0].first,
                     " failed: ", e.failures[0].second));
  }
  DPCERT_ASSIGN_OR_RETURN(Inference inf, Infer(e, x));
  if (options.rule == InferenceRule::kMultinomial) {
    return static_cast<int>(
        std::max_element(inf.counts.begin(), inf.counts.end()) -
        inf.counts.begin());
  }
  std::vector<double> mean(inf.scores.labels(), 0.0);
  for (int64_t i = 0; i < inf.scores.instances(); ++i) {
    for (int l = 0; l < inf.scores.labels(); ++l) mean[l] += inf.scores.at(i, l);
  }
  return ArgmaxIndex(mean);
}

}  // namespace

absl::Status ParseOps(std::string_view ops, NeighborSpec* spec) {
  spec->allow_insert = spec->allow_delete = spec->allow_modify = false;
  for (absl::string_view op :
       absl::StrSplit(absl::string_view(ops.data(), ops.size()), ',',
                      absl::SkipWhitespace())) {
    op = absl::StripAsciiWhitespace(op);
    if (op == "insert") {
      spec->allow_insert = true;
    } else if (op == "delete") {
      spec->allow_delete = true;
    } else if (op == "modify") {
      spec->allow_modify = true;
    } else {
      return absl::InvalidArgumentError(absl::StrCat(
          "unknown edit operation '", op, "', expected insert, delete or modify"));
    }
  }
  return ValidateSpec(*spec);
}

absl::StatusOr<int64_t> CountNeighbors(int64_t n, const NeighborSpec& spec) {
  DPCERT_RETURN_IF_ERROR(ValidateSpec(spec));
  const int64_t pool = spec.pool.n;
  int64_t total = 0;
  for (int64_t d = 0; d <= std::min(n, spec.radius); ++d) {
    for (int64_t i = 0; i <= std::min(pool, spec.radius - d); ++i) {
      if (!Reachable(spec, d, i)) continue;
      const int64_t a = Binomial(n, d, spec.cap);
      const int64_t b = Binomial(pool, i, spec.cap);
      if (a > spec.cap || b > spec.cap ||
          static_cast<long double>(a) * b + total > spec.cap) {
        return spec.cap + 1;
      }
      total += a * b;
    }
  }
  return total;
}

absl::StatusOr<std::vector<Neighbor>> EnumerateNeighbors(
    const Dataset& data, const NeighborSpec& spec) {
  DPCERT_ASSIGN_OR_RETURN(int64_t count, CountNeighbors(data.n, spec));
  if (count > spec.cap) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "more than ", spec.cap, " neighbors within radius ", spec.radius));
  }
  if ((spec.allow_insert || spec.allow_modify) && spec.pool.n > 0 &&
      spec.pool.m != data.m) {
    return absl::InvalidArgumentError(
        absl::StrCat("pool has ", spec.pool.m, " features, data has ", data.m));
  }
  std::vector<Neighbor> out;
  out.reserve(count);
  for (int64_t cost = 0; cost <= spec.radius; ++cost) {
    for (int64_t d = 0; d <= std::min(data.n, cost); ++d) {
      const int64_t i = cost - d;
      if (i > spec.pool.n || !Reachable(spec, d, i)) continue;
      ForEachSubset(data.n, d, [&](const std::vector<int64_t>& del) {
        ForEachSubset(spec.pool.n, i, [&](const std::vector<int64_t>& ins) {
          out.push_back({del, ins});
        });
      });
    }
  }
  return out;
}

absl::StatusOr<Dataset> ApplyEdit(const Dataset& data, const Dataset& pool,
                                  const Neighbor& neighbor) {
  std::set<int64_t> removed(neighbor.deleted.begin(), neighbor.deleted.end());
  if (removed.size() != neighbor.deleted.size()) {
    return absl::InvalidArgumentError("a row is deleted twice");
  }
  std::vector<int64_t> keep;
  for (int64_t i = 0; i < data.n; ++i) {
    if (!removed.contains(i)) keep.push_back(i);
  }
  if (static_cast<int64_t>(keep.size() + removed.size()) != data.n) {
    return absl::InvalidArgumentError("deleted row index out of range");
  }
  Dataset out = SelectRows(data, keep);
  for (int64_t j : neighbor.inserted) {
    if (j < 0 || j >= pool.n) {
      return absl::InvalidArgumentError(
          absl::StrCat("pool index ", j, " out of range"));
    }
    if (pool.m != data.m || pool.labels[j] >= data.num_labels) {
      return absl::InvalidArgumentError("pool row incompatible with data");
    }
    const auto r = pool.row(j);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(pool.labels[j]);
    ++out.n;
  }
  if (out.n == 0) {
    return absl::InvalidArgumentError("edit removes every example");
  }
  return out;
}

double FlipReport::flip_frequency() const {
  return neighbor_count == 0 ? 0.0
                             : static_cast<double>(flip_count) / neighbor_count;
}

double FlipReport::standard_error() const {
  if (neighbor_count == 0) return 0.0;
  const double f = flip_frequency();
  return std::sqrt(f * (1.0 - f) / static_cast<double>(neighbor_count));
}

absl::StatusOr<FlipReport> EmpiricalFlipCheck(const Dataset& data,
                                              const NeighborSpec& spec,
                                              const TrainConfig& config,
                                              std::span<const double> x,
                                              int64_t trials,
                                              const FlipCheckOptions& options) {
  if (trials < 30) {
    return absl::InvalidArgumentError(
        absl::StrCat("trials must be >= 30, got ", trials));
  }
  DPCERT_RETURN_IF_ERROR(data.Validate());
  DPCERT_ASSIGN_OR_RETURN(std::vector<Neighbor> neighbors,
                          EnumerateNeighbors(data, spec));
  FlipReport report;
  report.tested_radius = spec.radius;
  report.trials = trials;
  report.neighbor_count = static_cast<int64_t>(neighbors.size());
  DPCERT_ASSIGN_OR_RETURN(report.clean_label,
                          EnsemblePrediction(data, config, x, trials, options));
  for (const Neighbor& nb : neighbors) {
    DPCERT_ASSIGN_OR_RETURN(Dataset edited, ApplyEdit(data, spec.pool, nb));
    DPCERT_ASSIGN_OR_RETURN(
        int label, EnsemblePrediction(edited, config, x, trials, options));
    report.flip_count += label != report.clean_label;
  }
  return report;
}

}  // namespace dpcert
