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

// Confidence bounds on ensemble inference. Votes (multinomial inference) get
// simultaneous Clopper-Pearson bounds; softmax scores (probability-score
// inference) get Hoeffding or empirical Bernstein intervals. In every case the
// failure probability eta is split evenly over the L labels.

#ifndef DPCERT_CONFIDENCE_H_
#define DPCERT_CONFIDENCE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dpcert {

// Per-instance class scores for one test sample: `instances` rows of
// `labels` softmax outputs, row-major.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(int64_t instances, int labels)
      : instances_(instances),
        labels_(labels),
        values_(static_cast<size_t>(instances) * labels, 0.0) {}

  int64_t instances() const { return instances_; }
  int labels() const { return labels_; }

  double& at(int64_t instance, int label) {
    return values_[static_cast<size_t>(instance) * labels_ + label];
  }
  double at(int64_t instance, int label) const {
    return values_[static_cast<size_t>(instance) * labels_ + label];
  }
  std::span<double> row(int64_t instance) {
    return {values_.data() + static_cast<size_t>(instance) * labels_,
            static_cast<size_t>(labels_)};
  }
  std::span<const double> row(int64_t instance) const {
    return {values_.data() + static_cast<size_t>(instance) * labels_,
            static_cast<size_t>(labels_)};
  }

  // Entries in [0, 1] and every row summing to 1 within 1e-6.
  absl::Status Validate() const;

 private:
  int64_t instances_ = 0;
  int labels_ = 0;
  std::vector<double> values_;
};

// Vote counts per test sample. Every row has `labels` entries summing to
// `instances`.
struct VoteTable {
  int labels = 0;
  int64_t instances = 0;
  std::vector<std::string> sample_ids;
  std::vector<std::vector<int64_t>> counts;

  absl::Status Validate() const;
};

// Score matrices per test sample.
struct ScoreTable {
  int labels = 0;
  int64_t instances = 0;
  std::vector<std::string> sample_ids;
  std::vector<ScoreMatrix> scores;

  absl::Status Validate() const;
};

struct ConfidenceBounds {
  int top_label = 0;
  double p_lower = 0.0;
  int rival_label = 1;
  double p_upper = 1.0;
  double eta = 0.0;
};

// Quantile of Beta(a, b) at probability p, by bisection on the regularized
// incomplete beta function to 1e-10.
double BetaQuantile(double p, double a, double b);

// One-sided Clopper-Pearson bounds at level 1 - alpha for `successes` out of
// `trials`.
double ClopperPearsonLower(int64_t successes, int64_t trials, double alpha);
double ClopperPearsonUpper(int64_t successes, int64_t trials, double alpha);

// Bounds for the two most voted labels (ties to the lower index):
// p_lower = CP lower bound of the top count and p_upper = CP upper bound of
// the runner-up, each at level eta / L.
absl::StatusOr<ConfidenceBounds> SimuEmBounds(std::span<const int64_t> counts,
                                              double eta);

// sqrt(ln(2L/eta) / (2P)).
double HoeffdingHalfWidth(int64_t instances, int labels, double eta);

// sqrt(2 V ln(2L/eta) / P) + 7 ln(2L/eta) / (3 (P - 1)) for sample variance V.
double EmpiricalBernsteinHalfWidth(double sample_variance, int64_t instances,
                                   int labels, double eta);

// Per-label intervals mean +/- half-width clamped to [0, 1]. The top label has
// the largest mean; the rival is the other label with the largest upper bound.
absl::StatusOr<ConfidenceBounds> HoeffdingBounds(const ScoreMatrix& scores,
                                                 double eta);
absl::StatusOr<ConfidenceBounds> EmpiricalBernsteinBounds(
    const ScoreMatrix& scores, double eta);

}  // namespace dpcert

#endif  // DPCERT_CONFIDENCE_H_
