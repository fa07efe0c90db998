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

// Certified radii against data poisoning. For each test sample, confidence
// bounds on the top label and its strongest rival are pushed through the
// outcomes guarantee of the training mechanism at group radius r. The largest
// r where the top label provably stays on top is the certified radius.

#ifndef DPCERT_CERTIFIER_H_
#define DPCERT_CERTIFIER_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpcert/confidence.h"
#include "dpcert/outcome_bounds.h"
#include "dpcert/sgm_accountant.h"

namespace dpcert {

enum class CertMethod {
  kAdpMultinomial,
  kRdpMultinomial,
  kAdpScores,
  kRdpScores,
};

// "adp-multinomial", "rdp-multinomial", "adp-scores", "rdp-scores".
absl::StatusOr<CertMethod> ParseCertMethod(std::string_view name);
std::string_view CertMethodName(CertMethod method);
bool UsesScores(CertMethod method);
bool UsesAdp(CertMethod method);

enum class ScoreBound { kHoeffding, kEmpiricalBernstein };

// "hoeffding" or "bernstein".
absl::StatusOr<ScoreBound> ParseScoreBound(std::string_view name);
std::string_view ScoreBoundName(ScoreBound bound);

struct Certificate {
  std::string sample_id;
  int predicted_label = 0;
  std::optional<int64_t> radius;  // empty means ABSTAIN
  double eta = 0.0;
  CertMethod method = CertMethod::kRdpMultinomial;
  absl::Status status;  // non-OK if this sample could not be certified

  bool abstained() const { return !radius.has_value(); }
};

// Evaluates the radius predicate for one training configuration. Guarantees
// are computed once per radius and cached; the evaluator may be shared
// across threads.
class RadiusEvaluator {
 public:
  // `delta` is used by the ADP methods only. Empty `orders` selects
  // DefaultOrders().
  static absl::StatusOr<RadiusEvaluator> Create(const PrivacyParams& params,
                                                CertMethod method,
                                                double delta,
                                                std::vector<double> orders);

  RadiusEvaluator(RadiusEvaluator&&) noexcept;
  RadiusEvaluator& operator=(RadiusEvaluator&&) noexcept;
  ~RadiusEvaluator();

  CertMethod method() const { return method_; }
  const PrivacyParams& params() const { return params_; }

  // Whether `bounds` certify the top label at radius r >= 0. Radius 0
  // compares the bounds directly.
  absl::StatusOr<bool> Certifies(const ConfidenceBounds& bounds,
                                 int64_t radius) const;

  // Condition checked at radius r >= 1.
  absl::StatusOr<CertCondition> ConditionAt(const ConfidenceBounds& bounds,
                                            int64_t radius) const;

 private:
  struct Cache;

  RadiusEvaluator(const PrivacyParams& params, CertMethod method, double delta,
                  std::vector<double> orders);

  PrivacyParams params_;
  CertMethod method_;
  double delta_;
  std::vector<double> orders_;
  std::unique_ptr<Cache> cache_;
};

// Largest r in [0, r_max] at which the predicate holds, by binary search
// (invariant: lo certified, hi not). Empty if the sample abstains. The result
// is re-checked at r and r + 1.
absl::StatusOr<std::optional<int64_t>> CertifiedRadius(
    const ConfidenceBounds& bounds, const RadiusEvaluator& evaluator,
    int64_t r_max);

Certificate CertifySample(std::string sample_id, const ConfidenceBounds& bounds,
                          const RadiusEvaluator& evaluator, int64_t r_max);

// Per-sample certificates, in table order. Failures on one sample are stored
// in its certificate and do not stop the batch. threads <= 0 picks the
// hardware concurrency.
absl::StatusOr<std::vector<Certificate>> CertifyVotes(
    const VoteTable& votes, const RadiusEvaluator& evaluator, double eta,
    int64_t r_max, int threads = 1);
absl::StatusOr<std::vector<Certificate>> CertifyScores(
    const ScoreTable& scores, const RadiusEvaluator& evaluator,
    ScoreBound bound, double eta, int64_t r_max, int threads = 1);

// Ground-truth labels keyed by sample id.
using TruthMap = std::map<std::string, int, std::less<>>;

struct CertifiedAccuracyCurve {
  std::vector<int64_t> radii;    // 0, 1, ..., max certified radius + 1
  std::vector<double> accuracy;  // CA_r
};

// CA_r = |{i : predicted_i = truth_i and radius_i >= r}| / |certs|. Abstains
// and failed certificates count as wrong at every r.
absl::StatusOr<CertifiedAccuracyCurve> ComputeCertifiedAccuracy(
    std::span<const Certificate> certs, const TruthMap& truth);

// Lower median and maximum radius over correctly predicted, non-abstaining
// samples. Both empty when there are none.
struct RadiusSummary {
  std::optional<int64_t> median;
  std::optional<int64_t> max;
};

absl::StatusOr<RadiusSummary> SummarizeRadii(std::span<const Certificate> certs,
                                             const TruthMap& truth);

}  // namespace dpcert

#endif  // DPCERT_CERTIFIER_H_
