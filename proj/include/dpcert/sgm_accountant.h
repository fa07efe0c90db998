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

// Renyi-DP accounting for the Sampled Gaussian Mechanism (SGM), including
// group privacy over datasets that differ in up to r examples.
//
// All divergences are for sensitivity 1: gradients are clipped to norm C and
// noised with standard deviation sigma * C, so sigma is the noise multiplier
// and the clip norm does not enter the accounting.

#ifndef DPCERT_SGM_ACCOUNTANT_H_
#define DPCERT_SGM_ACCOUNTANT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dpcert {

// Hyperparameters of SGM training.
struct PrivacyParams {
  double sampling_ratio = 0.1;    // q in (0, 1]
  double noise_multiplier = 1.0;  // sigma > 0
  int64_t steps = 1;              // number of noisy updates, >= 1
  double clip_norm = 1.0;         // per-example gradient clip C > 0

  friend bool operator==(const PrivacyParams&, const PrivacyParams&) = default;
};

absl::Status ValidatePrivacyParams(const PrivacyParams& params);

// Composed RDP guarantee: epsilons[i] bounds the order-orders[i] Renyi
// divergence after `steps` updates. An entry may be +infinity when the
// divergence is unbounded or overflows; such an order is unusable.
struct RdpCurve {
  std::vector<double> orders;
  std::vector<double> epsilons;
  int64_t steps = 0;

  bool empty() const { return orders.empty(); }
  size_t size() const { return orders.size(); }
};

// Integers 2..64 plus {1.25, 1.5, 1.75}, sorted ascending.
std::vector<double> DefaultOrders();

// Checks that orders are strictly increasing and all > 1.
absl::Status ValidateOrders(std::span<const double> orders);

// q' = 1 - (1 - q)^r, the probability that at least one of r differing
// examples lands in a Poisson-sampled batch.
absl::StatusOr<double> EffectiveSamplingRatio(double q, int64_t radius);

// log of E_{x~N(0,sigma^2)}[((1-q) + q exp((2x-1)/(2 sigma^2)))^alpha] for
// integer alpha >= 2, via the binomial expansion. This is
// (alpha - 1) * D_alpha(mixture || base).
double LogMixtureMomentClosedForm(double q, double sigma, int64_t alpha);

// D_alpha((1-q) N(0,s^2) + q N(1,s^2) || N(0,s^2)). Integer orders use the
// binomial closed form, fractional orders adaptive quadrature.
absl::StatusOr<double> MixtureToBaseDivergence(double q, double sigma,
                                               double alpha);

// D_alpha(N(0,s^2) || (1-q) N(0,s^2) + q N(1,s^2)), by adaptive quadrature.
absl::StatusOr<double> BaseToMixtureDivergence(double q, double sigma,
                                               double alpha);

// Quadrature route for D_alpha(mixture || base), valid for any alpha > 1.
// Exposed so that the integer closed form can be cross-checked.
absl::StatusOr<double> MixtureToBaseDivergenceByQuadrature(double q,
                                                           double sigma,
                                                           double alpha);

// Per-step RDP epsilon of the SGM at order alpha: the larger of the two
// divergence directions. q = 0 gives 0 and q = 1 gives alpha / (2 sigma^2).
// Returns +infinity if the divergence overflows.
absl::StatusOr<double> RdpStepEpsilon(double q, double sigma, double alpha);

// Composed curve for group radius r >= 1: steps * RdpStepEpsilon(q', sigma,
// alpha) with q' = EffectiveSamplingRatio(q, r). At r = 1 this is the
// ordinary SGM curve.
absl::StatusOr<RdpCurve> GroupRdpCurve(const PrivacyParams& params,
                                       int64_t radius,
                                       std::span<const double> orders);

// Accounting for an instance trained on a uniformly drawn sub-dataset of size
// subset_size out of full_size. Steps are unchanged; the per-step sampling
// ratio seen by any fixed example of the full dataset becomes
// q * subset_size / full_size.
absl::StatusOr<PrivacyParams> AdjustForSubset(const PrivacyParams& params,
                                              int64_t subset_size,
                                              int64_t full_size);

// Effective composition count under the sub-dataset model above. Always equal
// to `steps`; validates the sizes.
absl::StatusOr<int64_t> SubsetAdjustedSteps(int64_t steps, int64_t subset_size,
                                            int64_t full_size);

struct AdpGuarantee {
  double epsilon = 0.0;
  double delta = 0.0;
  double order = 0.0;  // RDP order attaining the minimum
};

// (epsilon, delta)-DP implied by an RDP curve:
// min over alpha of eps(alpha) + ln(1/delta) / (alpha - 1).
absl::StatusOr<AdpGuarantee> RdpToAdp(const RdpCurve& curve, double delta);

}  // namespace dpcert

#endif  // DPCERT_SGM_ACCOUNTANT_H_
