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

// Outcomes-guarantee bound functions. A mechanism satisfying a guarantee K
// over datasets within distance r obeys Pr[M(D1) in S] <= K(Pr[M(D2) in S]),
// and the same holds for expected scores in [0, 1]. Two families exist:
//
//   ADP(eps, delta):  K(x) = e^eps * x + delta
//   RDP(eps, alpha):  K(x) = (e^eps * x)^((alpha - 1) / alpha)
//
// Both are strictly increasing on [0, 1], so a lower bound on the top label
// maps through K^-1 and an upper bound on a rival maps through K.

#ifndef DPCERT_OUTCOME_BOUNDS_H_
#define DPCERT_OUTCOME_BOUNDS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpcert/sgm_accountant.h"

namespace dpcert {

enum class BoundKind { kAdp, kRdp };

struct BoundFamily {
  BoundKind kind = BoundKind::kAdp;
  double epsilon = 0.0;  // may be +infinity: the guarantee is vacuous
  double delta = 0.0;    // ADP only, in [0, 1)
  double alpha = 2.0;    // RDP only, > 1

  static BoundFamily Adp(double epsilon, double delta) {
    return {BoundKind::kAdp, epsilon, delta, 2.0};
  }
  static BoundFamily Rdp(double epsilon, double alpha) {
    return {BoundKind::kRdp, epsilon, 0.0, alpha};
  }
  // K(x) = x: the guarantee relating a dataset to itself.
  static BoundFamily Identity() { return Adp(0.0, 0.0); }
};

absl::Status ValidateBoundFamily(const BoundFamily& family);

// K(x) for x in [0, 1].
absl::StatusOr<double> KForward(const BoundFamily& family, double x);

// K^-1(y) for y >= 0. The ADP inverse is clamped at 0 for y < delta.
absl::StatusOr<double> KInverse(const BoundFamily& family, double y);

struct CertCondition {
  double p_lower = 0.0;  // lower confidence bound on the top label
  double p_upper = 1.0;  // upper confidence bound on the strongest rival
  BoundFamily lower_bound_fn;
  BoundFamily upper_bound_fn;
};

// True iff K_lower^-1(p_lower) > K_upper(p_upper). Ties do not certify.
// Invalid conditions never certify.
bool CertifiedAt(const CertCondition& condition);

// Builds the RDP condition that uses, independently for each side, the order
// of `curve` most favourable to certification: alpha_l maximizes
// K^-1(p_lower) and alpha_u minimizes K(p_upper).
absl::StatusOr<CertCondition> BestConditionOverOrders(double p_lower,
                                                      double p_upper,
                                                      const RdpCurve& curve);

}  // namespace dpcert

#endif  // DPCERT_OUTCOME_BOUNDS_H_
