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

#include "dpcert/outcome_bounds.h"

#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"

namespace dpcert {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool IsProbability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

absl::Status ValidateBoundFamily(const BoundFamily& family) {
  if (!(family.epsilon >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be >= 0, got ", family.epsilon));
  }
  if (family.kind == BoundKind::kAdp) {
    if (!(family.delta >= 0.0 && family.delta < 1.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("delta must be in [0,1), got ", family.delta));
    }
  } else if (!(family.alpha > 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("alpha must be > 1, got ", family.alpha));
  }
  return absl::OkStatus();
}

absl::StatusOr<double> KForward(const BoundFamily& family, double x) {
  if (absl::Status s = ValidateBoundFamily(family); !s.ok()) return s;
  if (!IsProbability(x)) {
    return absl::InvalidArgumentError(
        absl::StrCat("K argument must be in [0,1], got ", x));
  }
  if (std::isinf(family.epsilon)) return kInf;
  if (family.kind == BoundKind::kAdp) {
    return std::exp(family.epsilon) * x + family.delta;
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(family.alpha)) return std::exp(family.epsilon) * x;
  const double power = (family.alpha - 1.0) / family.alpha;
  return std::exp(power * (family.epsilon + std::log(x)));
}

absl::StatusOr<double> KInverse(const BoundFamily& family, double y) {
  if (absl::Status s = ValidateBoundFamily(family); !s.ok()) return s;
  if (!(y >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("K^-1 argument must be >= 0, got ", y));
  }
  if (std::isinf(family.epsilon)) return 0.0;
  if (family.kind == BoundKind::kAdp) {
    if (y <= family.delta) return 0.0;
    return std::exp(-family.epsilon) * (y - family.delta);
  }
  if (y == 0.0) return 0.0;
  if (std::isinf(family.alpha)) return std::exp(-family.epsilon) * y;
  const double power = family.alpha / (family.alpha - 1.0);
  return std::exp(power * std::log(y) - family.epsilon);
}

bool CertifiedAt(const CertCondition& condition) {
  if (!IsProbability(condition.p_lower) || !IsProbability(condition.p_upper)) {
    return false;
  }
  absl::StatusOr<double> lower =
      KInverse(condition.lower_bound_fn, condition.p_lower);
  absl::StatusOr<double> upper =
      KForward(condition.upper_bound_fn, condition.p_upper);
  if (!lower.ok() || !upper.ok()) return false;
  return *lower > *upper;
}

absl::StatusOr<CertCondition> BestConditionOverOrders(double p_lower,
                                                      double p_upper,
                                                      const RdpCurve& curve) {
  if (curve.empty() || curve.orders.size() != curve.epsilons.size()) {
    return absl::InvalidArgumentError("RDP curve is empty or malformed");
  }
  if (!IsProbability(p_lower) || !IsProbability(p_upper)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "bounds must be probabilities, got ", p_lower, ", ", p_upper));
  }
  CertCondition best{p_lower, p_upper,
                     BoundFamily::Rdp(curve.epsilons[0], curve.orders[0]),
                     BoundFamily::Rdp(curve.epsilons[0], curve.orders[0])};
  double best_lower = -kInf;
  double best_upper = kInf;
  for (size_t i = 0; i < curve.size(); ++i) {
    const BoundFamily family =
        BoundFamily::Rdp(curve.epsilons[i], curve.orders[i]);
    absl::StatusOr<double> lower = KInverse(family, p_lower);
    if (!lower.ok()) return lower.status();
    absl::StatusOr<double> upper = KForward(family, p_upper);
    if (!upper.ok()) return upper.status();
    if (*lower > best_lower) {
      best_lower = *lower;
      best.lower_bound_fn = family;
    }
    if (*upper < best_upper) {
      best_upper = *upper;
      best.upper_bound_fn = family;
    }
  }
  return best;
}

}  // namespace dpcert
