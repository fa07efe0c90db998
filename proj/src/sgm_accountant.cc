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

#include "dpcert/sgm_accountant.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "absl/strings/str_cat.h"
#include "boost/math/quadrature/gauss_kronrod.hpp"

namespace dpcert {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadratureTolerance = 1e-12;
// Integrand mass is confined to [min(0, b) - w, max(0, b) + w] with
// w = kTailWidths * sigma; beyond that the Gaussian tail is below e^-800.
constexpr double kTailWidths = 40.0;
constexpr double kChunkWidths = 2.0;
// Integrand values below e^-70 (about 4e-31) are dropped.
constexpr double kLogNegligible = -70.0;
// Largest alpha routed to the integer closed form.
constexpr double kMaxClosedFormOrder = 1e6;

double LogAddExp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

bool IsIntegerOrder(double alpha) {
  return alpha <= kMaxClosedFormOrder && alpha == std::floor(alpha);
}

absl::Status ValidateMechanism(double q, double sigma, double alpha) {
  if (!(q >= 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sampling ratio must be in [0,1], got ", q));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise multiplier must be positive, got ", sigma));
  }
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Renyi order must be finite and > 1, got ", alpha));
  }
  return absl::OkStatus();
}

// Computes ln E_{x~N(0,sigma^2)}[w(x)^power] with
// w(x) = (1-q) + q exp((2x - 1) / (2 sigma^2)), the likelihood ratio of the
// mixture against the base Gaussian. power = alpha gives the
// mixture||base direction, power = 1 - alpha the base||mixture one.
double LogLikelihoodRatioMoment(double q, double sigma, double power) {
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double two_var = 2.0 * sigma * sigma;
  const double log_keep = std::log1p(-q);
  const double log_q = std::log(q);
  const double log_norm = std::log(sigma * std::sqrt(2.0 * std::numbers::pi));
  auto log_ratio = [=](double x) {
    return LogAddExp(log_keep, log_q + (2.0 * x - 1.0) / two_var);
  };
  auto log_integrand = [=](double x) {
    return -x * x / two_var + power * log_ratio(x) - log_norm;
  };

  const double lo = std::min(0.0, power) - kTailWidths * sigma;
  const double hi = std::max(0.0, power) + kTailWidths * sigma;
  const int chunks = static_cast<int>(
      std::clamp(std::ceil((hi - lo) / (kChunkWidths * sigma)), 1.0, 4096.0));
  const double width = (hi - lo) / chunks;

  // Coarse per-chunk magnitude of the integrand (log scale), sampled at the
  // chunk's quarter points, and of the standard normal density for the
  // excess pass below.
  std::vector<double> chunk_peak(chunks, -kInf);
  std::vector<double> chunk_base(chunks, -kInf);
  double peak = -kInf;
  for (int c = 0; c < chunks; ++c) {
    for (int j = 0; j <= 4; ++j) {
      const double x = lo + (c + 0.25 * j) * width;
      chunk_peak[c] = std::max(chunk_peak[c], log_integrand(x));
      chunk_base[c] = std::max(chunk_base[c], -x * x / two_var - log_norm);
    }
    peak = std::max(peak, chunk_peak[c]);
  }
  if (!std::isfinite(peak)) return kInf;

  // Chunks whose integrand stays below the absolute floor contribute
  // nothing measurable; integrating them would only chase round-off.
  auto integrate = [&](auto&& f, auto&& keep) {
    double total = 0.0;
    for (int c = 0; c < chunks; ++c) {
      if (!keep(c)) continue;
      const double a = lo + c * width;
      total += Quadrature::integrate(f, a, a + width, 15, kQuadratureTolerance);
    }
    return total;
  };

  const double scaled = integrate(
      [&](double x) { return std::exp(log_integrand(x) - peak); },
      [&](int c) { return chunk_peak[c] - peak > kLogNegligible; });
  const double log_moment = peak + std::log(scaled);
  if (!std::isfinite(log_moment)) return kInf;
  if (log_moment > 1.0) return log_moment;

  // Small moments: integrate E[w^power] - 1 directly so that the result keeps
  // its relative accuracy when the divergence is close to zero.
  const double excess = integrate(
      [&](double x) {
        return std::exp(-x * x / two_var - log_norm) *
               std::expm1(power * log_ratio(x));
      },
      [&](int c) {
        return std::max(chunk_peak[c], chunk_base[c]) > kLogNegligible;
      });
  return std::log1p(excess);
}

}  // namespace

absl::Status ValidatePrivacyParams(const PrivacyParams& params) {
  if (!(params.sampling_ratio > 0.0 && params.sampling_ratio <= 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "q must be in (0,1], got ", params.sampling_ratio));
  }
  if (!(params.noise_multiplier > 0.0) ||
      !std::isfinite(params.noise_multiplier)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "sigma must be positive, got ", params.noise_multiplier));
  }
  if (params.steps < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("steps must be >= 1, got ", params.steps));
  }
  if (!(params.clip_norm > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("clip must be positive, got ", params.clip_norm));
  }
  return absl::OkStatus();
}

std::vector<double> DefaultOrders() {
  std::vector<double> orders = {1.25, 1.5, 1.75};
  for (int a = 2; a <= 64; ++a) orders.push_back(a);
  return orders;
}

absl::Status ValidateOrders(std::span<const double> orders) {
  for (size_t i = 0; i < orders.size(); ++i) {
    if (!(orders[i] > 1.0) || !std::isfinite(orders[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("orders must be finite and > 1, got ", orders[i]));
    }
    if (i > 0 && !(orders[i] > orders[i - 1])) {
      return absl::InvalidArgumentError("orders must be strictly increasing");
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<double> EffectiveSamplingRatio(double q, int64_t radius) {
  if (!(q > 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("q must be in (0,1], got ", q));
  }
  if (radius < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("radius must be >= 1, got ", radius));
  }
  if (q == 1.0) return 1.0;
  return -std::expm1(static_cast<double>(radius) * std::log1p(-q));
}

double LogMixtureMomentClosedForm(double q, double sigma, int64_t alpha) {
  if (q == 0.0) return 0.0;
  const double a = static_cast<double>(alpha);
  const double two_var = 2.0 * sigma * sigma;
  if (q == 1.0) return a * (a - 1.0) / two_var;
  const double log_keep = std::log1p(-q);
  const double log_q = std::log(q);
  const double log_gamma_top = std::lgamma(a + 1.0);

  std::vector<double> terms(alpha + 1);
  double peak = -kInf;
  for (int64_t k = 0; k <= alpha; ++k) {
    const double kd = static_cast<double>(k);
    terms[k] = log_gamma_top - std::lgamma(kd + 1.0) -
               std::lgamma(a - kd + 1.0) + (a - kd) * log_keep + kd * log_q +
               (kd * kd - kd) / two_var;
    peak = std::max(peak, terms[k]);
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - peak);
  return peak + std::log(sum);
}

absl::StatusOr<double> MixtureToBaseDivergenceByQuadrature(double q,
                                                           double sigma,
                                                           double alpha) {
  if (absl::Status s = ValidateMechanism(q, sigma, alpha); !s.ok()) return s;
  if (q == 0.0) return 0.0;
  if (q == 1.0) return alpha / (2.0 * sigma * sigma);
  const double log_moment = LogLikelihoodRatioMoment(q, sigma, alpha);
  if (!std::isfinite(log_moment)) return kInf;
  return std::max(0.0, log_moment / (alpha - 1.0));
}

absl::StatusOr<double> MixtureToBaseDivergence(double q, double sigma,
                                               double alpha) {
  if (absl::Status s = ValidateMechanism(q, sigma, alpha); !s.ok()) return s;
  if (q == 0.0) return 0.0;
  if (q == 1.0) return alpha / (2.0 * sigma * sigma);
  if (!IsIntegerOrder(alpha)) {
    return MixtureToBaseDivergenceByQuadrature(q, sigma, alpha);
  }
  const double log_moment =
      LogMixtureMomentClosedForm(q, sigma, static_cast<int64_t>(alpha));
  if (!std::isfinite(log_moment)) return kInf;
  return std::max(0.0, log_moment / (alpha - 1.0));
}

absl::StatusOr<double> BaseToMixtureDivergence(double q, double sigma,
                                               double alpha) {
  if (absl::Status s = ValidateMechanism(q, sigma, alpha); !s.ok()) return s;
  if (q == 0.0) return 0.0;
  if (q == 1.0) return alpha / (2.0 * sigma * sigma);
  const double log_moment = LogLikelihoodRatioMoment(q, sigma, 1.0 - alpha);
  if (!std::isfinite(log_moment)) return kInf;
  return std::max(0.0, log_moment / (alpha - 1.0));
}

absl::StatusOr<double> RdpStepEpsilon(double q, double sigma, double alpha) {
  if (absl::Status s = ValidateMechanism(q, sigma, alpha); !s.ok()) return s;
  if (q == 0.0) return 0.0;
  if (q == 1.0) return alpha / (2.0 * sigma * sigma);
  absl::StatusOr<double> forward = MixtureToBaseDivergence(q, sigma, alpha);
  if (!forward.ok()) return forward.status();
  absl::StatusOr<double> reverse = BaseToMixtureDivergence(q, sigma, alpha);
  if (!reverse.ok()) return reverse.status();
  const double eps = std::max(*forward, *reverse);
  return std::isfinite(eps) ? eps : kInf;
}

absl::StatusOr<RdpCurve> GroupRdpCurve(const PrivacyParams& params,
                                       int64_t radius,
                                       std::span<const double> orders) {
  if (absl::Status s = ValidatePrivacyParams(params); !s.ok()) return s;
  if (absl::Status s = ValidateOrders(orders); !s.ok()) return s;
  absl::StatusOr<double> effective =
      EffectiveSamplingRatio(params.sampling_ratio, radius);
  if (!effective.ok()) return effective.status();

  RdpCurve curve;
  curve.steps = params.steps;
  curve.orders.assign(orders.begin(), orders.end());
  curve.epsilons.reserve(orders.size());
  for (double alpha : orders) {
    absl::StatusOr<double> step =
        RdpStepEpsilon(*effective, params.noise_multiplier, alpha);
    if (!step.ok()) return step.status();
    const double total = *step * static_cast<double>(params.steps);
    curve.epsilons.push_back(std::isfinite(total) ? total : kInf);
  }
  return curve;
}

absl::StatusOr<int64_t> SubsetAdjustedSteps(int64_t steps, int64_t subset_size,
                                            int64_t full_size) {
  if (steps < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("steps must be >= 1, got ", steps));
  }
  if (subset_size < 1 || subset_size > full_size) {
    return absl::InvalidArgumentError(absl::StrCat(
        "subset size must be in [1, ", full_size, "], got ", subset_size));
  }
  return steps;
}

absl::StatusOr<PrivacyParams> AdjustForSubset(const PrivacyParams& params,
                                              int64_t subset_size,
                                              int64_t full_size) {
  if (absl::Status s = ValidatePrivacyParams(params); !s.ok()) return s;
  absl::StatusOr<int64_t> steps =
      SubsetAdjustedSteps(params.steps, subset_size, full_size);
  if (!steps.ok()) return steps.status();
  PrivacyParams adjusted = params;
  adjusted.steps = *steps;
  adjusted.sampling_ratio = params.sampling_ratio *
                            static_cast<double>(subset_size) /
                            static_cast<double>(full_size);
  return adjusted;
}

absl::StatusOr<AdpGuarantee> RdpToAdp(const RdpCurve& curve, double delta) {
  if (curve.empty() || curve.orders.size() != curve.epsilons.size()) {
    return absl::InvalidArgumentError("RDP curve is empty or malformed");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must be in (0,1), got ", delta));
  }
  const double log_inv_delta = -std::log(delta);
  AdpGuarantee best{kInf, delta, 0.0};
  for (size_t i = 0; i < curve.size(); ++i) {
    if (!std::isfinite(curve.epsilons[i])) continue;
    const double eps =
        curve.epsilons[i] + log_inv_delta / (curve.orders[i] - 1.0);
    if (eps < best.epsilon) best = {eps, delta, curve.orders[i]};
  }
  if (!std::isfinite(best.epsilon)) {
    return absl::FailedPreconditionError(
        "every order of the RDP curve is unbounded");
  }
  return best;
}

}  // namespace dpcert
