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

// Test-only reference computations. None of these share code with the
// library: divergences are integrated from the raw Gaussian densities with a
// long-double composite Simpson rule, and Beta quantiles come from the
// binomial-tail identity for the incomplete beta function.

#ifndef DPCERT_TESTS_ORACLES_H_
#define DPCERT_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace dpcert::oracle {

inline long double LogNormalPdf(long double x, long double mean,
                                long double sigma) {
  const long double z = (x - mean) / sigma;
  return -0.5L * z * z - std::log(sigma) - 0.5L * std::log(2.0L * M_PIl);
}

inline long double LogMixturePdf(long double x, long double q,
                                 long double sigma) {
  const long double a = std::log1p(-q) + LogNormalPdf(x, 0.0L, sigma);
  const long double b = std::log(q) + LogNormalPdf(x, 1.0L, sigma);
  const long double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// ln of the integral of exp(log_f) over [lo, hi] by composite Simpson.
inline long double LogSimpson(const std::function<long double(long double)>&
                                  log_f,
                              long double lo, long double hi, int64_t n) {
  if (n % 2) ++n;
  const long double h = (hi - lo) / n;
  std::vector<long double> values(n + 1);
  long double peak = -INFINITY;
  for (int64_t i = 0; i <= n; ++i) {
    values[i] = log_f(lo + h * i);
    peak = std::max(peak, values[i]);
  }
  long double sum = 0.0L;
  for (int64_t i = 0; i <= n; ++i) {
    const long double w = (i == 0 || i == n) ? 1.0L : (i % 2 ? 4.0L : 2.0L);
    sum += w * std::exp(values[i] - peak);
  }
  return peak + std::log(sum * h / 3.0L);
}

// D_alpha(P || Q) = ln(int p^alpha q^(1-alpha)) / (alpha - 1), integrated over
// a window wide enough that the tails are below e^-800.
inline double RenyiDivergence(
    const std::function<long double(long double)>& log_p,
    const std::function<long double(long double)>& log_q, double alpha,
    long double lo, long double hi, long double sigma) {
  const long double a = alpha;
  auto log_f = [&](long double x) {
    return a * log_p(x) + (1.0L - a) * log_q(x);
  };
  const int64_t n = static_cast<int64_t>((hi - lo) / (sigma / 64.0L)) + 2;
  return static_cast<double>(LogSimpson(log_f, lo, hi, n) / (a - 1.0L));
}

// D_alpha((1-q) N(0,s^2) + q N(1,s^2) || N(0,s^2)).
inline double MixtureToBase(double q, double sigma, double alpha) {
  const long double s = sigma;
  return RenyiDivergence(
      [&](long double x) { return LogMixturePdf(x, q, s); },
      [&](long double x) { return LogNormalPdf(x, 0.0L, s); }, alpha,
      -40.0L * s, alpha + 40.0L * s, s);
}

// D_alpha(N(0,s^2) || (1-q) N(0,s^2) + q N(1,s^2)).
inline double BaseToMixture(double q, double sigma, double alpha) {
  const long double s = sigma;
  return RenyiDivergence(
      [&](long double x) { return LogNormalPdf(x, 0.0L, s); },
      [&](long double x) { return LogMixturePdf(x, q, s); }, alpha,
      1.0L - alpha - 40.0L * s, 40.0L * s, s);
}

// Regularized incomplete beta I_x(a, b) for integer a, b >= 1 through
// I_x(a, b) = P[Binomial(a + b - 1, x) >= a].
inline long double IncompleteBetaInteger(long double x, int64_t a, int64_t b) {
  if (x <= 0.0L) return 0.0L;
  if (x >= 1.0L) return 1.0L;
  const int64_t n = a + b - 1;
  long double total = 0.0L;
  for (int64_t k = a; k <= n; ++k) {
    const long double log_term = std::lgamma(n + 1.0L) -
                                 std::lgamma(k + 1.0L) -
                                 std::lgamma(n - k + 1.0L) +
                                 k * std::log(x) + (n - k) * std::log1p(-x);
    total += std::exp(log_term);
  }
  return std::min(1.0L, total);
}

// Quantile of Beta(a, b) at probability p by bisection to 1e-14.
inline double BetaQuantileInteger(double p, int64_t a, int64_t b) {
  long double lo = 0.0L, hi = 1.0L;
  while (hi - lo > 1e-14L) {
    const long double mid = 0.5L * (lo + hi);
    if (IncompleteBetaInteger(mid, a, b) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(0.5L * (lo + hi));
}

}  // namespace dpcert::oracle

#endif  // DPCERT_TESTS_ORACLES_H_
