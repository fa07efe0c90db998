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

#include "dpcert/confidence.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "boost/math/special_functions/beta.hpp"

namespace dpcert {
namespace {

constexpr double kBisectionWidth = 1e-12;

// Bracket [lo, hi] of width <= kBisectionWidth around the p-quantile of
// Beta(a, b).
std::pair<double, double> BetaQuantileBracket(double p, double a, double b) {
  double lo = 0.0, hi = 1.0;
  while (hi - lo > kBisectionWidth) {
    const double mid = 0.5 * (lo + hi);
    if (boost::math::ibeta(a, b, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

absl::Status ValidateEta(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("eta must be in (0,1), got ", eta));
  }
  return absl::OkStatus();
}

struct LabelIntervals {
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
};

ConfidenceBounds SelectTopAndRival(const LabelIntervals& iv, double eta) {
  const int labels = static_cast<int>(iv.mean.size());
  int top = 0;
  for (int l = 1; l < labels; ++l) {
    if (iv.mean[l] > iv.mean[top]) top = l;
  }
  int rival = top == 0 ? 1 : 0;
  for (int l = 0; l < labels; ++l) {
    if (l != top && iv.upper[l] > iv.upper[rival]) rival = l;
  }
  return {top, iv.lower[top], rival, iv.upper[rival], eta};
}

absl::StatusOr<LabelIntervals> ScoreIntervals(const ScoreMatrix& scores,
                                              double eta, bool bernstein) {
  if (absl::Status s = ValidateEta(eta); !s.ok()) return s;
  if (absl::Status s = scores.Validate(); !s.ok()) return s;
  const int64_t n = scores.instances();
  const int labels = scores.labels();
  if (n < (bernstein ? 2 : 1)) {
    return absl::InvalidArgumentError(absl::StrCat(
        bernstein ? "empirical Bernstein bounds need at least 2 instances"
                  : "Hoeffding bounds need at least 1 instance",
        ", got ", n));
  }
  if (labels < 2) {
    return absl::InvalidArgumentError("at least two labels are required");
  }
  LabelIntervals iv{std::vector<double>(labels, 0.0),
                    std::vector<double>(labels), std::vector<double>(labels)};
  for (int64_t i = 0; i < n; ++i) {
    for (int l = 0; l < labels; ++l) iv.mean[l] += scores.at(i, l);
  }
  for (int l = 0; l < labels; ++l) iv.mean[l] /= static_cast<double>(n);

  for (int l = 0; l < labels; ++l) {
    double half_width;
    if (bernstein) {
      double ss = 0.0;
      for (int64_t i = 0; i < n; ++i) {
        const double d = scores.at(i, l) - iv.mean[l];
        ss += d * d;
      }
      half_width = EmpiricalBernsteinHalfWidth(
          ss / static_cast<double>(n - 1), n, labels, eta);
    } else {
      half_width = HoeffdingHalfWidth(n, labels, eta);
    }
    iv.lower[l] = std::clamp(iv.mean[l] - half_width, 0.0, 1.0);
    iv.upper[l] = std::clamp(iv.mean[l] + half_width, 0.0, 1.0);
  }
  return iv;
}

}  // namespace

absl::Status ScoreMatrix::Validate() const {
  for (int64_t i = 0; i < instances_; ++i) {
    double sum = 0.0;
    for (int l = 0; l < labels_; ++l) {
      const double v = at(i, l);
      if (!(v >= 0.0 && v <= 1.0)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "score of instance ", i, " label ", l, " outside [0,1]: ", v));
      }
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-6) {
      return absl::InvalidArgumentError(
          absl::StrCat("scores of instance ", i, " sum to ", sum));
    }
  }
  return absl::OkStatus();
}

absl::Status VoteTable::Validate() const {
  if (sample_ids.size() != counts.size()) {
    return absl::InvalidArgumentError("sample ids and counts differ in size");
  }
  for (size_t s = 0; s < counts.size(); ++s) {
    if (static_cast<int>(counts[s].size()) != labels) {
      return absl::InvalidArgumentError(
          absl::StrCat("sample ", sample_ids[s], " has ", counts[s].size(),
                       " counts, expected ", labels));
    }
    int64_t total = 0;
    for (int64_t c : counts[s]) {
      if (c < 0) {
        return absl::InvalidArgumentError(
            absl::StrCat("sample ", sample_ids[s], " has a negative count"));
      }
      total += c;
    }
    if (total != instances) {
      return absl::InvalidArgumentError(
          absl::StrCat("sample ", sample_ids[s], " counts sum to ", total,
                       ", expected ", instances));
    }
  }
  return absl::OkStatus();
}

absl::Status ScoreTable::Validate() const {
  if (sample_ids.size() != scores.size()) {
    return absl::InvalidArgumentError("sample ids and scores differ in size");
  }
  for (size_t s = 0; s < scores.size(); ++s) {
    if (scores[s].labels() != labels || scores[s].instances() != instances) {
      return absl::InvalidArgumentError(
          absl::StrCat("sample ", sample_ids[s], " has a ",
                       scores[s].instances(), "x", scores[s].labels(),
                       " score matrix"));
    }
    if (absl::Status st = scores[s].Validate(); !st.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("sample ", sample_ids[s], ": ", st.message()));
    }
  }
  return absl::OkStatus();
}

double BetaQuantile(double p, double a, double b) {
  const auto [lo, hi] = BetaQuantileBracket(p, a, b);
  return 0.5 * (lo + hi);
}

double ClopperPearsonLower(int64_t successes, int64_t trials, double alpha) {
  if (successes <= 0) return 0.0;
  return BetaQuantileBracket(alpha, static_cast<double>(successes),
                             static_cast<double>(trials - successes + 1))
      .first;
}

double ClopperPearsonUpper(int64_t successes, int64_t trials, double alpha) {
  if (successes >= trials) return 1.0;
  return BetaQuantileBracket(1.0 - alpha, static_cast<double>(successes + 1),
                             static_cast<double>(trials - successes))
      .second;
}

absl::StatusOr<ConfidenceBounds> SimuEmBounds(std::span<const int64_t> counts,
                                              double eta) {
  if (absl::Status s = ValidateEta(eta); !s.ok()) return s;
  if (counts.size() < 2) {
    return absl::InvalidArgumentError("at least two labels are required");
  }
  int64_t total = 0;
  for (int64_t c : counts) {
    if (c < 0) return absl::InvalidArgumentError("negative vote count");
    total += c;
  }
  if (total == 0) {
    return absl::InvalidArgumentError("vote counts sum to zero");
  }
  const int labels = static_cast<int>(counts.size());
  int top = 0;
  for (int l = 1; l < labels; ++l) {
    if (counts[l] > counts[top]) top = l;
  }
  int rival = top == 0 ? 1 : 0;
  for (int l = 0; l < labels; ++l) {
    if (l != top && counts[l] > counts[rival]) rival = l;
  }
  const double per_label = eta / labels;
  return ConfidenceBounds{top, ClopperPearsonLower(counts[top], total, per_label),
                          rival,
                          ClopperPearsonUpper(counts[rival], total, per_label),
                          eta};
}

double HoeffdingHalfWidth(int64_t instances, int labels, double eta) {
  return std::sqrt(std::log(2.0 * labels / eta) /
                   (2.0 * static_cast<double>(instances)));
}

double EmpiricalBernsteinHalfWidth(double sample_variance, int64_t instances,
                                   int labels, double eta) {
  const double log_term = std::log(2.0 * labels / eta);
  const double n = static_cast<double>(instances);
  return std::sqrt(2.0 * sample_variance * log_term / n) +
         7.0 * log_term / (3.0 * (n - 1.0));
}

absl::StatusOr<ConfidenceBounds> HoeffdingBounds(const ScoreMatrix& scores,
                                                 double eta) {
  absl::StatusOr<LabelIntervals> iv = ScoreIntervals(scores, eta, false);
  if (!iv.ok()) return iv.status();
  return SelectTopAndRival(*iv, eta);
}

absl::StatusOr<ConfidenceBounds> EmpiricalBernsteinBounds(
    const ScoreMatrix& scores, double eta) {
  absl::StatusOr<LabelIntervals> iv = ScoreIntervals(scores, eta, true);
  if (!iv.ok()) return iv.status();
  return SelectTopAndRival(*iv, eta);
}

}  // namespace dpcert
