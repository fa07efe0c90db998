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

#include "dpcert/certifier.h"

#include <algorithm>
#include <atomic>
#include <functional>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>
#include <utility>

#include "absl/strings/str_cat.h"
#include "dpcert/status_macros.h"

namespace dpcert {

struct RadiusEvaluator::Cache {
  struct Entry {
    RdpCurve curve;
    AdpGuarantee adp;
  };
  std::mutex mu;
  std::unordered_map<int64_t, std::shared_ptr<const Entry>> entries;
};

namespace {

// Runs fn(i) for i in [0, count) on up to `threads` workers.
void ParallelFor(size_t count, int threads,
                 const std::function<void(size_t)>& fn) {
  if (threads <= 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  const size_t workers = std::min<size_t>(threads, count);
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

absl::Status CheckRadiusArgs(const ConfidenceBounds& bounds, int64_t radius) {
  if (radius < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("radius must be >= 0, got ", radius));
  }
  if (!(bounds.p_lower >= 0.0 && bounds.p_lower <= 1.0 &&
        bounds.p_upper >= 0.0 && bounds.p_upper <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("confidence bounds must lie in [0,1], got ",
                     bounds.p_lower, ", ", bounds.p_upper));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<CertMethod> ParseCertMethod(std::string_view name) {
  for (CertMethod m : {CertMethod::kAdpMultinomial, CertMethod::kRdpMultinomial,
                       CertMethod::kAdpScores, CertMethod::kRdpScores}) {
    if (name == CertMethodName(m)) return m;
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown method '", std::string(name),
      "', expected adp-multinomial, rdp-multinomial, adp-scores or "
      "rdp-scores"));
}

std::string_view CertMethodName(CertMethod method) {
  switch (method) {
    case CertMethod::kAdpMultinomial:
      return "adp-multinomial";
    case CertMethod::kRdpMultinomial:
      return "rdp-multinomial";
    case CertMethod::kAdpScores:
      return "adp-scores";
    case CertMethod::kRdpScores:
      return "rdp-scores";
  }
  return "unknown";
}

bool UsesScores(CertMethod method) {
  return method == CertMethod::kAdpScores || method == CertMethod::kRdpScores;
}

bool UsesAdp(CertMethod method) {
  return method == CertMethod::kAdpMultinomial ||
         method == CertMethod::kAdpScores;
}

absl::StatusOr<ScoreBound> ParseScoreBound(std::string_view name) {
  if (name == "hoeffding") return ScoreBound::kHoeffding;
  if (name == "bernstein") return ScoreBound::kEmpiricalBernstein;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown score bound '", std::string(name), "', expected hoeffding or bernstein"));
}

std::string_view ScoreBoundName(ScoreBound bound) {
  return bound == ScoreBound::kHoeffding ? "hoeffding" : "bernstein";
}

RadiusEvaluator::RadiusEvaluator(const PrivacyParams& params, CertMethod method,
                                 double delta, std::vector<double> orders)
    : params_(params),
      method_(method),
      delta_(delta),
      orders_(std::move(orders)),
      cache_(std::make_unique<Cache>()) {}

RadiusEvaluator::RadiusEvaluator(RadiusEvaluator&&) noexcept = default;
RadiusEvaluator& RadiusEvaluator::operator=(RadiusEvaluator&&) noexcept =
    default;
RadiusEvaluator::~RadiusEvaluator() = default;

absl::StatusOr<RadiusEvaluator> RadiusEvaluator::Create(
    const PrivacyParams& params, CertMethod method, double delta,
    std::vector<double> orders) {
  DPCERT_RETURN_IF_ERROR(ValidatePrivacyParams(params));
  if (orders.empty()) orders = DefaultOrders();
  DPCERT_RETURN_IF_ERROR(ValidateOrders(orders));
  if (UsesAdp(method) && !(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must be in (0,1), got ", delta));
  }
  return RadiusEvaluator(params, method, delta, std::move(orders));
}

absl::StatusOr<CertCondition> RadiusEvaluator::ConditionAt(
    const ConfidenceBounds& bounds, int64_t radius) const {
  DPCERT_RETURN_IF_ERROR(CheckRadiusArgs(bounds, radius));
  if (radius == 0) {
    return absl::InvalidArgumentError("no group guarantee at radius 0");
  }
  std::shared_ptr<const Cache::Entry> entry;
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->entries.find(radius);
    if (it != cache_->entries.end()) entry = it->second;
  }
  if (entry == nullptr) {
    // Computed outside the lock; concurrent duplicates are identical.
    auto fresh = std::make_shared<Cache::Entry>();
    DPCERT_ASSIGN_OR_RETURN(fresh->curve,
                            GroupRdpCurve(params_, radius, orders_));
    if (UsesAdp(method_)) {
      DPCERT_ASSIGN_OR_RETURN(fresh->adp, RdpToAdp(fresh->curve, delta_));
    }
    std::lock_guard<std::mutex> lock(cache_->mu);
    entry = cache_->entries.emplace(radius, std::move(fresh)).first->second;
  }
  if (UsesAdp(method_)) {
    const BoundFamily family =
        BoundFamily::Adp(entry->adp.epsilon, entry->adp.delta);
    return CertCondition{bounds.p_lower, bounds.p_upper, family, family};
  }
  return BestConditionOverOrders(bounds.p_lower, bounds.p_upper, entry->curve);
}

absl::StatusOr<bool> RadiusEvaluator::Certifies(const ConfidenceBounds& bounds,
                                                int64_t radius) const {
  DPCERT_RETURN_IF_ERROR(CheckRadiusArgs(bounds, radius));
  if (radius == 0) {
    return CertifiedAt({bounds.p_lower, bounds.p_upper,
                        BoundFamily::Identity(), BoundFamily::Identity()});
  }
  DPCERT_ASSIGN_OR_RETURN(CertCondition condition, ConditionAt(bounds, radius));
  return CertifiedAt(condition);
}

absl::StatusOr<std::optional<int64_t>> CertifiedRadius(
    const ConfidenceBounds& bounds, const RadiusEvaluator& evaluator,
    int64_t r_max) {
  if (r_max < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("r_max must be >= 0, got ", r_max));
  }
  DPCERT_ASSIGN_OR_RETURN(bool at_zero, evaluator.Certifies(bounds, 0));
  if (!at_zero) return std::optional<int64_t>();

  DPCERT_ASSIGN_OR_RETURN(bool at_max, evaluator.Certifies(bounds, r_max));
  int64_t lo = 0;
  if (at_max) {
    lo = r_max;
  } else {
    int64_t hi = r_max;
    while (hi - lo > 1) {
      const int64_t mid = lo + (hi - lo) / 2;
      DPCERT_ASSIGN_OR_RETURN(bool ok, evaluator.Certifies(bounds, mid));
      (ok ? lo : hi) = mid;
    }
  }

  DPCERT_ASSIGN_OR_RETURN(bool recheck, evaluator.Certifies(bounds, lo));
  bool next = false;
  if (lo < r_max) {
    DPCERT_ASSIGN_OR_RETURN(next, evaluator.Certifies(bounds, lo + 1));
  }
  if (!recheck || next) {
    return absl::InternalError(
        absl::StrCat("radius predicate is not monotone around r=", lo));
  }
  return std::optional<int64_t>(lo);
}

Certificate CertifySample(std::string sample_id, const ConfidenceBounds& bounds,
                          const RadiusEvaluator& evaluator, int64_t r_max) {
  Certificate cert;
  cert.sample_id = std::move(sample_id);
  cert.predicted_label = bounds.top_label;
  cert.eta = bounds.eta;
  cert.method = evaluator.method();
  absl::StatusOr<std::optional<int64_t>> radius =
      CertifiedRadius(bounds, evaluator, r_max);
  if (radius.ok()) {
    cert.radius = *radius;
  } else {
    cert.status = radius.status();
  }
  return cert;
}

absl::StatusOr<std::vector<Certificate>> CertifyVotes(
    const VoteTable& votes, const RadiusEvaluator& evaluator, double eta,
    int64_t r_max, int threads) {
  if (UsesScores(evaluator.method())) {
    return absl::InvalidArgumentError(
        absl::StrCat("method ", std::string(CertMethodName(evaluator.method())),
                     " needs a score table, not votes"));
  }
  DPCERT_RETURN_IF_ERROR(votes.Validate());
  std::vector<Certificate> certs(votes.counts.size());
  ParallelFor(certs.size(), threads, [&](size_t i) {
    absl::StatusOr<ConfidenceBounds> bounds = SimuEmBounds(votes.counts[i], eta);
    if (!bounds.ok()) {
      certs[i].sample_id = votes.sample_ids[i];
      certs[i].eta = eta;
      certs[i].method = evaluator.method();
      certs[i].status = bounds.status();
      return;
    }
    certs[i] = CertifySample(votes.sample_ids[i], *bounds, evaluator, r_max);
  });
  return certs;
}

absl::StatusOr<std::vector<Certificate>> CertifyScores(
    const ScoreTable& scores, const RadiusEvaluator& evaluator,
    ScoreBound bound, double eta, int64_t r_max, int threads) {
  if (!UsesScores(evaluator.method())) {
    return absl::InvalidArgumentError(
        absl::StrCat("method ", std::string(CertMethodName(evaluator.method())),
                     " needs a vote table, not scores"));
  }
  DPCERT_RETURN_IF_ERROR(scores.Validate());
  std::vector<Certificate> certs(scores.scores.size());
  ParallelFor(certs.size(), threads, [&](size_t i) {
    absl::StatusOr<ConfidenceBounds> bounds =
        bound == ScoreBound::kHoeffding
            ? HoeffdingBounds(scores.scores[i], eta)
            : EmpiricalBernsteinBounds(scores.scores[i], eta);
    if (!bounds.ok()) {
      certs[i].sample_id = scores.sample_ids[i];
      certs[i].eta = eta;
      certs[i].method = evaluator.method();
      certs[i].status = bounds.status();
      return;
    }
    certs[i] = CertifySample(scores.sample_ids[i], *bounds, evaluator, r_max);
  });
  return certs;
}

namespace {

// Radii of correctly predicted, certified samples.
absl::StatusOr<std::vector<int64_t>> CorrectRadii(
    std::span<const Certificate> certs, const TruthMap& truth) {
  std::set<std::string_view> seen;
  std::vector<int64_t> radii;
  for (const Certificate& c : certs) {
    if (!seen.insert(c.sample_id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate certificate for sample ", c.sample_id));
    }
    auto it = truth.find(c.sample_id);
    if (it == truth.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("no ground-truth label for sample ", c.sample_id));
    }
    if (c.status.ok() && c.radius.has_value() &&
        c.predicted_label == it->second) {
      radii.push_back(*c.radius);
    }
  }
  return radii;
}

}  // namespace

absl::StatusOr<CertifiedAccuracyCurve> ComputeCertifiedAccuracy(
    std::span<const Certificate> certs, const TruthMap& truth) {
  if (certs.empty()) {
    return absl::InvalidArgumentError("no certificates");
  }
  DPCERT_ASSIGN_OR_RETURN(std::vector<int64_t> radii,
                          CorrectRadii(certs, truth));
  const int64_t top =
      radii.empty() ? 0 : *std::max_element(radii.begin(), radii.end()) + 1;
  // count_at[r] = number of correct samples with radius exactly r.
  std::vector<int64_t> count_at(top + 1, 0);
  for (int64_t r : radii) ++count_at[r];

  CertifiedAccuracyCurve curve;
  curve.radii.resize(top + 1);
  curve.accuracy.resize(top + 1);
  int64_t at_least = static_cast<int64_t>(radii.size());
  const double total = static_cast<double>(certs.size());
  for (int64_t r = 0; r <= top; ++r) {
    curve.radii[r] = r;
    curve.accuracy[r] = static_cast<double>(at_least) / total;
    at_least -= count_at[r];
  }
  return curve;
}

absl::StatusOr<RadiusSummary> SummarizeRadii(std::span<const Certificate> certs,
                                             const TruthMap& truth) {
  if (certs.empty()) {
    return absl::InvalidArgumentError("no certificates");
  }
  DPCERT_ASSIGN_OR_RETURN(std::vector<int64_t> radii,
                          CorrectRadii(certs, truth));
  RadiusSummary summary;
  if (radii.empty()) return summary;
  std::sort(radii.begin(), radii.end());
  summary.median = radii[(radii.size() - 1) / 2];
  summary.max = radii.back();
  return summary;
}

}  // namespace dpcert
