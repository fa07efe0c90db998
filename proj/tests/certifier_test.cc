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
#include <numeric>
#include <random>
#include <set>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpcert {
namespace {

using ::testing::ElementsAre;
using ::testing::Optional;

RadiusEvaluator MakeEvaluator(CertMethod method, double q = 0.01,
                              double sigma = 1.0, int64_t steps = 1) {
  PrivacyParams params;
  params.sampling_ratio = q;
  params.noise_multiplier = sigma;
  params.steps = steps;
  return *RadiusEvaluator::Create(params, method, 1e-5, {});
}

ConfidenceBounds Bounds(double p_lower, double p_upper) {
  return {0, p_lower, 1, p_upper, 0.001};
}

// Largest certified r by checking every radius, independent of monotonicity.
std::optional<int64_t> LinearScan(const ConfidenceBounds& b,
                                  const RadiusEvaluator& ev, int64_t r_max) {
  if (!*ev.Certifies(b, 0)) return std::nullopt;
  int64_t best = 0;
  for (int64_t r = 1; r <= r_max; ++r) {
    if (*ev.Certifies(b, r)) best = r;
  }
  return best;
}

TEST(CertMethodTest, NamesRoundTrip) {
  for (CertMethod m : {CertMethod::kAdpMultinomial, CertMethod::kRdpMultinomial,
                       CertMethod::kAdpScores, CertMethod::kRdpScores}) {
    EXPECT_EQ(*ParseCertMethod(CertMethodName(m)), m);
  }
  EXPECT_FALSE(ParseCertMethod("rdp").ok());
  EXPECT_EQ(*ParseScoreBound("bernstein"), ScoreBound::kEmpiricalBernstein);
  EXPECT_FALSE(ParseScoreBound("chernoff").ok());
}

TEST(RadiusEvaluatorTest, RejectsBadConfiguration) {
  PrivacyParams bad;
  bad.sampling_ratio = 1.5;
  EXPECT_FALSE(
      RadiusEvaluator::Create(bad, CertMethod::kRdpMultinomial, 1e-5, {}).ok());
  EXPECT_FALSE(RadiusEvaluator::Create(PrivacyParams{},
                                       CertMethod::kAdpMultinomial, 0.0, {})
                   .ok());
  EXPECT_FALSE(RadiusEvaluator::Create(PrivacyParams{},
                                       CertMethod::kRdpMultinomial, 1e-5,
                                       {3.0, 2.0})
                   .ok());
}

TEST(RadiusEvaluatorTest, RadiusZeroComparesBoundsDirectly) {
  const RadiusEvaluator ev = MakeEvaluator(CertMethod::kRdpMultinomial);
  EXPECT_TRUE(*ev.Certifies(Bounds(0.51, 0.49), 0));
  EXPECT_FALSE(*ev.Certifies(Bounds(0.5, 0.5), 0));
  EXPECT_FALSE(ev.Certifies(Bounds(0.5, 0.5), -1).ok());
}

TEST(CertifiedRadiusTest, MaximalSeparationReachesRmax) {
  const RadiusEvaluator ev = MakeEvaluator(CertMethod::kRdpMultinomial);
  EXPECT_THAT(*CertifiedRadius(Bounds(1.0, 0.0), ev, 300), Optional(300));
  EXPECT_THAT(*CertifiedRadius(Bounds(1.0, 0.0), ev, 0), Optional(0));
}

TEST(CertifiedRadiusTest, OverlappingBoundsAbstain) {
  for (CertMethod m : {CertMethod::kAdpMultinomial, CertMethod::kRdpMultinomial}) {
    EXPECT_EQ(*CertifiedRadius(Bounds(0.4, 0.6), MakeEvaluator(m), 100),
              std::nullopt);
  }
  EXPECT_FALSE(CertifiedRadius(Bounds(0.9, 0.1),
                               MakeEvaluator(CertMethod::kRdpMultinomial), -1)
                   .ok());
}

TEST(CertifiedRadiusTest, BinarySearchMatchesLinearScan) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (CertMethod m : {CertMethod::kRdpMultinomial, CertMethod::kAdpMultinomial}) {
    const RadiusEvaluator ev = MakeEvaluator(m);
    std::set<int64_t> distinct;
    for (int i = 0; i < 150; ++i) {
      const double p_lower = 0.3 + 0.7 * unit(rng);
      const double p_upper = (1.0 - p_lower) * unit(rng);
      const ConfidenceBounds b = Bounds(p_lower, p_upper);
      const std::optional<int64_t> r = *CertifiedRadius(b, ev, 512);
      EXPECT_EQ(r, LinearScan(b, ev, 512))
          << CertMethodName(m) << " p_lower=" << p_lower
          << " p_upper=" << p_upper;
      if (r) distinct.insert(*r);
    }
    // The corpus exercises more than the trivial endpoints.
    EXPECT_GT(distinct.size(), 10u) << CertMethodName(m);
  }
}

TEST(CertifiedRadiusTest, ShrinksWithWeakerBounds) {
  const RadiusEvaluator ev = MakeEvaluator(CertMethod::kRdpMultinomial);
  std::optional<int64_t> previous = 512;
  for (double gap : {0.99, 0.9, 0.7, 0.5, 0.3, 0.1, 0.0}) {
    const std::optional<int64_t> r =
        *CertifiedRadius(Bounds(0.5 + gap / 2, 0.5 - gap / 2), ev, 512);
    if (previous) {
      if (r) EXPECT_LE(*r, *previous);
    } else {
      EXPECT_FALSE(r.has_value());
    }
    previous = r;
  }
  EXPECT_EQ(previous, std::nullopt);
}

TEST(CertifiedRadiusTest, MoreNoiseGivesLargerRadius) {
  const ConfidenceBounds b = Bounds(0.95, 0.04);
  const int64_t r1 =
      **CertifiedRadius(b, MakeEvaluator(CertMethod::kRdpMultinomial, 0.01, 1.0, 100),
                        512);
  const int64_t r3 =
      **CertifiedRadius(b, MakeEvaluator(CertMethod::kRdpMultinomial, 0.01, 3.0, 100),
                        512);
  EXPECT_GT(r3, r1);
  EXPECT_LT(r3, 512);
}

TEST(CertifiedRadiusTest, AdpNeverExceedsRdp) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double q : {0.01, 0.1}) {
    for (double sigma : {1.0, 2.0}) {
      for (int64_t steps : {1, 10}) {
        const RadiusEvaluator rdp =
            MakeEvaluator(CertMethod::kRdpMultinomial, q, sigma, steps);
        const RadiusEvaluator adp =
            MakeEvaluator(CertMethod::kAdpMultinomial, q, sigma, steps);
        for (int i = 0; i < 30; ++i) {
          const double p_lower = 0.5 + 0.5 * unit(rng);
          const ConfidenceBounds b = Bounds(p_lower, (1 - p_lower) * unit(rng));
          const auto r_rdp = *CertifiedRadius(b, rdp, 256);
          const auto r_adp = *CertifiedRadius(b, adp, 256);
          EXPECT_LE(r_adp.value_or(-1), r_rdp.value_or(-1));
        }
      }
    }
  }
}

VoteTable RandomVotes(int samples, std::mt19937_64& rng) {
  VoteTable t;
  t.labels = 3;
  t.instances = 200;
  for (int s = 0; s < samples; ++s) {
    t.sample_ids.push_back("s" + std::to_string(s));
    const int64_t a = static_cast<int64_t>(rng() % 201);
    const int64_t b = static_cast<int64_t>(rng() % (201 - a));
    t.counts.push_back({a, b, 200 - a - b});
  }
  return t;
}

TEST(CertifyVotesTest, EmptyAndSingleton) {
  const RadiusEvaluator ev = MakeEvaluator(CertMethod::kRdpMultinomial);
  VoteTable empty{2, 10, {}, {}};
  EXPECT_TRUE(CertifyVotes(empty, ev, 0.001, 100)->empty());

  VoteTable one{2, 100, {"x"}, {{95, 5}}};
  const std::vector<Certificate> certs = *CertifyVotes(one, ev, 0.001, 100);
  ASSERT_EQ(certs.size(), 1u);
  const Certificate direct =
      CertifySample("x", *SimuEmBounds(one.counts[0], 0.001), ev, 100);
  EXPECT_EQ(certs[0].sample_id, "x");
  EXPECT_EQ(certs[0].radius, direct.radius);
  EXPECT_EQ(certs[0].predicted_label, 0);
  EXPECT_EQ(certs[0].eta, 0.001);
  EXPECT_TRUE(certs[0].radius.has_value());
}

TEST(CertifyVotesTest, IndependentOfOrderAndThreads) {
  std::mt19937_64 rng(47);
  const VoteTable table = RandomVotes(100, rng);
  const RadiusEvaluator ev = MakeEvaluator(CertMethod::kRdpMultinomial, 0.05);
  const std::vector<Certificate> base = *CertifyVotes(table, ev, 0.001, 200);

  std::vector<size_t> perm(100);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  VoteTable shuffled{table.labels, table.instances, {}, {}};
  for (size_t i : perm) {
    shuffled.sample_ids.push_back(table.sample_ids[i]);
    shuffled.counts.push_back(table.counts[i]);
  }
  const RadiusEvaluator fresh = MakeEvaluator(CertMethod::kRdpMultinomial, 0.05);
  const std::vector<Certificate> permuted =
      *CertifyVotes(shuffled, fresh, 0.001, 200, /*threads=*/4);
  for (size_t k = 0; k < perm.size(); ++k) {
    EXPECT_EQ(permuted[k].sample_id, base[perm[k]].sample_id);
    EXPECT_EQ(permuted[k].radius, base[perm[k]].radius);
    EXPECT_EQ(permuted[k].predicted_label, base[perm[k]].predicted_label);
  }
}

TEST(CertifyVotesTest, PerSampleErrorsDoNotAbort) {
  const RadiusEvaluator ev = MakeEvaluator(CertMethod::kRdpMultinomial);
  VoteTable t{2, 0, {"a", "b"}, {{0, 0}, {0, 0}}};
  const std::vector<Certificate> certs = *CertifyVotes(t, ev, 0.001, 10);
  ASSERT_EQ(certs.size(), 2u);
  EXPECT_FALSE(certs[0].status.ok());
  EXPECT_EQ(certs[1].sample_id, "b");
}

TEST(CertifyVotesTest, MethodMustMatchTable) {
  VoteTable one{2, 100, {"x"}, {{95, 5}}};
  EXPECT_FALSE(
      CertifyVotes(one, MakeEvaluator(CertMethod::kRdpScores), 0.001, 10).ok());
  ScoreTable scores{2, 1, {"x"}, {ScoreMatrix(1, 2)}};
  EXPECT_FALSE(CertifyScores(scores, MakeEvaluator(CertMethod::kRdpMultinomial),
                             ScoreBound::kHoeffding, 0.001, 10)
                   .ok());
}

TEST(CertifyScoresTest, ConfidentScoresCertify) {
  ScoreMatrix m(1000, 2);
  for (int i = 0; i < 1000; ++i) {
    m.at(i, 0) = 0.97;
    m.at(i, 1) = 0.03;
  }
  ScoreTable t{2, 1000, {"x"}, {m}};
  for (ScoreBound bound : {ScoreBound::kHoeffding, ScoreBound::kEmpiricalBernstein}) {
    const std::vector<Certificate> certs = *CertifyScores(
        t, MakeEvaluator(CertMethod::kRdpScores), bound, 0.001, 512);
    ASSERT_TRUE(certs[0].status.ok());
    EXPECT_GT(certs[0].radius.value_or(0), 0) << ScoreBoundName(bound);
  }
}

Certificate Cert(std::string id, int label, std::optional<int64_t> radius) {
  Certificate c;
  c.sample_id = std::move(id);
  c.predicted_label = label;
  c.radius = radius;
  return c;
}

TEST(CertifiedAccuracyTest, StepFunction) {
  const std::vector<Certificate> certs = {Cert("a", 1, 5), Cert("b", 0, 5)};
  const TruthMap truth = {{"a", 1}, {"b", 0}};
  const CertifiedAccuracyCurve curve = *ComputeCertifiedAccuracy(certs, truth);
  EXPECT_THAT(curve.radii, ElementsAre(0, 1, 2, 3, 4, 5, 6));
  EXPECT_THAT(curve.accuracy, ElementsAre(1, 1, 1, 1, 1, 1, 0));
}

TEST(CertifiedAccuracyTest, HalfWrong) {
  const std::vector<Certificate> certs = {Cert("a", 1, 3), Cert("b", 1, 3)};
  const TruthMap truth = {{"a", 1}, {"b", 0}};
  const CertifiedAccuracyCurve curve = *ComputeCertifiedAccuracy(certs, truth);
  EXPECT_EQ(curve.accuracy[0], 0.5);
}

TEST(CertifiedAccuracyTest, MixedTable) {
  // correct r=2, correct r=0, wrong r=5, correct but abstaining.
  const std::vector<Certificate> certs = {Cert("a", 0, 2), Cert("b", 1, 0),
                                          Cert("c", 0, 5),
                                          Cert("d", 1, std::nullopt)};
  const TruthMap truth = {{"a", 0}, {"b", 1}, {"c", 1}, {"d", 1}};
  const CertifiedAccuracyCurve curve = *ComputeCertifiedAccuracy(certs, truth);
  EXPECT_THAT(curve.radii, ElementsAre(0, 1, 2, 3));
  EXPECT_THAT(curve.accuracy, ElementsAre(0.5, 0.25, 0.25, 0.0));
}

TEST(CertifiedAccuracyTest, AllAbstain) {
  const std::vector<Certificate> certs = {Cert("a", 0, std::nullopt)};
  const CertifiedAccuracyCurve curve =
      *ComputeCertifiedAccuracy(certs, {{"a", 0}});
  EXPECT_THAT(curve.accuracy, ElementsAre(0.0));
}

TEST(CertifiedAccuracyTest, Errors) {
  EXPECT_FALSE(ComputeCertifiedAccuracy({}, {}).ok());
  const std::vector<Certificate> certs = {Cert("a", 0, 1)};
  EXPECT_FALSE(ComputeCertifiedAccuracy(certs, {{"b", 0}}).ok());
  const std::vector<Certificate> dup = {Cert("a", 0, 1), Cert("a", 0, 1)};
  EXPECT_FALSE(ComputeCertifiedAccuracy(dup, {{"a", 0}}).ok());
}

TEST(CertifiedAccuracyTest, NonincreasingOnRandomSets) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Certificate> certs;
    TruthMap truth;
    for (int i = 0; i < 40; ++i) {
      const std::string id = std::to_string(i);
      const int64_t r = static_cast<int64_t>(rng() % 30) - 5;
      certs.push_back(Cert(id, static_cast<int>(rng() % 2),
                           r < 0 ? std::nullopt : std::optional<int64_t>(r)));
      truth[id] = static_cast<int>(rng() % 2);
    }
    const CertifiedAccuracyCurve curve = *ComputeCertifiedAccuracy(certs, truth);
    EXPECT_TRUE(std::is_sorted(curve.accuracy.rbegin(), curve.accuracy.rend()));
    EXPECT_EQ(curve.accuracy.back(), 0.0);
  }
}

TEST(SummarizeRadiiTest, MedianAndMax) {
  const TruthMap truth = {{"a", 0}, {"b", 0}, {"c", 0}, {"d", 0}, {"e", 0}};
  std::vector<Certificate> three = {Cert("a", 0, 3), Cert("b", 0, 1),
                                    Cert("c", 0, 2)};
  RadiusSummary s = *SummarizeRadii(three, truth);
  EXPECT_EQ(s.median, 2);
  EXPECT_EQ(s.max, 3);

  three.push_back(Cert("d", 0, 4));
  s = *SummarizeRadii(three, truth);
  EXPECT_EQ(s.median, 2);
  EXPECT_EQ(s.max, 4);

  // Wrong predictions and abstains are excluded.
  three.push_back(Cert("e", 1, 100));
  EXPECT_EQ(SummarizeRadii(three, truth)->max, 4);
}

TEST(SummarizeRadiiTest, NoneAndErrors) {
  const std::vector<Certificate> abstain = {Cert("a", 0, std::nullopt)};
  const RadiusSummary s = *SummarizeRadii(abstain, {{"a", 0}});
  EXPECT_FALSE(s.median.has_value());
  EXPECT_FALSE(s.max.has_value());
  EXPECT_FALSE(SummarizeRadii({}, {}).ok());
}

}  // namespace
}  // namespace dpcert
