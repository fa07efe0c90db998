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

#include "dpcert/config.h"

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpcert {
namespace {

using ::testing::HasSubstr;

TEST(ParseConfigTest, EmptyGivesDefaults) {
  const RunConfig c = *ParseConfig("");
  EXPECT_EQ(c.eta, 0.001);
  EXPECT_EQ(c.delta, 1e-5);
  EXPECT_TRUE(c.orders.empty());
  EXPECT_EQ(c.instances, 50);
  EXPECT_EQ(c.method, CertMethod::kRdpMultinomial);
  EXPECT_EQ(c.train.optimizer, Optimizer::kAdam);
  EXPECT_EQ(c.train.learning_rate, 0.01);
  EXPECT_EQ(c.train.architecture, Architecture::kLogistic);
  EXPECT_EQ(c.train.hidden_width, 32);
  EXPECT_FALSE(c.r_max.has_value());
  EXPECT_EQ(c.RadiusLimit(200), 200);
  EXPECT_TRUE(ParseConfig("# only a comment\n\n   \n")->orders.empty());
}

TEST(ParseConfigTest, ReadsEveryKey) {
  const RunConfig c = *ParseConfig(
      "q = 0.25  # sampling\n"
      "sigma=2\nsteps=30\nclip=0.5\neta=0.01\ndelta=1e-6\ninstances=7\n"
      "method=adp-scores\nscore_bound=bernstein\norders=2, 4,8.5\n"
      "subset_size=40\nseed=18446744073709551615\nr_max=12\n"
      "architecture=mlp\nhidden=16\noptimizer=sgd\nlr=0.2\nthreads=3\n");
  EXPECT_EQ(c.train.privacy.sampling_ratio, 0.25);
  EXPECT_EQ(c.train.privacy.noise_multiplier, 2.0);
  EXPECT_EQ(c.train.privacy.steps, 30);
  EXPECT_EQ(c.train.privacy.clip_norm, 0.5);
  EXPECT_EQ(c.eta, 0.01);
  EXPECT_EQ(c.delta, 1e-6);
  EXPECT_EQ(c.instances, 7);
  EXPECT_EQ(c.method, CertMethod::kAdpScores);
  EXPECT_EQ(c.score_bound, ScoreBound::kEmpiricalBernstein);
  EXPECT_THAT(c.orders, testing::ElementsAre(2.0, 4.0, 8.5));
  EXPECT_EQ(c.subset_size, 40);
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.r_max, 12);
  EXPECT_EQ(c.train.architecture, Architecture::kMlp);
  EXPECT_EQ(c.train.hidden_width, 16);
  EXPECT_EQ(c.train.optimizer, Optimizer::kSgd);
  EXPECT_EQ(c.train.learning_rate, 0.2);
  EXPECT_EQ(c.threads, 3);
}

TEST(ParseConfigTest, ErrorsNameTheKey) {
  EXPECT_THAT(ParseConfig("q=1.5").status().message(),
              HasSubstr("q must be in (0,1]"));
  EXPECT_THAT(ParseConfig("sigma=0").status().message(), HasSubstr("sigma"));
  EXPECT_THAT(ParseConfig("steps=abc").status().message(),
              HasSubstr("config key 'steps'"));
  EXPECT_THAT(ParseConfig("bogus=1").status().message(),
              HasSubstr("unknown key 'bogus'"));
  EXPECT_THAT(ParseConfig("q=0.1\nq=0.2").status().message(),
              HasSubstr("repeated key 'q'"));
  EXPECT_THAT(ParseConfig("q 0.1").status().message(),
              HasSubstr("line 1: expected key=value"));
  EXPECT_THAT(ParseConfig("orders=3,2").status().message(), HasSubstr("orders"));
  EXPECT_THAT(ParseConfig("eta=1").status().message(), HasSubstr("eta"));
  EXPECT_THAT(ParseConfig("method=magic").status().message(),
              HasSubstr("unknown method"));
  EXPECT_THAT(ParseConfig("r_max=-1").status().message(), HasSubstr("r_max"));
  EXPECT_THAT(ParseConfig("lr=inf").status().message(), HasSubstr("lr"));
}

TEST(SerializeConfigTest, RoundTrips) {
  const std::string text =
      "# comment\nsigma=2.5\nq=0.1\norders=1.5,2,3\nsubset_size=10\n"
      "delta=3e-7\nlr=0.001\n";
  const RunConfig parsed = *ParseConfig(text);
  const std::string normalized = SerializeConfig(parsed);
  EXPECT_EQ(*ParseConfig(normalized), parsed);
  EXPECT_EQ(SerializeConfig(*ParseConfig(normalized)), normalized);
  EXPECT_THAT(normalized, HasSubstr("q=0.1\n"));
  EXPECT_THAT(normalized, HasSubstr("delta=3e-07\n"));
  EXPECT_THAT(normalized, HasSubstr("r_max=auto\n"));
  EXPECT_EQ(*ParseConfig(SerializeConfig(DefaultRunConfig())),
            DefaultRunConfig());
}

TEST(FormatDoubleTest, ShortestExact) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) {
    EXPECT_EQ(*ParseDouble(FormatDouble(v)), v);
  }
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_FALSE(ParseDouble("1.5x").ok());
  EXPECT_FALSE(ParseDouble("").ok());
  EXPECT_FALSE(ParseInt("2.0").ok());
  EXPECT_FALSE(ParseUint("-1").ok());
}

}  // namespace
}  // namespace dpcert
