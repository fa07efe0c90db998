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

#include "dpcert/pipeline.h"

#include <unistd.h>

#include <filesystem>

#include "dpcert/io.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpcert {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;
using ::testing::StartsWith;

std::string Message(const absl::Status& s) { return std::string(s.message()); }

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = (fs::temp_directory_path() /
            ("dpcert_pipeline_test_" + std::to_string(::getpid())))
               .string();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    train_ = dir_ + "/train.csv";
    test_ = dir_ + "/test.csv";
    ASSERT_TRUE(WriteFile(train_, FormatDatasetCsv(
                                      *MakeGaussianMixture(200, 2, 2, 4.0, 1)))
                    .ok());
    ASSERT_TRUE(WriteFile(test_, FormatDatasetCsv(
                                     *MakeGaussianMixture(40, 2, 2, 4.0, 2)))
                    .ok());
    config_.train.privacy = {0.1, 2.0, 30, 1.0};
    config_.instances = 50;
    config_.seed = 5;
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string dir_, train_, test_;
  RunConfig config_;
};

TEST_F(PipelineTest, ProducesCurveAndIsByteReproducible) {
  const PipelineResult a = *RunPipeline(config_, train_, test_, dir_ + "/a");
  ASSERT_EQ(a.certs.size(), 40u);
  ASSERT_FALSE(a.curve.accuracy.empty());
  EXPECT_GT(a.curve.accuracy[0], 0.8);
  for (size_t i = 1; i < a.curve.accuracy.size(); ++i) {
    EXPECT_LE(a.curve.accuracy[i], a.curve.accuracy[i - 1]);
  }
  ASSERT_TRUE(a.summary.median.has_value());
  EXPECT_GT(*a.summary.median, 0);

  config_.threads = 3;  // results do not depend on the thread count
  ASSERT_TRUE(RunPipeline(config_, train_, test_, dir_ + "/b").ok());
  for (const char* f : {"votes.csv", "scores.csv", "bounds.csv", "certs.csv",
                        "truth.csv", "curve.csv", "summary.txt"}) {
    EXPECT_EQ(*ReadFile(dir_ + "/a/" + f), *ReadFile(dir_ + "/b/" + f)) << f;
  }
  EXPECT_EQ(*ReadFile(dir_ + "/a/ensemble/instance_00007.txt"),
            *ReadFile(dir_ + "/b/ensemble/instance_00007.txt"));

  // Frozen outputs of this exact run.
  EXPECT_EQ(*ReadFile(dir_ + "/a/curve.csv"),
            *ReadFile(DPCERT_GOLDEN_DIR "/micro_curve.csv"));
  EXPECT_EQ(*ReadFile(dir_ + "/a/certs.csv"),
            *ReadFile(DPCERT_GOLDEN_DIR "/micro_certs.csv"));

  const std::string manifest = *ReadFile(dir_ + "/a/manifest.txt");
  EXPECT_THAT(manifest, HasSubstr("version=" DPCERT_VERSION "\n"));
  EXPECT_THAT(manifest, HasSubstr("config.sigma=2\n"));
  EXPECT_THAT(manifest,
              HasSubstr("input=" + train_ + " sha256:" +
                        Sha256Hex(*ReadFile(train_))));
  config_.threads = 0;
  EXPECT_EQ(*ParseConfig(*ReadFile(dir_ + "/a/config.txt")), config_);
}

TEST_F(PipelineTest, SeedChangesVotes) {
  config_.instances = 10;
  ASSERT_TRUE(RunPipeline(config_, train_, test_, dir_ + "/a").ok());
  config_.seed = 6;
  ASSERT_TRUE(RunPipeline(config_, train_, test_, dir_ + "/b").ok());
  EXPECT_NE(*ReadFile(dir_ + "/a/scores.csv"), *ReadFile(dir_ + "/b/scores.csv"));
}

TEST_F(PipelineTest, DigestTracksInput) {
  config_.instances = 5;
  const PipelineResult a = *RunPipeline(config_, train_, test_, dir_ + "/a");
  std::string text = *ReadFile(test_);
  ASSERT_TRUE(WriteFile(test_, text + "1,0.5,0.5\r\n").ok());
  const PipelineResult b = *RunPipeline(config_, train_, test_, dir_ + "/b");
  EXPECT_EQ(a.manifest.input_digests[0], b.manifest.input_digests[0]);
  EXPECT_NE(a.manifest.input_digests[1].second, b.manifest.input_digests[1].second);
}

TEST_F(PipelineTest, ErrorsNameTheStage) {
  absl::StatusOr<PipelineResult> r =
      RunPipeline(config_, train_, dir_ + "/missing.csv", dir_ + "/a");
  EXPECT_THAT(Message(r.status()), StartsWith("[input]"));
  ASSERT_TRUE(WriteFile(test_, "label,f_0,f_1\n0,1,x\n").ok());
  r = RunPipeline(config_, train_, test_, dir_ + "/a");
  EXPECT_THAT(Message(r.status()), StartsWith("[input] " + test_ + ": line 2"));
  RunConfig bad = config_;
  bad.train.privacy.sampling_ratio = 0;
  EXPECT_THAT(Message(RunPipeline(bad, train_, test_, dir_ + "/a").status()),
              StartsWith("[config] q must be in (0,1]"));
  ASSERT_TRUE(WriteFile(test_, "label,f_0\n0,1\n").ok());
  EXPECT_THAT(RunPipeline(config_, train_, test_, dir_ + "/a").status().message(),
              HasSubstr("features"));
}

TEST(Sha256Test, KnownVector) {
  EXPECT_EQ(Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace dpcert
