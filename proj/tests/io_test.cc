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

#include "dpcert/io.h"

#include <unistd.h>

#include <filesystem>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpcert {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

std::string TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("dpcert_io_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

TEST(CsvTest, ParsesQuotedFieldsAndLineEndings) {
  const CsvTable t =
      *ParseCsv("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\n\"multi\nline\",\n");
  EXPECT_THAT(t.header, ElementsAre("a", "b"));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_THAT(t.rows[0], ElementsAre("x,1", "say \"hi\""));
  EXPECT_THAT(t.rows[1], ElementsAre("multi\nline", ""));
  EXPECT_THAT(t.line_numbers, ElementsAre(2, 3));
}

TEST(CsvTest, RejectsMalformedRowsWithLineNumbers) {
  EXPECT_THAT(ParseCsv("a,b\n1,2\n3\n").status().message(),
              HasSubstr("line 3: expected 2 fields, got 1"));
  EXPECT_THAT(ParseCsv("a\n\"open\n").status().message(),
              HasSubstr("line 2: unterminated"));
  EXPECT_THAT(ParseCsv("a\n\"x\"y\n").status().message(),
              HasSubstr("line 2: unexpected character"));
  EXPECT_THAT(ParseCsv("a\nx\"y\n").status().message(),
              HasSubstr("line 2: quote inside"));
  EXPECT_FALSE(ParseCsv("").ok());
}

TEST(CsvTest, FormatRoundTrips) {
  CsvTable t;
  t.header = {"id", "text"};
  t.rows = {{"1", "plain"}, {"2", "has,comma"}, {"3", "q\"uote"}, {"4", "a\nb"}};
  const std::string text = FormatCsv(t);
  EXPECT_THAT(text, HasSubstr("id,text\r\n1,plain\r\n2,\"has,comma\"\r\n"));
  const CsvTable back = *ParseCsv(text);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
}

TEST(DatasetCsvTest, RoundTripAndErrors) {
  const Dataset d{3, 2, 2, {0.5, -1, 2, 3.25, 1e-9, 0}, {0, 1, 1}};
  const Dataset back = *ParseDatasetCsv(FormatDatasetCsv(d));
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.num_labels, 2);
  EXPECT_THAT(ParseDatasetCsv("label,f_0\n0,1\n1,abc\n").status().message(),
              HasSubstr("line 3: column 'f_0'"));
  EXPECT_THAT(ParseDatasetCsv("y,f_0\n0,1\n").status().message(),
              HasSubstr("expected header"));
  EXPECT_THAT(ParseDatasetCsv("label,f_0\n-1,1\n").status().message(),
              HasSubstr("line 2"));
}

TEST(VotesCsvTest, RoundTripAndConsistency) {
  const VoteTable v{3, 10, {"a", "b"}, {{7, 2, 1}, {0, 0, 10}}};
  const VoteTable back = *ParseVotesCsv(FormatVotesCsv(v));
  EXPECT_EQ(back.sample_ids, v.sample_ids);
  EXPECT_EQ(back.counts, v.counts);
  EXPECT_EQ(back.instances, 10);
  EXPECT_THAT(
      ParseVotesCsv("sample_id,count_0,count_1\na,5,5\nb,5,4\n").status().message(),
      HasSubstr("line 3"));
  EXPECT_FALSE(ParseVotesCsv("sample_id,count_1,count_0\na,5,5\n").ok());
}

TEST(ScoresCsvTest, RoundTripAndGrouping) {
  ScoreMatrix m(2, 2);
  m.at(0, 0) = 0.25;
  m.at(0, 1) = 0.75;
  m.at(1, 0) = 1.0;
  m.at(1, 1) = 0.0;
  const ScoreTable s{2, 2, {"x", "y"}, {m, m}};
  const ScoreTable back = *ParseScoresCsv(FormatScoresCsv(s));
  EXPECT_EQ(back.sample_ids, s.sample_ids);
  EXPECT_EQ(back.instances, 2);
  EXPECT_EQ(back.scores[1].at(0, 1), 0.75);
  EXPECT_THAT(ParseScoresCsv("sample_id,instance_id,score_0,score_1\n"
                             "x,0,0.5,0.5\nx,2,0.5,0.5\n")
                  .status()
                  .message(),
              HasSubstr("line 3: expected instance_id 1"));
  EXPECT_FALSE(ParseScoresCsv("sample_id,instance_id,score_0,score_1\n"
                              "x,0,0.5,0.5\ny,0,0.5,0.5\nx,0,0.5,0.5\n")
                   .ok());
}

TEST(CertsCsvTest, RoundTrip) {
  std::vector<Certificate> certs(3);
  certs[0].sample_id = "a";
  certs[0].radius = 4;
  certs[1].sample_id = "b";
  certs[1].predicted_label = 1;
  certs[2].sample_id = "c";
  certs[2].radius = 2;
  certs[2].status = absl::InternalError("failed");
  const std::string text = FormatCertsCsv(certs);
  EXPECT_EQ(text,
            "sample_id,predicted,radius,abstain\r\na,0,4,0\r\nb,1,,1\r\n"
            "c,0,,1\r\n");
  const std::vector<Certificate> back = *ParseCertsCsv(text);
  EXPECT_EQ(back[0].radius, 4);
  EXPECT_FALSE(back[1].radius.has_value());
  EXPECT_EQ(back[1].predicted_label, 1);
  EXPECT_FALSE(ParseCertsCsv("sample_id,predicted,radius,abstain\na,0,3,1\n").ok());
  EXPECT_FALSE(ParseCertsCsv("sample_id,predicted,radius,abstain\na,0,3,2\n").ok());
}

TEST(CurveAndTruthCsvTest, Format) {
  CertifiedAccuracyCurve curve{{0, 1, 2}, {0.5, 0.25, 0.0}};
  EXPECT_EQ(FormatCurveCsv(curve),
            "radius,certified_accuracy\r\n0,0.5\r\n1,0.25\r\n2,0\r\n");
  const Dataset test{2, 1, 2, {0.0, 1.0}, {1, 0}};
  const TruthMap truth = *ParseTruthCsv(FormatTruthCsv(test));
  EXPECT_EQ(truth.at("0"), 1);
  EXPECT_EQ(truth.at("1"), 0);
  EXPECT_FALSE(ParseTruthCsv("sample_id,label\na,1\na,0\n").ok());
}

TEST(EnsembleIoTest, SaveLoadRoundTrip) {
  const Dataset d = *MakeGaussianMixture(40, 3, 2, 3.0, 1);
  TrainConfig c;
  c.privacy = {0.2, 1.5, 5, 1.0};
  c.architecture = Architecture::kMlp;
  c.hidden_width = 4;
  const Ensemble e = *TrainEnsemble(d, c, 3, 20, 77);
  const std::string dir = TempDir("ensemble");
  ASSERT_TRUE(SaveEnsemble(e, dir).ok());
  const Ensemble back = *LoadEnsemble(dir);
  ASSERT_EQ(back.instances.size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.instances[i].parameters, e.instances[i].parameters);
    EXPECT_EQ(back.instances[i].seed, e.instances[i].seed);
  }
  EXPECT_EQ(back.config.privacy, c.privacy);
  EXPECT_EQ(back.subset_size, 20);
  EXPECT_EQ(back.train_size, 40);
  EXPECT_EQ(*back.AccountedParams(), *e.AccountedParams());
  const std::string manifest = *ReadFile(dir + "/manifest.txt");
  EXPECT_THAT(manifest, HasSubstr("noise=added_to_clipped_sum"));
  EXPECT_THAT(manifest, HasSubstr("architecture=mlp\n"));
  EXPECT_FALSE(LoadEnsemble(dir + "/missing").ok());
}

TEST(FileTest, ReadWrite) {
  const std::string dir = TempDir("file");
  ASSERT_TRUE(WriteFile(dir + "/x.txt", "abc").ok());
  EXPECT_EQ(*ReadFile(dir + "/x.txt"), "abc");
  EXPECT_EQ(ReadFile(dir + "/nope").status().code(), absl::StatusCode::kNotFound);
}

}  // namespace
}  // namespace dpcert
