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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "dpcert/config.h"
#include "dpcert/status_macros.h"

namespace dpcert {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kEnsembleManifest = "manifest.txt";

absl::Status LineError(int line, std::string_view what) {
  return absl::InvalidArgumentError(
      absl::StrCat("line ", line, ": ", std::string(what)));
}

// Numeric field `col` of `row`, with the row's line number on failure.
template <typename T, typename Parser>
absl::StatusOr<T> Field(const CsvTable& t, size_t row, size_t col,
                        Parser parse) {
  absl::StatusOr<T> v = parse(t.rows[row][col]);
  if (!v.ok()) {
    return LineError(t.line_numbers[row],
                     absl::StrCat("column '", t.header[col], "': ",
                                  v.status().message()));
  }
  return v;
}

absl::StatusOr<int64_t> IntField(const CsvTable& t, size_t row, size_t col) {
  return Field<int64_t>(t, row, col, ParseInt);
}

absl::StatusOr<double> DoubleField(const CsvTable& t, size_t row, size_t col) {
  return Field<double>(t, row, col, ParseDouble);
}

// Header must be `fixed` followed by prefix_0, prefix_1, ... (at least
// `min_indexed` of them). Returns the number of indexed columns.
absl::StatusOr<int> CheckHeader(const CsvTable& t,
                                const std::vector<std::string>& fixed,
                                std::string_view prefix, int min_indexed) {
  const int indexed = static_cast<int>(t.header.size() - fixed.size());
  bool ok = t.header.size() >= fixed.size();
  for (size_t i = 0; ok && i < fixed.size(); ++i) ok = t.header[i] == fixed[i];
  if (ok && prefix.empty()) ok = indexed == 0;
  for (int k = 0; ok && k < indexed; ++k) {
    ok = t.header[fixed.size() + k] == absl::StrCat(std::string(prefix), k);
  }
  if (!ok || indexed < min_indexed) {
    std::string want = absl::StrJoin(fixed, ",");
    if (!prefix.empty()) {
      absl::StrAppend(&want, ",", std::string(prefix), "0,",
                      std::string(prefix), "1,...");
    }
    return LineError(1, absl::StrCat("expected header ", want, ", got ",
                                     absl::StrJoin(t.header, ",")));
  }
  return indexed;
}

CsvRow IndexedHeader(std::vector<std::string> fixed, std::string_view prefix,
                     int count) {
  for (int k = 0; k < count; ++k) {
    fixed.push_back(absl::StrCat(std::string(prefix), k));
  }
  return fixed;
}

std::string FormatInstance(const ModelInstance& m) {
  std::string out = absl::StrCat("seed=", m.seed, "\n");
  for (double p : m.parameters) absl::StrAppend(&out, FormatDouble(p), "\n");
  return out;
}

absl::StatusOr<std::map<std::string, std::string>> ParseKeyValues(
    std::string_view text) {
  std::map<std::string, std::string> out;
  int line_no = 0;
  for (absl::string_view line :
       absl::StrSplit(absl::string_view(text.data(), text.size()), '\n')) {
    ++line_no;
    line = absl::StripAsciiWhitespace(line);
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return LineError(line_no, "expected key=value");
    }
    out[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
  }
  return out;
}

absl::StatusOr<std::string> Lookup(const std::map<std::string, std::string>& kv,
                                   const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat("ensemble manifest lacks '", key, "'"));
  }
  return it->second;
}

}  // namespace

absl::StatusOr<CsvTable> ParseCsv(std::string_view text) {
  std::vector<CsvRow> records;
  std::vector<int> lines;
  CsvRow record;
  std::string field;
  bool in_quotes = false, after_quote = false, record_started = false;
  int line = 1, record_line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    after_quote = false;
  };
  auto end_record = [&] {
    if (record_started) {
      end_field();
      records.push_back(std::move(record));
      lines.push_back(record_line);
    }
    record.clear();
    record_started = false;
  };

  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (!record_started) {
      record_line = line;
      if (c == '\n' || (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')) {
        // Empty line: skipped.
        if (c == '\r') ++i;
        ++line;
        continue;
      }
      record_started = true;
    }
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r') {
        if (i + 1 >= text.size() || text[i + 1] != '\n') {
          return LineError(line, "bare carriage return");
        }
        ++i;
      }
      end_record();
      ++line;
    } else if (after_quote) {
      return LineError(line, "unexpected character after closing quote");
    } else if (c == '"') {
      if (!field.empty()) {
        return LineError(line, "quote inside an unquoted field");
      }
      in_quotes = true;
    } else {
      field += c;
    }
  }
  if (in_quotes) return LineError(record_line, "unterminated quoted field");
  end_record();

  if (records.empty()) {
    return absl::InvalidArgumentError("line 1: missing header row");
  }
  CsvTable table;
  table.header = std::move(records[0]);
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      return LineError(lines[r],
                       absl::StrCat("expected ", table.header.size(),
                                    " fields, got ", records[r].size()));
    }
    table.rows.push_back(std::move(records[r]));
    table.line_numbers.push_back(lines[r]);
  }
  return table;
}

std::string FormatCsv(const CsvTable& table) {
  std::string out;
  auto append_row = [&out](const CsvRow& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      const std::string& f = row[i];
      if (f.find_first_of(",\"\r\n") == std::string::npos) {
        out += f;
        continue;
      }
      out += '"';
      for (char c : f) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    }
    out += "\r\n";
  };
  append_row(table.header);
  for (const CsvRow& r : table.rows) append_row(r);
  return out;
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return absl::DataLossError(absl::StrCat("error reading ", path));
  return ss.str();
}

absl::Status WriteFile(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) return absl::DataLossError(absl::StrCat("error writing ", path));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot move ", tmp, " to ", path, ": ", ec.message()));
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> ParseDatasetCsv(std::string_view text) {
  DPCERT_ASSIGN_OR_RETURN(CsvTable t, ParseCsv(text));
  DPCERT_ASSIGN_OR_RETURN(int m, CheckHeader(t, {"label"}, "f_", 1));
  Dataset d;
  d.n = static_cast<int64_t>(t.rows.size());
  d.m = m;
  int max_label = -1;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    DPCERT_ASSIGN_OR_RETURN(int64_t label, IntField(t, r, 0));
    if (label < 0 || label > 1000000) {
      return LineError(t.line_numbers[r], "label out of range");
    }
    d.labels.push_back(static_cast<int>(label));
    max_label = std::max(max_label, static_cast<int>(label));
    for (int j = 0; j < m; ++j) {
      DPCERT_ASSIGN_OR_RETURN(double f, DoubleField(t, r, j + 1));
      d.features.push_back(f);
    }
  }
  d.num_labels = std::max(2, max_label + 1);
  DPCERT_RETURN_IF_ERROR(d.Validate());
  return d;
}

std::string FormatDatasetCsv(const Dataset& data) {
  CsvTable t;
  t.header = IndexedHeader({"label"}, "f_", static_cast<int>(data.m));
  for (int64_t i = 0; i < data.n; ++i) {
    CsvRow row = {std::to_string(data.labels[i])};
    for (double f : data.row(i)) row.push_back(FormatDouble(f));
    t.rows.push_back(std::move(row));
  }
  return FormatCsv(t);
}

absl::StatusOr<VoteTable> ParseVotesCsv(std::string_view text) {
  DPCERT_ASSIGN_OR_RETURN(CsvTable t, ParseCsv(text));
  DPCERT_ASSIGN_OR_RETURN(int labels, CheckHeader(t, {"sample_id"}, "count_", 2));
  VoteTable v;
  v.labels = labels;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<int64_t> counts;
    int64_t total = 0;
    for (int l = 0; l < labels; ++l) {
      DPCERT_ASSIGN_OR_RETURN(int64_t c, IntField(t, r, l + 1));
      if (c < 0) return LineError(t.line_numbers[r], "negative vote count");
      counts.push_back(c);
      total += c;
    }
    if (r == 0) v.instances = total;
    if (total != v.instances) {
      return LineError(t.line_numbers[r],
                       absl::StrCat("counts sum to ", total, ", earlier rows to ",
                                    v.instances));
    }
    v.sample_ids.push_back(t.rows[r][0]);
    v.counts.push_back(std::move(counts));
  }
  DPCERT_RETURN_IF_ERROR(v.Validate());
  return v;
}

std::string FormatVotesCsv(const VoteTable& votes) {
  CsvTable t;
  t.header = IndexedHeader({"sample_id"}, "count_", votes.labels);
  for (size_t s = 0; s < votes.counts.size(); ++s) {
    CsvRow row = {votes.sample_ids[s]};
    for (int64_t c : votes.counts[s]) row.push_back(std::to_string(c));
    t.rows.push_back(std::move(row));
  }
  return FormatCsv(t);
}

absl::StatusOr<ScoreTable> ParseScoresCsv(std::string_view text) {
  DPCERT_ASSIGN_OR_RETURN(CsvTable t, ParseCsv(text));
  DPCERT_ASSIGN_OR_RETURN(
      int labels, CheckHeader(t, {"sample_id", "instance_id"}, "score_", 2));
  ScoreTable s;
  s.labels = labels;
  // Rows of one sample are contiguous with instance ids 0, 1, ...
  std::vector<std::vector<double>> current;
  auto flush = [&]() -> absl::Status {
    if (current.empty()) return absl::OkStatus();
    const int64_t count = static_cast<int64_t>(current.size());
    if (s.scores.empty()) s.instances = count;
    if (count != s.instances) {
      return absl::InvalidArgumentError(absl::StrCat(
          "sample ", s.sample_ids.back(), " has ", count,
          " instances, earlier samples ", s.instances));
    }
    ScoreMatrix m(count, labels);
    for (int64_t i = 0; i < count; ++i) {
      std::copy(current[i].begin(), current[i].end(), m.row(i).begin());
    }
    s.scores.push_back(std::move(m));
    current.clear();
    return absl::OkStatus();
  };
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& id = t.rows[r][0];
    if (s.sample_ids.empty() || s.sample_ids.back() != id) {
      DPCERT_RETURN_IF_ERROR(flush());
      s.sample_ids.push_back(id);
    }
    DPCERT_ASSIGN_OR_RETURN(int64_t instance, IntField(t, r, 1));
    if (instance != static_cast<int64_t>(current.size())) {
      return LineError(t.line_numbers[r],
                       absl::StrCat("expected instance_id ", current.size(),
                                    ", got ", instance));
    }
    std::vector<double> row;
    for (int l = 0; l < labels; ++l) {
      DPCERT_ASSIGN_OR_RETURN(double v, DoubleField(t, r, l + 2));
      row.push_back(v);
    }
    current.push_back(std::move(row));
  }
  DPCERT_RETURN_IF_ERROR(flush());
  if (std::set<std::string>(s.sample_ids.begin(), s.sample_ids.end()).size() !=
      s.sample_ids.size()) {
    return absl::InvalidArgumentError("a sample's rows are not contiguous");
  }
  DPCERT_RETURN_IF_ERROR(s.Validate());
  return s;
}

std::string FormatScoresCsv(const ScoreTable& scores) {
  CsvTable t;
  t.header = IndexedHeader({"sample_id", "instance_id"}, "score_", scores.labels);
  for (size_t s = 0; s < scores.scores.size(); ++s) {
    const ScoreMatrix& m = scores.scores[s];
    for (int64_t i = 0; i < m.instances(); ++i) {
      CsvRow row = {scores.sample_ids[s], std::to_string(i)};
      for (double v : m.row(i)) row.push_back(FormatDouble(v));
      t.rows.push_back(std::move(row));
    }
  }
  return FormatCsv(t);
}

std::string FormatBoundsCsv(const std::vector<BoundsRow>& rows) {
  CsvTable t;
  t.header = {"sample_id", "top_label", "p_lower", "rival_label", "p_upper"};
  for (const BoundsRow& r : rows) {
    t.rows.push_back({r.sample_id, std::to_string(r.bounds.top_label),
                      FormatDouble(r.bounds.p_lower),
                      std::to_string(r.bounds.rival_label),
                      FormatDouble(r.bounds.p_upper)});
  }
  return FormatCsv(t);
}

absl::StatusOr<std::vector<Certificate>> ParseCertsCsv(std::string_view text) {
  DPCERT_ASSIGN_OR_RETURN(CsvTable t, ParseCsv(text));
  DPCERT_RETURN_IF_ERROR(
      CheckHeader(t, {"sample_id", "predicted", "radius", "abstain"}, "", 0)
          .status());
  std::vector<Certificate> certs;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    Certificate c;
    c.sample_id = t.rows[r][0];
    DPCERT_ASSIGN_OR_RETURN(int64_t predicted, IntField(t, r, 1));
    c.predicted_label = static_cast<int>(predicted);
    const std::string& abstain = t.rows[r][3];
    if (abstain == "1") {
      if (!t.rows[r][2].empty()) {
        return LineError(t.line_numbers[r], "abstaining row has a radius");
      }
    } else if (abstain == "0") {
      DPCERT_ASSIGN_OR_RETURN(int64_t radius, IntField(t, r, 2));
      if (radius < 0) return LineError(t.line_numbers[r], "negative radius");
      c.radius = radius;
    } else {
      return LineError(t.line_numbers[r], "abstain must be 0 or 1");
    }
    certs.push_back(std::move(c));
  }
  return certs;
}

std::string FormatCertsCsv(const std::vector<Certificate>& certs) {
  CsvTable t;
  t.header = {"sample_id", "predicted", "radius", "abstain"};
  for (const Certificate& c : certs) {
    const bool abstain = !c.status.ok() || !c.radius.has_value();
    t.rows.push_back({c.sample_id, std::to_string(c.predicted_label),
                      abstain ? "" : std::to_string(*c.radius),
                      abstain ? "1" : "0"});
  }
  return FormatCsv(t);
}

std::string FormatCurveCsv(const CertifiedAccuracyCurve& curve) {
  CsvTable t;
  t.header = {"radius", "certified_accuracy"};
  for (size_t i = 0; i < curve.radii.size(); ++i) {
    t.rows.push_back(
        {std::to_string(curve.radii[i]), FormatDouble(curve.accuracy[i])});
  }
  return FormatCsv(t);
}

absl::StatusOr<TruthMap> ParseTruthCsv(std::string_view text) {
  DPCERT_ASSIGN_OR_RETURN(CsvTable t, ParseCsv(text));
  DPCERT_RETURN_IF_ERROR(CheckHeader(t, {"sample_id", "label"}, "", 0).status());
  TruthMap truth;
  for (size_t r = 0; r < t.rows.size(); ++r) {
    DPCERT_ASSIGN_OR_RETURN(int64_t label, IntField(t, r, 1));
    if (!truth.emplace(t.rows[r][0], static_cast<int>(label)).second) {
      return LineError(t.line_numbers[r], "duplicate sample_id");
    }
  }
  return truth;
}

std::string FormatTruthCsv(const Dataset& test) {
  CsvTable t;
  t.header = {"sample_id", "label"};
  for (int64_t i = 0; i < test.n; ++i) {
    t.rows.push_back({std::to_string(i), std::to_string(test.labels[i])});
  }
  return FormatCsv(t);
}

std::string FormatFlipCsv(const std::vector<FlipReport>& reports) {
  CsvTable t;
  t.header = {"sample_id",  "certified_radius", "tested_radius", "trials",
              "flip_count", "neighbor_count",   "clean_label"};
  for (const FlipReport& r : reports) {
    t.rows.push_back(
        {r.sample_id,
         r.certified_radius ? std::to_string(*r.certified_radius) : "",
         std::to_string(r.tested_radius), std::to_string(r.trials),
         std::to_string(r.flip_count), std::to_string(r.neighbor_count),
         std::to_string(r.clean_label)});
  }
  return FormatCsv(t);
}

absl::Status SaveEnsemble(const Ensemble& e, const std::string& dir) {
  if (e.instances.empty()) {
    return absl::InvalidArgumentError("ensemble has no instances");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  const TrainConfig& c = e.config;
  const ModelInstance& first = e.instances[0];
  std::string manifest = absl::StrCat(
      "q=", FormatDouble(c.privacy.sampling_ratio), "\n",
      "sigma=", FormatDouble(c.privacy.noise_multiplier), "\n",
      "steps=", c.privacy.steps, "\n",
      "clip=", FormatDouble(c.privacy.clip_norm), "\n",
      "architecture=", std::string(ArchitectureName(c.architecture)), "\n",
      "hidden=", c.hidden_width, "\n",
      "optimizer=", std::string(OptimizerName(c.optimizer)), "\n",
      "lr=", FormatDouble(c.learning_rate), "\n",
      "seed=", e.master_seed, "\n",
      "train_size=", e.train_size, "\n",
      "subset_size=",
      e.subset_size ? std::to_string(*e.subset_size) : std::string("none"), "\n",
      "features=", first.m, "\n",
      "labels=", first.num_labels, "\n",
      "instances=", e.instances.size(), "\n",
      "noise=added_to_clipped_sum_then_divided_by_expected_batch\n");
  for (const auto& [index, reason] : e.failures) {
    absl::StrAppend(&manifest, "failed_instance=", index, "\n");
  }
  DPCERT_RETURN_IF_ERROR(
      WriteFile((fs::path(dir) / kEnsembleManifest).string(), manifest));
  for (size_t i = 0; i < e.instances.size(); ++i) {
    const std::string name = absl::StrFormat("instance_%05d.txt", i);
    DPCERT_RETURN_IF_ERROR(WriteFile((fs::path(dir) / name).string(),
                                     FormatInstance(e.instances[i])));
  }
  return absl::OkStatus();
}

absl::StatusOr<Ensemble> LoadEnsemble(const std::string& dir) {
  DPCERT_ASSIGN_OR_RETURN(
      std::string text, ReadFile((fs::path(dir) / kEnsembleManifest).string()));
  DPCERT_ASSIGN_OR_RETURN(auto kv, ParseKeyValues(text));
  Ensemble e;
  TrainConfig& c = e.config;
  auto get = [&kv](const std::string& key) { return Lookup(kv, key); };
  DPCERT_ASSIGN_OR_RETURN(std::string v, get("q"));
  DPCERT_ASSIGN_OR_RETURN(c.privacy.sampling_ratio, ParseDouble(v));
  DPCERT_ASSIGN_OR_RETURN(v, get("sigma"));
  DPCERT_ASSIGN_OR_RETURN(c.privacy.noise_multiplier, ParseDouble(v));
  DPCERT_ASSIGN_OR_RETURN(v, get("steps"));
  DPCERT_ASSIGN_OR_RETURN(c.privacy.steps, ParseInt(v));
  DPCERT_ASSIGN_OR_RETURN(v, get("clip"));
  DPCERT_ASSIGN_OR_RETURN(c.privacy.clip_norm, ParseDouble(v));
  DPCERT_ASSIGN_OR_RETURN(v, get("architecture"));
  DPCERT_ASSIGN_OR_RETURN(c.architecture, ParseArchitecture(v));
  DPCERT_ASSIGN_OR_RETURN(v, get("hidden"));
  DPCERT_ASSIGN_OR_RETURN(int64_t hidden, ParseInt(v));
  c.hidden_width = static_cast<int>(hidden);
  DPCERT_ASSIGN_OR_RETURN(v, get("optimizer"));
  DPCERT_ASSIGN_OR_RETURN(c.optimizer, ParseOptimizer(v));
  DPCERT_ASSIGN_OR_RETURN(v, get("lr"));
  DPCERT_ASSIGN_OR_RETURN(c.learning_rate, ParseDouble(v));
  DPCERT_ASSIGN_OR_RETURN(v, get("seed"));
  DPCERT_ASSIGN_OR_RETURN(e.master_seed, ParseUint(v));
  DPCERT_ASSIGN_OR_RETURN(v, get("train_size"));
  DPCERT_ASSIGN_OR_RETURN(e.train_size, ParseInt(v));
  DPCERT_ASSIGN_OR_RETURN(v, get("subset_size"));
  if (v != "none") {
    DPCERT_ASSIGN_OR_RETURN(int64_t s, ParseInt(v));
    e.subset_size = s;
  }
  DPCERT_ASSIGN_OR_RETURN(v, get("features"));
  DPCERT_ASSIGN_OR_RETURN(int64_t m, ParseInt(v));
  DPCERT_ASSIGN_OR_RETURN(v, get("labels"));
  DPCERT_ASSIGN_OR_RETURN(int64_t labels, ParseInt(v));
  DPCERT_ASSIGN_OR_RETURN(v, get("instances"));
  DPCERT_ASSIGN_OR_RETURN(int64_t count, ParseInt(v));
  if (count < 1) {
    return absl::InvalidArgumentError("ensemble manifest lists no instances");
  }

  for (int64_t i = 0; i < count; ++i) {
    const std::string name = absl::StrFormat("instance_%05d.txt", i);
    DPCERT_ASSIGN_OR_RETURN(std::string body,
                            ReadFile((fs::path(dir) / name).string()));
    ModelInstance model;
    model.architecture = c.architecture;
    model.m = m;
    model.num_labels = static_cast<int>(labels);
    model.hidden_width = c.architecture == Architecture::kMlp ? c.hidden_width : 0;
    int line_no = 0;
    for (absl::string_view line :
         absl::StrSplit(body, '\n', absl::SkipWhitespace())) {
      ++line_no;
      line = absl::StripAsciiWhitespace(line);
      if (line_no == 1) {
        if (!absl::ConsumePrefix(&line, "seed=")) {
          return absl::InvalidArgumentError(
              absl::StrCat(name, ": first line must be seed=..."));
        }
        DPCERT_ASSIGN_OR_RETURN(model.seed,
                                ParseUint({line.data(), line.size()}));
        continue;
      }
      absl::StatusOr<double> p = ParseDouble({line.data(), line.size()});
      if (!p.ok()) {
        return absl::InvalidArgumentError(absl::StrCat(
            name, " line ", line_no, ": ", p.status().message()));
      }
      model.parameters.push_back(*p);
    }
    if (absl::Status s = ValidateModel(model); !s.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(name, ": ", s.message()));
    }
    e.instances.push_back(std::move(model));
  }
  return e;
}

}  // namespace dpcert
