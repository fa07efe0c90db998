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

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "dpcert/status_macros.h"

namespace dpcert {
namespace {

std::string Str(std::string_view s) { return std::string(s); }

absl::string_view Absl(std::string_view s) { return {s.data(), s.size()}; }

template <typename T>
absl::StatusOr<T> ParseWhole(std::string_view text, const char* kind) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", Str(text), "' is not a valid ", kind));
  }
  return value;
}

absl::Status KeyError(std::string_view key, const absl::Status& cause) {
  return absl::InvalidArgumentError(
      absl::StrCat("config key '", Str(key), "': ", cause.message()));
}

using Setter = std::function<absl::Status(RunConfig&, std::string_view)>;

template <typename T>
absl::Status Assign(absl::StatusOr<T> parsed, T& field) {
  if (!parsed.ok()) return parsed.status();
  field = *parsed;
  return absl::OkStatus();
}

absl::Status AssignInt(std::string_view v, int64_t& field) {
  return Assign(ParseInt(v), field);
}

absl::Status AssignDouble(std::string_view v, double& field) {
  return Assign(ParseDouble(v), field);
}

const std::map<std::string, Setter, std::less<>>& Setters() {
  static const auto* setters = new std::map<std::string, Setter, std::less<>>{
      {"q", [](RunConfig& c, std::string_view v) {
         return AssignDouble(v, c.train.privacy.sampling_ratio);
       }},
      {"sigma", [](RunConfig& c, std::string_view v) {
         return AssignDouble(v, c.train.privacy.noise_multiplier);
       }},
      {"steps", [](RunConfig& c, std::string_view v) {
         return AssignInt(v, c.train.privacy.steps);
       }},
      {"clip", [](RunConfig& c, std::string_view v) {
         return AssignDouble(v, c.train.privacy.clip_norm);
       }},
      {"eta", [](RunConfig& c, std::string_view v) {
         return AssignDouble(v, c.eta);
       }},
      {"delta", [](RunConfig& c, std::string_view v) {
         return AssignDouble(v, c.delta);
       }},
      {"instances", [](RunConfig& c, std::string_view v) {
         return AssignInt(v, c.instances);
       }},
      {"method", [](RunConfig& c, std::string_view v) {
         return Assign(ParseCertMethod(v), c.method);
       }},
      {"score_bound", [](RunConfig& c, std::string_view v) {
         return Assign(ParseScoreBound(v), c.score_bound);
       }},
      {"orders", [](RunConfig& c, std::string_view v) -> absl::Status {
         c.orders.clear();
         if (v == "default") return absl::OkStatus();
         for (absl::string_view tok : absl::StrSplit(Absl(v), ',')) {
           tok = absl::StripAsciiWhitespace(tok);
           DPCERT_ASSIGN_OR_RETURN(double order,
                                   ParseDouble({tok.data(), tok.size()}));
           c.orders.push_back(order);
         }
         return absl::OkStatus();
       }},
      {"subset_size", [](RunConfig& c, std::string_view v) -> absl::Status {
         if (v == "none") {
           c.subset_size.reset();
           return absl::OkStatus();
         }
         DPCERT_ASSIGN_OR_RETURN(int64_t s, ParseInt(v));
         c.subset_size = s;
         return absl::OkStatus();
       }},
      {"seed", [](RunConfig& c, std::string_view v) {
         return Assign(ParseUint(v), c.seed);
       }},
      {"r_max", [](RunConfig& c, std::string_view v) -> absl::Status {
         if (v == "auto") {
           c.r_max.reset();
           return absl::OkStatus();
         }
         DPCERT_ASSIGN_OR_RETURN(int64_t r, ParseInt(v));
         c.r_max = r;
         return absl::OkStatus();
       }},
      {"architecture", [](RunConfig& c, std::string_view v) {
         return Assign(ParseArchitecture(v), c.train.architecture);
       }},
      {"hidden", [](RunConfig& c, std::string_view v) -> absl::Status {
         DPCERT_ASSIGN_OR_RETURN(int64_t h, ParseInt(v));
         c.train.hidden_width = static_cast<int>(h);
         return absl::OkStatus();
       }},
      {"optimizer", [](RunConfig& c, std::string_view v) {
         return Assign(ParseOptimizer(v), c.train.optimizer);
       }},
      {"lr", [](RunConfig& c, std::string_view v) {
         return AssignDouble(v, c.train.learning_rate);
       }},
      {"threads", [](RunConfig& c, std::string_view v) -> absl::Status {
         DPCERT_ASSIGN_OR_RETURN(int64_t t, ParseInt(v));
         c.threads = static_cast<int>(t);
         return absl::OkStatus();
       }},
  };
  return *setters;
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

absl::StatusOr<double> ParseDouble(std::string_view text) {
  DPCERT_ASSIGN_OR_RETURN(double v, ParseWhole<double>(text, "number"));
  if (!std::isfinite(v)) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", Str(text), "' is not finite"));
  }
  return v;
}

absl::StatusOr<int64_t> ParseInt(std::string_view text) {
  return ParseWhole<int64_t>(text, "integer");
}

absl::StatusOr<uint64_t> ParseUint(std::string_view text) {
  return ParseWhole<uint64_t>(text, "unsigned integer");
}

RunConfig DefaultRunConfig() { return RunConfig{}; }

absl::Status ValidateRunConfig(const RunConfig& c) {
  const PrivacyParams& p = c.train.privacy;
  // Certification needs a finite guarantee, so sigma > 0 here even though
  // the trainer also accepts sigma = 0.
  if (!(p.sampling_ratio > 0.0 && p.sampling_ratio <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("q must be in (0,1], got ", p.sampling_ratio));
  }
  if (!(p.noise_multiplier > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sigma must be > 0, got ", p.noise_multiplier));
  }
  DPCERT_RETURN_IF_ERROR(ValidateTrainConfig(c.train));
  if (!(c.eta > 0.0 && c.eta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("eta must be in (0,1), got ", c.eta));
  }
  if (!(c.delta > 0.0 && c.delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must be in (0,1), got ", c.delta));
  }
  if (c.instances < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("instances must be >= 1, got ", c.instances));
  }
  if (!c.orders.empty()) {
    if (absl::Status s = ValidateOrders(c.orders); !s.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("orders: ", s.message()));
    }
  }
  if (c.subset_size.has_value() && *c.subset_size < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("subset_size must be >= 1, got ", *c.subset_size));
  }
  if (c.r_max.has_value() && *c.r_max < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("r_max must be >= 0, got ", *c.r_max));
  }
  if (c.threads < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("threads must be >= 0, got ", c.threads));
  }
  return absl::OkStatus();
}

absl::StatusOr<RunConfig> ParseConfig(std::string_view text) {
  RunConfig config = DefaultRunConfig();
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(Absl(text), '\n')) {
    ++line_no;
    if (const size_t hash = line.find('#'); hash != absl::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(absl::StrCat(
          "config line ", line_no, ": expected key=value, got '", line, "'"));
    }
    const absl::string_view key = absl::StripAsciiWhitespace(line.substr(0, eq));
    const absl::string_view value =
        absl::StripAsciiWhitespace(line.substr(eq + 1));
    auto it = Setters().find(std::string_view(key.data(), key.size()));
    if (it == Setters().end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": unknown key '", key, "'"));
    }
    if (!seen.insert(std::string(key)).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": repeated key '", key, "'"));
    }
    if (absl::Status s = it->second(config, {value.data(), value.size()});
        !s.ok()) {
      return KeyError({key.data(), key.size()}, s);
    }
  }
  DPCERT_RETURN_IF_ERROR(ValidateRunConfig(config));
  return config;
}

std::string SerializeConfig(const RunConfig& c) {
  const PrivacyParams& p = c.train.privacy;
  std::vector<std::string> orders;
  for (double o : c.orders) orders.push_back(FormatDouble(o));
  std::string out;
  auto line = [&out](std::string_view key, std::string_view value) {
    absl::StrAppend(&out, Absl(key), "=", Absl(value), "\n");
  };
  line("q", FormatDouble(p.sampling_ratio));
  line("sigma", FormatDouble(p.noise_multiplier));
  line("steps", std::to_string(p.steps));
  line("clip", FormatDouble(p.clip_norm));
  line("eta", FormatDouble(c.eta));
  line("delta", FormatDouble(c.delta));
  line("instances", std::to_string(c.instances));
  line("method", CertMethodName(c.method));
  line("score_bound", ScoreBoundName(c.score_bound));
  line("orders", orders.empty() ? "default" : absl::StrJoin(orders, ","));
  line("subset_size",
       c.subset_size ? std::to_string(*c.subset_size) : std::string("none"));
  line("seed", std::to_string(c.seed));
  line("r_max", c.r_max ? std::to_string(*c.r_max) : std::string("auto"));
  line("architecture", ArchitectureName(c.train.architecture));
  line("hidden", std::to_string(c.train.hidden_width));
  line("optimizer", OptimizerName(c.train.optimizer));
  line("lr", FormatDouble(c.train.learning_rate));
  line("threads", std::to_string(c.threads));
  return out;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return SerializeConfig(a) == SerializeConfig(b);
}

}  // namespace dpcert
