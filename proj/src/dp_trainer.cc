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

#include "dpcert/dp_trainer.h"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

#include "absl/strings/str_cat.h"
#include "dpcert/status_macros.h"

namespace dpcert {
namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;

double L2Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Parameter layout. Logistic: W (L x m), b (L). MLP: W1 (h x m), b1 (h),
// W2 (L x h), b2 (L).
struct Layout {
  int64_t m, labels, hidden;
  int64_t w1() const { return 0; }
  int64_t b1() const { return hidden * m; }
  int64_t w2() const { return b1() + hidden; }
  int64_t b2() const { return w2() + labels * hidden; }
};

Layout MlpLayout(const ModelInstance& model) {
  return {model.m, model.num_labels, model.hidden_width};
}

// Forward pass. For the MLP, `pre` receives the hidden pre-activations.
void Forward(const ModelInstance& model, std::span<const double> x,
             std::vector<double>& logits, std::vector<double>* pre) {
  const double* p = model.parameters.data();
  const int64_t m = model.m;
  const int labels = model.num_labels;
  logits.assign(labels, 0.0);
  if (model.architecture == Architecture::kLogistic) {
    for (int l = 0; l < labels; ++l) {
      double z = p[labels * m + l];
      for (int64_t j = 0; j < m; ++j) z += p[l * m + j] * x[j];
      logits[l] = z;
    }
    return;
  }
  const Layout lay = MlpLayout(model);
  std::vector<double> local;
  std::vector<double>& z = pre != nullptr ? *pre : local;
  z.assign(lay.hidden, 0.0);
  for (int64_t h = 0; h < lay.hidden; ++h) {
    double s = p[lay.b1() + h];
    for (int64_t j = 0; j < m; ++j) s += p[lay.w1() + h * m + j] * x[j];
    z[h] = s;
  }
  for (int l = 0; l < labels; ++l) {
    double s = p[lay.b2() + l];
    for (int64_t h = 0; h < lay.hidden; ++h) {
      s += p[lay.w2() + l * lay.hidden + h] * std::max(0.0, z[h]);
    }
    logits[l] = s;
  }
}

int Argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

absl::Status Dataset::Validate() const {
  if (n < 1 || m < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("dataset must have n >= 1 and m >= 1, got n=", n,
                     " m=", m));
  }
  if (num_labels < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("dataset needs at least 2 labels, got ", num_labels));
  }
  if (static_cast<int64_t>(features.size()) != n * m ||
      static_cast<int64_t>(labels.size()) != n) {
    return absl::InvalidArgumentError("dataset storage does not match n x m");
  }
  for (int64_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= num_labels) {
      return absl::InvalidArgumentError(absl::StrCat(
          "label ", labels[i], " of row ", i, " outside [0,", num_labels, ")"));
    }
  }
  for (size_t k = 0; k < features.size(); ++k) {
    if (!std::isfinite(features[k])) {
      return absl::InvalidArgumentError(
          absl::StrCat("non-finite feature in row ", k / m));
    }
  }
  return absl::OkStatus();
}

Dataset SelectRows(const Dataset& data, std::span<const int64_t> indices) {
  Dataset out;
  out.n = static_cast<int64_t>(indices.size());
  out.m = data.m;
  out.num_labels = data.num_labels;
  out.features.reserve(indices.size() * data.m);
  out.labels.reserve(indices.size());
  for (int64_t i : indices) {
    const auto r = data.row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(data.labels[i]);
  }
  return out;
}

absl::StatusOr<Dataset> MakeGaussianMixture(int64_t n, int64_t m, int labels,
                                            double separation, uint64_t seed) {
  if (n < 1 || m < 1 || labels < 2 || !(separation >= 0.0)) {
    return absl::InvalidArgumentError(
        "mixture needs n >= 1, m >= 1, labels >= 2, separation >= 0");
  }
  if (m == 1 && labels > 2) {
    return absl::InvalidArgumentError("one feature supports only two labels");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  d.n = n;
  d.m = m;
  d.num_labels = labels;
  d.features.resize(n * m);
  d.labels.resize(n);
  for (int64_t i = 0; i < n; ++i) {
    const int l = static_cast<int>(i % labels);
    const double angle = 2.0 * std::numbers::pi * l / labels;
    d.labels[i] = l;
    for (int64_t j = 0; j < m; ++j) d.features[i * m + j] = noise(rng);
    d.features[i * m] += 0.5 * separation * std::cos(angle);
    if (m > 1) d.features[i * m + 1] += 0.5 * separation * std::sin(angle);
  }
  return d;
}

absl::StatusOr<Architecture> ParseArchitecture(std::string_view name) {
  if (name == "logistic") return Architecture::kLogistic;
  if (name == "mlp") return Architecture::kMlp;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown architecture '", std::string(name), "', expected logistic or mlp"));
}

std::string_view ArchitectureName(Architecture arch) {
  return arch == Architecture::kLogistic ? "logistic" : "mlp";
}

absl::StatusOr<Optimizer> ParseOptimizer(std::string_view name) {
  if (name == "adam") return Optimizer::kAdam;
  if (name == "sgd") return Optimizer::kSgd;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown optimizer '", std::string(name), "', expected adam or sgd"));
}

std::string_view OptimizerName(Optimizer opt) {
  return opt == Optimizer::kAdam ? "adam" : "sgd";
}

absl::Status ValidateTrainConfig(const TrainConfig& config) {
  // sigma = 0 is allowed for training (noiseless reference runs), unlike
  // accounting.
  const PrivacyParams& p = config.privacy;
  if (!(p.sampling_ratio > 0.0 && p.sampling_ratio <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("q must be in (0,1], got ", p.sampling_ratio));
  }
  if (!(p.noise_multiplier >= 0.0) || !std::isfinite(p.noise_multiplier)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sigma must be >= 0, got ", p.noise_multiplier));
  }
  if (p.steps < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("steps must be >= 1, got ", p.steps));
  }
  if (!(p.clip_norm > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("clip must be > 0, got ", p.clip_norm));
  }
  if (config.architecture == Architecture::kMlp && config.hidden_width < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("hidden width must be >= 1, got ", config.hidden_width));
  }
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    return absl::InvalidArgumentError(
        absl::StrCat("learning rate must be > 0, got ", config.learning_rate));
  }
  return absl::OkStatus();
}

int64_t ParameterCount(Architecture arch, int64_t m, int labels, int hidden) {
  if (arch == Architecture::kLogistic) return labels * (m + 1);
  return hidden * (m + 1) + labels * (hidden + 1);
}

ModelInstance InitModel(const TrainConfig& config, int64_t m, int labels,
                        std::mt19937_64& rng) {
  ModelInstance model;
  model.architecture = config.architecture;
  model.m = m;
  model.num_labels = labels;
  model.hidden_width =
      config.architecture == Architecture::kMlp ? config.hidden_width : 0;
  model.parameters.assign(
      ParameterCount(model.architecture, m, labels, model.hidden_width), 0.0);
  if (model.architecture == Architecture::kMlp) {
    const Layout lay = MlpLayout(model);
    const double a1 = std::sqrt(6.0 / static_cast<double>(m + lay.hidden));
    const double a2 = std::sqrt(6.0 / static_cast<double>(lay.hidden + labels));
    std::uniform_real_distribution<double> u1(-a1, a1), u2(-a2, a2);
    for (int64_t k = lay.w1(); k < lay.b1(); ++k) model.parameters[k] = u1(rng);
    for (int64_t k = lay.w2(); k < lay.b2(); ++k) model.parameters[k] = u2(rng);
  }
  return model;
}

absl::Status ValidateModel(const ModelInstance& model) {
  if (model.m < 1 || model.num_labels < 2) {
    return absl::InvalidArgumentError("model needs m >= 1 and >= 2 labels");
  }
  if (model.architecture == Architecture::kMlp && model.hidden_width < 1) {
    return absl::InvalidArgumentError("MLP needs a hidden width >= 1");
  }
  const int64_t expected = ParameterCount(model.architecture, model.m,
                                          model.num_labels, model.hidden_width);
  if (static_cast<int64_t>(model.parameters.size()) != expected) {
    return absl::InvalidArgumentError(
        absl::StrCat("model has ", model.parameters.size(),
                     " parameters, architecture needs ", expected));
  }
  for (double p : model.parameters) {
    if (!std::isfinite(p)) {
      return absl::InvalidArgumentError("model has non-finite parameters");
    }
  }
  return absl::OkStatus();
}

std::vector<double> Logits(const ModelInstance& model,
                           std::span<const double> x) {
  std::vector<double> logits;
  Forward(model, x, logits, nullptr);
  return logits;
}

std::vector<double> Softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (size_t l = 0; l < logits.size(); ++l) {
    out[l] = std::exp(logits[l] - top);
    total += out[l];
  }
  for (double& v : out) v /= total;
  return out;
}

double ExampleLossAndGradient(const ModelInstance& model,
                              std::span<const double> x, int label,
                              std::vector<double>& grad) {
  std::vector<double> logits, pre;
  Forward(model, x, logits, &pre);
  std::vector<double> d = Softmax(logits);
  const double loss = -std::log(std::max(d[label], 1e-300));
  d[label] -= 1.0;  // d loss / d logits

  const int64_t m = model.m;
  const int labels = model.num_labels;
  grad.assign(model.parameters.size(), 0.0);
  if (model.architecture == Architecture::kLogistic) {
    for (int l = 0; l < labels; ++l) {
      for (int64_t j = 0; j < m; ++j) grad[l * m + j] = d[l] * x[j];
      grad[labels * m + l] = d[l];
    }
    return loss;
  }
  const Layout lay = MlpLayout(model);
  const double* p = model.parameters.data();
  for (int l = 0; l < labels; ++l) {
    for (int64_t h = 0; h < lay.hidden; ++h) {
      grad[lay.w2() + l * lay.hidden + h] = d[l] * std::max(0.0, pre[h]);
    }
    grad[lay.b2() + l] = d[l];
  }
  for (int64_t h = 0; h < lay.hidden; ++h) {
    if (pre[h] <= 0.0) continue;
    double dh = 0.0;
    for (int l = 0; l < labels; ++l) dh += p[lay.w2() + l * lay.hidden + h] * d[l];
    for (int64_t j = 0; j < m; ++j) grad[lay.w1() + h * m + j] = dh * x[j];
    grad[lay.b1() + h] = dh;
  }
  return loss;
}

double MeanLoss(const ModelInstance& model, const Dataset& data) {
  std::vector<double> grad;
  double total = 0.0;
  for (int64_t i = 0; i < data.n; ++i) {
    total += ExampleLossAndGradient(model, data.row(i), data.labels[i], grad);
  }
  return total / static_cast<double>(data.n);
}

double Accuracy(const ModelInstance& model, const Dataset& data) {
  int64_t correct = 0;
  for (int64_t i = 0; i < data.n; ++i) {
    correct += Argmax(Logits(model, data.row(i))) == data.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(data.n);
}

std::vector<double> ClipGradient(std::span<const double> g, double clip_norm) {
  std::vector<double> out(g.begin(), g.end());
  const double norm = L2Norm(g);
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (double& v : out) v *= scale;
  }
  return out;
}

StepStats SgmStep(ModelInstance& model, OptimizerState& state,
                  const Dataset& data, const TrainConfig& config,
                  std::mt19937_64& rng) {
  const PrivacyParams& p = config.privacy;
  const size_t dim = model.parameters.size();
  std::vector<double> sum(dim, 0.0), grad;
  StepStats stats;
  std::bernoulli_distribution include(p.sampling_ratio);
  for (int64_t i = 0; i < data.n; ++i) {
    if (!include(rng)) continue;
    ExampleLossAndGradient(model, data.row(i), data.labels[i], grad);
    const std::vector<double> clipped = ClipGradient(grad, p.clip_norm);
    const double norm = L2Norm(clipped);
    assert(norm <= p.clip_norm * (1.0 + 1e-12));
    stats.max_clipped_norm = std::max(stats.max_clipped_norm, norm);
    for (size_t k = 0; k < dim; ++k) sum[k] += clipped[k];
    ++stats.batch_size;
  }
  if (p.noise_multiplier > 0.0) {
    std::normal_distribution<double> noise(0.0,
                                           p.noise_multiplier * p.clip_norm);
    for (double& v : sum) v += noise(rng);
  }
  const double expected_batch = p.sampling_ratio * static_cast<double>(data.n);
  for (double& v : sum) v /= expected_batch;

  if (config.optimizer == Optimizer::kSgd) {
    for (size_t k = 0; k < dim; ++k) {
      model.parameters[k] -= config.learning_rate * sum[k];
    }
    return stats;
  }
  if (state.first_moment.size() != dim) {
    state.first_moment.assign(dim, 0.0);
    state.second_moment.assign(dim, 0.0);
    state.t = 0;
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
  for (size_t k = 0; k < dim; ++k) {
    state.first_moment[k] =
        kAdamBeta1 * state.first_moment[k] + (1.0 - kAdamBeta1) * sum[k];
    state.second_moment[k] = kAdamBeta2 * state.second_moment[k] +
                             (1.0 - kAdamBeta2) * sum[k] * sum[k];
    const double m_hat = state.first_moment[k] / c1;
    const double v_hat = state.second_moment[k] / c2;
    model.parameters[k] -=
        config.learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
  }
  return stats;
}

absl::StatusOr<ModelInstance> TrainInstance(const Dataset& data,
                                            const TrainConfig& config,
                                            uint64_t seed) {
  DPCERT_RETURN_IF_ERROR(data.Validate());
  DPCERT_RETURN_IF_ERROR(ValidateTrainConfig(config));
  std::mt19937_64 rng(seed);
  ModelInstance model = InitModel(config, data.m, data.num_labels, rng);
  model.seed = seed;
  OptimizerState state;
  for (int64_t t = 0; t < config.privacy.steps; ++t) {
    SgmStep(model, state, data, config, rng);
  }
  for (double v : model.parameters) {
    if (!std::isfinite(v)) {
      return absl::InternalError(
          absl::StrCat("training diverged for seed ", seed));
    }
  }
  return model;
}

uint64_t InstanceSeed(uint64_t master_seed, int64_t index) {
  uint64_t z = master_seed +
               static_cast<uint64_t>(index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

absl::StatusOr<PrivacyParams> Ensemble::AccountedParams() const {
  if (!subset_size.has_value()) return config.privacy;
  return AdjustForSubset(config.privacy, *subset_size, train_size);
}

absl::StatusOr<Ensemble> TrainEnsemble(const Dataset& data,
                                       const TrainConfig& config,
                                       int64_t instances,
                                       std::optional<int64_t> subset_size,
                                       uint64_t seed, int threads) {
  if (instances < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("instances must be >= 1, got ", instances));
  }
  DPCERT_RETURN_IF_ERROR(data.Validate());
  DPCERT_RETURN_IF_ERROR(ValidateTrainConfig(config));
  if (subset_size.has_value() && (*subset_size < 1 || *subset_size > data.n)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "subset size must be in [1, ", data.n, "], got ", *subset_size));
  }

  std::vector<absl::StatusOr<ModelInstance>> results(
      instances, absl::UnknownError("not trained"));
  auto train_one = [&](int64_t i) {
    const uint64_t instance_seed = InstanceSeed(seed, i);
    if (!subset_size.has_value()) {
      results[i] = TrainInstance(data, config, instance_seed);
      return;
    }
    // The subset draw uses its own stream so the training stream matches a
    // full-data run with the same seed.
    std::mt19937_64 pick(InstanceSeed(instance_seed, -1));
    std::vector<int64_t> rows(data.n);
    std::iota(rows.begin(), rows.end(), 0);
    for (int64_t k = 0; k < *subset_size; ++k) {
      std::uniform_int_distribution<int64_t> u(k, data.n - 1);
      std::swap(rows[k], rows[u(pick)]);
    }
    rows.resize(*subset_size);
    results[i] = TrainInstance(SelectRows(data, rows), config, instance_seed);
  };

  if (threads <= 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  const int64_t workers = std::min<int64_t>(threads, instances);
  if (workers <= 1) {
    for (int64_t i = 0; i < instances; ++i) train_one(i);
  } else {
    std::atomic<int64_t> next{0};
    std::vector<std::thread> pool;
    for (int64_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int64_t i = next++; i < instances; i = next++) train_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  Ensemble ensemble;
  ensemble.config = config;
  ensemble.master_seed = seed;
  ensemble.train_size = data.n;
  ensemble.subset_size = subset_size;
  for (int64_t i = 0; i < instances; ++i) {
    if (results[i].ok()) {
      ensemble.instances.push_back(*std::move(results[i]));
    } else {
      ensemble.failures.emplace_back(i, std::string(results[i].status().message()));
    }
  }
  if (ensemble.instances.empty()) {
    return absl::InternalError(absl::StrCat("all ", instances,
                                            " instances failed; first: ",
                                            ensemble.failures[0].second));
  }
  return ensemble;
}

absl::StatusOr<Inference> Infer(const Ensemble& ensemble,
                                std::span<const double> x) {
  if (ensemble.instances.empty()) {
    return absl::InvalidArgumentError("ensemble has no instances");
  }
  const ModelInstance& first = ensemble.instances[0];
  if (static_cast<int64_t>(x.size()) != first.m) {
    return absl::InvalidArgumentError(absl::StrCat(
        "feature vector has dimension ", x.size(), ", model expects ", first.m));
  }
  const int64_t count = static_cast<int64_t>(ensemble.instances.size());
  Inference out{std::vector<int64_t>(first.num_labels, 0),
                ScoreMatrix(count, first.num_labels)};
  for (int64_t i = 0; i < count; ++i) {
    const std::vector<double> probs =
        Softmax(Logits(ensemble.instances[i], x));
    ++out.counts[Argmax(probs)];
    std::copy(probs.begin(), probs.end(), out.scores.row(i).begin());
  }
  return out;
}

absl::Status InferDataset(const Ensemble& ensemble, const Dataset& test,
                          VoteTable* votes, ScoreTable* scores) {
  DPCERT_RETURN_IF_ERROR(test.Validate());
  if (ensemble.instances.empty()) {
    return absl::InvalidArgumentError("ensemble has no instances");
  }
  const int labels = ensemble.instances[0].num_labels;
  const int64_t count = static_cast<int64_t>(ensemble.instances.size());
  if (votes != nullptr) *votes = VoteTable{labels, count, {}, {}};
  if (scores != nullptr) *scores = ScoreTable{labels, count, {}, {}};
  for (int64_t i = 0; i < test.n; ++i) {
    DPCERT_ASSIGN_OR_RETURN(Inference inf, Infer(ensemble, test.row(i)));
    const std::string id = std::to_string(i);
    if (votes != nullptr) {
      votes->sample_ids.push_back(id);
      votes->counts.push_back(std::move(inf.counts));
    }
    if (scores != nullptr) {
      scores->sample_ids.push_back(id);
      scores->scores.push_back(std::move(inf.scores));
    }
  }
  return absl::OkStatus();
}

}  // namespace dpcert
