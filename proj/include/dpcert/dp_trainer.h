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

// Small-scale DP-SGD trainer. Each step Poisson-samples a batch, clips
// per-example cross-entropy gradients to norm C, adds N(0, (sigma C)^2) noise
// to the clipped sum, divides by the expected batch size q n and applies one
// optimizer update. This is exactly the mechanism the SGM accountant covers.
//
// Ensembles of independently seeded instances supply the votes and scores
// that the certifier consumes.

#ifndef DPCERT_DP_TRAINER_H_
#define DPCERT_DP_TRAINER_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpcert/confidence.h"
#include "dpcert/sgm_accountant.h"

namespace dpcert {

// n examples with m features and labels in [0, L), features row-major.
struct Dataset {
  int64_t n = 0;
  int64_t m = 0;
  int num_labels = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::span<const double> row(int64_t i) const {
    return {features.data() + i * m, static_cast<size_t>(m)};
  }
  absl::Status Validate() const;
};

// Rows `indices` of `data`, in that order.
Dataset SelectRows(const Dataset& data, std::span<const int64_t> indices);

// Balanced mixture of unit-variance Gaussians, one per label. Label l has its
// mean at distance separation / 2 from the origin, at angle 2 pi l / L in the
// plane of the first two features (on the first feature when m = 1).
absl::StatusOr<Dataset> MakeGaussianMixture(int64_t n, int64_t m, int labels,
                                            double separation, uint64_t seed);

enum class Architecture { kLogistic, kMlp };
enum class Optimizer { kAdam, kSgd };

absl::StatusOr<Architecture> ParseArchitecture(std::string_view name);
std::string_view ArchitectureName(Architecture arch);
absl::StatusOr<Optimizer> ParseOptimizer(std::string_view name);
std::string_view OptimizerName(Optimizer opt);

struct TrainConfig {
  PrivacyParams privacy;
  Architecture architecture = Architecture::kLogistic;
  int hidden_width = 32;  // MLP only
  Optimizer optimizer = Optimizer::kAdam;
  double learning_rate = 0.01;
};

absl::Status ValidateTrainConfig(const TrainConfig& config);

struct ModelInstance {
  Architecture architecture = Architecture::kLogistic;
  int64_t m = 0;
  int num_labels = 0;
  int hidden_width = 0;
  uint64_t seed = 0;
  std::vector<double> parameters;
};

int64_t ParameterCount(Architecture arch, int64_t m, int labels, int hidden);

// Logistic models start at zero; MLP weights are Glorot-uniform from `rng`.
ModelInstance InitModel(const TrainConfig& config, int64_t m, int labels,
                        std::mt19937_64& rng);

absl::Status ValidateModel(const ModelInstance& model);

// Class logits and softmax probabilities for one feature vector.
std::vector<double> Logits(const ModelInstance& model, std::span<const double> x);
std::vector<double> Softmax(std::span<const double> logits);

// Cross-entropy loss of one example; its gradient w.r.t. the parameters is
// written to `grad` (resized to the parameter count).
double ExampleLossAndGradient(const ModelInstance& model,
                              std::span<const double> x, int label,
                              std::vector<double>& grad);

double MeanLoss(const ModelInstance& model, const Dataset& data);
double Accuracy(const ModelInstance& model, const Dataset& data);

// g * min(1, C / ||g||_2). A zero vector passes through.
std::vector<double> ClipGradient(std::span<const double> g, double clip_norm);

struct OptimizerState {
  int64_t t = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
};

struct StepStats {
  int64_t batch_size = 0;
  double max_clipped_norm = 0.0;  // over the batch, <= C
};

// One noisy update. An empty batch still adds noise.
StepStats SgmStep(ModelInstance& model, OptimizerState& state,
                  const Dataset& data, const TrainConfig& config,
                  std::mt19937_64& rng);

// `steps` SGM updates from a fresh model. The seed drives initialization,
// sampling and noise. Fails if the parameters become non-finite.
absl::StatusOr<ModelInstance> TrainInstance(const Dataset& data,
                                            const TrainConfig& config,
                                            uint64_t seed);

// Seed of instance `index` derived from a master seed (SplitMix64).
uint64_t InstanceSeed(uint64_t master_seed, int64_t index);

struct Ensemble {
  TrainConfig config;
  uint64_t master_seed = 0;
  int64_t train_size = 0;
  std::optional<int64_t> subset_size;
  std::vector<ModelInstance> instances;
  // Index and reason for every instance that failed to train.
  std::vector<std::pair<int64_t, std::string>> failures;

  // The guarantee that holds for the full training set.
  absl::StatusOr<PrivacyParams> AccountedParams() const;
};

// Trains `instances` models in parallel. With `subset_size`, each instance
// trains on its own uniform subset of that size. Results do not depend on
// `threads` (<= 0 picks the hardware concurrency). Failed instances are
// listed in `failures`; the call fails only if all of them fail.
absl::StatusOr<Ensemble> TrainEnsemble(const Dataset& data,
                                       const TrainConfig& config,
                                       int64_t instances,
                                       std::optional<int64_t> subset_size,
                                       uint64_t seed, int threads = 0);

struct Inference {
  std::vector<int64_t> counts;  // votes per label
  ScoreMatrix scores;           // softmax row per instance
};

absl::StatusOr<Inference> Infer(const Ensemble& ensemble,
                                std::span<const double> x);

// Vote and score tables over every row of `test`; sample ids are row
// indices.
absl::Status InferDataset(const Ensemble& ensemble, const Dataset& test,
                          VoteTable* votes, ScoreTable* scores);

}  // namespace dpcert

#endif  // DPCERT_DP_TRAINER_H_
