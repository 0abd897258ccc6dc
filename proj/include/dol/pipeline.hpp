// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end pipeline pieces shared by the command line driver and the
// acceptance suite: run configuration, seeded dataset generation, the
// comparison of learned models against random selection, and run manifests.

#ifndef DOL_PIPELINE_HPP_
#define DOL_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dol/datagen.hpp"
#include "dol/demo.hpp"
#include "dol/predictor.hpp"
#include "json.hpp"

namespace dol {

// A configuration problem traced back to its source, formatted
// "<source>:<line>: <message>" when the line is known.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class Method { kDol, kTwoStage, kRandom };

// "dol", "two-stage", "random".
std::string method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

struct DataGenConfig {
  std::size_t n_samples = 250;  // contexts, before the train/test split
  std::size_t repeats = 10;     // mission rollouts per context
  double train_fraction = 0.8;
  SelectionPlanConfig plan;
  FitConfig fit;

  void validate() const;
};

// How the score-function baseline of DOL training is chosen.
enum class BaselineMode {
  kNone,
  kLabelGreedyMean,  // mean of f(greedy(w), w) over the training labels
};

// Decision-loss training schedule. With a warm start, DOL fine-tunes the
// two-stage model trained under the same seed instead of a fresh network.
struct DolSchedule {
  bool warm_start = true;
  std::size_t epochs = 20;
  double learning_rate = 1e-3;

  void validate() const;
};

struct EvalConfig {
  std::size_t rollouts = 10;  // fresh missions per test context

  void validate() const;
};

struct DemoSettings {
  std::size_t n_samples = 100;
  std::size_t seeds = 5;
  DemoTrainConfig train;

  void validate() const;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  WorldConfig world;
  DataGenConfig data;
  TrainConfig train;
  BaselineMode baseline = BaselineMode::kLabelGreedyMean;
  DolSchedule dol;
  EvalConfig eval;
  DemoSettings demo;

  void validate() const;
};

// Library defaults with the training settings used for the learned
// comparison: Adam at 3e-3, epsilon 0.5 and 100 estimator trials, and DOL
// warm-started from the two-stage fit for 20 epochs at 1e-3.
PipelineConfig default_pipeline_config();

nlohmann::json to_json(const PipelineConfig& config);

// Overlays the keys present in `text` on default_pipeline_config(). Unknown
// keys, wrong types and out-of-range values throw ConfigError naming the
// line of the offending key; `source` names the text in messages.
PipelineConfig parse_pipeline_config(const std::string& text, const std::string& source);
PipelineConfig load_pipeline_config(const std::string& path);

// Line (1-based) of every key and array element in a JSON text, addressed by
// JSON pointer ("" for the root). Used to place config errors.
std::vector<std::pair<std::string, std::size_t>> json_pointer_lines(std::string_view text);

struct GeneratedData {
  std::vector<RawContextRecord> raw;
  AssembledDataset dataset;
  std::size_t plan_size = 0;
  // Fewer planned selections than weight entries; the fit cannot be
  // identified from the plan alone.
  bool plan_too_small = false;
};

// Contexts from make_stream(seed, 0), the selection plan from
// make_stream(seed, 1), rollouts of context i seeded by make_stream(seed, 2, i)
// and the split by make_stream(seed, 3).
GeneratedData generate_dataset(const World& world, const DataGenConfig& config,
                               std::uint64_t seed);

// Mean of f(greedy(w_i), w_i) over the samples; 0 for an empty set.
double label_greedy_baseline(std::span<const DatasetSample> samples, const Problem& problem);

// TrainConfig for one training run: the configured trainer settings, the
// given seed and the baseline resolved against the training labels.
TrainConfig resolve_train_config(const PipelineConfig& config,
                                 std::span<const DatasetSample> train, const Problem& problem,
                                 std::uint64_t seed);

// Trains one method under resolve_train_config(config, train, problem, seed).
// Two-stage uses config.train as is. DOL uses the epochs and learning rate of
// config.dol, starting from the two-stage model when config.dol.warm_start.
TrainResult train_method(const PipelineConfig& config, std::span<const DatasetSample> train,
                         const Problem& problem, Method method, std::uint64_t seed);

// Uniform choice among addable routes at every step until none remain. Under
// a cardinality limit this is a uniform random subset of the limit size.
Selection random_selection(const Problem& problem, Rng& rng);

struct MethodScore {
  std::string method;
  double mean = 0.0;  // UAVs recharged per mission
  double std = 0.0;   // sample std over all context x rollout missions
  std::size_t missions = 0;
};

struct EvaluationTable {
  std::vector<MethodScore> rows;
  std::size_t contexts = 0;
  std::size_t rollouts = 0;

  const MethodScore& row(const std::string& method) const;
  // Columns method,mean,std,missions.
  void write_csv(const std::string& path) const;
  // One "name  mean +- std" line per method.
  std::string pretty() const;
};

// A model to evaluate; a null model stands for uniform random selection.
struct NamedModel {
  std::string name;
  const Model* model = nullptr;
};

// Every method faces the same missions: rollout r of context i simulates
// with make_stream(seed, 2 i, r) and random picks use make_stream(seed,
// 2 i + 1, r). Learned models select by deterministic greedy on their
// prediction.
EvaluationTable evaluate_methods(const World& world,
                                 std::span<const std::vector<double>> contexts,
                                 std::span<const NamedModel> methods, std::size_t rollouts,
                                 std::uint64_t seed);

struct RunManifest {
  std::string command;
  std::string config_path;  // empty when defaults were used
  nlohmann::json config;    // resolved configuration
  std::uint64_t seed = 0;
  std::string git_describe;
  std::string output_dir;
  std::string started_at;   // UTC, ISO 8601
  std::string finished_at;
  nlohmann::json outputs = nlohmann::json::object();

  nlohmann::json to_json() const;
  void write(const std::string& path) const;
};

// Current UTC time, "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace dol

#endif  // DOL_PIPELINE_HPP_
