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

// dolctl: batch driver over the pipeline. Exit codes: 0 success, 1 runtime
// failure, 2 usage or configuration error.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dol/datagen.hpp"
#include "dol/demo.hpp"
#include "dol/pipeline.hpp"
#include "dol/predictor.hpp"

#ifndef DOL_GIT_DESCRIBE
#define DOL_GIT_DESCRIBE "unknown"
#endif

namespace fs = std::filesystem;
using namespace dol;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Raised for bad flag values that CLI11 cannot see, such as an unknown method.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_samples;
  std::optional<std::size_t> epochs;
  std::optional<double> epsilon;
  std::optional<std::size_t> sg_trials;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
}

void add_training_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--epsilon", o.epsilon, "smoothing strength");
  cmd->add_option("--sg-trials", o.sg_trials, "smoothed greedy trials per sample");
}

// Which part of the config the training flags override.
enum class Target { kTwoStage, kDol, kDemo };

// Config file (or defaults) with the command line overrides applied. For DOL
// --epochs sets the decision-loss epochs and leaves the warm-start fit alone.
PipelineConfig resolve_config(const CommonOptions& o, Target target) {
  PipelineConfig cfg =
      o.config_path.empty() ? default_pipeline_config() : load_pipeline_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (target == Target::kDemo) {
    if (o.n_samples) cfg.demo.n_samples = *o.n_samples;
    if (o.epochs) cfg.demo.train.epochs = *o.epochs;
    if (o.epsilon) cfg.demo.train.epsilon = *o.epsilon;
    if (o.sg_trials) cfg.demo.train.sg_trials = *o.sg_trials;
  } else {
    if (o.n_samples) cfg.data.n_samples = *o.n_samples;
    if (o.epochs) (target == Target::kDol ? cfg.dol.epochs : cfg.train.epochs) = *o.epochs;
    if (o.epsilon) cfg.train.regularizer.epsilon = *o.epsilon;
    if (o.sg_trials) cfg.train.sg_trials = *o.sg_trials;
  }
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("command line: ") + e.what());
  }
  return cfg;
}

RunManifest start_manifest(const std::string& command, const CommonOptions& o,
                           const PipelineConfig& cfg) {
  fs::create_directories(o.out_dir);
  RunManifest m;
  m.command = command;
  m.config_path = o.config_path;
  m.config = to_json(cfg);
  m.seed = cfg.seed;
  m.git_describe = DOL_GIT_DESCRIBE;
  m.output_dir = o.out_dir;
  m.started_at = utc_timestamp();
  return m;
}

void finish_manifest(RunManifest& m, const std::string& name) {
  m.finished_at = utc_timestamp();
  m.write((fs::path(m.output_dir) / name).string());
}

std::string in_dir(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

void check_samples(const World& world, const std::vector<DatasetSample>& samples,
                   const std::string& path) {
  const std::size_t dz = context_dim(world.config.n_uavs);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const DatasetSample& s = samples[i];
    if (s.z.size() != dz || s.w.rows() != world.weight_rows() ||
        s.w.cols() != world.weight_cols()) {
      throw RuntimeError(path + ": sample " + std::to_string(i) +
                         " does not match the configured scenario (context " +
                         std::to_string(s.z.size()) + " vs " + std::to_string(dz) + ", weights " +
                         std::to_string(s.w.rows()) + "x" + std::to_string(s.w.cols()) + " vs " +
                         std::to_string(world.weight_rows()) + "x" +
                         std::to_string(world.weight_cols()) + ")");
    }
  }
}

void check_model(const World& world, const Model& model, const std::string& path) {
  const MlpParams& p = model.params;
  if (p.input_dim() != context_dim(world.config.n_uavs) || p.out_rows() != world.weight_rows() ||
      p.out_cols() != world.weight_cols()) {
    throw RuntimeError(path + ": checkpoint shape " + std::to_string(p.input_dim()) + " -> " +
                       std::to_string(p.out_rows()) + "x" + std::to_string(p.out_cols()) +
                       " does not match the configured scenario");
  }
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const CommonOptions& o) {
  const PipelineConfig cfg = resolve_config(o, Target::kTwoStage);
  RunManifest m = start_manifest("gen-data", o, cfg);
  if (cfg.data.n_samples == 0) std::cerr << "warning: --n-samples 0 gives an empty dataset\n";

  const World world = build_world(cfg.world);
  const GeneratedData data = generate_dataset(world, cfg.data, cfg.seed);
  if (data.plan_too_small) {
    std::cerr << "warning: " << data.plan_size << " planned selections for "
              << world.weight_rows() * world.weight_cols() << " weights per context\n";
  }

  const auto raw = in_dir(o.out_dir, "raw.jsonl");
  const auto train = in_dir(o.out_dir, "train.jsonl");
  const auto test = in_dir(o.out_dir, "test.jsonl");
  const auto train_csv = in_dir(o.out_dir, "train.csv");
  const auto test_csv = in_dir(o.out_dir, "test.csv");
  write_raw_jsonl(raw, data.raw);
  write_dataset_jsonl(train, data.dataset.train);
  write_dataset_jsonl(test, data.dataset.test);
  write_dataset_csv(train_csv, data.dataset.train);
  write_dataset_csv(test_csv, data.dataset.test);

  m.outputs = {{"raw", raw}, {"train", train}, {"test", test},
               {"train_csv", train_csv}, {"test_csv", test_csv}};
  finish_manifest(m, "manifest_gen-data.json");
  std::cout << data.dataset.train.size() << " train and " << data.dataset.test.size()
            << " test samples, weights " << world.weight_rows() << "x" << world.weight_cols()
            << ", " << data.dataset.rank_deficient << " rank deficient, "
            << data.dataset.not_converged << " not converged\n";
  return kExitOk;
}

int cmd_train(const CommonOptions& o, const std::string& method_flag, std::string data_dir) {
  const auto method = parse_method(method_flag);
  if (!method || *method == Method::kRandom) {
    throw UsageError("--method must be dol or two-stage, got '" + method_flag + "'");
  }
  const PipelineConfig cfg =
      resolve_config(o, *method == Method::kDol ? Target::kDol : Target::kTwoStage);
  if (data_dir.empty()) data_dir = o.out_dir;
  const std::string name = method_name(*method);
  RunManifest m = start_manifest("train", o, cfg);

  const auto train_path = in_dir(data_dir, "train.jsonl");
  if (!fs::exists(train_path)) throw RuntimeError("missing dataset " + train_path);
  const std::vector<DatasetSample> train = read_dataset_jsonl(train_path);
  if (train.empty()) throw RuntimeError(train_path + ": no training samples");
  const World world = build_world(cfg.world);
  check_samples(world, train, train_path);

  const TrainResult result = train_method(cfg, train, world.problem, *method, cfg.seed);

  const auto checkpoint = in_dir(o.out_dir, "checkpoint_" + name + ".json");
  const auto loss = in_dir(o.out_dir, "loss_" + name + ".csv");
  save_checkpoint(checkpoint, result.model, name, m.config);
  result.history.write_csv(loss);

  m.outputs = {{"dataset", train_path}, {"checkpoint", checkpoint}, {"loss", loss}};
  finish_manifest(m, "manifest_train_" + name + ".json");
  const auto losses = result.history.losses();
  std::cout << name << ": " << result.history.metric << " " << format_number(losses.front())
            << " -> " << format_number(losses.back()) << " over " << losses.size()
            << " epochs\n";
  return kExitOk;
}

int cmd_eval(const CommonOptions& o, const std::vector<std::string>& checkpoints,
             std::string data_dir) {
  const PipelineConfig cfg = resolve_config(o, Target::kTwoStage);
  if (data_dir.empty()) data_dir = o.out_dir;
  RunManifest m = start_manifest("eval", o, cfg);

  const auto test_path = in_dir(data_dir, "test.jsonl");
  if (!fs::exists(test_path)) throw RuntimeError("missing dataset " + test_path);
  const std::vector<DatasetSample> test = read_dataset_jsonl(test_path);
  if (test.empty()) throw RuntimeError(test_path + ": no test contexts");
  const World world = build_world(cfg.world);
  check_samples(world, test, test_path);

  std::vector<Checkpoint> loaded;
  loaded.reserve(checkpoints.size());
  for (const std::string& path : checkpoints) {
    loaded.push_back(load_checkpoint(path));
    check_model(world, loaded.back().model, path);
  }
  std::vector<NamedModel> methods;
  for (const Checkpoint& c : loaded) methods.push_back({c.method, &c.model});
  methods.push_back({method_name(Method::kRandom), nullptr});

  std::vector<std::vector<double>> contexts;
  for (const DatasetSample& s : test) contexts.push_back(s.z);
  const EvaluationTable table =
      evaluate_methods(world, contexts, methods, cfg.eval.rollouts, make_stream(cfg.seed, 9)());

  const auto csv = in_dir(o.out_dir, "eval.csv");
  const auto txt = in_dir(o.out_dir, "eval.txt");
  table.write_csv(csv);
  std::ofstream(txt) << table.pretty();

  m.outputs = {{"dataset", test_path}, {"checkpoints", checkpoints}, {"csv", csv}, {"text", txt}};
  finish_manifest(m, "manifest_eval.json");
  std::cout << table.pretty();
  return kExitOk;
}

int cmd_demo(const CommonOptions& o) {
  const PipelineConfig cfg = resolve_config(o, Target::kDemo);
  RunManifest m = start_manifest("demo-misalignment", o, cfg);

  nlohmann::json runs = nlohmann::json::array();
  nlohmann::json sweeps = nlohmann::json::array();
  for (const DemoCase& demo : {route_choice_case(), coverage_mix_case()}) {
    int closer = 0;
    for (std::size_t k = 0; k < cfg.demo.seeds; ++k) {
      const std::uint64_t seed = cfg.seed + k;
      const DemoRun run = run_demo(demo, cfg.demo.n_samples, cfg.demo.train, seed);
      const auto path =
          in_dir(o.out_dir, "demo_" + demo.name + "_seed" + std::to_string(seed) + ".csv");
      write_demo_sweep_csv(path, demo, run);
      runs.push_back(to_json(run));
      sweeps.push_back(path);
      closer += run.dol_closer();
    }
    std::cout << demo.name << ": dol boundary closer to optimal in " << closer << "/"
              << cfg.demo.seeds << " seeds\n";
  }
  const auto boundaries = in_dir(o.out_dir, "boundaries.json");
  std::ofstream(boundaries) << runs.dump(2) << '\n';

  m.outputs = {{"boundaries", boundaries}, {"sweeps", sweeps}};
  finish_manifest(m, "manifest_demo-misalignment.json");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-focused route selection: data, training, evaluation and demos"};
  app.require_subcommand(1);

  CommonOptions gen_opts, train_opts, eval_opts, demo_opts;
  std::string method;
  std::string train_data, eval_data;
  std::vector<std::string> checkpoints;

  CLI::App* gen = app.add_subcommand("gen-data", "simulate contexts and fit weight targets");
  add_common(gen, gen_opts);
  gen->add_option("--n-samples", gen_opts.n_samples, "contexts before the train/test split");

  CLI::App* train = app.add_subcommand("train", "train a predictor on a generated dataset");
  add_common(train, train_opts);
  add_training_flags(train, train_opts);
  train->add_option("--method", method, "dol or two-stage")->required();
  train->add_option("--data", train_data, "dataset directory (default: --out)");

  CLI::App* eval = app.add_subcommand("eval", "compare checkpoints against random selection");
  add_common(eval, eval_opts);
  eval->add_option("--checkpoint", checkpoints, "checkpoint files, repeatable");
  eval->add_option("--data", eval_data, "dataset directory (default: --out)");

  CLI::App* demo = app.add_subcommand("demo-misalignment", "decision boundary demos");
  add_common(demo, demo_opts);
  add_training_flags(demo, demo_opts);
  demo->add_option("--n-samples", demo_opts.n_samples, "samples per demo run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_data(gen_opts);
    if (*train) return cmd_train(train_opts, method, train_data);
    if (*eval) return cmd_eval(eval_opts, checkpoints, eval_data);
    if (*demo) return cmd_demo(demo_opts);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    // ConfigError derives from InvalidArgument.
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
