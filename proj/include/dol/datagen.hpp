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

// Training data generation: sample contexts, roll out the simulator for a
// plan of route selections, and fit a non-negative weight matrix per context
// by regularized least squares.

#ifndef DOL_DATAGEN_HPP_
#define DOL_DATAGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dol/common.hpp"
#include "dol/gradient.hpp"
#include "dol/predictor.hpp"
#include "dol/simulator.hpp"
#include "json.hpp"

namespace dol {

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  // Throws InvalidArgument naming `what` if lo > hi or either end is not finite.
  void validate(const std::string& what) const;
};

// Sampling ranges for the context vector
// [C_x, C_y, r] per UAV followed by [a, b, omega_o].
struct ContextRanges {
  Range center_x{150.0, 1050.0};
  Range center_y{150.0, 1050.0};
  Range radius{30.0, 60.0};
  Range wind_a{2.0, 8.0};
  Range wind_b{1.5, 3.0};
  Range wind_direction{0.0, 360.0};
  // When positive, each context first draws a square window of this side
  // inside the center ranges and places every UAV center uniformly in it, so
  // the fleet of one context works in one area. Zero draws every center
  // independently over the full ranges.
  double cluster_window = 100.0;

  void validate() const;
};

inline std::size_t context_dim(std::size_t n_uavs) { return 3 * n_uavs + 3; }

// Uniform draws inside the ranges; omega_o is reduced to [0, 360).
std::vector<std::vector<double>> generate_contexts(std::size_t n, std::size_t n_uavs,
                                                   const ContextRanges& ranges, Rng& rng);

// Everything that defines a world apart from the per-context UAV fleet and
// wind.
struct WorldConfig {
  std::size_t grid_rows = 9;
  std::size_t grid_cols = 9;
  double spacing = 150.0;
  std::size_t route_count = 15;
  double removal_fraction = 0.94;
  std::size_t partitions = 9;
  std::vector<double> gammas{0.001, 0.5, 1.0};
  std::size_t n_uavs = 10;
  std::size_t routes_to_select = 3;  // n_g, a cardinality limit
  UavSpec uav;                       // center and radius come from the context
  EnergyParams energy;
  double duration = 200.0;
  ContextRanges ranges;
  std::uint64_t map_seed = 1;

  void validate() const;
};

struct World {
  WorldConfig config;
  Scenario base;  // graph, routes, energy and duration; fleet left empty
  NodePartition partition;
  BasisFamily basis;
  std::shared_ptr<const CoverageObjective> objective;
  Problem problem{nullptr, IndependenceSystem::cardinality(1)};

  std::size_t weight_rows() const { return partition.size(); }
  std::size_t weight_cols() const { return basis.size(); }
};

// Grid road map with the depot at the center node, candidate routes and a
// balanced graph partition, all drawn from streams of config.map_seed.
World build_world(const WorldConfig& config);

// The base scenario with the fleet and wind taken from z.
Scenario apply_context(const World& world, std::span<const double> z);

struct SelectionPlanConfig {
  std::size_t max_pairs = 60;       // all pairs if there are at most this many
  std::size_t random_subsets = 40;  // extra subsets of size routes_to_select
  bool include_empty = false;
};

// Singletons, pairs and random subsets, deduplicated, each sorted ascending.
std::vector<Selection> make_selection_plan(std::size_t ground_size, std::size_t subset_size,
                                           const SelectionPlanConfig& config, Rng& rng);

struct Evaluation {
  Selection selection;
  double value = 0.0;  // UAVs recharged, averaged over repeats
};

struct RawContextRecord {
  std::vector<double> z;
  std::vector<Evaluation> evaluations;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
};

// Rolls out `repeats` missions with seeds drawn from make_stream(seed) and
// scores every planned selection on the same outcomes.
RawContextRecord rollout_raw_data(const World& world, std::span<const double> z,
                                  std::span<const Selection> plan, std::size_t repeats,
                                  std::uint64_t seed);

struct FitConfig {
  double xi = 1e-4;
  double tolerance = 1e-8;  // on the projected-gradient norm
  std::size_t max_iterations = 100000;

  void validate() const;
};

struct FitResult {
  std::vector<double> w;
  double objective = 0.0;  // ||A w - y||^2 + xi ||w||^2
  double residual = 0.0;   // ||A w - y||^2
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t rank = 0;  // numerical rank of A
  bool identifiable = false;
};

// min_{w >= 0} ||A w - y||^2 + xi ||w||^2 by projected gradient descent from
// w = 0 with Barzilai-Borwein steps and Armijo backtracking, so the objective
// never increases. If `trace` is non-null it receives the objective after
// every iteration, starting with the value at w = 0.
FitResult fit_nonnegative_least_squares(const Matrix& design, std::span<const double> target,
                                        const FitConfig& config,
                                        std::vector<double>* trace = nullptr);

// Numerical rank from a column-pivoted QR.
std::size_t matrix_rank(const Matrix& a);

// Ratio of the largest to the smallest singular value; infinite when A has
// fewer rows than columns or is singular.
double condition_number(const Matrix& a);

// One design row per evaluation: the flattened basis values of its selection.
Matrix design_matrix(const RawContextRecord& record, const BasisObjective& objective);

struct WeightFit {
  DatasetSample sample;
  FitResult fit;
};

WeightFit fit_weights(const RawContextRecord& record, const BasisObjective& objective,
                      const FitConfig& config);

struct AssembledDataset {
  std::vector<DatasetSample> train;
  std::vector<DatasetSample> test;
  std::size_t rank_deficient = 0;
  std::size_t not_converged = 0;
};

// Fits every record and splits by a seeded shuffle; the train share is
// round(train_fraction * n).
AssembledDataset assemble_dataset(std::span<const RawContextRecord> records,
                                  const BasisObjective& objective, const FitConfig& config,
                                  double train_fraction, std::uint64_t seed);

nlohmann::json to_json(const DatasetSample& sample);
DatasetSample dataset_sample_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RawContextRecord& record);
RawContextRecord raw_record_from_json(const nlohmann::json& j);

// One JSON object per line. Reading reports the offending line on failure.
void write_dataset_jsonl(const std::string& path, std::span<const DatasetSample> samples);
std::vector<DatasetSample> read_dataset_jsonl(const std::string& path);
void write_raw_jsonl(const std::string& path, std::span<const RawContextRecord> records);
std::vector<RawContextRecord> read_raw_jsonl(const std::string& path);
// Columns z0..z{d-1}, w0..w{k-1}, fit_residual.
void write_dataset_csv(const std::string& path, std::span<const DatasetSample> samples);

}  // namespace dol

#endif  // DOL_DATAGEN_HPP_
