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

#include "dol/datagen.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

namespace dol {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

double sum_squares(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// r = A w - y
void residual_vector(const Matrix& a, std::span<const double> w, std::span<const double> y,
                     std::vector<double>& r) {
  r.assign(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    double s = -y[i];
    for (std::size_t j = 0; j < a.cols(); ++j) s += row[j] * w[j];
    r[i] = s;
  }
}

double fit_objective(const Matrix& a, std::span<const double> w, std::span<const double> y,
                     double xi, std::vector<double>& r) {
  residual_vector(a, w, y, r);
  return sum_squares(r) + xi * sum_squares(w);
}

// g = 2 A^T r + 2 xi w
void fit_gradient(const Matrix& a, std::span<const double> w, std::span<const double> r,
                  double xi, std::vector<double>& g) {
  g.assign(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) g[j] += 2.0 * row[j] * r[i];
  }
  for (std::size_t j = 0; j < a.cols(); ++j) g[j] += 2.0 * xi * w[j];
}

double projected_gradient_norm(std::span<const double> w, std::span<const double> g) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double pg = w[j] > 0.0 ? g[j] : std::min(g[j], 0.0);
    s += pg * pg;
  }
  return std::sqrt(s);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path);
  return out;
}

template <typename T, typename Parse>
std::vector<T> read_jsonl(const std::string& path, Parse parse) {
  std::ifstream in = open_input(path);
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw RuntimeError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

void Range::validate(const std::string& what) const {
  require(std::isfinite(lo) && std::isfinite(hi), what + " range must be finite");
  require(lo <= hi, what + " range is empty (lo > hi)");
}

void ContextRanges::validate() const {
  center_x.validate("center_x");
  center_y.validate("center_y");
  radius.validate("radius");
  wind_a.validate("wind_a");
  wind_b.validate("wind_b");
  wind_direction.validate("wind_direction");
  require(radius.lo > 0.0, "radius range must be positive");
  require(wind_a.lo > 0.0, "wind_a range must be positive");
  require(wind_b.lo > 0.0, "wind_b range must be positive");
  require(cluster_window >= 0.0 && std::isfinite(cluster_window),
          "cluster_window must be finite and non-negative");
}

std::vector<std::vector<double>> generate_contexts(std::size_t n, std::size_t n_uavs,
                                                   const ContextRanges& ranges, Rng& rng) {
  ranges.validate();
  std::vector<std::vector<double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> z;
    z.reserve(context_dim(n_uavs));
    Range cx = ranges.center_x;
    Range cy = ranges.center_y;
    if (ranges.cluster_window > 0.0) {
      const auto window = [&](const Range& r) {
        const double side = std::min(ranges.cluster_window, r.hi - r.lo);
        const double lo = uniform(rng, r.lo, r.hi - side);
        return Range{lo, lo + side};
      };
      cx = window(ranges.center_x);
      cy = window(ranges.center_y);
    }
    for (std::size_t u = 0; u < n_uavs; ++u) {
      z.push_back(uniform(rng, cx.lo, cx.hi));
      z.push_back(uniform(rng, cy.lo, cy.hi));
      z.push_back(uniform(rng, ranges.radius.lo, ranges.radius.hi));
    }
    z.push_back(uniform(rng, ranges.wind_a.lo, ranges.wind_a.hi));
    z.push_back(uniform(rng, ranges.wind_b.lo, ranges.wind_b.hi));
    double dir = std::fmod(uniform(rng, ranges.wind_direction.lo, ranges.wind_direction.hi), 360.0);
    if (dir < 0.0) dir += 360.0;
    z.push_back(dir);
    out.push_back(std::move(z));
  }
  return out;
}

void WorldConfig::validate() const {
  require(grid_rows >= 1 && grid_cols >= 1 && grid_rows * grid_cols >= 2,
          "grid needs at least two nodes");
  require(spacing > 0.0, "grid spacing must be positive");
  require(route_count >= 1, "route_count must be at least 1");
  require(removal_fraction >= 0.0 && removal_fraction < 1.0,
          "removal_fraction must lie in [0, 1)");
  require(partitions >= 1 && partitions <= grid_rows * grid_cols,
          "partitions must lie in [1, node count]");
  require(n_uavs >= 1, "n_uavs must be at least 1");
  require(routes_to_select >= 1 && routes_to_select <= route_count,
          "routes_to_select must lie in [1, route_count]");
  require(duration > 0.0, "duration must be positive");
  BasisFamily{gammas}.validate();
  UavSpec probe = uav;
  probe.radius = 1.0;
  probe.validate();
  energy.validate();
  ranges.validate();
}

World build_world(const WorldConfig& config) {
  config.validate();
  World world;
  world.config = config;
  const auto center =
      static_cast<NodeId>((config.grid_rows / 2) * config.grid_cols + config.grid_cols / 2);
  world.base.graph = RoadGraph::grid(config.grid_rows, config.grid_cols, config.spacing, center);
  world.base.energy = config.energy;
  world.base.duration = config.duration;
  Rng route_rng = make_stream(config.map_seed, 0);
  world.base.routes = generate_candidate_routes(world.base.graph, config.route_count,
                                                config.removal_fraction, route_rng);
  Rng part_rng = make_stream(config.map_seed, 1);
  world.partition = partition_graph(world.base.graph, config.partitions, part_rng);
  world.basis = BasisFamily{config.gammas};
  world.objective =
      std::make_shared<CoverageObjective>(world.base.routes, world.partition, world.basis);
  world.problem = Problem{world.objective,
                          IndependenceSystem::cardinality(config.routes_to_select)};
  return world;
}

Scenario apply_context(const World& world, std::span<const double> z) {
  const std::size_t n = world.config.n_uavs;
  require(z.size() == context_dim(n), "context has length " + std::to_string(z.size()) +
                                          ", expected " + std::to_string(context_dim(n)));
  Scenario s = world.base;
  s.fleet.clear();
  for (std::size_t u = 0; u < n; ++u) {
    UavSpec spec = world.config.uav;
    spec.center = {z[3 * u], z[3 * u + 1]};
    spec.radius = z[3 * u + 2];
    s.fleet.push_back(spec);
  }
  s.wind = {z[3 * n], z[3 * n + 1], z[3 * n + 2]};
  s.wind.validate();
  return s;
}

std::vector<Selection> make_selection_plan(std::size_t ground_size, std::size_t subset_size,
                                           const SelectionPlanConfig& config, Rng& rng) {
  require(ground_size >= 1, "ground set is empty");
  require(subset_size >= 1 && subset_size <= ground_size, "subset size out of range");
  std::set<Selection> seen;
  std::vector<Selection> plan;
  const auto add = [&](Selection s) {
    std::sort(s.begin(), s.end());
    if (seen.insert(s).second) plan.push_back(std::move(s));
  };
  if (config.include_empty) add({});
  for (RouteId r = 0; r < ground_size; ++r) add({r});

  std::vector<Selection> pairs;
  for (RouteId a = 0; a < ground_size; ++a) {
    for (RouteId b = a + 1; b < ground_size; ++b) pairs.push_back({a, b});
  }
  if (pairs.size() > config.max_pairs) {
    shuffle(pairs, rng);
    pairs.resize(config.max_pairs);
  }
  for (auto& p : pairs) add(std::move(p));

  std::vector<RouteId> ids(ground_size);
  std::iota(ids.begin(), ids.end(), RouteId{0});
  for (std::size_t k = 0; k < config.random_subsets; ++k) {
    shuffle(ids, rng);
    add(Selection(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(subset_size)));
  }
  return plan;
}

RawContextRecord rollout_raw_data(const World& world, std::span<const double> z,
                                  std::span<const Selection> plan, std::size_t repeats,
                                  std::uint64_t seed) {
  require(repeats >= 1, "repeats must be at least 1");
  require(!plan.empty(), "selection plan is empty");
  const Scenario scenario = apply_context(world, z);
  RawContextRecord rec;
  rec.z.assign(z.begin(), z.end());
  rec.repeats = repeats;
  rec.seed = seed;
  std::vector<double> totals(plan.size(), 0.0);
  Rng seeds = make_stream(seed);
  for (std::size_t r = 0; r < repeats; ++r) {
    const MissionOutcome outcome = simulate(scenario, seeds());
    for (std::size_t i = 0; i < plan.size(); ++i) {
      totals[i] += static_cast<double>(evaluate_selection(plan[i], outcome, scenario.routes));
    }
  }
  for (std::size_t i = 0; i < plan.size(); ++i) {
    rec.evaluations.push_back({plan[i], totals[i] / static_cast<double>(repeats)});
  }
  return rec;
}

void FitConfig::validate() const {
  require(xi >= 0.0 && std::isfinite(xi), "xi must be finite and non-negative");
  require(tolerance > 0.0, "fit tolerance must be positive");
  require(max_iterations >= 1, "max_iterations must be at least 1");
}

namespace {

Eigen::MatrixXd to_eigen(const Matrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
    }
  }
  return m;
}

}  // namespace

std::size_t matrix_rank(const Matrix& a) {
  if (a.size() == 0) return 0;
  return static_cast<std::size_t>(
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(to_eigen(a)).rank());
}

double condition_number(const Matrix& a) {
  if (a.size() == 0) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(to_eigen(a)).singularValues();
  const double smallest = sv(sv.size() - 1);
  if (a.rows() < a.cols() || smallest == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smallest;
}

FitResult fit_nonnegative_least_squares(const Matrix& design, std::span<const double> target,
                                        const FitConfig& config, std::vector<double>* trace) {
  config.validate();
  require(design.rows() == target.size(), "design rows and target length differ");
  require(design.all_finite(), "design matrix has non-finite entries");
  for (double y : target) require(std::isfinite(y), "target has non-finite entries");
  const std::size_t k = design.cols();

  FitResult res;
  res.rank = matrix_rank(design);
  res.identifiable = res.rank == k;
  res.w.assign(k, 0.0);

  std::vector<double> r, g, w_new(k), r_new(design.rows()), g_new, d(k), ad(design.rows());
  double f = fit_objective(design, res.w, target, config.xi, r);
  fit_gradient(design, res.w, r, config.xi, g);
  if (trace) trace->assign(1, f);

  // Initial step from the Frobenius bound on the Lipschitz constant.
  const double lipschitz = 2.0 * (sum_squares(design.flat()) + config.xi);
  double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    if (projected_gradient_norm(res.w, g) < config.tolerance) {
      res.converged = true;
      break;
    }
    // The change in objective is expanded around w instead of taken as a
    // difference of two large values, so the Armijo test stays meaningful
    // down to tiny steps.
    double change = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      double slope = 0.0, dd = 0.0, wd = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        w_new[j] = std::max(0.0, res.w[j] - step * g[j]);
        d[j] = w_new[j] - res.w[j];
        slope += g[j] * d[j];
        dd += d[j] * d[j];
        wd += res.w[j] * d[j];
      }
      if (dd == 0.0) break;
      double rad = 0.0, adad = 0.0;
      for (std::size_t i = 0; i < design.rows(); ++i) {
        const auto row = design.row(i);
        double v = 0.0;
        for (std::size_t j = 0; j < k; ++j) v += row[j] * d[j];
        ad[i] = v;
        rad += r[i] * v;
        adad += v * v;
      }
      change = 2.0 * rad + adad + config.xi * (2.0 * wd + dd);
      if (change <= 1e-4 * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    res.iterations = it + 1;
    if (!accepted) break;  // no representable descent step is left

    for (std::size_t i = 0; i < design.rows(); ++i) r_new[i] = r[i] + ad[i];
    fit_gradient(design, w_new, r_new, config.xi, g_new);
    // Barzilai-Borwein step for the next iteration.
    double sy = 0.0, ss = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      sy += d[j] * (g_new[j] - g[j]);
      ss += d[j] * d[j];
    }
    step = sy > 0.0 ? ss / sy : 1.0 / lipschitz;
    res.w.swap(w_new);
    g.swap(g_new);
    r.swap(r_new);
    f += change;
    if (trace) trace->push_back(f);
  }
  if (!res.converged) res.converged = projected_gradient_norm(res.w, g) < config.tolerance;
  res.objective = fit_objective(design, res.w, target, config.xi, r);
  res.residual = sum_squares(r);
  return res;
}

Matrix design_matrix(const RawContextRecord& record, const BasisObjective& objective) {
  Matrix a(record.evaluations.size(), objective.weight_rows() * objective.weight_cols());
  for (std::size_t i = 0; i < record.evaluations.size(); ++i) {
    const Matrix phi = objective.basis_values(record.evaluations[i].selection);
    std::copy(phi.flat().begin(), phi.flat().end(), a.row(i).begin());
  }
  return a;
}

WeightFit fit_weights(const RawContextRecord& record, const BasisObjective& objective,
                      const FitConfig& config) {
  require(!record.evaluations.empty(), "record has no evaluations");
  const Matrix a = design_matrix(record, objective);
  std::vector<double> y;
  for (const auto& e : record.evaluations) y.push_back(e.value);
  WeightFit out;
  out.fit = fit_nonnegative_least_squares(a, y, config);
  out.sample.z = record.z;
  out.sample.w = Matrix(objective.weight_rows(), objective.weight_cols(), out.fit.w);
  out.sample.fit_residual = out.fit.residual;
  return out;
}

AssembledDataset assemble_dataset(std::span<const RawContextRecord> records,
                                  const BasisObjective& objective, const FitConfig& config,
                                  double train_fraction, std::uint64_t seed) {
  require(train_fraction >= 0.0 && train_fraction <= 1.0, "train_fraction must lie in [0, 1]");
  AssembledDataset out;
  std::vector<DatasetSample> all;
  for (const auto& rec : records) {
    WeightFit wf = fit_weights(rec, objective, config);
    out.rank_deficient += wf.fit.identifiable ? 0 : 1;
    out.not_converged += wf.fit.converged ? 0 : 1;
    all.push_back(std::move(wf.sample));
  }
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_stream(seed);
  shuffle(order, rng);
  const auto n_train =
      static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(all.size())));
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.train : out.test).push_back(std::move(all[order[i]]));
  }
  return out;
}

nlohmann::json to_json(const DatasetSample& s) {
  return {{"z", s.z},
          {"w", {{"rows", s.w.rows()}, {"cols", s.w.cols()}, {"data", s.w.flat()}}},
          {"fit_residual", s.fit_residual}};
}

DatasetSample dataset_sample_from_json(const nlohmann::json& j) {
  DatasetSample s;
  s.z = j.at("z").get<std::vector<double>>();
  const auto& w = j.at("w");
  s.w = Matrix(w.at("rows").get<std::size_t>(), w.at("cols").get<std::size_t>(),
               w.at("data").get<std::vector<double>>());
  s.fit_residual = j.value("fit_residual", 0.0);
  for (double v : s.w.flat()) {
    require(std::isfinite(v) && v >= 0.0, "weights must be finite and non-negative");
  }
  return s;
}

nlohmann::json to_json(const RawContextRecord& r) {
  nlohmann::json evals = nlohmann::json::array();
  for (const auto& e : r.evaluations) evals.push_back({{"selection", e.selection}, {"value", e.value}});
  return {{"z", r.z}, {"evaluations", evals}, {"repeats", r.repeats}, {"seed", r.seed}};
}

RawContextRecord raw_record_from_json(const nlohmann::json& j) {
  RawContextRecord r;
  r.z = j.at("z").get<std::vector<double>>();
  for (const auto& e : j.at("evaluations")) {
    r.evaluations.push_back({e.at("selection").get<Selection>(), e.at("value").get<double>()});
  }
  r.repeats = j.at("repeats").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

void write_dataset_jsonl(const std::string& path, std::span<const DatasetSample> samples) {
  std::ofstream out = open_output(path);
  for (const auto& s : samples) out << to_json(s).dump() << '\n';
}

std::vector<DatasetSample> read_dataset_jsonl(const std::string& path) {
  return read_jsonl<DatasetSample>(path, dataset_sample_from_json);
}

void write_raw_jsonl(const std::string& path, std::span<const RawContextRecord> records) {
  std::ofstream out = open_output(path);
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<RawContextRecord> read_raw_jsonl(const std::string& path) {
  return read_jsonl<RawContextRecord>(path, raw_record_from_json);
}

void write_dataset_csv(const std::string& path, std::span<const DatasetSample> samples) {
  std::ofstream out = open_output(path);
  if (samples.empty()) {
    out << "fit_residual\n";
    return;
  }
  const std::size_t d = samples.front().z.size();
  const std::size_t k = samples.front().w.size();
  for (std::size_t i = 0; i < d; ++i) out << 'z' << i << ',';
  for (std::size_t i = 0; i < k; ++i) out << 'w' << i << ',';
  out << "fit_residual\n";
  for (const auto& s : samples) {
    require(s.z.size() == d && s.w.size() == k, "dataset samples differ in shape");
    for (double v : s.z) out << format_number(v) << ',';
    for (double v : s.w.flat()) out << format_number(v) << ',';
    out << format_number(s.fit_residual) << '\n';
  }
}

}  // namespace dol
