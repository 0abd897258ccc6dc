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

#include "dol/demo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>

#include "dol/predictor.hpp"

namespace dol {
namespace {

// Box-Muller on uniform01 so draws are identical across standard libraries.
double standard_normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string decision_label(const Selection& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += '+';
    out += std::to_string(s[i]);
  }
  return out;
}

}  // namespace

DemoCase route_choice_case(double noise_std) {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw InvalidArgument("noise_std must be finite and non-negative");
  }
  DemoCase demo;
  demo.name = "route_choice";
  auto objective = std::make_shared<AreaCoverageObjective>(AreaCoverageObjective::modular(3));
  demo.problem = Problem{objective, IndependenceSystem::partition({PartitionBlock{{2}, 1},
                                                                   PartitionBlock{{0, 1}, 1}})};
  demo.z_lo = 0.0;
  demo.z_hi = 6.0;
  demo.search_lo = 0.0;
  demo.search_hi = 6.0;
  demo.truth = [](double z) { return std::vector<double>{4.5 - 0.2 * z, 0.25 * z * z, 3.0}; };
  demo.observe = [truth = demo.truth, noise_std](double z, Rng& rng) {
    std::vector<double> w = truth(z);
    for (double& v : w) v += noise_std * standard_normal(rng);
    return w;
  };
  return demo;
}

DemoCase coverage_mix_case(double noise_std) {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw InvalidArgument("noise_std must be finite and non-negative");
  }
  DemoCase demo;
  demo.name = "coverage_mix";
  // s1 covers cells {0, 1}, s2 covers {1, 2}, s3 covers {3}. Only cells 2
  // and 3 separate the two feasible bases.
  auto objective = std::make_shared<AreaCoverageObjective>(
      std::vector<std::vector<std::size_t>>{{0, 1}, {1, 2}, {3}},
      std::vector<std::vector<double>>{{10.0, 2.0, 1.0, 2.8}, {10.0, 2.0, 2.5, 1.5}});
  demo.problem = Problem{objective, IndependenceSystem::partition({PartitionBlock{{0}, 1},
                                                                   PartitionBlock{{1, 2}, 1}})};
  demo.z_lo = 0.0;
  demo.z_hi = 3.0;
  demo.search_lo = -1.5;
  demo.search_hi = 3.0;
  demo.truth = [](double z) {
    const double beta = std::tanh(z);
    return std::vector<double>{beta, 1.0 - beta};
  };
  demo.observe = [truth = demo.truth, noise_std](double z, Rng& rng) {
    const double beta = std::clamp(truth(z)[0] + noise_std * standard_normal(rng), 0.0, 1.0);
    return std::vector<double>{beta, 1.0 - beta};
  };
  return demo;
}

std::vector<DemoSample> sample_demo_data(const DemoCase& demo, std::size_t n,
                                         std::uint64_t seed) {
  Rng rng = make_stream(seed);
  std::vector<DemoSample> data;
  data.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = uniform(rng, demo.z_lo, demo.z_hi);
    std::vector<double> w = demo.observe(z, rng);
    const std::size_t k = w.size();
    data.push_back({z, Matrix(1, k, std::move(w))});
  }
  return data;
}

Matrix LinearModel::predict(double z) const {
  Matrix w(1, slope.size());
  for (std::size_t k = 0; k < slope.size(); ++k) w(0, k) = slope[k] * z + intercept[k];
  return w;
}

LinearModel fit_linear_mse(std::span<const DemoSample> data) {
  if (data.size() < 2) throw InvalidArgument("least squares needs at least two samples");
  const std::size_t k = data.front().w.size();
  double mz = 0.0;
  for (const DemoSample& s : data) mz += s.z;
  mz /= static_cast<double>(data.size());
  double szz = 0.0;
  for (const DemoSample& s : data) szz += (s.z - mz) * (s.z - mz);
  if (!(szz > 0.0)) throw InvalidArgument("least squares needs at least two distinct z");

  LinearModel model{std::vector<double>(k), std::vector<double>(k)};
  for (std::size_t c = 0; c < k; ++c) {
    double mw = 0.0, szw = 0.0;
    for (const DemoSample& s : data) mw += s.w.flat()[c];
    mw /= static_cast<double>(data.size());
    for (const DemoSample& s : data) szw += (s.z - mz) * (s.w.flat()[c] - mw);
    model.slope[c] = szw / szz;
    model.intercept[c] = mw - model.slope[c] * mz;
  }
  return model;
}

void DemoTrainConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("demo epsilon must be positive");
  }
  if (sg_trials == 0) throw InvalidArgument("demo sg_trials must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("demo learning_rate must be positive");
  }
}

LinearModel fit_linear_dol(const DemoCase& demo, std::span<const DemoSample> data,
                           const LinearModel& init, const DemoTrainConfig& config,
                           std::uint64_t seed) {
  config.validate();
  if (data.empty()) throw InvalidArgument("decision-loss fit needs samples");
  const std::size_t k = init.slope.size();
  if (init.intercept.size() != k || data.front().w.size() != k) {
    throw InvalidArgument("linear model and samples disagree on the weight count");
  }

  // theta = [slope | intercept]
  std::vector<double> theta(2 * k);
  std::copy(init.slope.begin(), init.slope.end(), theta.begin());
  std::copy(init.intercept.begin(), init.intercept.end(), theta.begin() + k);
  auto model_of = [k](const std::vector<double>& t) {
    return LinearModel{{t.begin(), t.begin() + k}, {t.begin() + k, t.end()}};
  };

  OptimizerConfig opt;
  opt.kind = OptimizerConfig::Kind::kAdam;
  opt.learning_rate = config.learning_rate;
  OptimizerState state;
  const RegularizerConfig reg{config.epsilon};
  EstimatorOptions est;
  est.trials = config.sg_trials;
  // Constant baseline: the mean value of the labels' own greedy decisions.
  double baseline = 0.0;
  for (const DemoSample& s : data) {
    baseline += demo.problem.f().value(
        run_deterministic_greedy(demo.problem.f(), s.w, demo.problem.system), s.w);
  }
  est.baseline = baseline / static_cast<double>(data.size());

  std::vector<double> grad(2 * k);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const LinearModel model = model_of(theta);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Matrix w_hat = model.predict(data[i].z);
      const std::uint64_t trial_seed = make_stream(seed, epoch + 1, i)();
      const LossAndGradient lg =
          decision_loss_and_gradient(data[i].w, w_hat, demo.problem, reg, est, trial_seed);
      for (std::size_t c = 0; c < k; ++c) {
        const double g = lg.gradient.grad.flat()[c];
        grad[c] += g * data[i].z;
        grad[k + c] += g;
      }
    }
    for (double& g : grad) g /= static_cast<double>(data.size());
    optimizer_step(theta, grad, state, opt);
  }
  return model_of(theta);
}

Selection demo_decision(const DemoCase& demo, const Matrix& w) {
  Selection s = run_deterministic_greedy(demo.problem.f(), w, demo.problem.system);
  std::sort(s.begin(), s.end());
  return s;
}

double decision_boundary(const DemoCase& demo, const std::function<Matrix(double)>& weights,
                         std::size_t grid) {
  if (grid < 2) throw InvalidArgument("boundary grid needs at least two points");
  if (!(demo.search_lo < demo.search_hi)) throw InvalidArgument("empty boundary search window");
  const Selection first = demo_decision(demo, weights(demo.search_lo));
  const double step = (demo.search_hi - demo.search_lo) / static_cast<double>(grid - 1);
  for (std::size_t g = 1; g < grid; ++g) {
    double hi = demo.search_lo + step * static_cast<double>(g);
    if (demo_decision(demo, weights(hi)) == first) continue;
    double lo = hi - step;
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
      const double mid = 0.5 * (lo + hi);
      (demo_decision(demo, weights(mid)) == first ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool DemoRun::dol_closer() const {
  if (std::isnan(dol)) return false;
  if (std::isnan(mse)) return true;
  return std::abs(dol - optimal) <= std::abs(mse - optimal);
}

DemoRun run_demo(const DemoCase& demo, std::size_t n_samples, const DemoTrainConfig& config,
                 std::uint64_t seed) {
  const std::vector<DemoSample> data = sample_demo_data(demo, n_samples, seed);
  DemoRun run;
  run.name = demo.name;
  run.seed = seed;
  run.mse_model = fit_linear_mse(data);
  // The decision-loss fit starts where least squares ends, so any boundary
  // shift comes from the downstream loss alone.
  run.dol_model = fit_linear_dol(demo, data, run.mse_model, config, make_stream(seed, 1)());
  auto truth = [&demo](double z) {
    std::vector<double> w = demo.truth(z);
    const std::size_t k = w.size();
    return Matrix(1, k, std::move(w));
  };
  run.optimal = decision_boundary(demo, truth);
  run.mse = decision_boundary(demo, [&run](double z) { return run.mse_model.predict(z); });
  run.dol = decision_boundary(demo, [&run](double z) { return run.dol_model.predict(z); });
  return run;
}

void write_demo_sweep_csv(const std::string& path, const DemoCase& demo, const DemoRun& run,
                          std::size_t points) {
  if (points < 2) throw InvalidArgument("sweep needs at least two points");
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot open " + path + " for writing");
  const std::size_t k = demo.truth(demo.z_lo).size();
  out << "z";
  for (std::size_t c = 0; c < k; ++c) out << ",w_hat" << c;
  out << ",decision,method\n";
  auto emit = [&](const std::string& method, const std::function<Matrix(double)>& weights) {
    for (std::size_t p = 0; p < points; ++p) {
      const double z = demo.z_lo + (demo.z_hi - demo.z_lo) * static_cast<double>(p) /
                                       static_cast<double>(points - 1);
      const Matrix w = weights(z);
      out << format_number(z);
      for (double v : w.flat()) out << ',' << format_number(v);
      out << ',' << decision_label(demo_decision(demo, w)) << ',' << method << '\n';
    }
  };
  emit("truth", [&demo](double z) {
    std::vector<double> w = demo.truth(z);
    const std::size_t n = w.size();
    return Matrix(1, n, std::move(w));
  });
  emit("mse", [&run](double z) { return run.mse_model.predict(z); });
  emit("dol", [&run](double z) { return run.dol_model.predict(z); });
  if (!out) throw RuntimeError("failed writing " + path);
}

nlohmann::json to_json(const DemoRun& run) {
  auto boundary = [](double b) -> nlohmann::json {
    if (std::isnan(b)) return nullptr;
    return b;
  };
  return {{"case", run.name},
          {"seed", run.seed},
          {"optimal_boundary", boundary(run.optimal)},
          {"mse_boundary", boundary(run.mse)},
          {"dol_boundary", boundary(run.dol)},
          {"dol_closer", run.dol_closer()},
          {"mse_model", {{"slope", run.mse_model.slope}, {"intercept", run.mse_model.intercept}}},
          {"dol_model", {{"slope", run.dol_model.slope}, {"intercept", run.dol_model.intercept}}}};
}

}  // namespace dol
