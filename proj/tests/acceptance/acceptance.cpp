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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dol/datagen.hpp"
#include "dol/demo.hpp"
#include "dol/fixture.hpp"
#include "dol/gradient.hpp"
#include "dol/pipeline.hpp"
#include "dol/predictor.hpp"
#include "dol/simulator.hpp"
#include "dol/smoothed_greedy.hpp"
#include "dol/submodular.hpp"
#include "../test_support.hpp"

using namespace dol;
using dol::testing::all_subsets;
using dol::testing::brute_force_opt;
using dol::testing::finite_difference;
using dol::testing::make_objective;
using dol::testing::path_log_prob;
using dol::testing::random_instance;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const double kOneMinusInvE = 1.0 - std::exp(-1.0);

// Relative error with a unit floor, so entries near zero are held to the
// same absolute accuracy as entries of order one.
double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// ---------------------------------------------------------------------------

Verdict table_ordering() {
  const auto t0 = Clock::now();
  struct Setting {
    std::size_t n_uavs, n_g;
  };
  const PipelineConfig base = default_pipeline_config();
  bool pass = true;
  std::string detail;
  for (const Setting s : {Setting{6, 3}, Setting{10, 3}, Setting{15, 4}}) {
    PipelineConfig cfg = base;
    cfg.world.n_uavs = s.n_uavs;
    cfg.world.routes_to_select = s.n_g;
    const World world = build_world(cfg.world);
    const GeneratedData data = generate_dataset(world, cfg.data, cfg.seed);
    const auto& train = data.dataset.train;
    std::vector<std::vector<double>> test;
    for (const DatasetSample& x : data.dataset.test) test.push_back(x.z);
    if (test.size() < 50) return {false, fmt("only %zu test contexts", test.size())};

    int wins = 0, ratio_ok = 0;
    double m_dol = 0.0, m_two = 0.0, m_rand = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const TrainResult dol = train_method(cfg, train, world.problem, Method::kDol, seed);
      const TrainResult two = train_method(cfg, train, world.problem, Method::kTwoStage, seed);
      const std::vector<NamedModel> methods{
          {"dol", &dol.model}, {"two-stage", &two.model}, {"random", nullptr}};
      const EvaluationTable table = evaluate_methods(world, test, methods, cfg.eval.rollouts,
                                                     make_stream(cfg.seed, 9)());
      const double d = table.row("dol").mean;
      const double t = table.row("two-stage").mean;
      const double r = table.row("random").mean;
      wins += d >= t;
      ratio_ok += d >= 1.5 * r;
      m_dol += d / 5.0;
      m_two += t / 5.0;
      m_rand += r / 5.0;
    }
    const bool ok = wins >= 4 && ratio_ok == 5;
    pass = pass && ok;
    detail += fmt("(%zu,%zu) dol>=two %d/5, dol>=1.5rand %d/5, means %.2f/%.2f/%.2f; ",
                  s.n_uavs, s.n_g, wins, ratio_ok, m_dol, m_two, m_rand);
  }
  const double secs = seconds_since(t0);
  pass = pass && secs <= 1800.0;
  detail += fmt("%.0fs of 1800s", secs);
  return {pass, detail};
}

Verdict sg_bound() {
  Rng rng = make_stream(2024, 2);
  int bound_ok = 0, greedy_ok = 0;
  double worst_margin = INFINITY;
  const int instances = 20;
  for (int i = 0; i < instances; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 4);  // |T| in [2, 5]
    const std::size_t slots = 1 + static_cast<std::size_t>(i % 2);
    const auto inst = random_instance(rng, n);
    const auto f = make_objective(inst);
    const auto sys = IndependenceSystem::cardinality(slots);
    const RegularizerConfig cfg{uniform(rng, 0.1, 1.0)};
    const double opt = brute_force_opt(*f, inst.w, sys);

    const std::size_t runs = 10000;
    double sum = 0.0, sq = 0.0, slack = 0.0;
    for (std::size_t j = 0; j < runs; ++j) {
      Rng r = make_stream(77, static_cast<std::uint64_t>(i), j);
      const GreedyTrace trace = run_smoothed_greedy(*f, inst.w, sys, cfg, r);
      const double v = f->value(trace.selection, inst.w);
      sum += v;
      sq += v * v;
      slack = std::max(slack, entropy_slack(trace, cfg));
    }
    const double mean = sum / runs;
    const double var = std::max(0.0, (sq - runs * mean * mean) / (runs - 1));
    const double se = std::sqrt(var / runs);
    const double bound = kOneMinusInvE * opt - slack - 3.0 * se;
    bound_ok += mean >= bound;
    worst_margin = std::min(worst_margin, mean - bound);

    const Selection g = run_deterministic_greedy(*f, inst.w, sys);
    greedy_ok += f->value(g, inst.w) >= kOneMinusInvE * opt;
  }
  return {bound_ok == instances && greedy_ok == instances,
          fmt("bound holds %d/%d (min margin %.3g), greedy >= (1-1/e)OPT %d/%d", bound_ok,
              instances, worst_margin, greedy_ok, instances)};
}

Verdict unbiasedness() {
  Rng rng = make_stream(2024, 3);
  std::size_t components = 0, within = 0;
  double worst_z = 0.0, worst_fd = 0.0;
  for (int i = 0; i < 10; ++i) {
    const std::size_t n = 3 + static_cast<std::size_t>(i % 3);
    const auto inst = random_instance(rng, n);
    const Problem p{make_objective(inst),
                    IndependenceSystem::cardinality(1 + static_cast<std::size_t>(i % 2))};
    Matrix w_hat(inst.w.rows(), inst.w.cols());
    for (double& x : w_hat.flat()) x = uniform(rng, 0.0, 1.0);
    const RegularizerConfig cfg{uniform(rng, 0.5, 1.5)};

    const Matrix exact = exact_expected_value_gradient(inst.w, w_hat, p, cfg);
    const std::size_t trials = 100000;
    const GradientEstimate est =
        score_function_gradient(inst.w, w_hat, p, cfg, {trials, {}}, 500 + i);
    for (std::size_t k = 0; k < exact.size(); ++k) {
      // The estimator targets the loss gradient, the negated expectation gradient.
      const double diff = std::abs(-est.grad.flat()[k] - exact.flat()[k]);
      const double se = est.grad_std.flat()[k] / std::sqrt(static_cast<double>(trials));
      ++components;
      if (diff <= 4.0 * se + 1e-12) ++within;
      if (se > 1e-9) worst_z = std::max(worst_z, diff / se);
    }
    const Matrix fd = finite_difference(
        [&](const Matrix& w) { return exact_expected_value(inst.w, w, p, cfg); }, w_hat, 1e-5);
    for (std::size_t k = 0; k < exact.size(); ++k) {
      worst_fd = std::max(worst_fd, std::abs(fd.flat()[k] - exact.flat()[k]));
    }
  }
  return {within == components && worst_fd <= 1e-6,
          fmt("%zu/%zu components within 4 SE (max %.2f SE), exact vs finite differences %.2e",
              within, components, worst_z, worst_fd)};
}

Verdict differentiation_chain() {
  Rng rng = make_stream(2024, 4);
  const int probes = 100;
  const double h = 1e-6;

  double worst_softmax = 0.0;
  for (int probe = 0; probe < probes; ++probe) {
    const std::size_t n = 1 + uniform_index(rng, 6);
    std::vector<double> m(n);
    for (double& v : m) v = uniform(rng, -2.0, 2.0);
    const RegularizerConfig cfg{uniform(rng, 0.2, 2.0)};
    const Matrix jac = softmax_jacobian(regularized_argmax(m, cfg), cfg.epsilon);
    for (std::size_t b = 0; b < n; ++b) {
      auto mp = m, mm = m;
      mp[b] += h;
      mm[b] -= h;
      const auto pp = regularized_argmax(mp, cfg);
      const auto pm = regularized_argmax(mm, cfg);
      for (std::size_t a = 0; a < n; ++a) {
        worst_softmax = std::max(worst_softmax, rel_err((pp[a] - pm[a]) / (2 * h), jac(a, b)));
      }
    }
  }

  double worst_step = 0.0;
  for (int probe = 0; probe < probes; ++probe) {
    const auto inst = random_instance(rng, 2 + uniform_index(rng, 4));
    const Problem p{make_objective(inst),
                    IndependenceSystem::cardinality(1 + uniform_index(rng, 2))};
    const RegularizerConfig cfg{uniform(rng, 0.3, 1.5)};
    Rng sg = make_stream(91, static_cast<std::uint64_t>(probe));
    const GreedyTrace trace = run_smoothed_greedy(p.f(), inst.w, p.system, cfg, sg);
    const std::size_t k = uniform_index(rng, trace.steps.size());
    const Selection prefix(trace.selection.begin(), trace.selection.begin() + k);
    const GreedyStep& step = trace.steps[k];
    const Matrix g = step_log_prob_weight_gradient(step, prefix, p, cfg);
    Selection with = prefix;
    with.push_back(step.chosen());
    const Matrix fd = finite_difference(
        [&](const Matrix& w) {
          return path_log_prob(with, w, p, cfg) - path_log_prob(prefix, w, p, cfg);
        },
        inst.w, 1e-5);
    for (std::size_t c = 0; c < g.size(); ++c) {
      worst_step = std::max(worst_step, rel_err(fd.flat()[c], g.flat()[c]));
    }
  }

  double worst_mlp = 0.0;
  for (int probe = 0; probe < probes; ++probe) {
    const std::size_t in = 2 + uniform_index(rng, 6);
    const std::size_t rows = 1 + uniform_index(rng, 3), cols = 1 + uniform_index(rng, 3);
    const MlpParams params = MlpParams::random_init(in, 16, rows, cols, rng);
    std::vector<double> z(in);
    for (double& v : z) v = uniform(rng, -2.0, 2.0);
    Matrix upstream(rows, cols);
    for (double& v : upstream.flat()) v = uniform(rng, -1.0, 1.0);
    MlpCache cache;
    mlp_forward(z, params, &cache);
    const MlpParams g = mlp_backward(params, cache, upstream);
    for (std::size_t k = 0; k < params.flat().size(); ++k) {
      MlpParams plus = params, minus = params;
      plus.flat()[k] += h;
      minus.flat()[k] -= h;
      const double fd =
          (inner(upstream, mlp_forward(z, plus)) - inner(upstream, mlp_forward(z, minus))) /
          (2 * h);
      worst_mlp = std::max(worst_mlp, rel_err(fd, g.flat()[k]));
    }
  }

  const double tol = 1e-5;
  return {worst_softmax <= tol && worst_step <= tol && worst_mlp <= tol,
          fmt("max relative error over %d probes each: softmax %.2e, step %.2e, mlp %.2e",
              probes, worst_softmax, worst_step, worst_mlp)};
}

Verdict training_curve() {
  const auto t0 = Clock::now();
  const TrainingFixture fx = make_training_fixture(30, 2, 7);
  int ok = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 40;
    cfg.sg_trials = 10;
    cfg.optimizer.kind = OptimizerConfig::Kind::kAdam;
    cfg.optimizer.learning_rate = 0.02;
    cfg.regularizer.epsilon = 0.5;
    cfg.seed = seed;
    const std::vector<double> loss = train_dol(fx.samples, fx.problem, cfg).history.losses();
    const double first = loss.front(), last = loss.back();
    double mean = 0.0;
    for (std::size_t e = loss.size() - 5; e < loss.size(); ++e) mean += loss[e] / 5.0;
    double spread = 0.0;
    for (std::size_t e = loss.size() - 5; e < loss.size(); ++e) {
      spread = std::max(spread, std::abs(loss[e] - mean) / mean);
    }
    const bool good = last < 0.7 * first && spread < 0.10;
    ok += good;
    per_seed += fmt(" s%llu %.3f->%.3f (%.1f%%)", static_cast<unsigned long long>(seed), first,
                    last, 100.0 * spread);
  }
  const double secs = seconds_since(t0);
  return {ok >= 4 && secs <= 300.0, fmt("%d/5 seeds;%s; %.1fs of 300s", ok, per_seed.c_str(), secs)};
}

Verdict misalignment() {
  const PipelineConfig cfg = default_pipeline_config();
  bool pass = true;
  std::string detail;
  for (const DemoCase& demo : {route_choice_case(), coverage_mix_case()}) {
    int closer = 0;
    double opt = 0.0, sum_mse = 0.0, sum_dol = 0.0;
    for (std::uint64_t seed = 1; seed <= cfg.demo.seeds; ++seed) {
      const DemoRun run = run_demo(demo, cfg.demo.n_samples, cfg.demo.train, seed);
      closer += run.dol_closer();
      opt = run.optimal;
      sum_mse += std::abs(run.mse - run.optimal);
      sum_dol += std::abs(run.dol - run.optimal);
    }
    const auto seeds = static_cast<double>(cfg.demo.seeds);
    pass = pass && closer >= 4;
    detail += fmt("%s: dol closer %d/%zu (optimal %.3f, mean |mse-opt| %.3f, |dol-opt| %.3f); ",
                  demo.name.c_str(), closer, cfg.demo.seeds, opt, sum_mse / seeds,
                  sum_dol / seeds);
  }
  return {pass, detail.substr(0, detail.size() - 2)};
}

Verdict energy_identities() {
  const EnergyParams params;
  double worst_sym = 0.0;
  for (double omega_s : {0.0, 2.5, 7.0, 12.0}) {
    for (int k = 0; k <= 360; ++k) {
      const double theta = -180.0 + k;
      const double a = energy_per_distance(10.0, omega_s, theta, params).mu;
      const double b = energy_per_distance(10.0, omega_s, -theta, params).mu;
      worst_sym = std::max(worst_sym, std::abs(a - b));
    }
  }

  bool calm_exact = true;
  for (double s_d : {0.5, 3.0, 10.0, 17.25}) {
    for (int k = 0; k <= 360; ++k) calm_exact = calm_exact && airspeed(s_d, 0.0, k) == s_d;
  }

  Rng rng = make_stream(2024, 7);
  double worst_residual = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double s_d = uniform(rng, 0.0, 30.0);
    const double omega_s = uniform(rng, 0.0, 15.0);
    const double theta = uniform(rng, 0.0, 360.0);
    const EnergyBreakdown e = energy_per_distance(s_d, omega_s, theta, params);
    worst_residual = std::max(worst_residual, e.induced_residual);
  }

  double worst_weibull = 0.0;
  for (const auto& [a, b] : {std::pair{3.0, 2.0}, {6.5, 1.5}, {2.0, 3.0}}) {
    const WindField field{a, b, 0.0};
    Rng w = make_stream(2024, 8, static_cast<std::uint64_t>(a * 10));
    double sum = 0.0;
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) sum += weibull_sample(field, w);
    const double target = a * std::tgamma(1.0 + 1.0 / b);
    worst_weibull = std::max(worst_weibull, std::abs(sum / draws - target) / target);
  }

  return {worst_sym <= 1e-12 && calm_exact && worst_residual < 1e-8 && worst_weibull < 0.01,
          fmt("symmetry %.1e, calm airspeed exact %s, max induced residual %.1e, Weibull "
              "mean error %.3f%%",
              worst_sym, calm_exact ? "yes" : "no", worst_residual, 100.0 * worst_weibull)};
}

Verdict submodularity() {
  Rng rng = make_stream(2024, 8);
  int violations = 0;
  std::size_t checks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 6);  // |T| in [1, 6]
    const auto inst = random_instance(rng, n);
    const CoverageObjective f(inst.ground, inst.partition, inst.basis);
    const auto subsets = all_subsets(n);
    violations += f.value(Selection{}, inst.w) != 0.0;
    for (const Selection& a : subsets) {
      for (const Selection& b : subsets) {
        if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) continue;
        ++checks;
        violations += f.value(b, inst.w) < f.value(a, inst.w);
        for (RouteId u = 0; u < n; ++u) {
          if (std::find(b.begin(), b.end(), u) != b.end()) continue;
          ++checks;
          violations += f.marginal_gain(a, u, inst.w) < f.marginal_gain(b, u, inst.w);
        }
      }
    }
  }

  double worst_basis = 0.0;
  for (std::uint64_t psi = 0; psi <= 200; ++psi) {
    for (double gamma : {1e-3, 0.1, 0.5, 0.9, 0.999, 1.0 - 1e-10, 1.0}) {
      double direct = 0.0, term = 1.0;
      for (std::uint64_t k = 0; k < psi; ++k) {
        direct += term;
        term *= gamma;
      }
      worst_basis = std::max(worst_basis, std::abs(basis_value(psi, gamma) - direct));
    }
  }
  return {violations == 0 && worst_basis <= 1e-12,
          fmt("%d violations in %zu checks over 200 instances, basis closed form error %.1e",
              violations, checks, worst_basis)};
}

Verdict weight_fitting() {
  Rng rng = make_stream(2024, 9);
  FitConfig fit;
  fit.xi = 1e-8;
  double worst = 0.0, worst_cond = 0.0;
  int full_rank = 0;
  for (int trial = 0; trial < 400 && full_rank < 10; ++trial) {
    // A coverage objective evaluated on every subset of its routes. Only
    // well-spread designs count: full rank and condition number at most 100.
    const auto inst = random_instance(rng, 6);
    const CoverageObjective f(inst.ground, inst.partition, inst.basis);
    RawContextRecord rec;
    rec.repeats = 1;
    for (const Selection& s : all_subsets(6)) {
      if (!s.empty()) rec.evaluations.push_back({s, f.value(s, inst.w)});
    }
    const Matrix a = design_matrix(rec, f);
    const double cond = condition_number(a);
    if (matrix_rank(a) < a.cols() || cond > 100.0) continue;
    worst_cond = std::max(worst_cond, cond);
    ++full_rank;
    std::vector<double> y;
    for (const Evaluation& e : rec.evaluations) y.push_back(e.value);
    const FitResult r = fit_nonnegative_least_squares(a, y, fit);
    for (std::size_t k = 0; k < r.w.size(); ++k) {
      worst = std::max(worst, std::abs(r.w[k] - inst.w.flat()[k]));
    }
  }

  // Dense random designs with a sparse non-negative truth.
  for (int trial = 0; trial < 10; ++trial) {
    Matrix a(40, 12);
    for (double& x : a.flat()) x = uniform(rng, 0.0, 2.0);
    std::vector<double> w(12), y(40, 0.0);
    for (double& x : w) x = uniform01(rng) < 0.3 ? 0.0 : uniform(rng, 0.1, 3.0);
    for (std::size_t i = 0; i < 40; ++i) {
      for (std::size_t j = 0; j < 12; ++j) y[i] += a(i, j) * w[j];
    }
    const FitResult r = fit_nonnegative_least_squares(a, y, fit);
    for (std::size_t k = 0; k < 12; ++k) worst = std::max(worst, std::abs(r.w[k] - w[k]));
  }

  FitConfig heavy;
  heavy.xi = 1e9;
  double largest = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Matrix a(30, 9);
    for (double& x : a.flat()) x = uniform(rng, 0.0, 1.0);
    std::vector<double> y(30);
    for (double& x : y) x = uniform(rng, 0.0, 10.0);
    for (double x : fit_nonnegative_least_squares(a, y, heavy).w) largest = std::max(largest, x);
  }
  return {full_rank >= 10 && worst <= 1e-4 && largest < 1e-6,
          fmt("planted recovery error %.1e over %d coverage designs (condition <= %.0f) and 10 "
              "dense designs, xi = 1e9 gives max |w| %.1e",
              worst, full_rank, worst_cond, largest)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "learned route selection ordering", table_ordering},
      {2, "smoothed greedy approximation bound", sg_bound},
      {3, "score-function estimator unbiasedness", unbiasedness},
      {4, "differentiation chain", differentiation_chain},
      {5, "training curve", training_curve},
      {6, "misalignment demo", misalignment},
      {7, "energy model identities", energy_identities},
      {8, "submodularity", submodularity},
      {9, "weight fitting recovery", weight_fitting},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  bool all = true;
  for (const Criterion& c : criteria) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all = all && v.pass;
    std::printf("[%s] %d %s: %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
