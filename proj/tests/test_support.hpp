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

// Random instance generators and brute-force oracles shared by the tests.
// Nothing here calls into the objective implementations it is used to check.

#ifndef DOL_TESTS_TEST_SUPPORT_HPP_
#define DOL_TESTS_TEST_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <set>
#include <vector>

#include "dol/common.hpp"
#include "dol/gradient.hpp"
#include "dol/smoothed_greedy.hpp"
#include "dol/submodular.hpp"

namespace dol::testing {

struct RandomInstance {
  GroundSet ground;
  NodePartition partition;
  BasisFamily basis;
  Matrix w;
};

// Routes over `nodes` graph nodes, each visiting a random multiset of them;
// nodes split round-robin into `parts` partition sets.
inline RandomInstance random_instance(Rng& rng, std::size_t routes, std::size_t nodes = 12,
                                      std::size_t parts = 3,
                                      std::vector<double> gammas = {0.001, 0.5, 1.0}) {
  RandomInstance inst;
  for (std::size_t r = 0; r < routes; ++r) {
    Route route;
    const std::size_t len = 2 + uniform_index(rng, 6);
    for (std::size_t k = 0; k < len; ++k) {
      route.nodes.push_back(static_cast<NodeId>(uniform_index(rng, nodes)));
    }
    inst.ground.routes.push_back(route);
  }
  inst.partition.sets.resize(parts);
  for (std::size_t v = 0; v < nodes; ++v) {
    inst.partition.sets[v % parts].push_back(static_cast<NodeId>(v));
  }
  inst.basis.gammas = std::move(gammas);
  inst.w = Matrix(parts, inst.basis.size());
  for (double& x : inst.w.flat()) x = uniform(rng, 0.0, 2.0);
  return inst;
}

inline std::shared_ptr<CoverageObjective> make_objective(const RandomInstance& inst) {
  return std::make_shared<CoverageObjective>(inst.ground, inst.partition, inst.basis);
}

// Straight-line evaluation of the decayed coverage objective: explicit
// membership tests and explicit geometric sums.
inline double oracle_value(const RandomInstance& inst, const Selection& s) {
  double total = 0.0;
  for (std::size_t i = 0; i < inst.partition.sets.size(); ++i) {
    std::size_t psi = 0;
    for (RouteId r : s) {
      std::set<NodeId> seen;
      for (NodeId v : inst.ground.routes[r].nodes) {
        const auto& set = inst.partition.sets[i];
        if (std::find(set.begin(), set.end(), v) != set.end() && seen.insert(v).second) ++psi;
      }
    }
    for (std::size_t j = 0; j < inst.basis.gammas.size(); ++j) {
      double term = 1.0;
      double sum = 0.0;
      for (std::size_t a = 0; a < psi; ++a) {
        sum += term;
        term *= inst.basis.gammas[j];
      }
      total += inst.w(i, j) * sum;
    }
  }
  return total;
}

// All subsets of {0..n-1} as selections.
inline std::vector<Selection> all_subsets(std::size_t n) {
  std::vector<Selection> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    Selection s;
    for (std::size_t r = 0; r < n; ++r) {
      if (mask & (std::size_t{1} << r)) s.push_back(r);
    }
    out.push_back(s);
  }
  return out;
}

// max f over independent subsets, by exhaustive search.
inline double brute_force_opt(const BasisObjective& f, const Matrix& w,
                              const IndependenceSystem& system) {
  double best = 0.0;
  for (const Selection& s : all_subsets(f.ground_size())) {
    if (system.is_independent(s, f.ground_size())) best = std::max(best, f.value(s, w));
  }
  return best;
}

// Central finite difference of a scalar function of a matrix.
inline Matrix finite_difference(const std::function<double(const Matrix&)>& fn,
                                const Matrix& at, double step) {
  Matrix grad(at.rows(), at.cols());
  for (std::size_t k = 0; k < at.size(); ++k) {
    Matrix plus = at;
    Matrix minus = at;
    plus.flat()[k] += step;
    minus.flat()[k] -= step;
    grad.flat()[k] = (fn(plus) - fn(minus)) / (2.0 * step);
  }
  return grad;
}

// ln p(sequence, w) recomputed from scratch by replaying the fixed sequence.
inline double path_log_prob(const Selection& sequence, const Matrix& w, const Problem& problem,
                            const RegularizerConfig& config) {
  double lp = 0.0;
  Selection prefix;
  for (RouteId s : sequence) {
    const auto cand = addable_elements(prefix, problem.system, problem.f().ground_size());
    std::vector<double> gains;
    for (RouteId u : cand) gains.push_back(problem.f().marginal_gain(prefix, u, w));
    double top = *std::max_element(gains.begin(), gains.end());
    double z = 0.0;
    double chosen = 0.0;
    for (std::size_t k = 0; k < cand.size(); ++k) {
      z += std::exp((gains[k] - top) / config.epsilon);
      if (cand[k] == s) chosen = (gains[k] - top) / config.epsilon;
    }
    lp += chosen - std::log(z);
    prefix.push_back(s);
  }
  return lp;
}

}  // namespace dol::testing

#endif  // DOL_TESTS_TEST_SUPPORT_HPP_
