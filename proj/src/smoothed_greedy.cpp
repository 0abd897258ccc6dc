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

#include "dol/smoothed_greedy.hpp"

#include <cmath>
#include <string>

namespace dol {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// block_of[r] = index of the partition block holding route r.
std::vector<std::size_t> block_index(const PartitionConstraint& c, std::size_t ground_size) {
  std::vector<std::size_t> block_of(ground_size, c.blocks.size());
  for (std::size_t b = 0; b < c.blocks.size(); ++b) {
    for (RouteId r : c.blocks[b].routes) {
      if (r >= ground_size) {
        throw InvalidArgument("partition block references unknown route " + std::to_string(r));
      }
      if (block_of[r] != c.blocks.size()) {
        throw InvalidArgument("route " + std::to_string(r) + " is in two partition blocks");
      }
      block_of[r] = b;
    }
  }
  for (std::size_t r = 0; r < ground_size; ++r) {
    if (block_of[r] == c.blocks.size()) {
      throw InvalidArgument("route " + std::to_string(r) + " is in no partition block");
    }
  }
  return block_of;
}

}  // namespace

void IndependenceSystem::validate(std::size_t ground_size) const {
  std::visit(Overloaded{
                 [](const CardinalityConstraint& c) {
                   if (c.limit < 1) throw InvalidArgument("cardinality limit must be >= 1");
                 },
                 [ground_size](const PartitionConstraint& c) { block_index(c, ground_size); },
             },
             constraint_);
}

bool IndependenceSystem::is_independent(std::span<const RouteId> selection,
                                         std::size_t ground_size) const {
  check_selection(selection, ground_size);
  return std::visit(
      Overloaded{
          [&](const CardinalityConstraint& c) { return selection.size() <= c.limit; },
          [&](const PartitionConstraint& c) {
            const auto block_of = block_index(c, ground_size);
            std::vector<std::size_t> used(c.blocks.size(), 0);
            for (RouteId r : selection) {
              if (++used[block_of[r]] > c.blocks[block_of[r]].capacity) return false;
            }
            return true;
          },
      },
      constraint_);
}

std::vector<RouteId> addable_elements(std::span<const RouteId> selection,
                                      const IndependenceSystem& system,
                                      std::size_t ground_size) {
  if (!system.is_independent(selection, ground_size)) {
    throw InvalidArgument("selection is not independent");
  }
  std::vector<bool> chosen(ground_size, false);
  for (RouteId r : selection) chosen[r] = true;

  std::vector<RouteId> out;
  std::visit(Overloaded{
                 [&](const CardinalityConstraint& c) {
                   if (selection.size() >= c.limit) return;
                   for (RouteId r = 0; r < ground_size; ++r) {
                     if (!chosen[r]) out.push_back(r);
                   }
                 },
                 [&](const PartitionConstraint& c) {
                   const auto block_of = block_index(c, ground_size);
                   std::vector<std::size_t> used(c.blocks.size(), 0);
                   for (RouteId r : selection) ++used[block_of[r]];
                   for (RouteId r = 0; r < ground_size; ++r) {
                     const std::size_t b = block_of[r];
                     if (!chosen[r] && used[b] < c.blocks[b].capacity) out.push_back(r);
                   }
                 },
             },
             system.constraint());
  return out;
}

std::vector<double> regularized_argmax(std::span<const double> gains,
                                       const RegularizerConfig& config) {
  if (gains.empty()) throw InvalidArgument("regularized argmax over an empty gain vector");
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
    throw InvalidArgument("regularizer epsilon must be positive");
  }
  double top = gains[0];
  for (double m : gains) {
    if (!std::isfinite(m)) throw InvalidArgument("non-finite marginal gain");
    top = m > top ? m : top;
  }
  std::vector<double> p(gains.size());
  double z = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    p[i] = std::exp((gains[i] - top) / config.epsilon);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

std::size_t sample_step(std::span<const double> probs, Rng& rng) {
  if (probs.empty()) throw InvalidArgument("cannot sample from an empty distribution");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw InvalidArgument("negative or NaN step probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("step probabilities sum to " + std::to_string(total));
  }
  const double u = uniform01(rng) * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] > 0.0) last_positive = k;
    cumulative += probs[k];
    if (u < cumulative && probs[k] > 0.0) return k;
  }
  return last_positive;
}

GreedyTrace run_smoothed_greedy(const BasisObjective& objective, const Matrix& w,
                                const IndependenceSystem& system,
                                const RegularizerConfig& config, Rng& rng) {
  objective.check_weights(w);
  const std::size_t n = objective.ground_size();
  GreedyTrace trace;
  for (;;) {
    std::vector<RouteId> candidates = addable_elements(trace.selection, system, n);
    if (candidates.empty()) break;
    GreedyStep step;
    step.gains = objective.marginal_gains(trace.selection, candidates, w);
    step.probs = regularized_argmax(step.gains, config);
    step.candidates = std::move(candidates);
    step.chosen_index = sample_step(step.probs, rng);
    step.chosen_prob = step.probs[step.chosen_index];
    trace.log_prob += std::log(step.chosen_prob);
    trace.selection.push_back(step.chosen());
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

Selection run_deterministic_greedy(const BasisObjective& objective, const Matrix& w,
                                   const IndependenceSystem& system) {
  objective.check_weights(w);
  const std::size_t n = objective.ground_size();
  Selection selection;
  for (;;) {
    const std::vector<RouteId> candidates = addable_elements(selection, system, n);
    if (candidates.empty()) break;
    const std::vector<double> gains = objective.marginal_gains(selection, candidates, w);
    std::size_t best = 0;
    for (std::size_t k = 1; k < gains.size(); ++k) {
      if (gains[k] > gains[best]) best = k;
    }
    selection.push_back(candidates[best]);
  }
  return selection;
}

double trace_log_probability(const GreedyTrace& trace) {
  double lp = 0.0;
  for (const GreedyStep& step : trace.steps) lp += std::log(step.chosen_prob);
  return lp;
}

double entropy_slack(const GreedyTrace& trace, const RegularizerConfig& config) {
  double slack = 0.0;
  for (const GreedyStep& step : trace.steps) {
    slack += config.epsilon * std::log(static_cast<double>(step.candidates.size()));
  }
  return slack;
}

}  // namespace dol
