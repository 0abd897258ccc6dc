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

// Greedy maximization over an independence system, plain and smoothed.
//
// The smoothed variant replaces the argmax at every step by a distribution
// over the addable elements,
//
//   p_k = argmax_{p in simplex} <m_k, p> - eps * sum_i p_i ln p_i
//       = softmax(m_k / eps),
//
// samples one element from it, and records every step so that the log
// probability of the sampled sequence can later be differentiated with
// respect to the objective weights.

#ifndef DOL_SMOOTHED_GREEDY_HPP_
#define DOL_SMOOTHED_GREEDY_HPP_

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "dol/common.hpp"
#include "dol/submodular.hpp"

namespace dol {

struct CardinalityConstraint {
  std::size_t limit = 1;  // |S| <= limit
};

struct PartitionBlock {
  std::vector<RouteId> routes;
  std::size_t capacity = 1;  // |S ∩ routes| <= capacity
};

struct PartitionConstraint {
  std::vector<PartitionBlock> blocks;
};

class IndependenceSystem {
 public:
  using Variant = std::variant<CardinalityConstraint, PartitionConstraint>;

  explicit IndependenceSystem(Variant constraint) : constraint_(std::move(constraint)) {}

  static IndependenceSystem cardinality(std::size_t limit) {
    return IndependenceSystem(CardinalityConstraint{limit});
  }
  static IndependenceSystem partition(std::vector<PartitionBlock> blocks) {
    return IndependenceSystem(PartitionConstraint{std::move(blocks)});
  }

  // Cardinality: limit >= 1. Partition: blocks disjoint and covering
  // 0..ground_size-1.
  void validate(std::size_t ground_size) const;

  bool is_independent(std::span<const RouteId> selection, std::size_t ground_size) const;

  const Variant& constraint() const { return constraint_; }

 private:
  Variant constraint_;
};

// Entropy regularizer strength. Larger epsilon flattens every step
// distribution; the expected-value guarantee loses eps * ln(n_k) per step.
struct RegularizerConfig {
  double epsilon = 0.2;
};

struct GreedyStep {
  std::vector<RouteId> candidates;  // addable elements U_k, ascending id
  std::vector<double> gains;        // marginal gains m_k, same order
  std::vector<double> probs;        // step distribution p_k, same order
  std::size_t chosen_index = 0;
  double chosen_prob = 1.0;

  RouteId chosen() const { return candidates[chosen_index]; }
};

struct GreedyTrace {
  std::vector<GreedyStep> steps;
  Selection selection;  // chosen elements in step order
  double log_prob = 0.0;
};

// All T not in S with S + T independent, in ascending id order. Throws if the
// selection itself is dependent.
std::vector<RouteId> addable_elements(std::span<const RouteId> selection,
                                      const IndependenceSystem& system,
                                      std::size_t ground_size);

// Entropy-regularized argmax over the simplex, i.e. softmax(gains / eps),
// evaluated with max subtraction.
std::vector<double> regularized_argmax(std::span<const double> gains,
                                       const RegularizerConfig& config);

// Inverse-CDF draw. Throws if the probabilities do not sum to 1 within 1e-9.
std::size_t sample_step(std::span<const double> probs, Rng& rng);

// One run of smoothed greedy. Iterates until no element is addable.
GreedyTrace run_smoothed_greedy(const BasisObjective& objective, const Matrix& w,
                                const IndependenceSystem& system,
                                const RegularizerConfig& config, Rng& rng);

// Classic greedy: largest marginal gain, ties to the lowest route id.
Selection run_deterministic_greedy(const BasisObjective& objective, const Matrix& w,
                                   const IndependenceSystem& system);

// sum_k ln(chosen_prob_k).
double trace_log_probability(const GreedyTrace& trace);

// sum_k eps * ln(n_k) over the steps of a trace: the additive slack in the
// smoothed greedy approximation guarantee.
double entropy_slack(const GreedyTrace& trace, const RegularizerConfig& config);

}  // namespace dol

#endif  // DOL_SMOOTHED_GREEDY_HPP_
