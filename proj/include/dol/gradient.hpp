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

// Decision loss and its gradient with respect to predicted weights.
//
// For true weights w and a prediction w_hat the loss is
//
//   loss(w_hat) = f(S*(w), w) - E_{S ~ SG(w_hat)} [ f(S, w) ]
//
// where S*(w) is the deterministic greedy solution and SG(w_hat) is the output
// distribution of smoothed greedy run under w_hat. Its gradient is estimated
// with the score-function (log-derivative) identity
//
//   d loss / d w_hat = -E[ f(S, w) * grad_{w_hat} ln p(S, w_hat) ]
//
// and grad ln p(S, w_hat) is assembled step by step through the softmax
// Jacobian and the weight gradient of every marginal gain.

#ifndef DOL_GRADIENT_HPP_
#define DOL_GRADIENT_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "dol/common.hpp"
#include "dol/smoothed_greedy.hpp"
#include "dol/submodular.hpp"

namespace dol {

// An objective together with its feasibility structure.
struct Problem {
  std::shared_ptr<const BasisObjective> objective;
  IndependenceSystem system;

  const BasisObjective& f() const { return *objective; }
};

struct DecisionLossEstimate {
  double loss = 0.0;             // reference_value - mc_mean
  double reference_value = 0.0;  // f(S*(w_true), w_true)
  double mc_mean = 0.0;          // mean of f(S_j, w_true), S_j ~ SG(w_hat)
  double mc_std = 0.0;           // sample std of f(S_j, w_true)
  std::size_t n_trials = 0;
};

struct GradientEstimate {
  Matrix grad;      // d loss / d w_hat
  Matrix grad_std;  // per-entry sample std of the per-trial terms
  std::size_t n_trials = 0;
};

struct EstimatorOptions {
  std::size_t trials = 10;
  // Constant subtracted from f(S_j, w_true) before weighting the score.
  // Keeps the estimator unbiased; off by default.
  std::optional<double> baseline;
};

// Trial j of every estimator draws from make_stream(seed, j), so estimates
// are reproducible and independent of evaluation order.
DecisionLossEstimate decision_loss(const Matrix& w_true, const Matrix& w_hat,
                                   const Problem& problem, const RegularizerConfig& config,
                                   std::size_t trials, std::uint64_t seed);

GradientEstimate score_function_gradient(const Matrix& w_true, const Matrix& w_hat,
                                         const Problem& problem,
                                         const RegularizerConfig& config,
                                         const EstimatorOptions& options, std::uint64_t seed);

// Loss and gradient from the same set of smoothed greedy samples. This is what
// the training loop uses; it matches decision_loss and
// score_function_gradient called with the same seed.
struct LossAndGradient {
  DecisionLossEstimate loss;
  GradientEstimate gradient;
};
LossAndGradient decision_loss_and_gradient(const Matrix& w_true, const Matrix& w_hat,
                                           const Problem& problem,
                                           const RegularizerConfig& config,
                                           const EstimatorOptions& options,
                                           std::uint64_t seed);

// d p / d m for p = softmax(m / eps): (diag(p) - p p^T) / eps.
Matrix softmax_jacobian(std::span<const double> probs, double epsilon);

// grad_{w_hat} ln p_k(s_k, w_hat) for one recorded step taken from
// `prefix` (the selection before the step).
Matrix step_log_prob_weight_gradient(const GreedyStep& step, std::span<const RouteId> prefix,
                                     const Problem& problem, const RegularizerConfig& config);

// Sum of the step gradients: grad_{w_hat} ln p(S, w_hat) along the trace.
Matrix trace_log_prob_weight_gradient(const GreedyTrace& trace, const Problem& problem,
                                      const RegularizerConfig& config);

// One leaf of the smoothed greedy outcome tree.
struct Outcome {
  Selection sequence;
  double probability = 0.0;
  Matrix log_prob_gradient;  // grad_{w} ln p(sequence, w)
};

// Every ordered output of smoothed greedy under w with its probability.
// Throws RuntimeError if the tree has more than `max_outcomes` leaves.
std::vector<Outcome> enumerate_outcomes(const Matrix& w, const Problem& problem,
                                        const RegularizerConfig& config,
                                        std::size_t max_outcomes = 10000);

// E_{S ~ SG(w_hat)} f(S, w_true) by enumeration.
double exact_expected_value(const Matrix& w_true, const Matrix& w_hat, const Problem& problem,
                            const RegularizerConfig& config);

// grad_{w_hat} E_{S ~ SG(w_hat)} f(S, w_true) by enumeration. The decision
// loss gradient is its negation.
Matrix exact_expected_value_gradient(const Matrix& w_true, const Matrix& w_hat,
                                     const Problem& problem, const RegularizerConfig& config);

}  // namespace dol

#endif  // DOL_GRADIENT_HPP_
