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

#include "dol/gradient.hpp"

#include <cmath>
#include <string>

namespace dol {
namespace {

void check_shapes(const Matrix& w_true, const Matrix& w_hat, const Problem& problem) {
  if (!problem.objective) throw InvalidArgument("problem has no objective");
  problem.f().check_weights(w_true);
  problem.f().check_weights(w_hat);
}

struct Accumulator {
  explicit Accumulator(std::size_t rows, std::size_t cols)
      : sum(rows, cols), sum_sq(rows, cols) {}
  void add(const Matrix& term) {
    auto s = sum.flat();
    auto q = sum_sq.flat();
    auto t = term.flat();
    for (std::size_t i = 0; i < t.size(); ++i) {
      s[i] += t[i];
      q[i] += t[i] * t[i];
    }
  }
  Matrix sum;
  Matrix sum_sq;
};

Matrix sample_std(const Accumulator& acc, std::size_t n) {
  Matrix out(acc.sum.rows(), acc.sum.cols());
  if (n < 2) return out;
  auto o = out.flat();
  auto s = acc.sum.flat();
  auto q = acc.sum_sq.flat();
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double mean = s[i] / dn;
    const double var = (q[i] - dn * mean * mean) / (dn - 1.0);
    o[i] = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return out;
}

}  // namespace

LossAndGradient decision_loss_and_gradient(const Matrix& w_true, const Matrix& w_hat,
                                           const Problem& problem,
                                           const RegularizerConfig& config,
                                           const EstimatorOptions& options,
                                           std::uint64_t seed) {
  check_shapes(w_true, w_hat, problem);
  if (options.trials == 0) throw InvalidArgument("number of smoothed greedy trials must be >= 1");
  const BasisObjective& f = problem.f();

  LossAndGradient out;
  const Selection reference = run_deterministic_greedy(f, w_true, problem.system);
  out.loss.reference_value = f.value(reference, w_true);
  out.loss.n_trials = options.trials;

  const double baseline = options.baseline.value_or(0.0);
  Accumulator acc(w_hat.rows(), w_hat.cols());
  double value_sum = 0.0;
  double value_sq = 0.0;
  for (std::size_t j = 0; j < options.trials; ++j) {
    Rng rng = make_stream(seed, j);
    const GreedyTrace trace = run_smoothed_greedy(f, w_hat, problem.system, config, rng);
    const double value = f.value(trace.selection, w_true);
    value_sum += value;
    value_sq += value * value;
    Matrix term = trace_log_prob_weight_gradient(trace, problem, config);
    term *= -(value - baseline);
    acc.add(term);
  }
  const double n = static_cast<double>(options.trials);
  out.loss.mc_mean = value_sum / n;
  out.loss.loss = out.loss.reference_value - out.loss.mc_mean;
  if (options.trials > 1) {
    const double var = (value_sq - n * out.loss.mc_mean * out.loss.mc_mean) / (n - 1.0);
    out.loss.mc_std = var > 0.0 ? std::sqrt(var) : 0.0;
  }

  out.gradient.grad = acc.sum;
  out.gradient.grad *= 1.0 / n;
  out.gradient.grad_std = sample_std(acc, options.trials);
  out.gradient.n_trials = options.trials;
  if (!out.gradient.grad.all_finite()) {
    throw RuntimeError("score-function gradient produced non-finite entries");
  }
  return out;
}

DecisionLossEstimate decision_loss(const Matrix& w_true, const Matrix& w_hat,
                                   const Problem& problem, const RegularizerConfig& config,
                                   std::size_t trials, std::uint64_t seed) {
  check_shapes(w_true, w_hat, problem);
  if (trials == 0) throw InvalidArgument("number of smoothed greedy trials must be >= 1");
  const BasisObjective& f = problem.f();
  DecisionLossEstimate est;
  est.reference_value = f.value(run_deterministic_greedy(f, w_true, problem.system), w_true);
  est.n_trials = trials;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t j = 0; j < trials; ++j) {
    Rng rng = make_stream(seed, j);
    const GreedyTrace trace = run_smoothed_greedy(f, w_hat, problem.system, config, rng);
    const double value = f.value(trace.selection, w_true);
    sum += value;
    sum_sq += value * value;
  }
  const double n = static_cast<double>(trials);
  est.mc_mean = sum / n;
  est.loss = est.reference_value - est.mc_mean;
  if (trials > 1) {
    const double var = (sum_sq - n * est.mc_mean * est.mc_mean) / (n - 1.0);
    est.mc_std = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return est;
}

GradientEstimate score_function_gradient(const Matrix& w_true, const Matrix& w_hat,
                                         const Problem& problem,
                                         const RegularizerConfig& config,
                                         const EstimatorOptions& options, std::uint64_t seed) {
  return decision_loss_and_gradient(w_true, w_hat, problem, config, options, seed).gradient;
}

Matrix softmax_jacobian(std::span<const double> probs, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("softmax temperature must be positive");
  if (probs.empty()) throw InvalidArgument("softmax jacobian of an empty distribution");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("probability outside [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("probabilities do not sum to 1");
  const std::size_t n = probs.size();
  Matrix jac(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      jac(a, b) = ((a == b ? probs[a] : 0.0) - probs[a] * probs[b]) / epsilon;
    }
  }
  return jac;
}

Matrix step_log_prob_weight_gradient(const GreedyStep& step, std::span<const RouteId> prefix,
                                     const Problem& problem, const RegularizerConfig& config) {
  const BasisObjective& f = problem.f();
  const std::size_t nk = step.candidates.size();
  if (nk == 0 || step.probs.size() != nk || step.gains.size() != nk ||
      step.chosen_index >= nk) {
    throw InvalidArgument("inconsistent greedy step");
  }
  const std::vector<RouteId> expected = addable_elements(prefix, problem.system, f.ground_size());
  if (expected != step.candidates) {
    throw InvalidArgument("greedy step candidates do not match the prefix selection");
  }
  Matrix grad(f.weight_rows(), f.weight_cols());
  if (nk == 1) return grad;

  const Matrix jac = softmax_jacobian(step.probs, config.epsilon);
  const double inv_p = 1.0 / step.chosen_prob;
  for (std::size_t u = 0; u < nk; ++u) {
    const double coeff = jac(step.chosen_index, u) * inv_p;
    if (coeff == 0.0) continue;
    const Matrix dm = f.marginal_gain_weight_gradient(prefix, step.candidates[u]);
    grad += coeff * dm;
  }
  return grad;
}

Matrix trace_log_prob_weight_gradient(const GreedyTrace& trace, const Problem& problem,
                                      const RegularizerConfig& config) {
  const BasisObjective& f = problem.f();
  Matrix grad(f.weight_rows(), f.weight_cols());
  Selection prefix;
  for (const GreedyStep& step : trace.steps) {
    grad += step_log_prob_weight_gradient(step, prefix, problem, config);
    prefix.push_back(step.chosen());
  }
  return grad;
}

namespace {

struct Enumerator {
  const Matrix& w;
  const Problem& problem;
  const RegularizerConfig& config;
  std::size_t max_outcomes;
  std::vector<Outcome> leaves;

  void descend(Selection& prefix, double prob, const Matrix& grad) {
    const BasisObjective& f = problem.f();
    const std::vector<RouteId> candidates =
        addable_elements(prefix, problem.system, f.ground_size());
    if (candidates.empty()) {
      if (leaves.size() >= max_outcomes) {
        throw RuntimeError("smoothed greedy outcome tree exceeds " +
                           std::to_string(max_outcomes) + " outcomes");
      }
      leaves.push_back({prefix, prob, grad});
      return;
    }
    std::vector<Matrix> dm;
    const std::vector<double> gains = f.marginal_gains(prefix, candidates, w, &dm);
    const std::vector<double> p = regularized_argmax(gains, config);

    // Probability-weighted mean of the gain gradients.
    Matrix mean_dm(w.rows(), w.cols());
    for (std::size_t u = 0; u < candidates.size(); ++u) mean_dm += p[u] * dm[u];

    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (p[k] == 0.0) continue;
      // grad ln p_k = (dm_k - sum_u p_u dm_u) / eps
      Matrix child = grad;
      child += (1.0 / config.epsilon) * (dm[k] - mean_dm);
      prefix.push_back(candidates[k]);
      descend(prefix, prob * p[k], child);
      prefix.pop_back();
    }
  }
};

}  // namespace

std::vector<Outcome> enumerate_outcomes(const Matrix& w, const Problem& problem,
                                        const RegularizerConfig& config,
                                        std::size_t max_outcomes) {
  if (!problem.objective) throw InvalidArgument("problem has no objective");
  problem.f().check_weights(w);
  Enumerator e{w, problem, config, max_outcomes, {}};
  Selection prefix;
  e.descend(prefix, 1.0, Matrix(w.rows(), w.cols()));
  return std::move(e.leaves);
}

double exact_expected_value(const Matrix& w_true, const Matrix& w_hat, const Problem& problem,
                            const RegularizerConfig& config) {
  check_shapes(w_true, w_hat, problem);
  double total = 0.0;
  for (const Outcome& o : enumerate_outcomes(w_hat, problem, config)) {
    total += o.probability * problem.f().value(o.sequence, w_true);
  }
  return total;
}

Matrix exact_expected_value_gradient(const Matrix& w_true, const Matrix& w_hat,
                                     const Problem& problem, const RegularizerConfig& config) {
  check_shapes(w_true, w_hat, problem);
  Matrix grad(w_hat.rows(), w_hat.cols());
  for (const Outcome& o : enumerate_outcomes(w_hat, problem, config)) {
    const double weight = o.probability * problem.f().value(o.sequence, w_true);
    grad += weight * o.log_prob_gradient;
  }
  return grad;
}

}  // namespace dol
