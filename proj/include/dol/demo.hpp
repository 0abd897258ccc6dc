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

// One-dimensional misalignment demos. A scalar observation z drives the
// weights of a tiny objective through a nonlinear ground truth; per-weight
// linear models are fitted once by least squares and once through the
// smoothed-greedy decision loss, and the z at which each model flips its
// decision is compared with the true flip point.

#ifndef DOL_DEMO_HPP_
#define DOL_DEMO_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dol/common.hpp"
#include "dol/gradient.hpp"
#include "json.hpp"

namespace dol {

// A weight vector (1 x K objective) that depends on z.
struct DemoCase {
  std::string name;
  Problem problem{nullptr, IndependenceSystem::cardinality(1)};
  double z_lo = 0.0;
  double z_hi = 1.0;
  // Interval searched for decision boundaries. A fitted line may cross just
  // outside the sampled range, so this can be wider than [z_lo, z_hi] as
  // long as the true boundary stays unique inside it.
  double search_lo = 0.0;
  double search_hi = 1.0;
  // Noise-free weights at z.
  std::function<std::vector<double>(double)> truth;
  // Noisy observation of the weights at z.
  std::function<std::vector<double>(double z, Rng& rng)> observe;
};

// Three disjoint routes; route 3 sits alone in a partition block so it is
// always taken, and one of routes 1 and 2 is chosen. Route 1 pays off for
// small z and route 2 for large z, with a convex route-2 curve that a
// straight-line fit misplaces.
DemoCase route_choice_case(double noise_std = 0.3);

// f = beta f1 + (1 - beta) f2 over three coverage sets with the partition
// {s1} | {s2, s3}. The decision switches from {s1, s2} to {s1, s3} at
// beta = 1/2.8; beta(z) = tanh(z) is concave in z.
DemoCase coverage_mix_case(double noise_std = 0.08);

struct DemoSample {
  double z = 0.0;
  Matrix w;  // 1 x K
};

// z uniform on [z_lo, z_hi]; draws come from make_stream(seed).
std::vector<DemoSample> sample_demo_data(const DemoCase& demo, std::size_t n,
                                         std::uint64_t seed);

// w_hat_k(z) = slope_k z + intercept_k.
struct LinearModel {
  std::vector<double> slope;
  std::vector<double> intercept;

  Matrix predict(double z) const;
};

// Column-wise ordinary least squares.
LinearModel fit_linear_mse(std::span<const DemoSample> data);

struct DemoTrainConfig {
  double epsilon = 0.3;
  std::size_t sg_trials = 10;
  std::size_t epochs = 200;
  double learning_rate = 0.02;

  void validate() const;
};

// Full-batch Adam on the mean decision loss, starting from `init`. Trial
// streams are keyed by (seed, epoch, sample). The score-function estimator
// subtracts a constant baseline, the mean greedy value of the labels.
LinearModel fit_linear_dol(const DemoCase& demo, std::span<const DemoSample> data,
                           const LinearModel& init, const DemoTrainConfig& config,
                           std::uint64_t seed);

// Greedy decision under given weights, sorted ascending.
Selection demo_decision(const DemoCase& demo, const Matrix& w);

// First z in (search_lo, search_hi] where the decision differs from the one
// at search_lo, located on a grid of `grid` points and refined by bisection. NaN when the
// decision never changes.
double decision_boundary(const DemoCase& demo, const std::function<Matrix(double)>& weights,
                         std::size_t grid = 2001);

struct DemoRun {
  std::string name;
  std::uint64_t seed = 0;
  double optimal = 0.0;
  double mse = 0.0;
  double dol = 0.0;
  LinearModel mse_model;
  LinearModel dol_model;

  // |dol - optimal| <= |mse - optimal|; a missing boundary counts as worse
  // than any found one.
  bool dol_closer() const;
};

DemoRun run_demo(const DemoCase& demo, std::size_t n_samples, const DemoTrainConfig& config,
                 std::uint64_t seed);

// Columns z, w_hat0..w_hat{K-1}, decision, method with method in
// {truth, mse, dol}. Decisions are route ids joined by '+'.
void write_demo_sweep_csv(const std::string& path, const DemoCase& demo,
                          const DemoRun& run, std::size_t points = 201);

nlohmann::json to_json(const DemoRun& run);

}  // namespace dol

#endif  // DOL_DEMO_HPP_
