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

// Parameterized monotone submodular objectives over a ground set of candidate
// routes.
//
// Every objective here is linear in its weight matrix:
//
//   f(S, w) = sum_{i,j} w(i,j) * phi_{i,j}(S)
//
// where phi are fixed set functions ("basis functions"). The main family is
// the decayed coverage objective: node partition sets W_i, decay factors
// gamma_j, psi_i(S) = number of visits of W_i by the routes of S, and
// phi_{i,j}(S) = sum_{a=1..psi_i(S)} gamma_j^(a-1).

#ifndef DOL_SUBMODULAR_HPP_
#define DOL_SUBMODULAR_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dol/common.hpp"

namespace dol {

using NodeId = std::int64_t;
// A route is identified by its position in the ground set. Canonical order is
// ascending id.
using RouteId = std::size_t;
// Chosen routes in the order they were added. Treated as a set by objectives.
using Selection = std::vector<RouteId>;
// n x |Gamma| non-negative reward weights; row = partition set, column = decay.
using WeightMatrix = Matrix;

struct Route {
  std::vector<NodeId> nodes;  // closed walk on the road graph, may revisit
};

struct GroundSet {
  std::vector<Route> routes;

  std::size_t size() const { return routes.size(); }
  // Throws InvalidArgument if empty.
  void validate() const;
};

struct NodePartition {
  std::vector<std::vector<NodeId>> sets;

  std::size_t size() const { return sets.size(); }
  // Throws unless every set is non-empty and the sets are pairwise disjoint.
  void validate() const;
};

struct BasisFamily {
  std::vector<double> gammas;

  std::size_t size() const { return gammas.size(); }
  // Throws unless non-empty, every gamma in (0, 1], strictly increasing.
  void validate() const;
};

// sum_{a=1..psi} gamma^(a-1). Closed form (1 - gamma^psi) / (1 - gamma) away
// from gamma = 1, exact summation within 1e-9 of it.
double basis_value(std::uint64_t psi, double gamma);

// Throws InvalidArgument if a route id is out of range or repeated.
void check_selection(std::span<const RouteId> selection, std::size_t ground_size);

// Interface for objectives linear in a weight matrix.
class BasisObjective {
 public:
  virtual ~BasisObjective() = default;

  virtual std::size_t ground_size() const = 0;
  virtual std::size_t weight_rows() const = 0;
  virtual std::size_t weight_cols() const = 0;

  // phi_{i,j}(S) for every (i, j). Validates the selection.
  virtual Matrix basis_values(std::span<const RouteId> selection) const = 0;

  // f(S, w). Throws on shape mismatch or non-finite weights.
  double value(std::span<const RouteId> selection, const Matrix& w) const;

  // f(S + u, w) - f(S, w). Throws if u is already in S.
  double marginal_gain(std::span<const RouteId> selection, RouteId candidate,
                       const Matrix& w) const;

  // d/dw of marginal_gain. Independent of w because f is linear in w.
  Matrix marginal_gain_weight_gradient(std::span<const RouteId> selection,
                                       RouteId candidate) const;

  // Gains of several candidates against the same prefix. Evaluates the
  // prefix basis once. When `gradients` is non-null it receives one gradient
  // matrix per candidate.
  std::vector<double> marginal_gains(std::span<const RouteId> selection,
                                     std::span<const RouteId> candidates, const Matrix& w,
                                     std::vector<Matrix>* gradients = nullptr) const;

  void check_weights(const Matrix& w) const;
};

// Decayed coverage objective over node partition sets.
//
// psi_i(S) counts visits: a node repeated within one route counts once for
// that route, but the same node on two different selected routes counts
// twice. The decay gamma then discounts the second visit.
class CoverageObjective final : public BasisObjective {
 public:
  CoverageObjective(GroundSet ground, NodePartition partition, BasisFamily basis);

  std::size_t ground_size() const override { return ground_.size(); }
  std::size_t weight_rows() const override { return partition_.size(); }
  std::size_t weight_cols() const override { return basis_.size(); }

  Matrix basis_values(std::span<const RouteId> selection) const override;

  // psi_i(S); `partition_index` is zero-based.
  std::uint64_t count_coverage(std::size_t partition_index,
                               std::span<const RouteId> selection) const;

  // Per-route visit counts, routes x partitions.
  std::uint64_t route_count(RouteId route, std::size_t partition_index) const {
    return counts_[route * partition_.size() + partition_index];
  }

  const GroundSet& ground() const { return ground_; }
  const NodePartition& partition() const { return partition_; }
  const BasisFamily& basis() const { return basis_; }

 private:
  GroundSet ground_;
  NodePartition partition_;
  BasisFamily basis_;
  std::vector<std::uint64_t> counts_;
};

// Weighted area coverage: each route covers a set of cells and basis k
// assigns every cell an area. phi_{0,k}(S) = total area_k of the union of
// cells covered by S. Weight shape 1 x K. With one private cell per route and
// area_k(c) = [k == c] this is the modular objective f(S, w) = sum_{r in S} w_r.
class AreaCoverageObjective final : public BasisObjective {
 public:
  // route_cells[r] lists the cell indices covered by route r;
  // areas[k][c] is the area of cell c under basis k.
  AreaCoverageObjective(std::vector<std::vector<std::size_t>> route_cells,
                        std::vector<std::vector<double>> areas);

  // One cell per route, one basis per route.
  static AreaCoverageObjective modular(std::size_t routes);

  std::size_t ground_size() const override { return route_cells_.size(); }
  std::size_t weight_rows() const override { return 1; }
  std::size_t weight_cols() const override { return areas_.size(); }

  Matrix basis_values(std::span<const RouteId> selection) const override;

 private:
  std::vector<std::vector<std::size_t>> route_cells_;
  std::vector<std::vector<double>> areas_;
  std::size_t cell_count_ = 0;
};

}  // namespace dol

#endif  // DOL_SUBMODULAR_HPP_
