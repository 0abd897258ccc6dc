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

#include "dol/submodular.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace dol {

void GroundSet::validate() const {
  if (routes.empty()) throw InvalidArgument("ground set is empty");
}

void NodePartition::validate() const {
  if (sets.empty()) throw InvalidArgument("node partition has no sets");
  std::unordered_set<NodeId> seen;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].empty()) {
      throw InvalidArgument("partition set " + std::to_string(i) + " is empty");
    }
    std::unordered_set<NodeId> local;
    for (NodeId v : sets[i]) {
      if (!local.insert(v).second) continue;
      if (!seen.insert(v).second) {
        throw InvalidArgument("node " + std::to_string(v) +
                              " appears in more than one partition set");
      }
    }
  }
}

void BasisFamily::validate() const {
  if (gammas.empty()) throw InvalidArgument("basis family has no decay factors");
  for (std::size_t j = 0; j < gammas.size(); ++j) {
    const double g = gammas[j];
    if (!(g > 0.0 && g <= 1.0)) {
      throw InvalidArgument("decay factor " + std::to_string(g) + " outside (0, 1]");
    }
    if (j > 0 && !(g > gammas[j - 1])) {
      throw InvalidArgument("decay factors must be strictly increasing");
    }
  }
}

double basis_value(std::uint64_t psi, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw InvalidArgument("decay factor " + std::to_string(gamma) + " outside (0, 1]");
  }
  if (psi == 0) return 0.0;
  if (std::abs(1.0 - gamma) > 1e-9) {
    // expm1/log1p keep 1 - gamma^psi accurate when gamma is close to 1.
    return -std::expm1(static_cast<double>(psi) * std::log1p(gamma - 1.0)) / (1.0 - gamma);
  }
  // Near gamma = 1 the closed form cancels catastrophically.
  double sum = 0.0;
  double term = 1.0;
  for (std::uint64_t a = 0; a < psi; ++a) {
    sum += term;
    term *= gamma;
  }
  return sum;
}

void check_selection(std::span<const RouteId> selection, std::size_t ground_size) {
  std::vector<bool> used(ground_size, false);
  for (RouteId r : selection) {
    if (r >= ground_size) {
      throw InvalidArgument("unknown route id " + std::to_string(r));
    }
    if (used[r]) throw InvalidArgument("route id " + std::to_string(r) + " selected twice");
    used[r] = true;
  }
}

void BasisObjective::check_weights(const Matrix& w) const {
  if (w.rows() != weight_rows() || w.cols() != weight_cols()) {
    throw InvalidArgument("weight matrix is " + std::to_string(w.rows()) + "x" +
                          std::to_string(w.cols()) + ", objective expects " +
                          std::to_string(weight_rows()) + "x" + std::to_string(weight_cols()));
  }
  if (!w.all_finite()) throw InvalidArgument("weight matrix has non-finite entries");
}

double BasisObjective::value(std::span<const RouteId> selection, const Matrix& w) const {
  check_weights(w);
  return inner(basis_values(selection), w);
}

Matrix BasisObjective::marginal_gain_weight_gradient(std::span<const RouteId> selection,
                                                     RouteId candidate) const {
  if (std::find(selection.begin(), selection.end(), candidate) != selection.end()) {
    throw InvalidArgument("candidate route " + std::to_string(candidate) +
                          " is already selected");
  }
  Selection extended(selection.begin(), selection.end());
  extended.push_back(candidate);
  return basis_values(extended) - basis_values(selection);
}

double BasisObjective::marginal_gain(std::span<const RouteId> selection, RouteId candidate,
                                     const Matrix& w) const {
  check_weights(w);
  return inner(marginal_gain_weight_gradient(selection, candidate), w);
}

std::vector<double> BasisObjective::marginal_gains(std::span<const RouteId> selection,
                                                   std::span<const RouteId> candidates,
                                                   const Matrix& w,
                                                   std::vector<Matrix>* gradients) const {
  check_weights(w);
  const Matrix base = basis_values(selection);
  Selection extended(selection.begin(), selection.end());
  extended.push_back(0);
  std::vector<double> gains;
  gains.reserve(candidates.size());
  if (gradients != nullptr) {
    gradients->clear();
    gradients->reserve(candidates.size());
  }
  for (RouteId u : candidates) {
    if (std::find(selection.begin(), selection.end(), u) != selection.end()) {
      throw InvalidArgument("candidate route " + std::to_string(u) + " is already selected");
    }
    extended.back() = u;
    Matrix delta = basis_values(extended);
    delta -= base;
    gains.push_back(inner(delta, w));
    if (gradients != nullptr) gradients->push_back(std::move(delta));
  }
  return gains;
}

CoverageObjective::CoverageObjective(GroundSet ground, NodePartition partition,
                                     BasisFamily basis)
    : ground_(std::move(ground)), partition_(std::move(partition)), basis_(std::move(basis)) {
  ground_.validate();
  partition_.validate();
  basis_.validate();

  std::unordered_map<NodeId, std::size_t> owner;
  for (std::size_t i = 0; i < partition_.size(); ++i) {
    for (NodeId v : partition_.sets[i]) owner.emplace(v, i);
  }
  counts_.assign(ground_.size() * partition_.size(), 0);
  for (std::size_t r = 0; r < ground_.size(); ++r) {
    std::unordered_set<NodeId> distinct(ground_.routes[r].nodes.begin(),
                                        ground_.routes[r].nodes.end());
    for (NodeId v : distinct) {
      if (auto it = owner.find(v); it != owner.end()) {
        ++counts_[r * partition_.size() + it->second];
      }
    }
  }
}

std::uint64_t CoverageObjective::count_coverage(std::size_t partition_index,
                                                std::span<const RouteId> selection) const {
  if (partition_index >= partition_.size()) {
    throw InvalidArgument("partition index " + std::to_string(partition_index) +
                          " out of range");
  }
  check_selection(selection, ground_.size());
  std::uint64_t psi = 0;
  for (RouteId r : selection) psi += route_count(r, partition_index);
  return psi;
}

Matrix CoverageObjective::basis_values(std::span<const RouteId> selection) const {
  check_selection(selection, ground_.size());
  const std::size_t n = partition_.size();
  Matrix phi(n, basis_.size());
  std::vector<std::uint64_t> psi(n, 0);
  for (RouteId r : selection) {
    for (std::size_t i = 0; i < n; ++i) psi[i] += counts_[r * n + i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < basis_.size(); ++j) {
      phi(i, j) = basis_value(psi[i], basis_.gammas[j]);
    }
  }
  return phi;
}

AreaCoverageObjective::AreaCoverageObjective(std::vector<std::vector<std::size_t>> route_cells,
                                             std::vector<std::vector<double>> areas)
    : route_cells_(std::move(route_cells)), areas_(std::move(areas)) {
  if (route_cells_.empty()) throw InvalidArgument("area coverage needs at least one route");
  if (areas_.empty()) throw InvalidArgument("area coverage needs at least one basis");
  cell_count_ = areas_.front().size();
  for (const auto& a : areas_) {
    if (a.size() != cell_count_) throw InvalidArgument("area tables differ in cell count");
    for (double v : a) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("cell areas must be >= 0");
    }
  }
  for (const auto& cells : route_cells_) {
    for (std::size_t c : cells) {
      if (c >= cell_count_) throw InvalidArgument("route covers unknown cell");
    }
  }
}

AreaCoverageObjective AreaCoverageObjective::modular(std::size_t routes) {
  std::vector<std::vector<std::size_t>> cells(routes);
  std::vector<std::vector<double>> areas(routes, std::vector<double>(routes, 0.0));
  for (std::size_t r = 0; r < routes; ++r) {
    cells[r] = {r};
    areas[r][r] = 1.0;
  }
  return AreaCoverageObjective(std::move(cells), std::move(areas));
}

Matrix AreaCoverageObjective::basis_values(std::span<const RouteId> selection) const {
  check_selection(selection, route_cells_.size());
  std::vector<bool> covered(cell_count_, false);
  for (RouteId r : selection) {
    for (std::size_t c : route_cells_[r]) covered[c] = true;
  }
  Matrix phi(1, areas_.size());
  for (std::size_t k = 0; k < areas_.size(); ++k) {
    double total = 0.0;
    for (std::size_t c = 0; c < cell_count_; ++c) {
      if (covered[c]) total += areas_[k][c];
    }
    phi(0, k) = total;
  }
  return phi;
}

}  // namespace dol
