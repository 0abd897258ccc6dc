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

#include "dol/fixture.hpp"

#include <cmath>
#include <memory>

namespace dol {

TrainingFixture make_training_fixture(std::size_t n_samples, std::size_t slots,
                                      std::uint64_t seed) {
  constexpr std::size_t kContext = 4;

  // Partition sets {0..5}, {6..8}, {9..11}. Routes 0 and 1 sweep the first
  // set; routes 2 to 5 each touch two nodes of the other sets.
  GroundSet ground{{Route{{0, 1, 2, 3, 4}},
                    Route{{1, 2, 3, 4, 5}},
                    Route{{6, 7}},
                    Route{{8, 9}},
                    Route{{10, 11}},
                    Route{{6, 11}}}};
  NodePartition partition{{{0, 1, 2, 3, 4, 5}, {6, 7, 8}, {9, 10, 11}}};
  const BasisFamily basis{{0.001, 0.5, 1.0}};
  auto objective = std::make_shared<CoverageObjective>(ground, partition, basis);

  // Teacher: w_ij = s_i softplus(3 (a_ij . z + c_ij)) with a small scale on
  // the first set. Near-uniform predictions favour the two long routes, which
  // the teacher values least.
  Rng rng = make_stream(seed, 0, 0);
  const std::size_t k = partition.sets.size() * basis.size();
  Matrix a(k, kContext);
  for (double& v : a.flat()) v = uniform(rng, -1.0, 1.0);
  std::vector<double> c(k);
  for (double& v : c) v = uniform(rng, -0.5, 0.5);
  const double row_scale[] = {0.2, 2.0, 2.0};

  TrainingFixture fx{{objective, IndependenceSystem::cardinality(slots)}, {}};
  Rng ctx = make_stream(seed, 1, 0);
  for (std::size_t i = 0; i < n_samples; ++i) {
    DatasetSample s;
    s.z.resize(kContext);
    for (double& v : s.z) v = uniform(ctx, -1.0, 1.0);
    s.w = Matrix(partition.sets.size(), basis.size());
    for (std::size_t e = 0; e < k; ++e) {
      double pre = c[e];
      for (std::size_t d = 0; d < kContext; ++d) pre += a(e, d) * s.z[d];
      const double x = 3.0 * pre;
      const double sp = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
      s.w.flat()[e] = row_scale[e / basis.size()] * sp;
    }
    fx.samples.push_back(std::move(s));
  }
  return fx;
}

}  // namespace dol
