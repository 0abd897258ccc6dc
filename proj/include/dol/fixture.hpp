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

// Small synthetic training set with a known context-to-weights teacher.
// Used to exercise the trainers without running the vehicle simulator.

#ifndef DOL_FIXTURE_HPP_
#define DOL_FIXTURE_HPP_

#include <cstdint>
#include <vector>

#include "dol/gradient.hpp"
#include "dol/predictor.hpp"

namespace dol {

struct TrainingFixture {
  Problem problem;
  std::vector<DatasetSample> samples;
};

// Six candidate routes over a 12-node graph split into 3 partition sets,
// basis {0.001, 0.5, 1}, cardinality limit `slots`. Contexts are uniform in
// [-1, 1]^4 and the weights are a fixed random softplus teacher of them.
TrainingFixture make_training_fixture(std::size_t n_samples = 30, std::size_t slots = 2,
                                      std::uint64_t seed = 7);

}  // namespace dol

#endif  // DOL_FIXTURE_HPP_
