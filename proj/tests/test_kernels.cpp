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

// Vector kernels must agree with the scalar reference on every size,
// including the remainder loops.

#include <cmath>
#include <vector>

#include "doctest.h"
#include "dol/common.hpp"
#include "dol/kernels.hpp"

using namespace dol;
using kernels::Backend;
using kernels::KernelTable;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, -3.0, 3.0);
  return v;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

std::vector<const KernelTable*> vector_tables() {
  std::vector<const KernelTable*> out;
  if (kernels::backend_available(Backend::kAvx2)) out.push_back(kernels::avx2_table());
  if (kernels::backend_available(Backend::kNeon)) out.push_back(kernels::neon_table());
  return out;
}

}  // namespace

TEST_CASE("vector kernels match scalar reference on all sizes") {
  const KernelTable& ref = kernels::scalar_table();
  const auto tables = vector_tables();
  MESSAGE("vector backends under test: " << tables.size());
  Rng rng(7);
  for (const KernelTable* t : tables) {
    for (std::size_t n = 1; n <= 67; ++n) {
      const auto x = random_vector(rng, n);
      const auto y = random_vector(rng, n);
      CHECK(rel_err(t->dot(x.data(), y.data(), n), ref.dot(x.data(), y.data(), n)) < 1e-13);
      CHECK(t->max(x.data(), n) == ref.max(x.data(), n));

      auto y1 = y;
      auto y2 = y;
      t->axpy(0.37, x.data(), y1.data(), n);
      ref.axpy(0.37, x.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(y1[i], y2[i]) < 1e-14);
    }
    for (std::size_t rows : {1u, 3u, 8u, 27u}) {
      for (std::size_t cols : {1u, 5u, 16u, 33u, 64u}) {
        const auto a = random_vector(rng, rows * cols);
        const auto x = random_vector(rng, cols);
        const auto b = random_vector(rng, rows);
        const auto xr = random_vector(rng, rows);
        std::vector<double> y1(rows), y2(rows);
        t->gemv(a.data(), x.data(), b.data(), y1.data(), rows, cols);
        ref.gemv(a.data(), x.data(), b.data(), y2.data(), rows, cols);
        for (std::size_t i = 0; i < rows; ++i) CHECK(rel_err(y1[i], y2[i]) < 1e-13);

        std::vector<double> z1(cols, 1.0), z2(cols, 1.0);
        t->gemv_t_acc(a.data(), xr.data(), z1.data(), rows, cols);
        ref.gemv_t_acc(a.data(), xr.data(), z2.data(), rows, cols);
        for (std::size_t i = 0; i < cols; ++i) CHECK(rel_err(z1[i], z2[i]) < 1e-13);

        auto g1 = a;
        auto g2 = a;
        t->ger(-0.5, xr.data(), x.data(), g1.data(), rows, cols);
        ref.ger(-0.5, xr.data(), x.data(), g2.data(), rows, cols);
        for (std::size_t i = 0; i < g1.size(); ++i) CHECK(rel_err(g1[i], g2[i]) < 1e-14);
      }
    }
  }
}

TEST_CASE("scalar reference computes exact small results") {
  const KernelTable& ref = kernels::scalar_table();
  const double x[] = {1, 2, 3};
  const double y[] = {4, 5, 6};
  CHECK(ref.dot(x, y, 3) == 32.0);
  CHECK(ref.max(y, 3) == 6.0);
  const double a[] = {1, 2, 3, 4, 5, 6};  // 2 x 3
  double out[2];
  ref.gemv(a, x, nullptr, out, 2, 3);
  CHECK(out[0] == 14.0);
  CHECK(out[1] == 32.0);
}

TEST_CASE("backend selection") {
  const Backend original = kernels::active_backend();
  CHECK(kernels::backend_available(Backend::kScalar));
  kernels::set_backend(Backend::kScalar);
  CHECK(kernels::active_backend() == Backend::kScalar);
  CHECK(&kernels::active() == &kernels::scalar_table());
  if (!kernels::backend_available(Backend::kNeon)) {
    CHECK_THROWS_AS(kernels::set_backend(Backend::kNeon), InvalidArgument);
  }
  kernels::set_backend(original);
  CHECK(kernels::backend_name(Backend::kAvx2) == "avx2");
}
