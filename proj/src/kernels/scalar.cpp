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

// Reference kernels. Straight loops, left-to-right summation.

#include "dol/kernels.hpp"

namespace dol::kernels {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void gemv(const double* a, const double* x, const double* b, double* y,
          std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = dot(a + r * cols, x, cols) + (b != nullptr ? b[r] : 0.0);
  }
}

void gemv_t_acc(const double* a, const double* x, double* y, std::size_t rows,
                std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(x[r], a + r * cols, y, cols);
}

void ger(double alpha, const double* x, const double* y, double* a,
         std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(alpha * x[r], y, a + r * cols, cols);
}

double max(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{&dot, &axpy, &gemv, &gemv_t_acc, &ger, &max};
  return table;
}

}  // namespace dol::kernels
