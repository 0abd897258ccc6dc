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

// NEON kernels, 2 doubles per lane. AArch64 always has Advanced SIMD, so no
// runtime probe is needed there.

#include "dol/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace dol::kernels {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
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
  std::size_t i = 0;
  double m = x[0];
  if (n >= 2) {
    float64x2_t vm = vld1q_f64(x);
    for (i = 2; i + 2 <= n; i += 2) vm = vmaxq_f64(vm, vld1q_f64(x + i));
    m = vmaxvq_f64(vm);
  }
  for (; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{&dot, &axpy, &gemv, &gemv_t_acc, &ger, &max};
  return &table;
}

}  // namespace dol::kernels

#else

namespace dol::kernels {
const KernelTable* neon_table() { return nullptr; }
}  // namespace dol::kernels

#endif
