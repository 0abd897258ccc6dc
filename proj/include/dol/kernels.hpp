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

// Dense double-precision inner loops used by the predictor and the weight
// fitter. Every kernel has a scalar reference implementation plus vectorized
// variants (AVX2+FMA on x86-64, NEON on AArch64). The variant is selected once
// at startup from CPU features; DOL_KERNELS=scalar forces the reference path.
//
// Vector variants reassociate sums, so results agree with the scalar path to
// rounding, not bitwise. Within one process the choice is fixed, so runs stay
// reproducible.

#ifndef DOL_KERNELS_HPP_
#define DOL_KERNELS_HPP_

#include <cstddef>
#include <span>
#include <string_view>

namespace dol::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

// Function table for one backend. Matrices are row-major with leading
// dimension equal to the column count.
struct KernelTable {
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y = A x + b   (A: rows x cols, b may be null)
  void (*gemv)(const double* a, const double* x, const double* b, double* y,
               std::size_t rows, std::size_t cols);
  // y += A^T x    (A: rows x cols, x: rows, y: cols)
  void (*gemv_t_acc)(const double* a, const double* x, double* y,
                     std::size_t rows, std::size_t cols);
  // A += alpha * x y^T   (x: rows, y: cols)
  void (*ger)(double alpha, const double* x, const double* y, double* a,
              std::size_t rows, std::size_t cols);
  // max_i x[i], n >= 1
  double (*max)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();
// Null when the backend was not compiled in for this target.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// True when the backend is compiled in and the running CPU supports it.
bool backend_available(Backend backend);

// Active backend. Defaults to the best available one, honoring DOL_KERNELS.
Backend active_backend();
void set_backend(Backend backend);
std::string_view backend_name(Backend backend);
const KernelTable& active();

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline double max(std::span<const double> x) {
  return active().max(x.data(), x.size());
}

}  // namespace dol::kernels

#endif  // DOL_KERNELS_HPP_
