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

#include <atomic>
#include <cstdlib>
#include <string>

#include "dol/common.hpp"
#include "dol/kernels.hpp"

namespace dol::kernels {
namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend best_backend() {
  if (const char* env = std::getenv("DOL_KERNELS"); env != nullptr) {
    const std::string wanted(env);
    if (wanted == "scalar") return Backend::kScalar;
    if (wanted == "avx2" && backend_available(Backend::kAvx2)) return Backend::kAvx2;
    if (wanted == "neon" && backend_available(Backend::kNeon)) return Backend::kNeon;
  }
  if (backend_available(Backend::kAvx2)) return Backend::kAvx2;
  if (backend_available(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

const KernelTable& table_for(Backend backend) {
  switch (backend) {
    case Backend::kAvx2:
      return *avx2_table();
    case Backend::kNeon:
      return *neon_table();
    case Backend::kScalar:
      break;
  }
  return scalar_table();
}

struct State {
  std::atomic<Backend> backend{best_backend()};
  std::atomic<const KernelTable*> table{&table_for(backend.load())};
};

State& state() {
  static State s;
  return s;
}

}  // namespace

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
      return avx2_table() != nullptr && cpu_has_avx2_fma();
    case Backend::kNeon:
      return neon_table() != nullptr;
  }
  return false;
}

Backend active_backend() { return state().backend.load(); }

void set_backend(Backend backend) {
  if (!backend_available(backend)) {
    throw InvalidArgument("kernel backend not available: " +
                          std::string(backend_name(backend)));
  }
  state().backend.store(backend);
  state().table.store(&table_for(backend));
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& active() { return *state().table.load(std::memory_order_relaxed); }

}  // namespace dol::kernels
