// Copyright 2026-present the otfwi project
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

#include "otfwi/simd/kernels.hpp"

#include <atomic>

#include "otfwi/errors.hpp"

namespace otfwi::simd {

namespace {

Backend detect_backend() {
#if defined(__aarch64__)
  return Backend::neon;
#elif defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2")) return Backend::avx2;
  return Backend::scalar;
#else
  return Backend::scalar;
#endif
}

std::atomic<int> g_forced{-1};

}  // namespace

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Ops& ops_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return detail::scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::avx2:
      if (backend_available(Backend::avx2)) return detail::avx2_table();
      break;
#endif
#if defined(__aarch64__)
    case Backend::neon:
      return detail::neon_table();
#endif
    default:
      break;
  }
  throw config_error("simd backend not available on this host: " + backend_name(b));
}

Backend active_backend() {
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<Backend>(forced);
  static const Backend detected = detect_backend();
  return detected;
}

const Ops& ops() { return ops_for(active_backend()); }

void force_backend(Backend b) {
  if (!backend_available(b)) {
    throw config_error("cannot force unavailable simd backend: " + backend_name(b));
  }
  g_forced.store(static_cast<int>(b), std::memory_order_relaxed);
}

void clear_forced_backend() { g_forced.store(-1, std::memory_order_relaxed); }

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace otfwi::simd
