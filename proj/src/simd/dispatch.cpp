// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "plex/simd/kernels.hpp"

namespace plex::simd {

#if !PLEX_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if PLEX_HAVE_AVX2 && (defined(__x86_64__) || defined(__i386__))
      return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2") &&
             __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa))
    throw std::runtime_error("kernel ISA '" + std::string(isa_name(isa)) +
                             "' is not available on this machine");
  return isa == Isa::avx2 ? *avx2_kernels() : scalar_kernels();
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("PLEX_ISA")) {
    const std::string want(env);
    if (want == "scalar") return scalar_kernels();
    if (want == "avx2") return kernels_for(Isa::avx2);
  }
  return isa_supported(Isa::avx2) ? *avx2_kernels() : scalar_kernels();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace plex::simd
