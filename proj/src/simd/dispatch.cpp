#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "fnsfp/simd.hpp"

namespace fnsfp::simd {

#ifndef FNSFP_BUILD_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif
#ifndef FNSFP_BUILD_NEON
const KernelTable* neon_table() { return nullptr; }
#endif

bool level_supported(Level l) {
  switch (l) {
    case Level::Scalar:
      return true;
    case Level::AVX2:
#if defined(FNSFP_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Level::NEON:
      return neon_table() != nullptr;
  }
  return false;
}

const KernelTable& table_for(Level l) {
  if (!level_supported(l))
    throw std::runtime_error("simd level not available: " + std::string(level_name(l)));
  switch (l) {
    case Level::AVX2: return *avx2_table();
    case Level::NEON: return *neon_table();
    default: return scalar_table();
  }
}

namespace {

const KernelTable* detect() {
  if (const char* env = std::getenv("FNSFP_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return &scalar_table();
    if (v == "avx2" && level_supported(Level::AVX2)) return avx2_table();
    if (v == "neon" && level_supported(Level::NEON)) return neon_table();
  }
  if (level_supported(Level::AVX2)) return avx2_table();
  if (level_supported(Level::NEON)) return neon_table();
  return &scalar_table();
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = detect();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void force_level(Level l) { g_active.store(&table_for(l), std::memory_order_release); }

void reset_level() { g_active.store(detect(), std::memory_order_release); }

std::string_view level_name(Level l) {
  switch (l) {
    case Level::Scalar: return "scalar";
    case Level::AVX2: return "avx2";
    case Level::NEON: return "neon";
  }
  return "?";
}

}  // namespace fnsfp::simd
