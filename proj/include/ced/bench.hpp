#pragma once
// Per-window step latency measurement for crisp and belief modes.

#include <cstdint>

#include "ced/engine.hpp"

namespace ced {

struct LatencyStats {
  double mean_ns = 0.0;
  std::uint64_t p50_ns = 0;
  std::uint64_t p99_ns = 0;
  std::uint64_t max_ns = 0;
};

struct LatencyReport {
  std::uint32_t span_windows = 0;
  std::uint32_t trials = 0;
  std::size_t windows_timed = 0;
  LatencyStats crisp;
  LatencyStats belief;  // measured on noisy soft inputs (p_correct 0.9)
};

// Generates `trials` random traces of `span_windows` windows and times step
// processing only, with a monotonic clock. Generation and I/O are excluded.
LatencyReport bench_latency(const Engine& engine, std::uint32_t span_windows,
                            std::uint32_t trials, std::uint64_t seed);

}  // namespace ced
