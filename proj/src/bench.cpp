#include "ced/bench.hpp"

#include <algorithm>
#include <cmath>

#include "ced/rng.hpp"
#include "ced/sim.hpp"

namespace ced {

namespace {

constexpr std::uint64_t kBenchNoiseTag = 0xb37c;

LatencyStats summarize(std::vector<std::uint64_t>& samples) {
  LatencyStats stats;
  if (samples.empty()) return stats;
  std::sort(samples.begin(), samples.end());
  double sum = 0.0;
  for (std::uint64_t v : samples) sum += static_cast<double>(v);
  stats.mean_ns = sum / static_cast<double>(samples.size());
  const auto rank = [&](double q) {
    const auto r = static_cast<std::size_t>(std::max(1.0, std::ceil(q * samples.size())));
    return samples[r - 1];
  };
  stats.p50_ns = rank(0.50);
  stats.p99_ns = rank(0.99);
  stats.max_ns = samples.back();
  return stats;
}

}  // namespace

LatencyReport bench_latency(const Engine& engine, std::uint32_t span_windows,
                            std::uint32_t trials, std::uint64_t seed) {
  if (trials < 1) fail("InfeasibleConfig", "trials must be at least 1");
  const WindowSpec window = engine.rules().window();
  SimConfig cfg = fit_span(SimConfig{}, span_windows, window);
  cfg.seed = seed;
  const std::vector<Trace> traces = generate(cfg, trials, window);

  std::vector<std::uint64_t> crisp_ns, belief_ns;
  crisp_ns.reserve(static_cast<std::size_t>(trials) * span_windows);
  belief_ns.reserve(static_cast<std::size_t>(trials) * span_windows);
  for (const Trace& trace : traces) {
    const DetectorOutput crisp = engine.run_crisp(trace.activities, /*timing=*/true);
    crisp_ns.insert(crisp_ns.end(), crisp.per_window_latency_ns->begin(),
                    crisp.per_window_latency_ns->end());
    const Trace noisy = corrupt(trace, NoiseModel{}, substream(*trace.seed, kBenchNoiseTag),
                                engine.rules().vocab());
    const DetectorOutput belief =
        engine.run_on_soft(noisy.soft, DetectMode::Belief, 0.5, /*timing=*/true);
    belief_ns.insert(belief_ns.end(), belief.per_window_latency_ns->begin(),
                     belief.per_window_latency_ns->end());
  }

  LatencyReport report;
  report.span_windows = span_windows;
  report.trials = trials;
  report.windows_timed = crisp_ns.size();
  report.crisp = summarize(crisp_ns);
  report.belief = summarize(belief_ns);
  return report;
}

}  // namespace ced
