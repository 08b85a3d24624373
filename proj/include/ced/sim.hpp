#pragma once
// Seeded stochastic daily-behavior simulator. Emits hard-label traces with
// ground truth from the offline labelers, plus a symmetric noise model for
// imperfect atomic-event inference.
//
// Reproducibility contract: (config, n, seed) fully determines the output.
// Every trace samples from its own substream (see rng.hpp), so results do
// not depend on how work is scheduled across threads.

#include <cstdint>
#include <string>
#include <vector>

#include "ced/core.hpp"

namespace ced {

struct DurationRange {
  std::uint32_t lo = 1;
  std::uint32_t hi = 1;
};

struct SimConfig {
  std::uint32_t span_windows = 60;

  // Expected routine starts per 60 windows.
  double restroom_rate = 1.0;
  double meal_rate = 1.0;
  double brush_rate = 1.0;

  // Probability that a sampled routine takes a rule-violating form.
  double violation_prob = 0.5;

  // Inclusive window ranges for routine building blocks.
  DurationRange restroom_run{1, 3};
  DurationRange wash_run{1, 8};
  DurationRange eat_run{6, 24};
  DurationRange brush_run{6, 30};
  DurationRange work_run{2, 8};
  DurationRange background_run{1, 6};

  // Background fill weights. work defaults to 0: in this simulator work is
  // where routines send people, which keeps rule-1 obligations resolving at
  // routine boundaries instead of at random filler windows.
  double background_walk = 0.30;
  double background_sit = 0.25;
  double background_stand = 0.20;
  double background_work = 0.0;
  double background_idle = 0.20;
  double background_touch_object = 0.05;

  std::uint64_t seed = 0;
};

struct NoiseModel {
  enum class Kind : std::uint8_t { Symmetric };

  double p_correct = 0.9;  // in (0, 1]; remaining mass spreads uniformly
  Kind kind = Kind::Symmetric;
};

// n traces of exactly cfg.span_windows windows, ids "t-000000"..., each
// generated from substream(cfg.seed, index) and labeled by the offline
// labelers. Throws Error("InfeasibleConfig") when the config is invalid or
// no routine form fits the span.
std::vector<Trace> generate(const SimConfig& cfg, std::size_t n, WindowSpec window = {});

// Single trace from an explicit substream seed; building block of both
// generate() and dataset().
Trace generate_one(const SimConfig& cfg, std::uint64_t trace_seed, std::string id,
                   WindowSpec window = {});

// Copy of `t` where soft[w] puts p_correct on the clean label with the rest
// uniform, and the hard label is resampled from soft[w]. Ground truth and
// the recorded generator seed are untouched.
Trace corrupt(const Trace& t, const NoiseModel& noise, std::uint64_t seed,
              const Vocabulary& vocab = Vocabulary::default_vocabulary());

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

struct Dataset {
  std::vector<Trace> train;
  std::vector<Trace> val;
  std::vector<Trace> test;
};

// Three disjoint splits with globally unique ids ("train-000000", ...).
// Split seeds derive from base_seed as substream(base_seed, 1|2|3); trace
// seeds as substream(split_seed, index).
Dataset dataset(const SimConfig& cfg, SplitSizes sizes, std::uint64_t base_seed,
                WindowSpec window = {});

// Copy of cfg targeting span_windows, with any routine whose shortest form
// cannot fit disabled instead of rejected. Used by the latency benchmark,
// which must accept arbitrarily short spans.
SimConfig fit_span(SimConfig cfg, std::uint32_t span_windows, WindowSpec window = {});

}  // namespace ced
