#pragma once
// Streaming evaluation of timed automata: crisp stepping over hard labels,
// argmax reduction, and exact forward belief propagation over soft
// observations. Engine memory is O(1) in trace length: one configuration
// (or one belief over configurations) per automaton, never a history.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "ced/core.hpp"
#include "ced/rules.hpp"

namespace ced {

struct MachineConfig {
  std::uint16_t state = 0;
  std::vector<std::uint32_t> counters;

  bool operator==(const MachineConfig&) const = default;
};

// One automaton compiled for stepping: per-state arm tables with activity
// bitsets and mixed-radix configuration encoding.
class Machine {
 public:
  // The automaton must have passed validate(); behavior is undefined on
  // invalid input (RuleSet enforces this).
  Machine(const TimedAutomaton& automaton, const Vocabulary& vocab);

  const TimedAutomaton& automaton() const noexcept { return *source_; }

  MachineConfig initial_config() const;

  // Applies the first matching transition in place; returns true when it
  // emits. Totality guarantees a match for any in-vocabulary activity.
  bool step(MachineConfig& config, ActivityId activity) const;

  // End-of-trace closure (CloseSessions policy): advances through wildcard
  // arms until the configuration stops changing or repeats. Returns true
  // when any closure transition emits.
  bool finish(MachineConfig& config) const;

  std::uint64_t encode(const MachineConfig& config) const;
  MachineConfig decode(std::uint64_t key) const;

 private:
  struct CompiledArm {
    std::vector<std::uint64_t> match_words;  // activity bitset; empty = wildcard
    std::vector<CounterPred> preds;
    std::vector<CounterAction> actions;
    std::uint16_t target = 0;
    bool emit = false;
    bool otherwise = false;
  };

  bool apply_first_match(MachineConfig& config, ActivityId activity, bool wildcard_only) const;

  const TimedAutomaton* source_;
  std::vector<std::vector<CompiledArm>> arms_;
  std::vector<std::uint32_t> counter_max_;
  std::uint64_t counter_space_ = 1;
};

struct DetectorOutput {
  LabelSeq labels;  // always the input length
  std::optional<std::vector<std::uint64_t>> per_window_latency_ns;
};

enum class DetectMode : std::uint8_t { Crisp, Argmax, Belief };

// Compiled rule set. Owns its RuleSet copy; automata are shared read-only
// by any number of runners.
class Engine {
 public:
  explicit Engine(RuleSet rules);
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const RuleSet& rules() const noexcept { return rules_; }
  const std::vector<Machine>& machines() const noexcept { return machines_; }

  DetectorOutput run_crisp(std::span<const ActivityId> activities, bool timing = false) const;

  // mode Argmax reduces each window by argmax_label and steps crisp; mode
  // Belief propagates per-automaton beliefs and emits any event whose
  // transition mass reaches `threshold`. Threshold must be in (0, 1].
  DetectorOutput run_on_soft(std::span<const std::vector<double>> soft, DetectMode mode,
                             double threshold = 0.5, bool timing = false,
                             double prune_epsilon = 1e-9) const;

 private:
  RuleSet rules_;
  std::vector<Machine> machines_;
};

// Window-by-window crisp evaluation with persistent configurations.
class CrispRunner {
 public:
  explicit CrispRunner(const Engine& engine);

  LabelMask step(ActivityId activity);
  // Applies end-of-trace policies; union the result into the final window.
  LabelMask finish();

  const std::vector<MachineConfig>& configs() const noexcept { return configs_; }

 private:
  const Engine* engine_;
  std::vector<MachineConfig> configs_;
};

// Exact forward belief propagation, one belief per automaton.
class BeliefRunner {
 public:
  BeliefRunner(const Engine& engine, double threshold = 0.5, double prune_epsilon = 1e-9);

  LabelMask step(std::span<const double> soft);
  // Folds closure mass into the final window's emission decision.
  LabelMask finish();

  // Transition mass that emitted at the last step, per automaton.
  const std::vector<double>& last_emission_mass() const noexcept { return last_mass_; }
  // Current belief of one automaton, heaviest entries first not guaranteed;
  // ordered by encoded configuration.
  std::vector<std::pair<MachineConfig, double>> belief(std::size_t automaton_index) const;

 private:
  const Engine* engine_;
  double threshold_;
  double prune_epsilon_;
  std::vector<std::map<std::uint64_t, double>> beliefs_;
  std::vector<double> last_mass_;
};

}  // namespace ced
