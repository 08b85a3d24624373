#include "ced/engine.hpp"

#include <algorithm>
#include <chrono>
#include <set>

namespace ced {

Machine::Machine(const TimedAutomaton& automaton, const Vocabulary& vocab)
    : source_(&automaton) {
  const std::size_t words = (vocab.size() + 63) / 64;
  counter_max_.reserve(automaton.counters.size());
  for (const auto& c : automaton.counters) {
    counter_max_.push_back(c.max);
    counter_space_ *= c.max + 1;
  }
  arms_.resize(automaton.arms.size());
  for (std::size_t s = 0; s < automaton.arms.size(); ++s) {
    for (const auto& t : automaton.arms[s]) {
      CompiledArm arm;
      arm.otherwise = t.guard.otherwise;
      if (!t.guard.otherwise) {
        arm.match_words.assign(words, 0);
        for (ActivityId id : t.guard.activities)
          arm.match_words[id / 64] |= std::uint64_t{1} << (id % 64);
      }
      arm.preds = t.guard.preds;
      arm.actions = t.actions;
      arm.target = t.target;
      arm.emit = t.emit;
      arms_[s].push_back(std::move(arm));
    }
  }
}

MachineConfig Machine::initial_config() const {
  MachineConfig config;
  config.state = 0;
  config.counters.assign(counter_max_.size(), 0);
  return config;
}

bool Machine::apply_first_match(MachineConfig& config, ActivityId activity,
                                bool wildcard_only) const {
  for (const CompiledArm& arm : arms_[config.state]) {
    if (arm.otherwise) {
      // wildcard matches anything
    } else if (wildcard_only) {
      continue;
    } else if (!(arm.match_words[activity / 64] >> (activity % 64) & 1)) {
      continue;
    }
    bool preds_ok = true;
    for (const CounterPred& pred : arm.preds) {
      if (!eval_pred(pred, config.counters[pred.counter])) {
        preds_ok = false;
        break;
      }
    }
    if (!preds_ok) continue;

    for (const CounterAction& action : arm.actions) {
      std::uint32_t& value = config.counters[action.counter];
      switch (action.kind) {
        case ActionKind::Inc:
          if (value < counter_max_[action.counter]) ++value;  // saturates
          break;
        case ActionKind::Reset: value = 0; break;
        case ActionKind::Set: value = action.value; break;
      }
    }
    config.state = arm.target;
    return arm.emit;
  }
  return false;  // wildcard-only pass with no wildcard arm: nothing to do
}

bool Machine::step(MachineConfig& config, ActivityId activity) const {
  return apply_first_match(config, activity, /*wildcard_only=*/false);
}

bool Machine::finish(MachineConfig& config) const {
  if (source_->end_policy != EndOfTracePolicy::CloseSessions) return false;
  // Feed don't-care input until the configuration reaches a fixpoint or
  // revisits itself; open sessions fall through their wildcard arms and
  // close. Bounded by the finite configuration space.
  bool emitted = false;
  std::set<std::uint64_t> seen;
  while (seen.insert(encode(config)).second) {
    const std::uint64_t before = encode(config);
    const bool emit = apply_first_match(config, 0, /*wildcard_only=*/true);
    emitted |= emit;
    if (!emit && encode(config) == before) break;
  }
  return emitted;
}

std::uint64_t Machine::encode(const MachineConfig& config) const {
  std::uint64_t key = config.state;
  for (std::size_t i = 0; i < counter_max_.size(); ++i)
    key = key * (counter_max_[i] + 1) + config.counters[i];
  return key;
}

MachineConfig Machine::decode(std::uint64_t key) const {
  MachineConfig config;
  config.counters.resize(counter_max_.size());
  for (std::size_t i = counter_max_.size(); i-- > 0;) {
    const std::uint64_t base = counter_max_[i] + 1;
    config.counters[i] = static_cast<std::uint32_t>(key % base);
    key /= base;
  }
  config.state = static_cast<std::uint16_t>(key);
  return config;
}

Engine::Engine(RuleSet rules) : rules_(std::move(rules)) {
  machines_.reserve(rules_.automata().size());
  for (const auto& a : rules_.automata()) machines_.emplace_back(a, rules_.vocab());
}

CrispRunner::CrispRunner(const Engine& engine) : engine_(&engine) {
  for (const auto& machine : engine.machines()) configs_.push_back(machine.initial_config());
}

LabelMask CrispRunner::step(ActivityId activity) {
  LabelMask mask = 0;
  const auto& machines = engine_->machines();
  for (std::size_t i = 0; i < machines.size(); ++i) {
    if (machines[i].step(configs_[i], activity)) mask |= LabelMask{1} << i;
  }
  return mask;
}

LabelMask CrispRunner::finish() {
  LabelMask mask = 0;
  const auto& machines = engine_->machines();
  for (std::size_t i = 0; i < machines.size(); ++i) {
    if (machines[i].finish(configs_[i])) mask |= LabelMask{1} << i;
  }
  return mask;
}

BeliefRunner::BeliefRunner(const Engine& engine, double threshold, double prune_epsilon)
    : engine_(&engine), threshold_(threshold), prune_epsilon_(prune_epsilon) {
  if (!(threshold > 0.0) || threshold > 1.0)
    fail("InvalidThreshold", "belief threshold must be in (0, 1]");
  if (prune_epsilon < 0.0) fail("InvalidThreshold", "prune epsilon must be nonnegative");
  for (const auto& machine : engine.machines()) {
    beliefs_.emplace_back();
    beliefs_.back().emplace(machine.encode(machine.initial_config()), 1.0);
  }
  last_mass_.assign(engine.machines().size(), 0.0);
}

LabelMask BeliefRunner::step(std::span<const double> soft) {
  const auto& machines = engine_->machines();
  LabelMask mask = 0;
  for (std::size_t i = 0; i < machines.size(); ++i) {
    const Machine& machine = machines[i];
    std::map<std::uint64_t, double> next;
    double emit_mass = 0.0;
    MachineConfig scratch;
    for (const auto& [key, mass] : beliefs_[i]) {
      const MachineConfig base = machine.decode(key);
      for (ActivityId a = 0; a < soft.size(); ++a) {
        const double p = soft[a];
        if (p <= 0.0) continue;
        scratch = base;
        const bool emit = machine.step(scratch, a);
        const double moved = mass * p;
        next[machine.encode(scratch)] += moved;
        if (emit) emit_mass += moved;
      }
    }
    // Prune negligible configurations, then renormalize.
    double kept = 0.0;
    for (auto it = next.begin(); it != next.end();) {
      if (it->second < prune_epsilon_) {
        it = next.erase(it);
      } else {
        kept += it->second;
        ++it;
      }
    }
    if (kept > 0.0) {
      for (auto& [key, mass] : next) mass /= kept;
    }
    beliefs_[i] = std::move(next);
    last_mass_[i] = emit_mass;
    if (emit_mass >= threshold_) mask |= LabelMask{1} << i;
  }
  return mask;
}

LabelMask BeliefRunner::finish() {
  const auto& machines = engine_->machines();
  LabelMask mask = 0;
  for (std::size_t i = 0; i < machines.size(); ++i) {
    const Machine& machine = machines[i];
    double closure_mass = 0.0;
    if (machine.automaton().end_policy == EndOfTracePolicy::CloseSessions) {
      for (const auto& [key, mass] : beliefs_[i]) {
        MachineConfig config = machine.decode(key);
        if (machine.finish(config)) closure_mass += mass;
      }
    }
    // A path emits on the final window either at its last step or at
    // closure, never both, so the masses add.
    if (last_mass_[i] + closure_mass >= threshold_) mask |= LabelMask{1} << i;
  }
  return mask;
}

std::vector<std::pair<MachineConfig, double>> BeliefRunner::belief(
    std::size_t automaton_index) const {
  std::vector<std::pair<MachineConfig, double>> out;
  const Machine& machine = engine_->machines()[automaton_index];
  for (const auto& [key, mass] : beliefs_[automaton_index])
    out.emplace_back(machine.decode(key), mass);
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

void check_activities(std::span<const ActivityId> activities, std::size_t vocab_size) {
  for (ActivityId a : activities) {
    if (a >= vocab_size)
      fail("VocabularyMismatch", "activity index " + std::to_string(a) +
                                     " is outside the rule vocabulary (K=" +
                                     std::to_string(vocab_size) + ")");
  }
}

}  // namespace

DetectorOutput Engine::run_crisp(std::span<const ActivityId> activities, bool timing) const {
  check_activities(activities, rules_.vocab().size());
  DetectorOutput out;
  out.labels.reserve(activities.size());
  if (timing) out.per_window_latency_ns.emplace();
  CrispRunner runner(*this);
  for (ActivityId a : activities) {
    if (timing) {
      const auto t0 = Clock::now();
      const LabelMask mask = runner.step(a);
      const auto t1 = Clock::now();
      out.labels.push_back(mask);
      out.per_window_latency_ns->push_back(
          std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    } else {
      out.labels.push_back(runner.step(a));
    }
  }
  if (!out.labels.empty()) out.labels.back() |= runner.finish();
  return out;
}

DetectorOutput Engine::run_on_soft(std::span<const std::vector<double>> soft, DetectMode mode,
                                   double threshold, bool timing, double prune_epsilon) const {
  const std::size_t k = rules_.vocab().size();
  for (std::size_t w = 0; w < soft.size(); ++w)
    validate_distribution(soft[w], k, static_cast<std::ptrdiff_t>(w));

  if (mode == DetectMode::Crisp)
    fail("InvalidArgument", "crisp mode takes hard labels; use run_crisp");

  if (mode == DetectMode::Argmax) {
    std::vector<ActivityId> reduced;
    reduced.reserve(soft.size());
    for (const auto& dist : soft) reduced.push_back(argmax_label(dist));
    return run_crisp(reduced, timing);
  }

  DetectorOutput out;
  out.labels.reserve(soft.size());
  if (timing) out.per_window_latency_ns.emplace();
  BeliefRunner runner(*this, threshold, prune_epsilon);
  for (const auto& dist : soft) {
    if (timing) {
      const auto t0 = Clock::now();
      const LabelMask mask = runner.step(dist);
      const auto t1 = Clock::now();
      out.labels.push_back(mask);
      out.per_window_latency_ns->push_back(
          std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    } else {
      out.labels.push_back(runner.step(dist));
    }
  }
  if (!out.labels.empty()) out.labels.back() |= runner.finish();
  return out;
}

}  // namespace ced
