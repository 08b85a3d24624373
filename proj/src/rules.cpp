#include <algorithm>
#include <set>
#include <sstream>

#include "ced/rules.hpp"

namespace ced {

bool eval_pred(const CounterPred& pred, std::uint32_t v) {
  switch (pred.cmp) {
    case Cmp::Lt: return v < pred.value;
    case Cmp::Le: return v <= pred.value;
    case Cmp::Eq: return v == pred.value;
    case Cmp::Ge: return v >= pred.value;
    case Cmp::Gt: return v > pred.value;
  }
  return false;
}

std::string format_diagnostic(const Diagnostic& d, std::string_view file) {
  std::ostringstream out;
  out << file << ':' << d.line << ':' << d.col << ": "
      << (d.severity == Severity::Error ? "error" : "warning") << ": " << d.code << ": "
      << d.message;
  return out.str();
}

bool has_errors(std::span<const Diagnostic> diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

namespace {

const char* cmp_text(Cmp cmp) {
  switch (cmp) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Eq: return "==";
    case Cmp::Ge: return ">=";
    case Cmp::Gt: return ">";
  }
  return "?";
}

}  // namespace

std::vector<Diagnostic> validate(const TimedAutomaton& a, const Vocabulary& vocab) {
  std::vector<Diagnostic> out;
  const auto err = [&](std::string code, std::string message) {
    out.push_back({Severity::Error, std::move(code), std::move(message), 0, 0});
  };

  if (a.event.empty()) err("InvalidEvent", "automaton has an empty event name");
  if (a.states.empty()) {
    err("NoStates", "automaton '" + a.event + "' has no states");
    return out;
  }
  if (a.arms.size() != a.states.size()) {
    err("InvalidStructure", "automaton '" + a.event + "' has " + std::to_string(a.arms.size()) +
                                " arm lists for " + std::to_string(a.states.size()) + " states");
    return out;
  }

  {
    std::set<std::string_view> seen;
    for (const auto& s : a.states)
      if (!seen.insert(s).second) err("DuplicateState", "state '" + s + "' is declared twice");
  }
  {
    std::set<std::string_view> seen;
    for (const auto& c : a.counters)
      if (!seen.insert(c.name).second)
        err("DuplicateCounter", "counter '" + c.name + "' is declared twice");
  }

  std::uint64_t config_space = 1;
  for (const auto& c : a.counters) {
    if (c.max < 1 || c.max > kMaxCounterBound)
      err("CounterBound", "counter '" + c.name + "' max " + std::to_string(c.max) +
                              " is outside [1, " + std::to_string(kMaxCounterBound) + "]");
    config_space *= c.max + 1;
    if (config_space > kMaxConfigSpace) {
      err("StateSpaceTooLarge", "automaton '" + a.event + "' counter space exceeds " +
                                    std::to_string(kMaxConfigSpace) + " configurations");
      break;
    }
  }

  const std::size_t n_activities = vocab.size();
  for (std::size_t s = 0; s < a.states.size(); ++s) {
    const auto& state_name = a.states[s];
    for (std::size_t j = 0; j < a.arms[s].size(); ++j) {
      const Transition& arm = a.arms[s][j];
      const std::string where =
          "arm " + std::to_string(j + 1) + " of state '" + state_name + "'";
      if (arm.target >= a.states.size()) err("UnknownState", where + " targets an unknown state");
      if (arm.guard.otherwise && !arm.guard.activities.empty())
        err("InvalidGuard", where + " mixes 'otherwise' with explicit activities");
      if (!arm.guard.otherwise && arm.guard.activities.empty())
        err("InvalidGuard", where + " matches no activities");
      for (ActivityId id : arm.guard.activities)
        if (id >= n_activities) err("UnknownActivity", where + " references an unknown activity");
      for (const auto& pred : arm.guard.preds)
        if (pred.counter >= a.counters.size())
          err("UnknownCounter", where + " tests an unknown counter");
      for (const auto& action : arm.actions) {
        if (action.counter >= a.counters.size()) {
          err("UnknownCounter", where + " updates an unknown counter");
        } else if (action.kind == ActionKind::Set &&
                   action.value > a.counters[action.counter].max) {
          err("CounterBound", where + " sets counter '" + a.counters[action.counter].name +
                                  "' above its max");
        }
      }
    }

    // Totality: every activity needs an arm that always matches it. Arms
    // with counter predicates do not count; the cheap guarantee is an
    // unconditional arm (usually 'otherwise').
    std::vector<bool> covered(n_activities, false);
    std::size_t n_covered = 0;
    for (std::size_t j = 0; j < a.arms[s].size(); ++j) {
      const Transition& arm = a.arms[s][j];

      if (n_covered == n_activities) {
        out.push_back({Severity::Warning, "Overlap",
                       "arm " + std::to_string(j + 1) + " of state '" + state_name +
                           "' is unreachable: earlier arms already match every input",
                       0, 0});
        continue;
      }
      if (!arm.guard.preds.empty()) {
        const bool shadowed =
            !arm.guard.otherwise &&
            std::all_of(arm.guard.activities.begin(), arm.guard.activities.end(),
                        [&](ActivityId id) { return id < n_activities && covered[id]; });
        if (shadowed) {
          out.push_back({Severity::Warning, "Overlap",
                         "arm " + std::to_string(j + 1) + " of state '" + state_name +
                             "' is unreachable: earlier arms already match its activities",
                         0, 0});
        }
        continue;
      }
      if (arm.guard.otherwise) {
        n_covered = n_activities;
        continue;
      }
      bool any_new = false;
      for (ActivityId id : arm.guard.activities) {
        if (id < n_activities && !covered[id]) {
          covered[id] = true;
          ++n_covered;
          any_new = true;
        }
      }
      if (!any_new) {
        out.push_back({Severity::Warning, "Overlap",
                       "arm " + std::to_string(j + 1) + " of state '" + state_name +
                           "' is unreachable: earlier arms already match its activities",
                       0, 0});
      }
    }
    if (n_covered != n_activities) {
      for (ActivityId id = 0; id < n_activities; ++id) {
        if (!covered[id]) {
          err("NonTotalState", "state '" + state_name + "' has no arm guaranteed to match '" +
                                   vocab.name(id) + "'");
          break;
        }
      }
    }
  }
  return out;
}

std::string print_rules(std::span<const TimedAutomaton> automata, const Vocabulary& vocab) {
  std::ostringstream out;
  bool first = true;
  for (const auto& a : automata) {
    if (!first) out << '\n';
    first = false;
    out << "automaton " << a.event << " {\n";
    if (!a.counters.empty()) {
      out << "  counters {";
      for (const auto& c : a.counters) out << ' ' << c.name << ": max " << c.max << ';';
      out << " }\n";
    }
    out << "  initial " << a.states.front() << ";\n";
    out << "  at_end "
        << (a.end_policy == EndOfTracePolicy::CloseSessions ? "close_sessions" : "ignore")
        << ";\n";
    for (std::size_t s = 0; s < a.states.size(); ++s) {
      out << "  state " << a.states[s] << " {\n";
      for (const auto& arm : a.arms[s]) {
        out << "    ";
        if (arm.guard.otherwise) {
          out << "otherwise";
        } else {
          out << "on ";
          for (std::size_t i = 0; i < arm.guard.activities.size(); ++i) {
            if (i) out << " | ";
            out << vocab.name(arm.guard.activities[i]);
          }
        }
        if (!arm.guard.preds.empty()) {
          out << " if ";
          for (std::size_t i = 0; i < arm.guard.preds.size(); ++i) {
            if (i) out << ", ";
            const auto& p = arm.guard.preds[i];
            out << a.counters[p.counter].name << ' ' << cmp_text(p.cmp) << ' ' << p.value;
          }
        }
        out << " -> " << a.states[arm.target];
        if (!arm.actions.empty()) {
          out << " {";
          for (std::size_t i = 0; i < arm.actions.size(); ++i) {
            out << (i ? ", " : " ");
            const auto& act = arm.actions[i];
            switch (act.kind) {
              case ActionKind::Inc: out << "inc " << a.counters[act.counter].name; break;
              case ActionKind::Reset: out << "reset " << a.counters[act.counter].name; break;
              case ActionKind::Set:
                out << "set " << a.counters[act.counter].name << " = " << act.value;
                break;
            }
          }
          out << " }";
        }
        if (arm.emit) out << " emit";
        out << ";\n";
      }
      out << "  }\n";
    }
    out << "}\n";
  }
  return out.str();
}

std::string_view builtin_rules_text() {
  static constexpr std::string_view text = R"(# Built-in complex-event rules over the default activity vocabulary.
# Duration literals rescale with the configured window size.

# e1: went back to work after using the restroom without a long enough
# consecutive hand-wash in between. Reaching the required wash run
# settles the obligation; any interruption restarts the count.
automaton e1 {
  counters { wash: max 20s; }
  initial idle;
  at_end ignore;

  state idle {
    on use_restroom -> after_restroom { reset wash };
    otherwise -> idle;
  }

  state after_restroom {
    on wash_hands if wash >= 20s - 1 -> idle { reset wash };
    on wash_hands -> after_restroom { inc wash };
    on use_restroom -> after_restroom { reset wash };
    on work -> idle { reset wash } emit;
    otherwise -> after_restroom { reset wash };
  }
}

# e2: started a meal without a valid hand-wash. A wash becomes valid when
# a run reaches 20s; it is spoiled by touching things, the restroom, work,
# by more than 2 minutes passing, or by an earlier meal consuming it.
automaton e2 {
  counters { wrun: max 20s; age: max 2m; }
  initial dirty;
  at_end ignore;

  state dirty {
    on wash_hands if wrun >= 20s - 1 -> clean { inc wrun, reset age };
    on wash_hands -> dirty { inc wrun };
    on eat -> eating { reset wrun, reset age } emit;
    otherwise -> dirty { reset wrun };
  }

  state clean {
    on wash_hands if wrun >= 20s - 1 -> clean { inc wrun, reset age };
    on wash_hands if age >= 2m - 1 -> dirty { inc wrun, reset age };
    on wash_hands -> clean { inc wrun, inc age };
    on eat -> eating { reset wrun, reset age };
    on touch_object | use_restroom | work -> dirty { reset wrun, reset age };
    otherwise if age >= 2m - 1 -> dirty { reset wrun, reset age };
    otherwise -> clean { reset wrun, inc age };
  }

  state eating {
    on eat -> eating;
    on wash_hands -> dirty { set wrun = 1, reset age };
    otherwise -> dirty { reset wrun, reset age };
  }
}

# e3: a tooth-brushing session closed with less than 2 minutes of actual
# brushing. Interruptions of up to 10 seconds stay inside the session;
# a longer one closes it on the window that exceeds the allowance.
automaton e3 {
  counters { brush: max 2m; pause: max 10s; }
  initial idle;
  at_end close_sessions;

  state idle {
    on brush_teeth -> brushing { set brush = 1, reset pause };
    otherwise -> idle;
  }

  state brushing {
    on brush_teeth -> brushing { inc brush, reset pause };
    otherwise if pause >= 10s, brush >= 2m -> idle { reset brush, reset pause };
    otherwise if pause >= 10s -> idle { reset brush, reset pause } emit;
    otherwise -> brushing { inc pause };
  }
}
)";
  return text;
}

std::vector<TimedAutomaton> builtin_rules(WindowSpec window) {
  ParseResult result = parse_rules(builtin_rules_text(), Vocabulary::default_vocabulary(), window);
  if (!result.ok()) {
    for (const auto& d : result.diagnostics) {
      if (d.code == "NonDivisible") fail("NonDivisible", d.message);
    }
    fail("InvalidRuleSet", format_diagnostic(result.diagnostics.front(), "<builtin>"));
  }
  return std::move(result.automata);
}

RuleSet::RuleSet(Vocabulary vocab, WindowSpec window, std::vector<TimedAutomaton> automata)
    : vocab_(std::move(vocab)), window_(window), automata_(std::move(automata)) {
  if (automata_.empty()) fail("InvalidRuleSet", "rule set is empty");
  if (automata_.size() > kMaxEventTypes)
    fail("InvalidRuleSet", "rule set exceeds " + std::to_string(kMaxEventTypes) + " event types");
  std::set<std::string_view> events;
  for (const auto& a : automata_) {
    if (!events.insert(a.event).second)
      fail("InvalidRuleSet", "duplicate event type '" + a.event + "'");
    auto diagnostics = validate(a, vocab_);
    if (has_errors(diagnostics))
      fail("InvalidRuleSet", format_diagnostic(diagnostics.front(), a.event));
  }
}

RuleSet RuleSet::builtins(WindowSpec window) {
  return RuleSet(Vocabulary::default_vocabulary(), window, builtin_rules(window));
}

std::vector<std::string> RuleSet::event_names() const {
  std::vector<std::string> names;
  names.reserve(automata_.size());
  for (const auto& a : automata_) names.push_back(a.event);
  return names;
}

std::optional<std::size_t> RuleSet::event_index(std::string_view event) const {
  for (std::size_t i = 0; i < automata_.size(); ++i)
    if (automata_[i].event == event) return i;
  return std::nullopt;
}

bool RuleSet::is_builtin() const {
  if (!(vocab_ == Vocabulary::default_vocabulary())) return false;
  try {
    return automata_ == builtin_rules(window_);
  } catch (const Error&) {
    return false;
  }
}

}  // namespace ced
