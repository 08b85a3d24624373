#pragma once
// Rule language for complex events: bounded-counter timed automata with
// first-match-wins guarded transitions.
//
// The grammar is documented in docs/rule-language.md; the built-in rules
// (builtin_rules_text) are the normative examples.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ced/core.hpp"

namespace ced {

enum class Cmp : std::uint8_t { Lt, Le, Eq, Ge, Gt };

struct CounterPred {
  std::uint16_t counter = 0;
  Cmp cmp = Cmp::Eq;
  std::uint32_t value = 0;

  bool operator==(const CounterPred&) const = default;
};

bool eval_pred(const CounterPred& pred, std::uint32_t counter_value);

enum class ActionKind : std::uint8_t { Inc, Reset, Set };

struct CounterAction {
  ActionKind kind = ActionKind::Reset;
  std::uint16_t counter = 0;
  std::uint32_t value = 0;  // Set only

  bool operator==(const CounterAction&) const = default;
};

struct CounterDecl {
  std::string name;
  std::uint32_t max = 1;  // inc saturates here; <= 10,000

  bool operator==(const CounterDecl&) const = default;
};

struct Guard {
  bool otherwise = false;               // wildcard: matches any activity
  std::vector<ActivityId> activities;   // sorted set; empty iff otherwise
  std::vector<CounterPred> preds;       // conjunction

  bool operator==(const Guard&) const = default;
};

struct Transition {
  Guard guard;
  std::vector<CounterAction> actions;
  bool emit = false;          // emits the automaton's own event type
  std::uint16_t target = 0;

  bool operator==(const Transition&) const = default;
};

enum class EndOfTracePolicy : std::uint8_t { Ignore, CloseSessions };

// Counter configuration space is capped so belief propagation stays
// tractable: prod(max + 1) <= kMaxConfigSpace.
inline constexpr std::uint64_t kMaxConfigSpace = 1'000'000;
inline constexpr std::uint32_t kMaxCounterBound = 10'000;

struct TimedAutomaton {
  std::string event;                          // e.g. "e1"
  std::vector<std::string> states;            // [0] is the initial state
  std::vector<CounterDecl> counters;
  std::vector<std::vector<Transition>> arms;  // per state, first match wins
  EndOfTracePolicy end_policy = EndOfTracePolicy::Ignore;

  bool operator==(const TimedAutomaton&) const = default;
};

enum class Severity : std::uint8_t { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;     // SyntaxError, UnknownActivity, NonTotalState, ...
  std::string message;
  std::uint32_t line = 0;  // 1-based; 0 when no source position exists
  std::uint32_t col = 0;
};

// "file:line:col: severity: code: message"
std::string format_diagnostic(const Diagnostic& d, std::string_view file);

bool has_errors(std::span<const Diagnostic> diagnostics);

struct ParseResult {
  std::vector<TimedAutomaton> automata;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return !has_errors(diagnostics); }
};

// Parses and validates rule text. Duration literals (20s, 2m) resolve to
// window counts under `window`. On errors the automata list is empty.
ParseResult parse_rules(std::string_view source, const Vocabulary& vocab,
                        WindowSpec window = {});

// Structural validation: name references, counter bounds, config-space cap,
// totality of every state, unreachable-arm warnings. Empty means valid.
std::vector<Diagnostic> validate(const TimedAutomaton& automaton, const Vocabulary& vocab);

// Canonical rule text for the three built-in rules (duration-literal form,
// so it parses under any window that divides 20s / 2m / 10s).
std::string_view builtin_rules_text();

// The three built-in automata, resolved for the given window.
// Throws Error("NonDivisible") when the window does not divide the rule
// thresholds.
std::vector<TimedAutomaton> builtin_rules(WindowSpec window = {});

// Canonical text form; parse_rules(print_rules(a)) reproduces `a` exactly.
std::string print_rules(std::span<const TimedAutomaton> automata, const Vocabulary& vocab);

// A validated bundle of automata over one vocabulary and window.
class RuleSet {
 public:
  // Throws Error("InvalidRuleSet") when validation fails or event names
  // collide.
  RuleSet(Vocabulary vocab, WindowSpec window, std::vector<TimedAutomaton> automata);

  static RuleSet builtins(WindowSpec window = {});

  const Vocabulary& vocab() const noexcept { return vocab_; }
  WindowSpec window() const noexcept { return window_; }
  const std::vector<TimedAutomaton>& automata() const noexcept { return automata_; }

  // Event tokens in automaton order; label bit i belongs to automaton i.
  std::vector<std::string> event_names() const;
  std::optional<std::size_t> event_index(std::string_view event) const;

  bool is_builtin() const;  // semantically identical to builtin_rules(window)

 private:
  Vocabulary vocab_;
  WindowSpec window_;
  std::vector<TimedAutomaton> automata_;
};

}  // namespace ced
