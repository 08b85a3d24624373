#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

#include "ced/rules.hpp"

namespace ced {

namespace {

enum class Tok : std::uint8_t {
  Ident, Int, Duration,
  LBrace, RBrace, Semi, Colon, Comma, Pipe, Arrow, Minus, Assign,
  Lt, Le, EqEq, Ge, Gt,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;          // identifiers
  std::uint64_t value = 0;   // Int: windows; Duration: seconds
  std::uint32_t line = 1, col = 1;
};

class Lexer {
 public:
  Lexer(std::string_view src, std::vector<Diagnostic>& diags) : src_(src), diags_(diags) {}

  Token next() {
    skip_ws();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= src_.size()) return t;  // End
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::uint64_t v = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        v = v * 10 + static_cast<std::uint64_t>(src_[pos_] - '0');
        if (v > 1'000'000'000ULL) v = 1'000'000'000ULL;  // clamp, bounds checked later
        advance();
      }
      if (pos_ < src_.size() && (src_[pos_] == 's' || src_[pos_] == 'm')) {
        t.kind = Tok::Duration;
        t.value = src_[pos_] == 'm' ? v * 60 : v;
        advance();
      } else {
        t.kind = Tok::Int;
        t.value = v;
      }
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string ident;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ident.push_back(src_[pos_]);
        advance();
      }
      t.kind = Tok::Ident;
      t.text = std::move(ident);
      return t;
    }
    switch (c) {
      case '{': advance(); t.kind = Tok::LBrace; return t;
      case '}': advance(); t.kind = Tok::RBrace; return t;
      case ';': advance(); t.kind = Tok::Semi; return t;
      case ':': advance(); t.kind = Tok::Colon; return t;
      case ',': advance(); t.kind = Tok::Comma; return t;
      case '|': advance(); t.kind = Tok::Pipe; return t;
      case '-':
        advance();
        if (pos_ < src_.size() && src_[pos_] == '>') {
          advance();
          t.kind = Tok::Arrow;
        } else {
          t.kind = Tok::Minus;
        }
        return t;
      case '<':
        advance();
        if (pos_ < src_.size() && src_[pos_] == '=') { advance(); t.kind = Tok::Le; }
        else t.kind = Tok::Lt;
        return t;
      case '>':
        advance();
        if (pos_ < src_.size() && src_[pos_] == '=') { advance(); t.kind = Tok::Ge; }
        else t.kind = Tok::Gt;
        return t;
      case '=':
        advance();
        if (pos_ < src_.size() && src_[pos_] == '=') { advance(); t.kind = Tok::EqEq; }
        else t.kind = Tok::Assign;
        return t;
      default:
        diags_.push_back({Severity::Error, "SyntaxError",
                          std::string("unexpected character '") + c + "'", line_, col_});
        advance();
        return next();
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1, col_ = 1;
};

const char* tok_name(Tok k) {
  switch (k) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Duration: return "duration";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Comma: return "','";
    case Tok::Pipe: return "'|'";
    case Tok::Arrow: return "'->'";
    case Tok::Minus: return "'-'";
    case Tok::Assign: return "'='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::EqEq: return "'=='";
    case Tok::Ge: return "'>='";
    case Tok::Gt: return "'>'";
    case Tok::End: return "end of input";
  }
  return "?";
}

// Arm target states may be referenced before their declaration, so the
// parser records names and resolves indices when the automaton closes.
struct PendingArm {
  Transition transition;
  std::string target_name;
  std::uint32_t target_line = 0, target_col = 0;
};

struct PendingState {
  std::string name;
  std::uint32_t line = 0, col = 0;
  std::vector<PendingArm> arms;
};

class Parser {
 public:
  Parser(std::string_view src, const Vocabulary& vocab, WindowSpec window, ParseResult& out)
      : lexer_(src, out.diagnostics), vocab_(vocab), window_(window), out_(out) {
    tok_ = lexer_.next();
  }

  void run() {
    while (tok_.kind != Tok::End) {
      if (tok_.kind == Tok::Ident && tok_.text == "automaton") {
        if (!parse_automaton()) recover();
      } else {
        error("expected 'automaton', got " + describe(tok_));
        recover();
      }
    }
    if (!out_.ok()) out_.automata.clear();
  }

 private:
  [[nodiscard]] bool parse_automaton() {
    const Token header = tok_;
    eat();  // 'automaton'
    if (tok_.kind != Tok::Ident) return error("expected event name after 'automaton'");
    TimedAutomaton automaton;
    automaton.event = tok_.text;
    for (const auto& existing : out_.automata) {
      if (existing.event == automaton.event)
        diag("DuplicateEvent", "event '" + automaton.event + "' is declared twice");
    }
    eat();
    if (!expect(Tok::LBrace)) return false;

    counters_.clear();
    states_.clear();
    std::optional<std::string> initial_name;

    while (tok_.kind != Tok::RBrace) {
      if (tok_.kind == Tok::End) return error("unterminated automaton block");
      if (tok_.kind != Tok::Ident) return error("expected a section, got " + describe(tok_));
      const std::string section = tok_.text;
      if (section == "counters") {
        if (!parse_counters(automaton)) return false;
      } else if (section == "initial") {
        eat();
        if (tok_.kind != Tok::Ident) return error("expected state name after 'initial'");
        initial_name = tok_.text;
        eat();
        if (!expect(Tok::Semi)) return false;
      } else if (section == "at_end") {
        eat();
        if (tok_.kind == Tok::Ident && tok_.text == "ignore") {
          automaton.end_policy = EndOfTracePolicy::Ignore;
        } else if (tok_.kind == Tok::Ident && tok_.text == "close_sessions") {
          automaton.end_policy = EndOfTracePolicy::CloseSessions;
        } else {
          return error("expected 'ignore' or 'close_sessions'");
        }
        eat();
        if (!expect(Tok::Semi)) return false;
      } else if (section == "state") {
        if (!parse_state()) return false;
      } else {
        return error("unknown section '" + section + "'");
      }
    }
    eat();  // '}'

    return finish_automaton(std::move(automaton), initial_name, header);
  }

  [[nodiscard]] bool parse_counters(TimedAutomaton& automaton) {
    eat();  // 'counters'
    if (!expect(Tok::LBrace)) return false;
    while (tok_.kind != Tok::RBrace) {
      if (tok_.kind != Tok::Ident) return error("expected counter name");
      CounterDecl decl;
      decl.name = tok_.text;
      if (counters_.count(decl.name))
        diag("DuplicateCounter", "counter '" + decl.name + "' is declared twice");
      eat();
      if (!expect(Tok::Colon)) return false;
      if (tok_.kind != Tok::Ident || tok_.text != "max") return error("expected 'max'");
      eat();
      auto value = parse_constant();
      if (!value) return false;
      decl.max = *value;
      if (!expect(Tok::Semi)) return false;
      counters_.emplace(decl.name, static_cast<std::uint16_t>(automaton.counters.size()));
      automaton.counters.push_back(std::move(decl));
    }
    eat();  // '}'
    return true;
  }

  [[nodiscard]] bool parse_state() {
    eat();  // 'state'
    if (tok_.kind != Tok::Ident) return error("expected state name");
    PendingState state;
    state.name = tok_.text;
    state.line = tok_.line;
    state.col = tok_.col;
    eat();
    if (!expect(Tok::LBrace)) return false;
    while (tok_.kind != Tok::RBrace) {
      if (tok_.kind == Tok::End) return error("unterminated state block");
      PendingArm arm;
      if (!parse_arm(arm)) return false;
      state.arms.push_back(std::move(arm));
    }
    eat();  // '}'
    states_.push_back(std::move(state));
    return true;
  }

  [[nodiscard]] bool parse_arm(PendingArm& arm) {
    Guard& guard = arm.transition.guard;
    if (tok_.kind == Tok::Ident && tok_.text == "otherwise") {
      guard.otherwise = true;
      eat();
    } else if (tok_.kind == Tok::Ident && tok_.text == "on") {
      eat();
      while (true) {
        if (tok_.kind != Tok::Ident) return error("expected activity name");
        auto id = vocab_.find(tok_.text);
        if (!id) {
          diag("UnknownActivity", "activity '" + tok_.text + "' is not in the vocabulary");
        } else {
          guard.activities.push_back(*id);
        }
        eat();
        if (tok_.kind != Tok::Pipe) break;
        eat();
      }
      std::sort(guard.activities.begin(), guard.activities.end());
      guard.activities.erase(std::unique(guard.activities.begin(), guard.activities.end()),
                             guard.activities.end());
    } else {
      return error("expected 'on' or 'otherwise', got " + describe(tok_));
    }

    if (tok_.kind == Tok::Ident && tok_.text == "if") {
      eat();
      while (true) {
        CounterPred pred;
        if (tok_.kind != Tok::Ident) return error("expected counter name in predicate");
        pred.counter = resolve_counter(tok_.text);
        eat();
        switch (tok_.kind) {
          case Tok::Lt: pred.cmp = Cmp::Lt; break;
          case Tok::Le: pred.cmp = Cmp::Le; break;
          case Tok::EqEq: pred.cmp = Cmp::Eq; break;
          case Tok::Ge: pred.cmp = Cmp::Ge; break;
          case Tok::Gt: pred.cmp = Cmp::Gt; break;
          default: return error("expected comparator, got " + describe(tok_));
        }
        eat();
        auto value = parse_constant();
        if (!value) return false;
        pred.value = *value;
        guard.preds.push_back(pred);
        if (tok_.kind != Tok::Comma) break;
        eat();
      }
    }

    if (!expect(Tok::Arrow)) return false;
    if (tok_.kind != Tok::Ident) return error("expected target state name");
    arm.target_name = tok_.text;
    arm.target_line = tok_.line;
    arm.target_col = tok_.col;
    eat();

    if (tok_.kind == Tok::LBrace) {
      eat();
      while (tok_.kind != Tok::RBrace) {
        CounterAction action;
        if (tok_.kind != Tok::Ident) return error("expected action");
        const std::string kind = tok_.text;
        eat();
        if (tok_.kind != Tok::Ident) return error("expected counter name in action");
        action.counter = resolve_counter(tok_.text);
        eat();
        if (kind == "inc") {
          action.kind = ActionKind::Inc;
        } else if (kind == "reset") {
          action.kind = ActionKind::Reset;
        } else if (kind == "set") {
          action.kind = ActionKind::Set;
          if (!expect(Tok::Assign)) return false;
          auto value = parse_constant();
          if (!value) return false;
          action.value = *value;
        } else {
          return error("unknown action '" + kind + "'");
        }
        arm.transition.actions.push_back(action);
        if (tok_.kind == Tok::Comma) eat();
        else break;
      }
      if (!expect(Tok::RBrace)) return false;
    }

    if (tok_.kind == Tok::Ident && tok_.text == "emit") {
      arm.transition.emit = true;
      eat();
    }
    return expect(Tok::Semi);
  }

  // constant := INT | DURATION | DURATION '-' INT  (durations in windows)
  std::optional<std::uint32_t> parse_constant() {
    if (tok_.kind == Tok::Int) {
      auto v = static_cast<std::uint32_t>(tok_.value);
      eat();
      return v;
    }
    if (tok_.kind != Tok::Duration) {
      error("expected integer or duration, got " + describe(tok_));
      return std::nullopt;
    }
    const Token dur = tok_;
    eat();
    std::uint32_t windows = 1;
    try {
      windows = windows_for(static_cast<std::uint32_t>(dur.value), window_);
    } catch (const Error& e) {
      out_.diagnostics.push_back({Severity::Error, "NonDivisible", e.what(), dur.line, dur.col});
    }
    if (tok_.kind == Tok::Minus) {
      eat();
      if (tok_.kind != Tok::Int) {
        error("expected integer after '-'");
        return std::nullopt;
      }
      const auto sub = static_cast<std::uint32_t>(tok_.value);
      if (sub > windows) {
        error("duration arithmetic yields a negative window count");
        return std::nullopt;
      }
      windows -= sub;
      eat();
    }
    return windows;
  }

  [[nodiscard]] bool finish_automaton(TimedAutomaton automaton,
                                      const std::optional<std::string>& initial_name,
                                      const Token& header) {
    if (states_.empty()) {
      out_.diagnostics.push_back({Severity::Error, "NoStates",
                                  "automaton '" + automaton.event + "' declares no states",
                                  header.line, header.col});
      return true;
    }
    // The initial state is stored first.
    std::size_t initial = 0;
    if (initial_name) {
      bool found = false;
      for (std::size_t i = 0; i < states_.size(); ++i) {
        if (states_[i].name == *initial_name) {
          initial = i;
          found = true;
          break;
        }
      }
      if (!found)
        out_.diagnostics.push_back({Severity::Error, "UnknownState",
                                    "initial state '" + *initial_name + "' is not declared",
                                    header.line, header.col});
    }
    if (initial != 0) std::rotate(states_.begin(), states_.begin() + initial, states_.begin() + initial + 1);

    std::map<std::string, std::uint16_t, std::less<>> state_index;
    for (std::size_t i = 0; i < states_.size(); ++i) {
      auto [it, inserted] = state_index.emplace(states_[i].name, static_cast<std::uint16_t>(i));
      if (!inserted)
        out_.diagnostics.push_back({Severity::Error, "DuplicateState",
                                    "state '" + states_[i].name + "' is declared twice",
                                    states_[i].line, states_[i].col});
    }
    for (auto& state : states_) {
      automaton.states.push_back(state.name);
      std::vector<Transition> arms;
      for (auto& pending : state.arms) {
        auto it = state_index.find(pending.target_name);
        if (it == state_index.end()) {
          out_.diagnostics.push_back({Severity::Error, "UnknownState",
                                      "state '" + pending.target_name + "' is not declared",
                                      pending.target_line, pending.target_col});
        } else {
          pending.transition.target = it->second;
        }
        arms.push_back(std::move(pending.transition));
      }
      automaton.arms.push_back(std::move(arms));
    }

    for (auto& d : validate(automaton, vocab_)) {
      d.line = header.line;
      d.col = header.col;
      out_.diagnostics.push_back(std::move(d));
    }
    out_.automata.push_back(std::move(automaton));
    return true;
  }

  std::uint16_t resolve_counter(const std::string& name) {
    auto it = counters_.find(name);
    if (it == counters_.end()) {
      diag("UnknownCounter", "counter '" + name + "' is not declared");
      return 0;
    }
    return it->second;
  }

  std::string describe(const Token& t) const {
    if (t.kind == Tok::Ident) return "'" + t.text + "'";
    return tok_name(t.kind);
  }

  bool expect(Tok kind) {
    if (tok_.kind != kind) {
      return error(std::string("expected ") + tok_name(kind) + ", got " + describe(tok_));
    }
    eat();
    return true;
  }

  bool error(const std::string& message) {
    out_.diagnostics.push_back({Severity::Error, "SyntaxError", message, tok_.line, tok_.col});
    return false;
  }

  void diag(std::string code, std::string message) {
    out_.diagnostics.push_back({Severity::Error, std::move(code), std::move(message),
                                tok_.line, tok_.col});
  }

  // Skip to the next top-level 'automaton' keyword.
  void recover() {
    while (tok_.kind != Tok::End && !(tok_.kind == Tok::Ident && tok_.text == "automaton")) {
      tok_ = lexer_.next();
    }
  }

  void eat() { tok_ = lexer_.next(); }

  Lexer lexer_;
  const Vocabulary& vocab_;
  WindowSpec window_;
  ParseResult& out_;
  Token tok_;
  std::map<std::string, std::uint16_t, std::less<>> counters_;
  std::vector<PendingState> states_;
};

}  // namespace

ParseResult parse_rules(std::string_view source, const Vocabulary& vocab, WindowSpec window) {
  ParseResult result;
  Parser parser(source, vocab, window, result);
  parser.run();
  return result;
}

}  // namespace ced
