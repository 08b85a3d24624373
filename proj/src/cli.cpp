#include "ced/cli.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ced/bench.hpp"
#include "ced/engine.hpp"
#include "ced/io.hpp"
#include "ced/metrics.hpp"
#include "ced/oracle.hpp"
#include "ced/rng.hpp"
#include "ced/rules.hpp"
#include "ced/sim.hpp"

namespace ced {

namespace {

// Noise substream per trace, independent of the generation stream.
constexpr std::uint64_t kNoiseStreamTag = 0xced0'0001;

constexpr std::size_t kChunkTraces = 512;  // bounds memory when parallel

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ordered parallel map: results land by index, so output never depends on
// worker count.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  const auto count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  workers.reserve(count);
  for (unsigned w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n && !failed; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::uint32_t parse_span(const std::string& text, WindowSpec window) {
  if (text.empty()) throw UsageError("empty --span");
  const char suffix = text.back();
  std::uint64_t value = 0;
  try {
    std::size_t used = 0;
    value = std::stoull(text.substr(0, text.size() - 1), &used);
    if (used + 1 != text.size() || value == 0) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw UsageError("--span must look like 5m or 60w, got '" + text + "'");
  }
  if (suffix == 'w') return static_cast<std::uint32_t>(value);
  if (suffix == 'm') return windows_for(static_cast<std::uint32_t>(value * 60), window);
  throw UsageError("--span must end in 'm' (minutes) or 'w' (windows)");
}

RuleSet load_rules(const std::string& path, WindowSpec window) {
  if (path.empty()) return RuleSet::builtins(window);
  std::ifstream in(path);
  if (!in) fail("IoError", "cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  ParseResult parsed = parse_rules(text.str(), Vocabulary::default_vocabulary(), window);
  for (const auto& d : parsed.diagnostics) std::cerr << format_diagnostic(d, path) << '\n';
  if (!parsed.ok()) fail("RuleDiagnostics", "rule file '" + path + "' failed validation");
  return RuleSet(Vocabulary::default_vocabulary(), window, std::move(parsed.automata));
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoError", "cannot open '" + path + "' for writing");
  return out;
}

LabelSeq label_activities(const Engine& engine, bool builtin,
                          std::span<const ActivityId> activities) {
  if (builtin)
    return oracle_all(activities, engine.rules().vocab(), engine.rules().window());
  return engine.run_crisp(activities).labels;
}

int cmd_validate(const std::string& rules_path, WindowSpec window) {
  std::ifstream in(rules_path);
  if (!in) fail("IoError", "cannot open '" + rules_path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  ParseResult parsed = parse_rules(text.str(), Vocabulary::default_vocabulary(), window);
  for (const auto& d : parsed.diagnostics) std::cerr << format_diagnostic(d, rules_path) << '\n';
  if (!parsed.ok()) return 2;
  std::cout << rules_path << ": " << parsed.automata.size() << " automaton(s), ok\n";
  return 0;
}

struct GenOptions {
  std::string config_path, rules_path, out_path, span_text;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  double noise = 0.0;
  unsigned jobs = 1;
};

int cmd_gen(const GenOptions& opt, WindowSpec window) {
  SimConfig cfg;
  if (!opt.config_path.empty()) cfg = load_sim_config(opt.config_path);
  cfg.seed = opt.seed;
  if (!opt.span_text.empty()) cfg.span_windows = parse_span(opt.span_text, window);

  const RuleSet rules = load_rules(opt.rules_path, window);
  const Engine engine{RuleSet(rules)};
  const bool builtin = rules.is_builtin();
  const EventCatalog catalog(rules.event_names());
  const Vocabulary& vocab = rules.vocab();

  generate(cfg, 0, window);  // validates the config up front
  std::ofstream out = open_output(opt.out_path);
  for (std::size_t base = 0; base < opt.n; base += kChunkTraces) {
    const std::size_t count = std::min<std::size_t>(kChunkTraces, opt.n - base);
    std::vector<Trace> chunk(count);
    parallel_for(count, opt.jobs, [&](std::size_t i) {
      const std::size_t index = base + i;
      char trace_id[32];
      std::snprintf(trace_id, sizeof trace_id, "t-%06zu", index);
      Trace trace = generate_one(cfg, substream(cfg.seed, index), trace_id, window);
      if (!builtin) trace.labels = label_activities(engine, false, trace.activities);
      if (opt.noise > 0.0) {
        trace = corrupt(trace, NoiseModel{opt.noise},
                        substream(*trace.seed, kNoiseStreamTag), vocab);
      }
      chunk[i] = std::move(trace);
    });
    for (const Trace& trace : chunk) write_trace(out, trace, vocab, catalog);
  }
  if (!out) fail("IoError", "writing '" + opt.out_path + "' failed");
  return 0;
}

int cmd_label(const std::string& rules_path, const std::string& in_path,
              const std::string& out_path, WindowSpec window) {
  const RuleSet rules = load_rules(rules_path, window);
  const Engine engine{RuleSet(rules)};
  const bool builtin = rules.is_builtin();
  EventCatalog catalog(rules.event_names());

  std::ifstream in(in_path);
  if (!in) fail("IoError", "cannot open '" + in_path + "'");
  std::ofstream out = open_output(out_path);
  JsonlTraceReader reader(in, rules.vocab(), catalog);
  while (auto trace = reader.next()) {
    trace->labels = label_activities(engine, builtin, trace->activities);
    write_trace(out, *trace, rules.vocab(), catalog);
  }
  return 0;
}

struct DetectOptions {
  std::string rules_path, mode = "crisp", in_path, out_path;
  bool timing = false;
  unsigned jobs = 1;
};

int cmd_detect(const DetectOptions& opt, WindowSpec window) {
  const RuleSet rules = load_rules(opt.rules_path, window);
  const Engine engine{RuleSet(rules)};
  EventCatalog catalog(rules.event_names());

  DetectMode mode = DetectMode::Crisp;
  double threshold = 0.5;
  if (opt.mode == "crisp") {
    mode = DetectMode::Crisp;
  } else if (opt.mode == "argmax") {
    mode = DetectMode::Argmax;
  } else if (opt.mode.rfind("belief", 0) == 0) {
    mode = DetectMode::Belief;
    if (opt.mode.size() > 6) {
      if (opt.mode[6] != ':') throw UsageError("--mode belief takes a threshold as belief:T");
      try {
        std::size_t used = 0;
        threshold = std::stod(opt.mode.substr(7), &used);
        if (used != opt.mode.size() - 7) throw std::invalid_argument(opt.mode);
      } catch (const std::exception&) {
        throw UsageError("bad belief threshold in '" + opt.mode + "'");
      }
    }
  } else {
    throw UsageError("--mode must be crisp, argmax, or belief[:T]");
  }
  if (mode == DetectMode::Belief && (!(threshold > 0.0) || threshold > 1.0))
    fail("InvalidThreshold", "belief threshold must be in (0, 1]");

  std::ifstream in(opt.in_path);
  if (!in) fail("IoError", "cannot open '" + opt.in_path + "'");
  std::ofstream out = open_output(opt.out_path);
  JsonlTraceReader reader(in, rules.vocab(), catalog);

  bool more = true;
  while (more) {
    std::vector<Trace> chunk;
    chunk.reserve(kChunkTraces);
    while (chunk.size() < kChunkTraces) {
      auto trace = reader.next();
      if (!trace) {
        more = false;
        break;
      }
      chunk.push_back(std::move(*trace));
    }
    std::vector<PredictionRecord> results(chunk.size());
    parallel_for(chunk.size(), opt.jobs, [&](std::size_t i) {
      const Trace& trace = chunk[i];
      DetectorOutput output;
      if (mode == DetectMode::Crisp) {
        output = engine.run_crisp(trace.activities, opt.timing);
      } else {
        if (trace.soft.empty())
          fail("SchemaError", "trace '" + trace.id + "' has no soft distributions; " +
                                  "mode '" + opt.mode + "' needs them");
        output = engine.run_on_soft(trace.soft, mode, threshold, opt.timing);
      }
      results[i] = PredictionRecord{trace.id, std::move(output.labels),
                                    std::move(output.per_window_latency_ns)};
    });
    for (const PredictionRecord& record : results) write_prediction(out, record, catalog);
  }
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& report_path) {
  EventCatalog catalog;  // grows from the files; truth tokens first
  const Vocabulary& vocab = Vocabulary::default_vocabulary();

  std::vector<LabeledSeq> truths;
  {
    std::ifstream in(truth_path);
    if (!in) fail("IoError", "cannot open '" + truth_path + "'");
    JsonlTraceReader reader(in, vocab, catalog, /*grow_catalog=*/true);
    while (auto trace = reader.next()) {
      if (!trace->labels)
        fail("SchemaError", "truth record '" + trace->id + "' has no labels");
      truths.push_back({std::move(trace->id), std::move(*trace->labels)});
    }
  }
  std::vector<LabeledSeq> preds;
  {
    std::ifstream in(pred_path);
    if (!in) fail("IoError", "cannot open '" + pred_path + "'");
    JsonlPredictionReader reader(in, catalog, /*grow_catalog=*/true);
    while (auto record = reader.next())
      preds.push_back({std::move(record->id), std::move(record->labels)});
  }

  const EvalReport report = evaluate(preds, truths, catalog.names());
  const std::string doc = report_to_json(report);
  if (!report_path.empty()) {
    std::ofstream out = open_output(report_path);
    out << doc;
    if (!out) fail("IoError", "writing '" + report_path + "' failed");
  }
  std::cout << doc;
  return 0;
}

int cmd_bench(const std::string& rules_path, const std::string& span_text, std::uint32_t trials,
              std::uint64_t seed, WindowSpec window) {
  const RuleSet rules = load_rules(rules_path, window);
  const Engine engine{RuleSet(rules)};
  const std::uint32_t span = parse_span(span_text, window);
  const LatencyReport report = bench_latency(engine, span, trials, seed);

  nlohmann::ordered_json doc;
  doc["span_windows"] = report.span_windows;
  doc["trials"] = report.trials;
  doc["windows_timed"] = report.windows_timed;
  for (const auto& [name, stats] :
       {std::pair{"crisp", report.crisp}, std::pair{"belief", report.belief}}) {
    doc[name] = {{"mean_ns", stats.mean_ns},
                 {"p50_ns", stats.p50_ns},
                 {"p99_ns", stats.p99_ns},
                 {"max_ns", stats.max_ns}};
  }
  std::cout << doc.dump(2) << '\n';
  return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
  CLI::App app{"complex event detection toolkit"};
  app.require_subcommand(1);
  const WindowSpec window{};  // the file formats fix 5-second windows

  auto* validate_cmd = app.add_subcommand("validate", "parse and validate a rule file");
  std::string validate_rules;
  validate_cmd->add_option("--rules", validate_rules, "rule file (.ced)")->required();

  auto* gen_cmd = app.add_subcommand("gen", "generate labeled traces");
  GenOptions gen;
  gen_cmd->add_option("--config", gen.config_path, "simulator config file");
  gen_cmd->add_option("--rules", gen.rules_path, "rule file for ground-truth labels");
  gen_cmd->add_option("--n", gen.n, "number of traces")->required();
  gen_cmd->add_option("--span", gen.span_text, "trace span, e.g. 5m or 60w");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--out", gen.out_path, "output JSONL path")->required();
  gen_cmd->add_option("--noise", gen.noise, "corrupt with p_correct = P")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--jobs", gen.jobs, "worker threads");

  auto* label_cmd = app.add_subcommand("label", "fill ground-truth labels");
  std::string label_rules, label_in, label_out;
  label_cmd->add_option("--rules", label_rules, "rule file (.ced)");
  label_cmd->add_option("--in", label_in, "input JSONL")->required();
  label_cmd->add_option("--out", label_out, "output JSONL")->required();

  auto* detect_cmd = app.add_subcommand("detect", "run the streaming detector");
  DetectOptions detect;
  detect_cmd->add_option("--rules", detect.rules_path, "rule file (.ced)");
  detect_cmd->add_option("--mode", detect.mode, "crisp | argmax | belief[:T]");
  detect_cmd->add_option("--in", detect.in_path, "input JSONL")->required();
  detect_cmd->add_option("--out", detect.out_path, "output JSONL")->required();
  detect_cmd->add_flag("--timing", detect.timing, "record per-window latency");
  detect_cmd->add_option("--jobs", detect.jobs, "worker threads");

  auto* eval_cmd = app.add_subcommand("eval", "score predictions against truth");
  std::string eval_pred, eval_truth, eval_report;
  eval_cmd->add_option("--pred", eval_pred, "prediction JSONL")->required();
  eval_cmd->add_option("--truth", eval_truth, "truth JSONL")->required();
  eval_cmd->add_option("--report", eval_report, "report JSON path");

  auto* bench_cmd = app.add_subcommand("bench", "measure per-window step latency");
  std::string bench_rules, bench_span = "30m";
  std::uint32_t bench_trials = 10;
  std::uint64_t bench_seed = 0;
  bench_cmd->add_option("--rules", bench_rules, "rule file (.ced)");
  bench_cmd->add_option("--span", bench_span, "trace span, e.g. 30m");
  bench_cmd->add_option("--trials", bench_trials, "number of traces");
  bench_cmd->add_option("--seed", bench_seed, "generator seed");

  std::vector<const char*> argv;
  argv.push_back("ced");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*validate_cmd) return cmd_validate(validate_rules, window);
    if (*gen_cmd) return cmd_gen(gen, window);
    if (*label_cmd) return cmd_label(label_rules, label_in, label_out, window);
    if (*detect_cmd) return cmd_detect(detect, window);
    if (*eval_cmd) return cmd_eval(eval_pred, eval_truth, eval_report);
    if (*bench_cmd) return cmd_bench(bench_rules, bench_span, bench_trials, bench_seed, window);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == "IoError" ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace ced
