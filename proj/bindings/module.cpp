#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ced/engine.hpp"
#include "ced/io.hpp"
#include "ced/metrics.hpp"
#include "ced/oracle.hpp"
#include "ced/rng.hpp"
#include "ced/rules.hpp"
#include "ced/sim.hpp"

namespace py = pybind11;
using namespace ced;

namespace {

std::vector<ActivityId> to_ids(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::vector<ActivityId> ids;
  ids.reserve(tokens.size());
  for (const auto& token : tokens) ids.push_back(vocab.require(token));
  return ids;
}

std::vector<std::vector<std::string>> to_tokens(const LabelSeq& labels,
                                                const std::vector<std::string>& events) {
  std::vector<std::vector<std::string>> out;
  out.reserve(labels.size());
  for (LabelMask mask : labels) {
    std::vector<std::string> window;
    for (std::size_t e = 0; e < events.size(); ++e)
      if (mask >> e & 1) window.push_back(events[e]);
    out.push_back(std::move(window));
  }
  return out;
}

LabelSeq from_tokens(const std::vector<std::vector<std::string>>& windows,
                     EventCatalog& catalog) {
  LabelSeq out;
  out.reserve(windows.size());
  for (const auto& window : windows) {
    LabelMask mask = 0;
    for (const auto& token : window) mask |= LabelMask{1} << catalog.intern(token);
    out.push_back(mask);
  }
  return out;
}

py::dict trace_to_dict(const Trace& trace, const Vocabulary& vocab,
                       const std::vector<std::string>& events) {
  py::dict out;
  out["id"] = trace.id;
  out["window_s"] = trace.window.seconds_per_window;
  std::vector<std::string> activities;
  activities.reserve(trace.activities.size());
  for (ActivityId a : trace.activities) activities.push_back(vocab.name(a));
  out["activities"] = std::move(activities);
  if (!trace.soft.empty()) out["soft"] = trace.soft;
  if (trace.labels) out["labels"] = to_tokens(*trace.labels, events);
  if (trace.seed) out["seed"] = *trace.seed;
  return out;
}

SimConfig config_from_kwargs(std::uint32_t span_windows, std::uint64_t seed,
                             double violation_prob) {
  SimConfig cfg;
  cfg.span_windows = span_windows;
  cfg.seed = seed;
  cfg.violation_prob = violation_prob;
  return cfg;
}

class PyDetector {
 public:
  explicit PyDetector(const std::string& rules_text, std::uint32_t window_s)
      : engine_(make_rules(rules_text, window_s)) {}

  std::vector<std::string> event_names() const { return engine_.rules().event_names(); }

  std::vector<std::vector<std::string>> detect(const std::vector<std::string>& activities) const {
    const auto ids = to_ids(activities, engine_.rules().vocab());
    return to_tokens(engine_.run_crisp(ids).labels, engine_.rules().event_names());
  }

  std::vector<std::vector<std::string>> detect_soft(
      const std::vector<std::vector<double>>& soft, const std::string& mode,
      double threshold) const {
    DetectMode m = DetectMode::Belief;
    if (mode == "argmax") m = DetectMode::Argmax;
    else if (mode != "belief") fail("InvalidArgument", "mode must be 'argmax' or 'belief'");
    return to_tokens(engine_.run_on_soft(soft, m, threshold).labels,
                     engine_.rules().event_names());
  }

 private:
  static RuleSet make_rules(const std::string& text, std::uint32_t window_s) {
    const WindowSpec window{window_s};
    if (text.empty()) return RuleSet::builtins(window);
    ParseResult parsed = parse_rules(text, Vocabulary::default_vocabulary(), window);
    if (!parsed.ok())
      fail("RuleDiagnostics", format_diagnostic(parsed.diagnostics.front(), "<rules>"));
    return RuleSet(Vocabulary::default_vocabulary(), window, std::move(parsed.automata));
  }

  Engine engine_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "complex event detection toolkit (C++ core)";

  py::register_exception<Error>(m, "CedError");

  m.def("default_vocabulary",
        [] { return Vocabulary::default_vocabulary().names(); },
        "Activity tokens in index order.");

  m.def("builtin_rules_text", [] { return std::string(builtin_rules_text()); },
        "Canonical source of the three built-in rules.");

  m.def(
      "validate_rules",
      [](const std::string& text, std::uint32_t window_s) {
        const ParseResult parsed =
            parse_rules(text, Vocabulary::default_vocabulary(), WindowSpec{window_s});
        std::vector<std::string> out;
        for (const auto& d : parsed.diagnostics) out.push_back(format_diagnostic(d, "<rules>"));
        return out;
      },
      py::arg("text"), py::arg("window_s") = 5,
      "Formatted diagnostics; empty means the rules are valid.");

  m.def(
      "oracle_labels",
      [](const std::vector<std::string>& activities, std::uint32_t window_s) {
        const auto ids = to_ids(activities, Vocabulary::default_vocabulary());
        return to_tokens(oracle_all(ids, Vocabulary::default_vocabulary(), WindowSpec{window_s}),
                         {"e1", "e2", "e3"});
      },
      py::arg("activities"), py::arg("window_s") = 5,
      "Ground-truth labels from the offline reference labelers.");

  py::class_<PyDetector>(m, "Detector")
      .def(py::init<const std::string&, std::uint32_t>(), py::arg("rules_text") = "",
           py::arg("window_s") = 5)
      .def_property_readonly("event_names", &PyDetector::event_names)
      .def("detect", &PyDetector::detect, py::arg("activities"),
           "Streaming crisp detection over hard activity tokens.")
      .def("detect_soft", &PyDetector::detect_soft, py::arg("soft"), py::arg("mode") = "belief",
           py::arg("threshold") = 0.5,
           "Detection over per-window distributions (argmax or belief mode).");

  m.def(
      "generate",
      [](std::size_t n, std::uint32_t span_windows, std::uint64_t seed, double violation_prob) {
        const SimConfig cfg = config_from_kwargs(span_windows, seed, violation_prob);
        py::list out;
        for (const Trace& trace : generate(cfg, n))
          out.append(trace_to_dict(trace, Vocabulary::default_vocabulary(), {"e1", "e2", "e3"}));
        return out;
      },
      py::arg("n"), py::arg("span_windows") = 60, py::arg("seed") = 0,
      py::arg("violation_prob") = 0.5,
      "Seeded labeled traces from the daily-behavior simulator.");

  m.def(
      "corrupt",
      [](const py::dict& trace, double p_correct, std::uint64_t seed) {
        const Vocabulary& vocab = Vocabulary::default_vocabulary();
        Trace in;
        in.id = py::cast<std::string>(trace["id"]);
        in.activities = to_ids(py::cast<std::vector<std::string>>(trace["activities"]), vocab);
        EventCatalog catalog(std::vector<std::string>{"e1", "e2", "e3"});
        if (trace.contains("labels"))
          in.labels = from_tokens(
              py::cast<std::vector<std::vector<std::string>>>(trace["labels"]), catalog);
        if (trace.contains("seed")) in.seed = py::cast<std::uint64_t>(trace["seed"]);
        const Trace noisy = corrupt(in, NoiseModel{p_correct}, seed);
        return trace_to_dict(noisy, vocab, catalog.names());
      },
      py::arg("trace"), py::arg("p_correct"), py::arg("seed"),
      "Symmetric label noise: soft rows centered on the clean labels, hard "
      "labels resampled.");

  m.def(
      "evaluate",
      [](const std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>>& preds,
         const std::vector<std::pair<std::string, std::vector<std::vector<std::string>>>>&
             truths) {
        EventCatalog catalog;
        std::vector<LabeledSeq> p, t;
        for (const auto& [id, labels] : truths) t.push_back({id, from_tokens(labels, catalog)});
        for (const auto& [id, labels] : preds) p.push_back({id, from_tokens(labels, catalog)});
        return report_to_json(evaluate(p, t, catalog.names()));
      },
      py::arg("preds"), py::arg("truths"),
      "Length accuracy plus conditional and coarse F1, as a JSON string.");

  m.attr("__version__") = "0.1.0";
}
