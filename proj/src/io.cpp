#include "ced/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ced {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
  fail("SchemaError", "line " + std::to_string(line) + ": " + what);
}

json parse_line(const std::string& text, std::size_t line) {
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded())
    fail("ParseError", "line " + std::to_string(line) + ": invalid JSON");
  if (!value.is_object())
    schema_error(line, "expected a JSON object");
  return value;
}

const json& require_field(const json& record, const char* name, std::size_t line) {
  auto it = record.find(name);
  if (it == record.end()) schema_error(line, "missing field '" + std::string(name) + "'");
  return *it;
}

LabelMask labels_from_json(const json& window, EventCatalog& catalog, bool grow,
                           std::size_t line) {
  if (!window.is_array()) schema_error(line, "field 'labels' must hold arrays of event tokens");
  LabelMask mask = 0;
  for (const auto& token : window) {
    if (!token.is_string()) schema_error(line, "event tokens must be strings");
    const auto& name = token.get_ref<const std::string&>();
    std::optional<std::size_t> bit = catalog.find(name);
    if (!bit) {
      if (!grow) schema_error(line, "unknown event token '" + name + "'");
      bit = catalog.intern(name);
    }
    mask |= LabelMask{1} << *bit;
  }
  return mask;
}

json labels_to_json(LabelMask mask, const EventCatalog& catalog) {
  json window = json::array();
  for (std::size_t e = 0; e < catalog.names().size(); ++e)
    if (mask >> e & 1) window.push_back(catalog.names()[e]);
  return window;
}

// One getline that tolerates a missing trailing newline.
bool next_line(std::istream& in, std::string& text) {
  return static_cast<bool>(std::getline(in, text));
}

}  // namespace

EventCatalog::EventCatalog(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() > kMaxEventTypes)
    fail("InvalidRuleSet", "event catalog exceeds " + std::to_string(kMaxEventTypes) + " types");
  for (std::size_t i = 0; i < names_.size(); ++i)
    for (std::size_t j = i + 1; j < names_.size(); ++j)
      if (names_[i] == names_[j]) fail("InvalidRuleSet", "duplicate event '" + names_[i] + "'");
}

std::optional<std::size_t> EventCatalog::find(std::string_view token) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == token) return i;
  return std::nullopt;
}

std::size_t EventCatalog::intern(std::string_view token) {
  if (auto i = find(token)) return *i;
  if (names_.size() >= kMaxEventTypes)
    fail("InvalidRuleSet", "event catalog exceeds " + std::to_string(kMaxEventTypes) + " types");
  names_.emplace_back(token);
  return names_.size() - 1;
}

JsonlTraceReader::JsonlTraceReader(std::istream& in, const Vocabulary& vocab,
                                   EventCatalog& catalog, bool grow_catalog)
    : in_(in), vocab_(vocab), catalog_(catalog), grow_catalog_(grow_catalog) {}

std::optional<Trace> JsonlTraceReader::next() {
  std::string text;
  if (!next_line(in_, text)) return std::nullopt;
  ++line_;
  const json record = parse_line(text, line_);

  Trace trace;
  const json& id = require_field(record, "id", line_);
  if (!id.is_string()) schema_error(line_, "field 'id' must be a string");
  trace.id = id.get<std::string>();

  const json& window_s = require_field(record, "window_s", line_);
  if (!window_s.is_number_unsigned() || window_s.get<std::uint64_t>() == 0)
    schema_error(line_, "field 'window_s' must be a positive integer");
  trace.window.seconds_per_window = window_s.get<std::uint32_t>();

  const json& activities = require_field(record, "activities", line_);
  if (!activities.is_array()) schema_error(line_, "field 'activities' must be an array");
  trace.activities.reserve(activities.size());
  for (const auto& token : activities) {
    if (!token.is_string()) schema_error(line_, "activity tokens must be strings");
    const auto& name = token.get_ref<const std::string&>();
    auto id_ = vocab_.find(name);
    if (!id_) schema_error(line_, "unknown activity token '" + name + "'");
    trace.activities.push_back(*id_);
  }

  if (auto it = record.find("soft"); it != record.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != trace.activities.size())
      schema_error(line_, "field 'soft' must be an array of length matching 'activities'");
    trace.soft.reserve(it->size());
    for (const auto& row : *it) {
      if (!row.is_array()) schema_error(line_, "field 'soft' must hold arrays of numbers");
      std::vector<double> probs;
      probs.reserve(row.size());
      for (const auto& p : row) {
        if (!p.is_number()) schema_error(line_, "field 'soft' must hold arrays of numbers");
        probs.push_back(p.get<double>());
      }
      try {
        validate_distribution(probs, vocab_.size());
      } catch (const Error& e) {
        schema_error(line_, e.what());
      }
      trace.soft.push_back(std::move(probs));
    }
  }

  if (auto it = record.find("labels"); it != record.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != trace.activities.size())
      schema_error(line_, "field 'labels' must be an array of length matching 'activities'");
    LabelSeq labels;
    labels.reserve(it->size());
    for (const auto& window : *it)
      labels.push_back(labels_from_json(window, catalog_, grow_catalog_, line_));
    trace.labels = std::move(labels);
  }

  if (auto it = record.find("seed"); it != record.end() && !it->is_null()) {
    if (!it->is_number_unsigned()) schema_error(line_, "field 'seed' must be an unsigned integer");
    trace.seed = it->get<std::uint64_t>();
  }
  return trace;
}

JsonlPredictionReader::JsonlPredictionReader(std::istream& in, EventCatalog& catalog,
                                             bool grow_catalog)
    : in_(in), catalog_(catalog), grow_catalog_(grow_catalog) {}

std::optional<PredictionRecord> JsonlPredictionReader::next() {
  std::string text;
  if (!next_line(in_, text)) return std::nullopt;
  ++line_;
  const json record = parse_line(text, line_);

  PredictionRecord out;
  const json& id = require_field(record, "id", line_);
  if (!id.is_string()) schema_error(line_, "field 'id' must be a string");
  out.id = id.get<std::string>();

  const json& labels = require_field(record, "labels", line_);
  if (!labels.is_array()) schema_error(line_, "field 'labels' must be an array");
  out.labels.reserve(labels.size());
  for (const auto& window : labels)
    out.labels.push_back(labels_from_json(window, catalog_, grow_catalog_, line_));

  if (auto it = record.find("per_window_latency_ns"); it != record.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != out.labels.size())
      schema_error(line_, "field 'per_window_latency_ns' must match 'labels' in length");
    std::vector<std::uint64_t> latency;
    latency.reserve(it->size());
    for (const auto& v : *it) {
      if (!v.is_number_unsigned())
        schema_error(line_, "latencies must be unsigned integers");
      latency.push_back(v.get<std::uint64_t>());
    }
    out.per_window_latency_ns = std::move(latency);
  }
  return out;
}

void write_trace(std::ostream& out, const Trace& trace, const Vocabulary& vocab,
                 const EventCatalog& catalog) {
  ordered_json record;
  record["id"] = trace.id;
  record["window_s"] = trace.window.seconds_per_window;
  json activities = json::array();
  for (ActivityId a : trace.activities) activities.push_back(vocab.name(a));
  record["activities"] = std::move(activities);
  if (!trace.soft.empty()) record["soft"] = trace.soft;
  if (trace.labels) {
    json labels = json::array();
    for (LabelMask mask : *trace.labels) labels.push_back(labels_to_json(mask, catalog));
    record["labels"] = std::move(labels);
  }
  if (trace.seed) record["seed"] = *trace.seed;
  out << record.dump() << '\n';
}

void write_prediction(std::ostream& out, const PredictionRecord& record,
                      const EventCatalog& catalog) {
  ordered_json value;
  value["id"] = record.id;
  json labels = json::array();
  for (LabelMask mask : record.labels) labels.push_back(labels_to_json(mask, catalog));
  value["labels"] = std::move(labels);
  if (record.per_window_latency_ns) value["per_window_latency_ns"] = *record.per_window_latency_ns;
  out << value.dump() << '\n';
}

std::vector<Trace> read_traces(const std::string& path, const Vocabulary& vocab,
                               EventCatalog& catalog, bool grow_catalog) {
  std::ifstream in(path);
  if (!in) fail("IoError", "cannot open '" + path + "'");
  JsonlTraceReader reader(in, vocab, catalog, grow_catalog);
  std::vector<Trace> traces;
  while (auto trace = reader.next()) traces.push_back(std::move(*trace));
  return traces;
}

void write_traces(const std::string& path, std::span<const Trace> traces,
                  const Vocabulary& vocab, const EventCatalog& catalog) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("IoError", "cannot open '" + path + "' for writing");
  for (const Trace& trace : traces) write_trace(out, trace, vocab, catalog);
}

std::string report_to_json(const EvalReport& report) {
  const auto f1_json = [&](const F1Block& block) {
    ordered_json value;
    ordered_json per_type;
    for (std::size_t e = 0; e < report.event_names.size(); ++e) {
      if (block.per_type[e])
        per_type[report.event_names[e]] = *block.per_type[e];
      else
        per_type[report.event_names[e]] = nullptr;
    }
    value["per_type"] = std::move(per_type);
    if (block.average)
      value["average"] = *block.average;
    else
      value["average"] = nullptr;
    return value;
  };
  ordered_json doc;
  doc["n_samples"] = report.n_samples;
  doc["n_length_matched"] = report.n_length_matched;
  doc["length_accuracy"] = report.length_accuracy;
  doc["conditional_f1"] = f1_json(report.conditional);
  doc["coarse_f1"] = f1_json(report.coarse);
  return doc.dump(2) + "\n";
}

namespace {

double parse_double(const std::string& value, std::size_t line) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    schema_error(line, "expected a number, got '" + value + "'");
  }
}

std::uint64_t parse_unsigned(const std::string& value, std::size_t line) {
  try {
    std::size_t used = 0;
    const std::uint64_t parsed = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    schema_error(line, "expected an unsigned integer, got '" + value + "'");
  }
}

DurationRange parse_range(const std::string& value, std::size_t line) {
  const auto sep = value.find("..");
  if (sep == std::string::npos)
    schema_error(line, "expected a range 'lo..hi', got '" + value + "'");
  DurationRange range;
  range.lo = static_cast<std::uint32_t>(parse_unsigned(value.substr(0, sep), line));
  range.hi = static_cast<std::uint32_t>(parse_unsigned(value.substr(sep + 2), line));
  return range;
}

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t");
  return text.substr(begin, end - begin + 1);
}

}  // namespace

SimConfig parse_sim_config(std::istream& in, SimConfig base) {
  SimConfig cfg = base;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto comment = raw.find('#');
    if (comment != std::string::npos) raw.erase(comment);
    const std::string text = trim(raw);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) schema_error(line, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));

    if (key == "span_windows") cfg.span_windows = static_cast<std::uint32_t>(parse_unsigned(value, line));
    else if (key == "seed") cfg.seed = parse_unsigned(value, line);
    else if (key == "violation_prob") cfg.violation_prob = parse_double(value, line);
    else if (key == "rate.restroom") cfg.restroom_rate = parse_double(value, line);
    else if (key == "rate.meal") cfg.meal_rate = parse_double(value, line);
    else if (key == "rate.brush") cfg.brush_rate = parse_double(value, line);
    else if (key == "duration.use_restroom") cfg.restroom_run = parse_range(value, line);
    else if (key == "duration.wash_hands") cfg.wash_run = parse_range(value, line);
    else if (key == "duration.eat") cfg.eat_run = parse_range(value, line);
    else if (key == "duration.brush_teeth") cfg.brush_run = parse_range(value, line);
    else if (key == "duration.work") cfg.work_run = parse_range(value, line);
    else if (key == "duration.background") cfg.background_run = parse_range(value, line);
    else if (key == "background.walk") cfg.background_walk = parse_double(value, line);
    else if (key == "background.sit") cfg.background_sit = parse_double(value, line);
    else if (key == "background.stand") cfg.background_stand = parse_double(value, line);
    else if (key == "background.work") cfg.background_work = parse_double(value, line);
    else if (key == "background.idle") cfg.background_idle = parse_double(value, line);
    else if (key == "background.touch_object") cfg.background_touch_object = parse_double(value, line);
    else schema_error(line, "unknown key '" + key + "'");
  }
  return cfg;
}

SimConfig load_sim_config(const std::string& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) fail("IoError", "cannot open '" + path + "'");
  return parse_sim_config(in, base);
}

}  // namespace ced
