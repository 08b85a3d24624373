#include <doctest.h>

#include <sstream>

#include "ced/io.hpp"
#include "ced/sim.hpp"
#include "helpers.hpp"

using namespace ced;

namespace {
const Vocabulary& kVocab = Vocabulary::default_vocabulary();
const std::vector<std::string> kEvents{"e1", "e2", "e3"};

std::string dump_traces(std::span<const Trace> traces, const EventCatalog& catalog) {
  std::ostringstream out;
  for (const Trace& trace : traces) write_trace(out, trace, kVocab, catalog);
  return out.str();
}
}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("canonical trace files round-trip byte-for-byte") {
  SimConfig cfg;
  cfg.seed = 21;
  auto traces = generate(cfg, 25);
  for (std::size_t i = 0; i < traces.size(); i += 3)
    traces[i] = corrupt(traces[i], NoiseModel{0.8}, substream(5, i));

  EventCatalog catalog(kEvents);
  const std::string first = dump_traces(traces, catalog);

  std::istringstream in(first);
  JsonlTraceReader reader(in, kVocab, catalog);
  std::vector<Trace> parsed;
  while (auto trace = reader.next()) parsed.push_back(std::move(*trace));
  REQUIRE(parsed.size() == traces.size());

  CHECK(dump_traces(parsed, catalog) == first);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].activities == traces[i].activities);
    CHECK(parsed[i].soft == traces[i].soft);
    CHECK(*parsed[i].labels == *traces[i].labels);
    CHECK(parsed[i].seed == traces[i].seed);
  }
}

TEST_CASE("missing required fields name the line and field") {
  EventCatalog catalog(kEvents);
  std::istringstream in(
      "{\"id\":\"a\",\"window_s\":5,\"activities\":[\"walk\"]}\n"
      "{\"id\":\"b\",\"window_s\":5}\n");
  JsonlTraceReader reader(in, kVocab, catalog);
  CHECK(reader.next().has_value());
  try {
    reader.next();
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == "SchemaError");
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("activities") != std::string::npos);
  }
}

TEST_CASE("invalid JSON reports the line") {
  EventCatalog catalog(kEvents);
  std::istringstream in("{\"id\":\"a\",\"window_s\":5,\"activities\":[]}\nnot json\n");
  JsonlTraceReader reader(in, kVocab, catalog);
  CHECK(reader.next().has_value());
  CHECK_THROWS_WITH_AS(reader.next(), doctest::Contains("line 2"), Error);
}

TEST_CASE("unknown tokens are schema errors unless the catalog may grow") {
  std::istringstream bad_activity("{\"id\":\"a\",\"window_s\":5,\"activities\":[\"swim\"]}\n");
  EventCatalog catalog(kEvents);
  JsonlTraceReader reader(bad_activity, kVocab, catalog);
  CHECK_THROWS_WITH_AS(reader.next(), doctest::Contains("swim"), Error);

  std::istringstream bad_event(
      "{\"id\":\"a\",\"window_s\":5,\"activities\":[\"walk\"],\"labels\":[[\"e9\"]]}\n");
  JsonlTraceReader strict(bad_event, kVocab, catalog);
  CHECK_THROWS_WITH_AS(strict.next(), doctest::Contains("e9"), Error);

  std::istringstream growable(
      "{\"id\":\"a\",\"window_s\":5,\"activities\":[\"walk\"],\"labels\":[[\"e9\"]]}\n");
  EventCatalog growing(kEvents);
  JsonlTraceReader grower(growable, kVocab, growing, /*grow_catalog=*/true);
  const auto trace = grower.next();
  REQUIRE(trace.has_value());
  CHECK(growing.names().size() == 4);
  CHECK((*trace->labels)[0] == 1u << 3);
}

TEST_CASE("length mismatches between fields are schema errors") {
  EventCatalog catalog(kEvents);
  std::istringstream in(
      "{\"id\":\"a\",\"window_s\":5,\"activities\":[\"walk\",\"sit\"],\"labels\":[[]]}\n");
  JsonlTraceReader reader(in, kVocab, catalog);
  CHECK_THROWS_AS(reader.next(), Error);
}

TEST_CASE("prediction records round-trip with latencies") {
  EventCatalog catalog(kEvents);
  PredictionRecord record{"p1", LabelSeq{0, 1, 0, 1u << 2}, std::vector<std::uint64_t>{5, 6, 7, 8}};
  std::ostringstream out;
  write_prediction(out, record, catalog);
  CHECK(out.str() ==
        "{\"id\":\"p1\",\"labels\":[[],[\"e1\"],[],[\"e3\"]],"
        "\"per_window_latency_ns\":[5,6,7,8]}\n");

  std::istringstream in(out.str());
  JsonlPredictionReader reader(in, catalog);
  const auto parsed = reader.next();
  REQUIRE(parsed.has_value());
  CHECK(parsed->id == record.id);
  CHECK(parsed->labels == record.labels);
  CHECK(parsed->per_window_latency_ns == record.per_window_latency_ns);
  CHECK(!reader.next().has_value());
}

TEST_CASE("report JSON carries nulls for undefined scores") {
  EvalReport report;
  report.event_names = kEvents;
  report.n_samples = 4;
  report.n_length_matched = 3;
  report.length_accuracy = 0.75;
  report.conditional.per_type = {0.5, std::nullopt, 1.0};
  report.conditional.average = 0.75;
  report.coarse.per_type = {1.0, std::nullopt, std::nullopt};
  report.coarse.average = 1.0;
  const std::string doc = report_to_json(report);
  CHECK(doc.find("\"n_samples\": 4") != std::string::npos);
  CHECK(doc.find("\"e2\": null") != std::string::npos);
  CHECK(doc.find("\"length_accuracy\": 0.75") != std::string::npos);
}

TEST_CASE("sim config files parse and reject unknown keys") {
  std::istringstream good(
      "# simulator settings\n"
      "span_windows = 120\n"
      "rate.meal = 2.5   # denser meals\n"
      "violation_prob = 0.25\n"
      "duration.eat = 4..12\n"
      "background.work = 0.1\n"
      "seed = 77\n");
  const SimConfig cfg = parse_sim_config(good);
  CHECK(cfg.span_windows == 120);
  CHECK(cfg.meal_rate == 2.5);
  CHECK(cfg.violation_prob == 0.25);
  CHECK(cfg.eat_run.lo == 4);
  CHECK(cfg.eat_run.hi == 12);
  CHECK(cfg.background_work == 0.1);
  CHECK(cfg.seed == 77);
  CHECK(cfg.restroom_rate == 1.0);  // untouched defaults

  std::istringstream unknown("nonsense = 1\n");
  CHECK_THROWS_WITH_AS(parse_sim_config(unknown), doctest::Contains("unknown key"), Error);

  std::istringstream bad_range("duration.eat = 4\n");
  CHECK_THROWS_AS(parse_sim_config(bad_range), Error);
}

TEST_SUITE_END();
