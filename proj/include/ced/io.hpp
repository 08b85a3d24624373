#pragma once
// File formats: JSON-Lines traces and predictions, evaluation reports,
// plain-text simulator configs.
//
// Trace records are one JSON object per line with fields in this order:
//   id, window_s, activities, soft (optional), labels (optional),
//   seed (optional)
// Prediction records: id, labels, per_window_latency_ns (optional).
// Writing is byte-deterministic; write(read(x)) == x for files this module
// produced. Readers stream line by line and never hold more than one
// record.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ced/core.hpp"
#include "ced/metrics.hpp"
#include "ced/sim.hpp"

namespace ced {

// Event tokens in bit order; label bit i <-> names[i].
class EventCatalog {
 public:
  EventCatalog() = default;
  explicit EventCatalog(std::vector<std::string> names);

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<std::size_t> find(std::string_view token) const;
  // find-or-append; throws once kMaxEventTypes is exceeded.
  std::size_t intern(std::string_view token);

 private:
  std::vector<std::string> names_;
};

class JsonlTraceReader {
 public:
  // The catalog grows as unseen event tokens appear when `grow_catalog`;
  // otherwise unknown tokens are a SchemaError.
  JsonlTraceReader(std::istream& in, const Vocabulary& vocab, EventCatalog& catalog,
                   bool grow_catalog = false);

  // Next record, or nullopt at end of input. Throws Error("ParseError") /
  // Error("SchemaError") with the offending line number.
  std::optional<Trace> next();

  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  const Vocabulary& vocab_;
  EventCatalog& catalog_;
  bool grow_catalog_;
  std::size_t line_ = 0;
};

struct PredictionRecord {
  std::string id;
  LabelSeq labels;
  std::optional<std::vector<std::uint64_t>> per_window_latency_ns;
};

class JsonlPredictionReader {
 public:
  JsonlPredictionReader(std::istream& in, EventCatalog& catalog, bool grow_catalog = false);

  std::optional<PredictionRecord> next();

  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  EventCatalog& catalog_;
  bool grow_catalog_;
  std::size_t line_ = 0;
};

void write_trace(std::ostream& out, const Trace& trace, const Vocabulary& vocab,
                 const EventCatalog& catalog);
void write_prediction(std::ostream& out, const PredictionRecord& record,
                      const EventCatalog& catalog);

// Convenience: whole-file forms.
std::vector<Trace> read_traces(const std::string& path, const Vocabulary& vocab,
                               EventCatalog& catalog, bool grow_catalog = false);
void write_traces(const std::string& path, std::span<const Trace> traces,
                  const Vocabulary& vocab, const EventCatalog& catalog);

// Evaluation report as a JSON document (fixed field order; Undefined scores
// are null).
std::string report_to_json(const EvalReport& report);

// Plain-text key-value simulator config; see docs/file-formats.md. Unknown
// keys and malformed values are SchemaErrors with line numbers.
SimConfig parse_sim_config(std::istream& in, SimConfig base = {});
SimConfig load_sim_config(const std::string& path, SimConfig base = {});

}  // namespace ced
