#pragma once
// Domain vocabulary, windowing, traces and label sequences.
//
// All types here are immutable values after construction and safe to share
// across threads.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ced {

// All library errors carry a stable machine-readable code ("NonDivisible",
// "UnpairedId", ...) plus a human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
  throw Error(std::move(code), message);
}

using ActivityId = std::uint16_t;

// Ordered set of distinct atomic-activity tokens. Tokens are lowercase
// ASCII with underscores; at least two are required.
class Vocabulary {
 public:
  explicit Vocabulary(std::vector<std::string> names);

  // walk, sit, stand, work, use_restroom, wash_hands, eat, brush_teeth,
  // touch_object, idle
  static const Vocabulary& default_vocabulary();

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(ActivityId id) const { return names_.at(id); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::optional<ActivityId> find(std::string_view token) const;
  // Throws Error("UnknownActivity") when the token is not in the vocabulary.
  ActivityId require(std::string_view token) const;

  bool operator==(const Vocabulary& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, ActivityId, std::less<>> index_;
};

struct WindowSpec {
  std::uint32_t seconds_per_window = 5;

  bool operator==(const WindowSpec&) const = default;
};

// Converts a duration in seconds into a whole number of windows.
// Throws Error("NonDivisible") when the window does not divide the duration.
std::uint32_t windows_for(std::uint32_t duration_seconds, WindowSpec window);

// Index of the maximal probability; ties break to the lowest index.
// probs must be a valid distribution (checked by validate_distribution).
ActivityId argmax_label(std::span<const double> probs);

// Nonnegative entries summing to 1 within 1e-9. Throws
// Error("InvalidDistribution") otherwise, naming the window when wi >= 0.
void validate_distribution(std::span<const double> probs, std::size_t expected_size,
                           std::ptrdiff_t window_index = -1);

// Per-window sets of complex-event types, packed as bitmasks over the
// event catalog of the active rule set. Empty mask = no event.
using LabelMask = std::uint32_t;
using LabelSeq = std::vector<LabelMask>;

inline constexpr std::size_t kMaxEventTypes = 32;

struct Trace {
  std::string id;
  WindowSpec window;
  std::vector<ActivityId> activities;       // length T
  std::vector<std::vector<double>> soft;    // empty, or length T of K-vectors
  std::optional<LabelSeq> labels;           // ground truth, length T
  std::optional<std::uint64_t> seed;        // generator substream, if simulated

  std::size_t length() const noexcept { return activities.size(); }
};

// Checks the cross-field length invariants; throws Error("LengthMismatch").
void validate_trace(const Trace& trace, std::size_t vocab_size);

}  // namespace ced
