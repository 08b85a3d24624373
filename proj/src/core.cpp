#include "ced/core.hpp"

#include <cctype>
#include <cmath>

namespace ced {

namespace {

bool valid_token(std::string_view token) {
  if (token.empty()) return false;
  for (char c : token) {
    if (!(std::islower(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) fail("InvalidVocabulary", "vocabulary needs at least 2 tokens");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const std::string& token = names_[i];
    if (!valid_token(token))
      fail("InvalidVocabulary", "token '" + token + "' must be lowercase ASCII with underscores");
    auto [it, inserted] = index_.emplace(token, static_cast<ActivityId>(i));
    if (!inserted) fail("InvalidVocabulary", "duplicate token '" + token + "'");
  }
}

const Vocabulary& Vocabulary::default_vocabulary() {
  static const Vocabulary vocab(std::vector<std::string>{
      "walk", "sit", "stand", "work", "use_restroom", "wash_hands", "eat",
      "brush_teeth", "touch_object", "idle"});
  return vocab;
}

std::optional<ActivityId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ActivityId Vocabulary::require(std::string_view token) const {
  auto id = find(token);
  if (!id) fail("UnknownActivity", "activity '" + std::string(token) + "' is not in the vocabulary");
  return *id;
}

std::uint32_t windows_for(std::uint32_t duration_seconds, WindowSpec window) {
  if (duration_seconds == 0) fail("NonDivisible", "duration must be positive");
  if (window.seconds_per_window == 0) fail("NonDivisible", "window must be positive");
  if (duration_seconds % window.seconds_per_window != 0) {
    fail("NonDivisible", std::to_string(duration_seconds) + "s is not a multiple of the " +
                             std::to_string(window.seconds_per_window) + "s window");
  }
  return duration_seconds / window.seconds_per_window;
}

ActivityId argmax_label(std::span<const double> probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return static_cast<ActivityId>(best);
}

void validate_distribution(std::span<const double> probs, std::size_t expected_size,
                           std::ptrdiff_t window_index) {
  const std::string where =
      window_index >= 0 ? " at window " + std::to_string(window_index) : "";
  if (probs.size() != expected_size)
    fail("VocabularyMismatch", "distribution" + where + " has " + std::to_string(probs.size()) +
                                   " entries, vocabulary has " + std::to_string(expected_size));
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      fail("InvalidDistribution", "negative or non-finite probability" + where);
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    fail("InvalidDistribution", "probabilities" + where + " sum to " + std::to_string(total));
}

void validate_trace(const Trace& trace, std::size_t vocab_size) {
  const std::size_t t = trace.activities.size();
  for (ActivityId a : trace.activities) {
    if (a >= vocab_size) fail("VocabularyMismatch", "activity index out of range in '" + trace.id + "'");
  }
  if (!trace.soft.empty()) {
    if (trace.soft.size() != t)
      fail("LengthMismatch", "soft length != activities length in '" + trace.id + "'");
    for (std::size_t w = 0; w < trace.soft.size(); ++w)
      validate_distribution(trace.soft[w], vocab_size, static_cast<std::ptrdiff_t>(w));
  }
  if (trace.labels && trace.labels->size() != t)
    fail("LengthMismatch", "labels length != activities length in '" + trace.id + "'");
}

}  // namespace ced
