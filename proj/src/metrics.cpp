#include "ced/metrics.hpp"

#include <map>

namespace ced {

std::vector<SamplePair> pair_by_id(std::span<const LabeledSeq> preds,
                                   std::span<const LabeledSeq> truths) {
  if (preds.empty() || truths.empty()) fail("UnpairedId", "no samples to evaluate");
  if (preds.size() != truths.size())
    fail("UnpairedId", std::to_string(preds.size()) + " predictions vs " +
                           std::to_string(truths.size()) + " truths");
  std::map<std::string_view, const LabelSeq*> by_id;
  for (const auto& t : truths) {
    if (!by_id.emplace(t.id, &t.labels).second)
      fail("UnpairedId", "duplicate truth id '" + t.id + "'");
  }
  std::vector<SamplePair> pairs;
  pairs.reserve(preds.size());
  std::map<std::string_view, bool> used;
  for (const auto& p : preds) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) fail("UnpairedId", "prediction id '" + p.id + "' has no truth");
    if (!used.emplace(p.id, true).second)
      fail("UnpairedId", "duplicate prediction id '" + p.id + "'");
    pairs.emplace_back(&p.labels, it->second);
  }
  return pairs;
}

double length_accuracy(std::span<const SamplePair> pairs) {
  if (pairs.empty()) fail("UnpairedId", "no samples to evaluate");
  std::size_t matched = 0;
  for (const auto& [pred, truth] : pairs)
    if (pred->size() == truth->size()) ++matched;
  return static_cast<double>(matched) / static_cast<double>(pairs.size());
}

namespace {

struct Counts {
  std::uint64_t tp = 0, fp = 0, fn = 0;

  void add(bool in_pred, bool in_truth) {
    tp += in_pred && in_truth;
    fp += in_pred && !in_truth;
    fn += !in_pred && in_truth;
  }
};

F1Block finish(const std::vector<Counts>& counts) {
  F1Block block;
  block.per_type.reserve(counts.size());
  double sum = 0.0;
  std::size_t defined = 0;
  for (const Counts& c : counts) {
    if (c.tp + c.fn == 0) {
      block.per_type.emplace_back(std::nullopt);  // never in truth: Undefined
      continue;
    }
    const double f1 = 2.0 * static_cast<double>(c.tp) /
                      static_cast<double>(2 * c.tp + c.fp + c.fn);
    block.per_type.emplace_back(f1);
    sum += f1;
    ++defined;
  }
  if (defined > 0) block.average = sum / static_cast<double>(defined);
  return block;
}

}  // namespace

F1Block conditional_f1(std::span<const SamplePair> pairs, std::size_t n_types) {
  std::vector<Counts> counts(n_types);
  for (const auto& [pred, truth] : pairs) {
    if (pred->size() != truth->size()) continue;
    for (std::size_t w = 0; w < truth->size(); ++w) {
      const LabelMask p = (*pred)[w];
      const LabelMask t = (*truth)[w];
      for (std::size_t e = 0; e < n_types; ++e)
        counts[e].add(p >> e & 1, t >> e & 1);
    }
  }
  return finish(counts);
}

std::optional<double> sample_averaged_conditional_f1(std::span<const SamplePair> pairs,
                                                     std::size_t n_types) {
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& [pred, truth] : pairs) {
    if (pred->size() != truth->size()) continue;
    double type_sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t e = 0; e < n_types; ++e) {
      Counts c;
      for (std::size_t w = 0; w < truth->size(); ++w)
        c.add((*pred)[w] >> e & 1, (*truth)[w] >> e & 1);
      if (c.tp + c.fn == 0) continue;
      type_sum += 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
      ++defined;
    }
    if (defined > 0) {
      sum += type_sum / static_cast<double>(defined);
      ++counted;
    }
  }
  if (counted == 0) return std::nullopt;
  return sum / static_cast<double>(counted);
}

F1Block coarse_f1(std::span<const SamplePair> pairs, std::size_t n_types) {
  std::vector<Counts> counts(n_types);
  for (const auto& [pred, truth] : pairs) {
    LabelMask p = 0, t = 0;
    for (LabelMask m : *pred) p |= m;
    for (LabelMask m : *truth) t |= m;
    for (std::size_t e = 0; e < n_types; ++e)
      counts[e].add(p >> e & 1, t >> e & 1);
  }
  return finish(counts);
}

EvalReport evaluate(std::span<const LabeledSeq> preds, std::span<const LabeledSeq> truths,
                    std::vector<std::string> event_names) {
  const auto pairs = pair_by_id(preds, truths);
  EvalReport report;
  report.event_names = std::move(event_names);
  report.n_samples = pairs.size();
  for (const auto& [pred, truth] : pairs)
    if (pred->size() == truth->size()) ++report.n_length_matched;
  report.length_accuracy = length_accuracy(pairs);
  report.conditional = conditional_f1(pairs, report.event_names.size());
  report.coarse = coarse_f1(pairs, report.event_names.size());
  return report;
}

}  // namespace ced
