#pragma once
// The three evaluation metrics over predicted vs ground-truth label
// sequences. Predictions may have any length (external detectors often get
// the length wrong); each metric states how it treats mismatches.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ced/core.hpp"

namespace ced {

// A label sequence keyed by sample id; used for both predictions and truth.
struct LabeledSeq {
  std::string id;
  LabelSeq labels;
};

// (prediction, truth) views after id pairing.
using SamplePair = std::pair<const LabelSeq*, const LabelSeq*>;

// Pairs predictions with truths by id, in prediction order. Throws
// Error("UnpairedId") on missing or duplicate ids, count mismatch, or empty
// input.
std::vector<SamplePair> pair_by_id(std::span<const LabeledSeq> preds,
                                   std::span<const LabeledSeq> truths);

// Fraction of samples whose prediction has the truth's length.
double length_accuracy(std::span<const SamplePair> pairs);

// Per-type scores plus their average. A type never present in the truth is
// Undefined (nullopt) and excluded from the average; the average is
// Undefined when no type is defined.
struct F1Block {
  std::vector<std::optional<double>> per_type;
  std::optional<double> average;
};

// Window-wise F1 per event type, micro-aggregated over the length-matched
// samples only. All types Undefined when nothing is length-matched.
F1Block conditional_f1(std::span<const SamplePair> pairs, std::size_t n_types);

// Sample-averaged variant of the conditional score: window-wise F1 per
// type, averaged over the types present in each sample's truth, then over
// the length-matched samples containing any event. evaluate() reports the
// micro aggregation; this reading is what span-degradation experiments
// average over traces. nullopt when no sample qualifies.
std::optional<double> sample_averaged_conditional_f1(std::span<const SamplePair> pairs,
                                                     std::size_t n_types);

// Sample-wise F1 on event-type presence anywhere in the sequence, over all
// samples; timing and length are ignored.
F1Block coarse_f1(std::span<const SamplePair> pairs, std::size_t n_types);

struct EvalReport {
  std::vector<std::string> event_names;
  std::size_t n_samples = 0;
  std::size_t n_length_matched = 0;
  double length_accuracy = 0.0;
  F1Block conditional;
  F1Block coarse;
};

EvalReport evaluate(std::span<const LabeledSeq> preds, std::span<const LabeledSeq> truths,
                    std::vector<std::string> event_names);

}  // namespace ced
