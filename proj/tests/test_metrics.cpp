#include <doctest.h>

#include <algorithm>

#include "ced/engine.hpp"
#include "ced/metrics.hpp"
#include "ced/sim.hpp"

using namespace ced;

namespace {

const std::vector<std::string> kEvents{"e1", "e2", "e3"};

LabeledSeq sample(std::string id, LabelSeq labels) { return {std::move(id), std::move(labels)}; }

LabelSeq empty_seq(std::size_t n) { return LabelSeq(n, 0); }

LabelSeq with_bit(std::size_t n, std::size_t window, LabelMask mask) {
  LabelSeq seq(n, 0);
  seq[window] = mask;
  return seq;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("length accuracy: engine outputs always match") {
  SimConfig cfg;
  cfg.seed = 1;
  const Engine engine{RuleSet::builtins()};
  std::vector<LabeledSeq> preds, truths;
  for (const Trace& trace : generate(cfg, 20)) {
    preds.push_back(sample(trace.id, engine.run_crisp(trace.activities).labels));
    truths.push_back(sample(trace.id, *trace.labels));
  }
  const auto pairs = pair_by_id(preds, truths);
  CHECK(length_accuracy(pairs) == 1.0);
}

TEST_CASE("length accuracy counts matched samples") {
  std::vector<LabeledSeq> preds{sample("a", empty_seq(60)), sample("b", empty_seq(59)),
                                sample("c", empty_seq(61)), sample("d", empty_seq(10))};
  std::vector<LabeledSeq> truths{sample("a", empty_seq(60)), sample("b", empty_seq(60)),
                                 sample("c", empty_seq(60)), sample("d", empty_seq(60))};
  CHECK(length_accuracy(pair_by_id(preds, truths)) == 0.25);
}

TEST_CASE("length accuracy: an empty prediction against a 60-window truth mismatches") {
  std::vector<LabeledSeq> preds{sample("a", empty_seq(0))};
  std::vector<LabeledSeq> truths{sample("a", empty_seq(60))};
  CHECK(length_accuracy(pair_by_id(preds, truths)) == 0.0);
}

TEST_CASE("conditional F1 is 1.0 where predictions equal truth") {
  std::vector<LabeledSeq> truths{sample("a", with_bit(60, 5, 1)),
                                 sample("b", with_bit(60, 9, 1u << 1))};
  std::vector<LabeledSeq> preds = truths;
  const auto block = conditional_f1(pair_by_id(preds, truths), 3);
  CHECK(*block.per_type[0] == 1.0);
  CHECK(*block.per_type[1] == 1.0);
  CHECK(!block.per_type[2].has_value());  // e3 never occurs: Undefined
  CHECK(*block.average == 1.0);
}

TEST_CASE("conditional F1 is 0 for all-empty predictions against events") {
  std::vector<LabeledSeq> truths{sample("a", with_bit(60, 5, 1)),
                                 sample("b", with_bit(60, 7, 1u << 2))};
  std::vector<LabeledSeq> preds{sample("a", empty_seq(60)), sample("b", empty_seq(60))};
  const auto block = conditional_f1(pair_by_id(preds, truths), 3);
  CHECK(*block.per_type[0] == 0.0);
  CHECK(!block.per_type[1].has_value());
  CHECK(*block.per_type[2] == 0.0);
  CHECK(*block.average == 0.0);
}

TEST_CASE("conditional F1 scores timing misses as zero") {
  // truth has e1 at window 5 only; prediction puts it at window 4
  std::vector<LabeledSeq> truths{sample("a", with_bit(60, 5, 1))};
  std::vector<LabeledSeq> preds{sample("a", with_bit(60, 4, 1))};
  const auto block = conditional_f1(pair_by_id(preds, truths), 3);
  CHECK(*block.per_type[0] == 0.0);
}

TEST_CASE("coarse F1 forgives the one-window timing miss") {
  std::vector<LabeledSeq> truths{sample("a", with_bit(60, 5, 1))};
  std::vector<LabeledSeq> preds{sample("a", with_bit(60, 4, 1))};
  const auto block = coarse_f1(pair_by_id(preds, truths), 3);
  CHECK(*block.per_type[0] == 1.0);
}

TEST_CASE("coarse F1 is 0 when events are never predicted") {
  std::vector<LabeledSeq> truths{sample("a", with_bit(60, 3, 1u << 1)),
                                 sample("b", empty_seq(60))};
  std::vector<LabeledSeq> preds{sample("a", empty_seq(60)), sample("b", empty_seq(60))};
  const auto block = coarse_f1(pair_by_id(preds, truths), 3);
  CHECK(*block.per_type[1] == 0.0);
}

TEST_CASE("coarse F1 is 1.0 for exact predictions") {
  std::vector<LabeledSeq> truths{sample("a", with_bit(60, 3, 1u | 1u << 2)),
                                 sample("b", with_bit(60, 8, 1u << 1))};
  std::vector<LabeledSeq> preds = truths;
  const auto block = coarse_f1(pair_by_id(preds, truths), 3);
  for (std::size_t e = 0; e < 3; ++e) CHECK(*block.per_type[e] == 1.0);
  CHECK(*block.average == 1.0);
}

TEST_CASE("evaluate: truncated predictions leave conditional but stay in coarse") {
  std::vector<LabeledSeq> truths{sample("a", with_bit(60, 5, 1)),
                                 sample("b", with_bit(60, 6, 1))};
  std::vector<LabeledSeq> preds{sample("a", with_bit(60, 5, 1)),
                                sample("b", with_bit(40, 6, 1))};  // truncated
  const auto report = evaluate(preds, truths, kEvents);
  CHECK(report.n_samples == 2);
  CHECK(report.n_length_matched == 1);
  CHECK(report.length_accuracy == 0.5);
  CHECK(*report.conditional.per_type[0] == 1.0);  // only sample "a" counts
  CHECK(*report.coarse.per_type[0] == 1.0);       // both count
}

TEST_CASE("evaluate: no length-matched samples reports conditional as undefined") {
  std::vector<LabeledSeq> truths{sample("a", with_bit(60, 5, 1))};
  std::vector<LabeledSeq> preds{sample("a", with_bit(59, 5, 1))};
  const auto report = evaluate(preds, truths, kEvents);
  for (const auto& value : report.conditional.per_type) CHECK(!value.has_value());
  CHECK(!report.conditional.average.has_value());
  CHECK(*report.coarse.per_type[0] == 1.0);
}

TEST_CASE("scores are invariant to sample order") {
  std::vector<LabeledSeq> truths, preds;
  for (int i = 0; i < 8; ++i) {
    const auto id = "s" + std::to_string(i);
    truths.push_back(sample(id, with_bit(30, static_cast<std::size_t>(i), 1u << (i % 3))));
    preds.push_back(sample(id, with_bit(30, static_cast<std::size_t>(i % 5), 1u << (i % 3))));
  }
  const auto before = evaluate(preds, truths, kEvents);
  std::reverse(preds.begin(), preds.end());
  const auto after = evaluate(preds, truths, kEvents);
  CHECK(before.length_accuracy == after.length_accuracy);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(before.conditional.per_type[e] == after.conditional.per_type[e]);
    CHECK(before.coarse.per_type[e] == after.coarse.per_type[e]);
  }
}

TEST_CASE("scores are invariant to a global window shift") {
  const auto shift = [](const LabelSeq& seq, std::size_t by) {
    LabelSeq out(seq.size() + by, 0);
    std::copy(seq.begin(), seq.end(), out.begin() + static_cast<std::ptrdiff_t>(by));
    return out;
  };
  std::vector<LabeledSeq> truths{sample("a", with_bit(30, 5, 1)),
                                 sample("b", with_bit(30, 9, 1u << 1))};
  std::vector<LabeledSeq> preds{sample("a", with_bit(30, 6, 1)),
                                sample("b", with_bit(30, 9, 1u << 1))};
  const auto base = evaluate(preds, truths, kEvents);
  std::vector<LabeledSeq> shifted_truths, shifted_preds;
  for (const auto& t : truths) shifted_truths.push_back(sample(t.id, shift(t.labels, 4)));
  for (const auto& p : preds) shifted_preds.push_back(sample(p.id, shift(p.labels, 4)));
  const auto shifted = evaluate(shifted_preds, shifted_truths, kEvents);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(base.conditional.per_type[e] == shifted.conditional.per_type[e]);
    CHECK(base.coarse.per_type[e] == shifted.coarse.per_type[e]);
  }
}

TEST_CASE("sample-averaged conditional F1") {
  // perfect sample scores 1, total miss scores 0, empty-truth samples and
  // length mismatches are excluded
  std::vector<LabeledSeq> truths{sample("hit", with_bit(30, 5, 1)),
                                 sample("miss", with_bit(30, 9, 1)),
                                 sample("quiet", empty_seq(30)),
                                 sample("short", with_bit(30, 2, 1))};
  std::vector<LabeledSeq> preds{sample("hit", with_bit(30, 5, 1)),
                                sample("miss", empty_seq(30)),
                                sample("quiet", empty_seq(30)),
                                sample("short", with_bit(20, 2, 1))};
  const auto pairs = pair_by_id(preds, truths);
  CHECK(*sample_averaged_conditional_f1(pairs, 3) == 0.5);

  // the one-window timing miss scores 0 here too
  std::vector<LabeledSeq> t2{sample("a", with_bit(60, 5, 1))};
  std::vector<LabeledSeq> p2{sample("a", with_bit(60, 4, 1))};
  CHECK(*sample_averaged_conditional_f1(pair_by_id(p2, t2), 3) == 0.0);

  // nothing qualifies -> undefined
  std::vector<LabeledSeq> t3{sample("a", empty_seq(10))};
  std::vector<LabeledSeq> p3{sample("a", empty_seq(10))};
  CHECK(!sample_averaged_conditional_f1(pair_by_id(p3, t3), 3).has_value());
}

TEST_CASE("pairing failures") {
  std::vector<LabeledSeq> truths{sample("a", empty_seq(5))};
  std::vector<LabeledSeq> wrong_id{sample("zz", empty_seq(5))};
  CHECK_THROWS_WITH_AS(pair_by_id(wrong_id, truths), doctest::Contains("UnpairedId"), Error);

  std::vector<LabeledSeq> none;
  CHECK_THROWS_AS(pair_by_id(none, truths), Error);
  CHECK_THROWS_AS(evaluate(none, truths, kEvents), Error);

  std::vector<LabeledSeq> dup{sample("a", empty_seq(5)), sample("a", empty_seq(5))};
  std::vector<LabeledSeq> two{sample("a", empty_seq(5)), sample("b", empty_seq(5))};
  CHECK_THROWS_AS(pair_by_id(dup, two), Error);
  CHECK_THROWS_AS(pair_by_id(two, dup), Error);
}

TEST_SUITE_END();
