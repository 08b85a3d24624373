#include "ced/sim.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "ced/oracle.hpp"
#include "ced/rng.hpp"

namespace ced {

namespace {

constexpr std::uint16_t kUnset = 0xffff;

// Don't-care connective tissue inside routines; must stay irrelevant to all
// three rules, so no work / wash / restroom / eat / brush / touch here.
constexpr DurationRange kGap{0, 2};

struct Thresholds {
  std::uint32_t wash_needed;   // consecutive wash windows for a valid wash
  std::uint32_t brush_needed;  // brush windows for a compliant session
};

struct ActivityIds {
  ActivityId walk, sit, stand, work, use_restroom, wash_hands, eat, brush_teeth, touch_object,
      idle;

  explicit ActivityIds(const Vocabulary& vocab)
      : walk(vocab.require("walk")),
        sit(vocab.require("sit")),
        stand(vocab.require("stand")),
        work(vocab.require("work")),
        use_restroom(vocab.require("use_restroom")),
        wash_hands(vocab.require("wash_hands")),
        eat(vocab.require("eat")),
        brush_teeth(vocab.require("brush_teeth")),
        touch_object(vocab.require("touch_object")),
        idle(vocab.require("idle")) {}
};

std::uint32_t sample(Xoshiro256pp& rng, DurationRange range) {
  return rng.uniform(range.lo, range.hi);
}

void append_run(std::vector<ActivityId>& body, ActivityId activity, std::uint32_t len) {
  body.insert(body.end(), len, activity);
}

void append_gap(std::vector<ActivityId>& body, Xoshiro256pp& rng, const ActivityIds& ids,
                DurationRange range = kGap) {
  const std::array<ActivityId, 4> neutral{ids.walk, ids.sit, ids.stand, ids.idle};
  const std::uint32_t len = sample(rng, range);
  for (std::uint32_t i = 0; i < len; ++i)
    body.push_back(neutral[rng.below(neutral.size())]);
}

// Restroom visit, optional wash, then back to work.
std::vector<ActivityId> restroom_body(Xoshiro256pp& rng, const SimConfig& cfg,
                                      const ActivityIds& ids, const Thresholds& th,
                                      bool violating) {
  std::vector<ActivityId> body;
  append_run(body, ids.use_restroom, sample(rng, cfg.restroom_run));
  append_gap(body, rng, ids);
  if (violating) {
    // Either skip washing or wash too briefly.
    if (th.wash_needed >= 2 && rng.below(2) == 1) {
      append_run(body, ids.wash_hands, rng.uniform(1, th.wash_needed - 1));
      append_gap(body, rng, ids);
    }
  } else {
    const std::uint32_t lo = std::max(th.wash_needed, cfg.wash_run.lo);
    append_run(body, ids.wash_hands, rng.uniform(lo, std::max(lo, cfg.wash_run.hi)));
    append_gap(body, rng, ids);
  }
  append_run(body, ids.work, sample(rng, cfg.work_run));
  return body;
}

// Optional wash, optional spoiler, then a meal.
std::vector<ActivityId> meal_body(Xoshiro256pp& rng, const SimConfig& cfg,
                                  const ActivityIds& ids, const Thresholds& th, bool violating,
                                  std::uint32_t deadline) {
  std::vector<ActivityId> body;
  if (violating) {
    switch (rng.below(4)) {
      case 0:  // no wash at all
        break;
      case 1:  // too short a wash
        if (th.wash_needed >= 2) {
          append_run(body, ids.wash_hands, rng.uniform(1, th.wash_needed - 1));
          append_gap(body, rng, ids);
        }
        break;
      case 2: {  // proper wash, then touched something
        const std::uint32_t lo = std::max(th.wash_needed, cfg.wash_run.lo);
        append_run(body, ids.wash_hands, rng.uniform(lo, std::max(lo, cfg.wash_run.hi)));
        append_gap(body, rng, ids, {0, 1});
        append_run(body, ids.touch_object, rng.uniform(1, 2));
        append_gap(body, rng, ids, {0, 1});
        break;
      }
      default: {  // proper wash that expires before the meal
        append_run(body, ids.wash_hands, th.wash_needed);
        append_gap(body, rng, ids, {deadline + 1, deadline + 3});
        break;
      }
    }
  } else {
    const std::uint32_t lo = std::max(th.wash_needed, cfg.wash_run.lo);
    append_run(body, ids.wash_hands, rng.uniform(lo, std::max(lo, cfg.wash_run.hi)));
    append_gap(body, rng, ids);
  }
  append_run(body, ids.eat, sample(rng, cfg.eat_run));
  return body;
}

// Brushing run, possibly split by a short in-session pause.
std::vector<ActivityId> brush_body(Xoshiro256pp& rng, const SimConfig& cfg,
                                   const ActivityIds& ids, const Thresholds& th, bool violating,
                                   std::uint32_t max_gap) {
  std::uint32_t total;
  if (violating) {
    const std::uint32_t hi = std::min(cfg.brush_run.hi, th.brush_needed - 1);
    total = rng.uniform(std::min(cfg.brush_run.lo, hi), hi);
  } else {
    const std::uint32_t lo = std::max(cfg.brush_run.lo, th.brush_needed);
    total = rng.uniform(lo, std::max(lo, cfg.brush_run.hi));
  }
  std::vector<ActivityId> body;
  if (total >= 4 && max_gap >= 1 && rng.below(2) == 1) {
    const std::uint32_t head = rng.uniform(2, total - 2);
    append_run(body, ids.brush_teeth, head);
    append_gap(body, rng, ids, {1, max_gap});
    append_run(body, ids.brush_teeth, total - head);
  } else {
    append_run(body, ids.brush_teeth, total);
  }
  return body;
}

void check_config(const SimConfig& cfg, const Thresholds& th) {
  const auto bad = [](const std::string& what) { fail("InfeasibleConfig", what); };
  if (cfg.span_windows == 0) bad("span_windows must be positive");
  if (cfg.violation_prob < 0.0 || cfg.violation_prob > 1.0)
    bad("violation_prob must be in [0, 1]");
  for (double rate : {cfg.restroom_rate, cfg.meal_rate, cfg.brush_rate})
    if (rate < 0.0) bad("routine rates must be nonnegative");
  for (const DurationRange& r : {cfg.restroom_run, cfg.wash_run, cfg.eat_run, cfg.brush_run,
                                 cfg.work_run, cfg.background_run}) {
    if (r.lo < 1 || r.hi < r.lo) bad("duration ranges must satisfy 1 <= lo <= hi");
  }
  double weight_sum = 0.0;
  for (double w : {cfg.background_walk, cfg.background_sit, cfg.background_stand,
                   cfg.background_work, cfg.background_idle, cfg.background_touch_object}) {
    if (w < 0.0) bad("background weights must be nonnegative");
    weight_sum += w;
  }
  if (!(weight_sum > 0.0)) bad("background weights must have a positive sum");

  // Shortest possible body per enabled routine must fit the span.
  if (cfg.restroom_rate > 0.0 && cfg.restroom_run.lo + cfg.work_run.lo > cfg.span_windows)
    bad("a restroom routine cannot fit the span");
  if (cfg.meal_rate > 0.0 && cfg.eat_run.lo > cfg.span_windows)
    bad("a meal routine cannot fit the span");
  if (cfg.brush_rate > 0.0 && std::min(cfg.brush_run.lo, th.brush_needed - 1) > cfg.span_windows)
    bad("a brush routine cannot fit the span");
}

}  // namespace

Trace generate_one(const SimConfig& cfg, std::uint64_t trace_seed, std::string id,
                   WindowSpec window) {
  const Vocabulary& vocab = Vocabulary::default_vocabulary();
  const ActivityIds ids(vocab);
  const Thresholds th{windows_for(20, window), windows_for(120, window)};
  const std::uint32_t deadline = windows_for(120, window);
  const std::uint32_t max_gap = windows_for(10, window);
  const std::uint32_t span = cfg.span_windows;

  Xoshiro256pp rng(trace_seed);

  // Routine start proposals: per-window Bernoulli thinning, fixed kind order.
  enum Kind : std::uint8_t { Restroom, Meal, Brush };
  std::vector<std::pair<std::uint32_t, Kind>> proposals;
  const std::array<double, 3> rates{cfg.restroom_rate, cfg.meal_rate, cfg.brush_rate};
  for (std::uint32_t t = 0; t < span; ++t) {
    for (int kind = 0; kind < 3; ++kind) {
      if (rates[kind] > 0.0 && rng.bernoulli(rates[kind] / 60.0))
        proposals.emplace_back(t, static_cast<Kind>(kind));
    }
  }

  // Overlaps queue: a routine starts no earlier than the previous one ends.
  std::vector<std::uint16_t> slots(span, kUnset);
  std::uint32_t cursor = 0;
  for (const auto& [t, kind] : proposals) {
    const std::uint32_t start = std::max(t, cursor);
    if (start >= span) break;
    const bool violating = rng.bernoulli(cfg.violation_prob);
    std::vector<ActivityId> body;
    switch (kind) {
      case Restroom: body = restroom_body(rng, cfg, ids, th, violating); break;
      case Meal: body = meal_body(rng, cfg, ids, th, violating, deadline); break;
      case Brush: body = brush_body(rng, cfg, ids, th, violating, max_gap); break;
    }
    for (std::uint32_t i = 0; i < body.size() && start + i < span; ++i)
      slots[start + i] = body[i];
    cursor = start + static_cast<std::uint32_t>(body.size());
  }

  // Background fill for everything the routines did not claim.
  const std::array<ActivityId, 6> background{ids.walk, ids.sit,  ids.stand,
                                             ids.work, ids.idle, ids.touch_object};
  const std::array<double, 6> weights{cfg.background_walk, cfg.background_sit,
                                      cfg.background_stand, cfg.background_work,
                                      cfg.background_idle, cfg.background_touch_object};
  for (std::uint32_t t = 0; t < span;) {
    if (slots[t] != kUnset) {
      ++t;
      continue;
    }
    const ActivityId activity = background[rng.weighted(weights)];
    std::uint32_t len = sample(rng, cfg.background_run);
    for (; len > 0 && t < span && slots[t] == kUnset; --len, ++t) slots[t] = activity;
  }

  Trace trace;
  trace.id = std::move(id);
  trace.window = window;
  trace.activities.assign(slots.begin(), slots.end());
  trace.labels = oracle_all(trace.activities, vocab, window);
  trace.seed = trace_seed;
  return trace;
}

std::vector<Trace> generate(const SimConfig& cfg, std::size_t n, WindowSpec window) {
  const Thresholds th{windows_for(20, window), windows_for(120, window)};
  check_config(cfg, th);
  std::vector<Trace> traces;
  traces.reserve(n);
  char id[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(id, sizeof id, "t-%06zu", i);
    traces.push_back(generate_one(cfg, substream(cfg.seed, i), id, window));
  }
  return traces;
}

Trace corrupt(const Trace& t, const NoiseModel& noise, std::uint64_t seed,
              const Vocabulary& vocab) {
  if (!(noise.p_correct > 0.0) || noise.p_correct > 1.0)
    fail("InfeasibleConfig", "p_correct must be in (0, 1]");
  const std::size_t k = vocab.size();
  const double off = (1.0 - noise.p_correct) / static_cast<double>(k - 1);

  Trace out = t;
  out.soft.resize(t.activities.size());
  Xoshiro256pp rng(seed);
  for (std::size_t w = 0; w < t.activities.size(); ++w) {
    const ActivityId truth = t.activities[w];
    out.soft[w].assign(k, off);
    out.soft[w][truth] = noise.p_correct;
    if (!rng.bernoulli(noise.p_correct)) {
      const std::uint64_t other = rng.below(k - 1);
      out.activities[w] = static_cast<ActivityId>(other >= truth ? other + 1 : other);
    }
  }
  return out;
}

SimConfig fit_span(SimConfig cfg, std::uint32_t span_windows, WindowSpec window) {
  const Thresholds th{windows_for(20, window), windows_for(120, window)};
  cfg.span_windows = span_windows;
  if (cfg.restroom_run.lo + cfg.work_run.lo > span_windows) cfg.restroom_rate = 0.0;
  if (cfg.eat_run.lo > span_windows) cfg.meal_rate = 0.0;
  if (std::min(cfg.brush_run.lo, th.brush_needed - 1) > span_windows) cfg.brush_rate = 0.0;
  return cfg;
}

Dataset dataset(const SimConfig& cfg, SplitSizes sizes, std::uint64_t base_seed,
                WindowSpec window) {
  const Thresholds th{windows_for(20, window), windows_for(120, window)};
  check_config(cfg, th);
  Dataset out;
  const std::array<std::pair<const char*, std::vector<Trace>*>, 3> splits{
      std::pair{"train", &out.train}, std::pair{"val", &out.val}, std::pair{"test", &out.test}};
  const std::array<std::size_t, 3> counts{sizes.train, sizes.val, sizes.test};
  char id[48];
  for (std::size_t s = 0; s < splits.size(); ++s) {
    const std::uint64_t split_seed = substream(base_seed, s + 1);
    splits[s].second->reserve(counts[s]);
    for (std::size_t i = 0; i < counts[s]; ++i) {
      std::snprintf(id, sizeof id, "%s-%06zu", splits[s].first, i);
      splits[s].second->push_back(generate_one(cfg, substream(split_seed, i), id, window));
    }
  }
  return out;
}

}  // namespace ced
