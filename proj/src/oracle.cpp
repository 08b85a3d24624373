#include "ced/oracle.hpp"

namespace ced {

namespace {

struct Ids {
  ActivityId work, use_restroom, wash_hands, eat, brush_teeth, touch_object;

  explicit Ids(const Vocabulary& vocab)
      : work(vocab.require("work")),
        use_restroom(vocab.require("use_restroom")),
        wash_hands(vocab.require("wash_hands")),
        eat(vocab.require("eat")),
        brush_teeth(vocab.require("brush_teeth")),
        touch_object(vocab.require("touch_object")) {}
};

// Longest run of consecutive wash_hands windows strictly inside (lo, hi).
std::size_t max_wash_run_inside(std::span<const ActivityId> acts, std::size_t lo, std::size_t hi,
                                ActivityId wash) {
  std::size_t best = 0, run = 0;
  for (std::size_t t = lo + 1; t < hi; ++t) {
    run = (acts[t] == wash) ? run + 1 : 0;
    if (run > best) best = run;
  }
  return best;
}

}  // namespace

LabelSeq oracle_e1(std::span<const ActivityId> acts, const Vocabulary& vocab, WindowSpec window) {
  const Ids ids(vocab);
  const std::size_t wash_needed = windows_for(20, window);
  LabelSeq out(acts.size(), 0);
  for (std::size_t w = 0; w < acts.size(); ++w) {
    if (acts[w] != ids.work) continue;
    // Backward search: any restroom visit with no intervening work and no
    // sufficient wash run makes this work window a violation.
    for (std::size_t r = w; r-- > 0;) {
      if (acts[r] == ids.work) break;
      if (acts[r] != ids.use_restroom) continue;
      if (max_wash_run_inside(acts, r, w, ids.wash_hands) < wash_needed) {
        out[w] |= kEventE1;
        break;
      }
    }
  }
  return out;
}

LabelSeq oracle_e2(std::span<const ActivityId> acts, const Vocabulary& vocab, WindowSpec window) {
  const Ids ids(vocab);
  const std::size_t wash_needed = windows_for(20, window);
  const std::size_t deadline = windows_for(120, window);
  const auto contaminating = [&](ActivityId a) {
    return a == ids.touch_object || a == ids.use_restroom || a == ids.work;
  };
  LabelSeq out(acts.size(), 0);
  for (std::size_t m = 0; m < acts.size(); ++m) {
    if (acts[m] != ids.eat) continue;
    if (m > 0 && acts[m - 1] == ids.eat) continue;  // not the start of the eat run

    // Look for a qualifying wash: a maximal run of >= wash_needed windows
    // ending at q, recent enough, with nothing contaminating and no meal
    // consuming it in between.
    bool clean = false;
    const std::size_t lookback = m > deadline ? m - deadline : 0;
    for (std::size_t q = m; q-- > lookback;) {
      if (acts[q] != ids.wash_hands) continue;
      if (q + 1 < acts.size() && acts[q + 1] == ids.wash_hands) continue;  // not a run end
      std::size_t len = 0;
      for (std::size_t t = q + 1; t-- > 0 && acts[t] == ids.wash_hands;) ++len;
      if (len < wash_needed) continue;
      bool spoiled = false;
      for (std::size_t t = q + 1; t < m; ++t) {
        if (contaminating(acts[t]) || acts[t] == ids.eat) {
          spoiled = true;
          break;
        }
      }
      if (!spoiled) {
        clean = true;
        break;
      }
    }
    if (!clean) out[m] |= kEventE2;
  }
  return out;
}

LabelSeq oracle_e3(std::span<const ActivityId> acts, const Vocabulary& vocab, WindowSpec window) {
  const Ids ids(vocab);
  const std::size_t brush_needed = windows_for(120, window);
  const std::size_t max_gap = windows_for(10, window);
  LabelSeq out(acts.size(), 0);
  std::size_t t = 0;
  while (t < acts.size()) {
    if (acts[t] != ids.brush_teeth) {
      ++t;
      continue;
    }
    // Session: brush runs merged across gaps of at most max_gap windows.
    std::size_t brushed = 0, gap = 0;
    std::size_t close = acts.size() - 1;  // trace end closes an open session
    for (; t < acts.size(); ++t) {
      if (acts[t] == ids.brush_teeth) {
        ++brushed;
        gap = 0;
      } else if (++gap > max_gap) {
        close = t;
        break;
      }
    }
    if (brushed < brush_needed) out[close] |= kEventE3;
    if (t < acts.size()) ++t;  // step past the closing window
  }
  return out;
}

LabelSeq oracle_all(std::span<const ActivityId> acts, const Vocabulary& vocab, WindowSpec window) {
  LabelSeq out = oracle_e1(acts, vocab, window);
  const LabelSeq e2 = oracle_e2(acts, vocab, window);
  const LabelSeq e3 = oracle_e3(acts, vocab, window);
  for (std::size_t t = 0; t < out.size(); ++t) out[t] |= e2[t] | e3[t];
  return out;
}

}  // namespace ced
