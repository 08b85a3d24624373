#pragma once
// Offline reference labelers for the three built-in rules.
//
// These are whole-trace scans written independently of the streaming
// automata: agreement between the two is the repo's central correctness
// check, so nothing here may share structure with the engine.

#include "ced/core.hpp"

namespace ced {

// Bit positions match the order of builtin_rules(): e1, e2, e3.
inline constexpr LabelMask kEventE1 = 1u << 0;
inline constexpr LabelMask kEventE2 = 1u << 1;
inline constexpr LabelMask kEventE3 = 1u << 2;

// Returning to work after the restroom without a sufficient consecutive
// hand-wash in between. Labeled on the offending work window.
LabelSeq oracle_e1(std::span<const ActivityId> activities, const Vocabulary& vocab,
                   WindowSpec window = {});

// Eating without a valid recent hand-wash. Labeled on the first window of
// each eat run that starts unclean.
LabelSeq oracle_e2(std::span<const ActivityId> activities, const Vocabulary& vocab,
                   WindowSpec window = {});

// Tooth-brushing session that closes short of the required total. Labeled
// on the window that closes the session (gap exceeded or trace end).
LabelSeq oracle_e3(std::span<const ActivityId> activities, const Vocabulary& vocab,
                   WindowSpec window = {});

// Per-window union of the three labelers.
LabelSeq oracle_all(std::span<const ActivityId> activities, const Vocabulary& vocab,
                    WindowSpec window = {});

}  // namespace ced
