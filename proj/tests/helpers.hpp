#pragma once
// Shared test helpers.

#include <sstream>
#include <string>
#include <vector>

#include "ced/core.hpp"
#include "ced/rng.hpp"

namespace ced::test {

// "use_restroom wash_hands*3 work" -> activity ids; token or token*N.
inline std::vector<ActivityId> acts(const std::string& spec) {
  const Vocabulary& vocab = Vocabulary::default_vocabulary();
  std::vector<ActivityId> out;
  std::istringstream in(spec);
  std::string token;
  while (in >> token) {
    std::size_t repeat = 1;
    if (const auto star = token.find('*'); star != std::string::npos) {
      repeat = std::stoul(token.substr(star + 1));
      token.erase(star);
    }
    const ActivityId id = vocab.require(token);
    out.insert(out.end(), repeat, id);
  }
  return out;
}

// Uniformly random activity sequence over the default vocabulary.
inline std::vector<ActivityId> random_acts(Xoshiro256pp& rng, std::size_t n) {
  const std::size_t k = Vocabulary::default_vocabulary().size();
  std::vector<ActivityId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(static_cast<ActivityId>(rng.below(k)));
  return out;
}

}  // namespace ced::test
