#pragma once

#include <cstdint>
#include <random>

namespace dopd {

// Concern tags for deriving independent random substreams from one master seed.
// Each (seed, concern, agent, round) tuple yields its own engine, so results do
// not depend on the order in which agents or rounds are processed.
enum class Stream : std::uint64_t {
  init = 1,       // initial decisions
  direction = 2,  // exploration directions u_{i,t}
  graph = 3,      // per-round communication graph
  problem = 4,    // per-round problem data
  bounds = 5,     // bound estimation sampling
  solver = 6,     // comparator solver tie-breaking / restarts
};

std::uint64_t derive_seed(std::uint64_t master, Stream concern, std::uint64_t agent,
                          std::uint64_t round);

std::mt19937_64 make_engine(std::uint64_t master, Stream concern, std::uint64_t agent,
                            std::uint64_t round);

}  // namespace dopd
