#include "dopd/rng.hpp"

namespace dopd {
namespace {

// splitmix64 finalizer; mixes each word into the running state.
std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h += 0x9e3779b97f4a7c15ull + v;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
  return h ^ (h >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, Stream concern, std::uint64_t agent,
                          std::uint64_t round) {
  std::uint64_t h = mix(0x6a09e667f3bcc908ull, master);
  h = mix(h, static_cast<std::uint64_t>(concern));
  h = mix(h, agent);
  h = mix(h, round);
  return h;
}

std::mt19937_64 make_engine(std::uint64_t master, Stream concern, std::uint64_t agent,
                            std::uint64_t round) {
  return std::mt19937_64(derive_seed(master, concern, agent, round));
}

}  // namespace dopd
