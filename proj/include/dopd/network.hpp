#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dopd/geometry.hpp"

namespace dopd {

// Directed communication graph of one round. Edge (j,i) means i receives from
// j. No self-loops stored; the generators emit symmetric edge sets.
struct RoundGraph {
  int n = 0;
  // adjacency[i] = sorted in-neighbors j of i (j != i)
  std::vector<std::vector<int>> in_neighbors;

  bool has_edge(int from, int to) const;
  std::size_t edge_count() const;  // directed count
  bool symmetric() const;
};

// Doubly stochastic consensus weights.
struct MixingMatrix {
  Matrix W;
};

// Symmetric Erdos-Renyi edges with probability p_edge, plus a deterministic
// path inside the ((t-1) mod 4)-th quarter of agents. Quarters are consecutive
// index blocks with sizes as equal as possible; cross-quarter connectivity
// relies on the random edges, so callers must verify window connectivity.
RoundGraph gen_round_graph(int t, int n, std::mt19937_64& rng, double p_edge);

RoundGraph ring_graph(int n);
RoundGraph complete_graph(int n);

// W_ij = 1/n on edges, diagonal complement. Doubly stochastic only for
// symmetric graphs; asymmetric input is a contract violation.
MixingMatrix mixing_from_graph(const RoundGraph& g);

// True iff the union edge set over the window is strongly connected.
bool check_b_connectivity(std::span<const RoundGraph> window);

// Per-round graph supplier with deterministic output per (seed, t).
class GraphSource {
 public:
  enum class Kind { paper4quarters, ring, complete };

  GraphSource(Kind kind, int n, double p_edge, std::uint64_t seed);
  RoundGraph round(int t) const;
  int n() const { return n_; }
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
  int n_;
  double p_edge_;
  std::uint64_t seed_;
};

}  // namespace dopd
