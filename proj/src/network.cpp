#include "dopd/network.hpp"

#include <algorithm>
#include <stdexcept>

#include "dopd/rng.hpp"

namespace dopd {

bool RoundGraph::has_edge(int from, int to) const {
  const auto& in = in_neighbors[to];
  return std::binary_search(in.begin(), in.end(), from);
}

std::size_t RoundGraph::edge_count() const {
  std::size_t c = 0;
  for (const auto& in : in_neighbors) c += in.size();
  return c;
}

bool RoundGraph::symmetric() const {
  for (int i = 0; i < n; ++i)
    for (int j : in_neighbors[i])
      if (!has_edge(i, j)) return false;
  return true;
}

namespace {

void add_undirected(RoundGraph& g, int a, int b) {
  auto insert_sorted = [](std::vector<int>& v, int x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
  };
  insert_sorted(g.in_neighbors[a], b);
  insert_sorted(g.in_neighbors[b], a);
}

// Quarter q of {0..n-1}: consecutive blocks, sizes as equal as possible
// (the first n mod 4 blocks get the extra element).
std::pair<int, int> quarter_range(int n, int q) {
  const int base = n / 4, extra = n % 4;
  int start = q * base + std::min(q, extra);
  int len = base + (q < extra ? 1 : 0);
  return {start, start + len};
}

}  // namespace

RoundGraph gen_round_graph(int t, int n, std::mt19937_64& rng, double p_edge) {
  if (n < 2) throw std::invalid_argument("graph generator needs n >= 2");
  if (t < 1) throw std::invalid_argument("round index must be >= 1");
  if (p_edge < 0.0 || p_edge > 1.0) throw std::invalid_argument("p_edge must be in [0,1]");
  RoundGraph g;
  g.n = n;
  g.in_neighbors.resize(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (unif(rng) < p_edge) add_undirected(g, i, j);
  const auto [lo, hi] = quarter_range(n, (t - 1) % 4);
  for (int i = lo; i + 1 < hi; ++i) add_undirected(g, i, i + 1);
  return g;
}

RoundGraph ring_graph(int n) {
  if (n < 1) throw std::invalid_argument("ring needs n >= 1");
  RoundGraph g;
  g.n = n;
  g.in_neighbors.resize(n);
  if (n >= 2)
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      if (!g.has_edge(i, j)) add_undirected(g, i, j);
    }
  return g;
}

RoundGraph complete_graph(int n) {
  if (n < 1) throw std::invalid_argument("complete graph needs n >= 1");
  RoundGraph g;
  g.n = n;
  g.in_neighbors.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) add_undirected(g, i, j);
  return g;
}

MixingMatrix mixing_from_graph(const RoundGraph& g) {
  if (!g.symmetric())
    throw std::invalid_argument(
        "mixing_from_graph: asymmetric edge set; the 1/n rule is doubly stochastic "
        "only for symmetric graphs");
  const int n = g.n;
  MixingMatrix m;
  m.W = Matrix::Zero(n, n);
  const double w = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(g.in_neighbors[i].size()) >= n)
      throw std::invalid_argument("mixing_from_graph: degree must be < n");
    for (int j : g.in_neighbors[i]) m.W(i, j) = w;
    m.W(i, i) = 1.0 - w * static_cast<double>(g.in_neighbors[i].size());
  }
  return m;
}

bool check_b_connectivity(std::span<const RoundGraph> window) {
  if (window.empty()) throw std::invalid_argument("connectivity check needs >= 1 graph");
  const int n = window.front().n;
  for (const auto& g : window)
    if (g.n != n) throw std::invalid_argument("connectivity check: mismatched agent counts");
  if (n == 1) return true;

  // union adjacency, forward and reverse
  std::vector<std::vector<int>> fwd(n), rev(n);
  for (const auto& g : window)
    for (int i = 0; i < n; ++i)
      for (int j : g.in_neighbors[i]) {
        fwd[j].push_back(i);  // j -> i
        rev[i].push_back(j);
      }

  auto reaches_all = [n](const std::vector<std::vector<int>>& adj) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
    }
    return count == n;
  };
  return reaches_all(fwd) && reaches_all(rev);
}

GraphSource::GraphSource(Kind kind, int n, double p_edge, std::uint64_t seed)
    : kind_(kind), n_(n), p_edge_(p_edge), seed_(seed) {
  if (n < 1) throw std::invalid_argument("graph source needs n >= 1");
  if (kind == Kind::paper4quarters && n < 2)
    throw std::invalid_argument("quartered graph generator needs n >= 2");
}

RoundGraph GraphSource::round(int t) const {
  switch (kind_) {
    case Kind::paper4quarters: {
      auto rng = make_engine(seed_, Stream::graph, 0, static_cast<std::uint64_t>(t));
      return gen_round_graph(t, n_, rng, p_edge_);
    }
    case Kind::ring:
      return ring_graph(n_);
    case Kind::complete:
      return complete_graph(n_);
  }
  throw std::logic_error("unreachable graph kind");
}

}  // namespace dopd
