#include "sab/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include "sab/errors.hpp"
#include "sab/rng.hpp"

namespace sab {

DirectedGraph::DirectedGraph(int n, std::vector<Edge> edges)
    : n_(n), edges_(std::move(edges)), in_(n > 0 ? n : 0), out_(n > 0 ? n : 0) {
  if (n < 1) throw InvalidArgument("graph: node count must be >= 1");
  std::sort(edges_.begin(), edges_.end());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto [from, to] = edges_[e];
    if (from < 0 || from >= n || to < 0 || to >= n)
      throw InvalidArgument("graph: edge (" + std::to_string(from) + "," +
                            std::to_string(to) + ") out of range");
    if (from == to)
      throw InvalidArgument("graph: self-loop at node " + std::to_string(from));
    if (e > 0 && edges_[e - 1] == edges_[e])
      throw InvalidArgument("graph: duplicate edge (" + std::to_string(from) +
                            "," + std::to_string(to) + ")");
    out_[from].push_back(to);
    in_[to].push_back(from);
  }
  for (auto& list : in_) std::sort(list.begin(), list.end());
}

bool DirectedGraph::has_edge(int from, int to) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
}

DirectedGraph DirectedGraph::transpose() const {
  std::vector<Edge> flipped;
  flipped.reserve(edges_.size());
  for (const auto& e : edges_) flipped.push_back({e.to, e.from});
  return DirectedGraph(n_, std::move(flipped));
}

void DirectedGraph::write_edge_list(std::ostream& os) const {
  os << n_ << '\n';
  for (const auto& e : edges_) os << e.from << ' ' << e.to << '\n';
}

DirectedGraph DirectedGraph::read_edge_list(std::istream& is) {
  int n = 0;
  if (!(is >> n)) throw InvalidArgument("edge list: missing node count");
  std::vector<Edge> edges;
  int from = 0, to = 0;
  while (is >> from >> to) edges.push_back({from, to});
  if (!is.eof()) throw InvalidArgument("edge list: malformed edge line");
  return DirectedGraph(n, std::move(edges));
}

DirectedGraph empty_graph(int n) { return DirectedGraph(n, {}); }

DirectedGraph ring_graph(int n) {
  if (n < 2) return DirectedGraph(n, {});
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    edges.push_back({i, (i + 1) % n});
  }
  return DirectedGraph(n, std::move(edges));
}

DirectedGraph complete_graph(int n) {
  std::vector<Edge> edges;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (i != j) edges.push_back({j, i});
  return DirectedGraph(n, std::move(edges));
}

DirectedGraph ring_plus_random(int n, double p, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("ring_plus_random: n must be >= 2");
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidArgument("ring_plus_random: p must lie in [0, 1]");
  RandomStream rng(seed, stream_id(0, 0, StreamPurpose::Graph, 0));
  auto ring_adjacent = [n](int a, int b) {
    return (a + 1) % n == b || (b + 1) % n == a;
  };
  std::vector<Edge> edges = ring_graph(n).edges();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i == j || ring_adjacent(j, i)) continue;
      if (rng.uniform() < p) edges.push_back({j, i});
    }
  }
  return DirectedGraph(n, std::move(edges));
}

namespace {

std::vector<char> reachable_from(const DirectedGraph& g, int source) {
  std::vector<char> seen(g.size(), 0);
  std::vector<int> frontier{source};
  seen[source] = 1;
  while (!frontier.empty()) {
    const int node = frontier.back();
    frontier.pop_back();
    for (int next : g.out_neighbors(node)) {
      if (!seen[next]) {
        seen[next] = 1;
        frontier.push_back(next);
      }
    }
  }
  return seen;
}

}  // namespace

std::vector<int> root_set(const DirectedGraph& g) {
  std::vector<int> roots;
  for (int r = 0; r < g.size(); ++r) {
    const auto seen = reachable_from(g, r);
    if (std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; }))
      roots.push_back(r);
  }
  return roots;
}

bool strongly_connected(const DirectedGraph& g) {
  return static_cast<int>(root_set(g).size()) == g.size();
}

bool shares_spanning_root(const DirectedGraph& pull, const DirectedGraph& push) {
  if (pull.size() != push.size())
    throw DimensionError("shares_spanning_root: graphs differ in node count");
  const auto pull_roots = root_set(pull);
  const auto push_roots = root_set(push.transpose());
  std::vector<int> common;
  std::set_intersection(pull_roots.begin(), pull_roots.end(), push_roots.begin(),
                        push_roots.end(), std::back_inserter(common));
  return !common.empty();
}

}  // namespace sab
