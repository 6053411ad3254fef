#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace sab {

/// Directed edge (from, to): node `to` receives information from `from`.
struct Edge {
  int from;
  int to;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Directed communication graph on nodes 0..n-1 without self-loops.
/// Immutable once constructed; edges are kept sorted lexicographically.
class DirectedGraph {
 public:
  /// Throws InvalidArgument on out-of-range nodes, self-loops, duplicates
  /// or n < 1.
  DirectedGraph(int n, std::vector<Edge> edges);

  int size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  /// Nodes j with an edge (j, i).
  const std::vector<int>& in_neighbors(int i) const { return in_[i]; }
  /// Nodes j with an edge (i, j).
  const std::vector<int>& out_neighbors(int i) const { return out_[i]; }
  bool has_edge(int from, int to) const;

  DirectedGraph transpose() const;

  /// Edge-list text: "n" on the first line, then one "j i" per edge.
  void write_edge_list(std::ostream& os) const;
  static DirectedGraph read_edge_list(std::istream& is);

  friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> in_;
  std::vector<std::vector<int>> out_;
};

DirectedGraph empty_graph(int n);
DirectedGraph ring_graph(int n);
DirectedGraph complete_graph(int n);

/// Directed ring i -> i+1 (mod n) plus every ordered pair of ring-nonadjacent
/// nodes, visited in lexicographic order, each added with probability p.
/// One uniform variate is drawn per candidate pair from the seeded stream.
DirectedGraph ring_plus_random(int n, double p, std::uint64_t seed);

/// Nodes from which every other node is reachable along edge direction.
std::vector<int> root_set(const DirectedGraph& g);

bool strongly_connected(const DirectedGraph& g);

/// True iff some node is a spanning-tree root of both the pull graph and the
/// transpose of the push graph.
bool shares_spanning_root(const DirectedGraph& pull, const DirectedGraph& push);

}  // namespace sab
