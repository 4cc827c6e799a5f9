#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ranrc {

class Rng;

struct GraphError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Fixed directed graph on nodes 0..n-1. An edge (i, j) means j receives
/// broadcasts from i. Immutable after construction, safe to share across
/// concurrent runs.
class DirectedGraph {
 public:
  /// Throws GraphError on out-of-range endpoints, self-loops or duplicate
  /// edges (distinct messages for each).
  static DirectedGraph from_edge_list(int n,
                                      const std::vector<std::pair<int, int>>& edges);

  int size() const { return n_; }
  int edge_count() const { return n_edges_; }

  const std::vector<int>& out_neighbors(int i) const { return out_[i]; }
  const std::vector<int>& in_neighbors(int i) const { return in_[i]; }
  int out_degree(int i) const { return static_cast<int>(out_[i].size()); }
  int in_degree(int i) const { return static_cast<int>(in_[i].size()); }
  bool has_edge(int i, int j) const;

  /// All edges (i, j), sorted lexicographically.
  std::vector<std::pair<int, int>> edges() const;

 private:
  int n_ = 0;
  int n_edges_ = 0;
  std::vector<std::vector<int>> out_;  // sorted ascending
  std::vector<std::vector<int>> in_;   // sorted ascending
};

bool is_strongly_connected(const DirectedGraph& g);

/// n points uniform in the unit square; every pair within `radius` gets both
/// directed edges. Deterministic given the rng state. May be disconnected;
/// callers loop over seeds (see connected_geometric_digraph).
DirectedGraph random_geometric_digraph(int n, double radius, Rng& rng);

/// Rejection-sampled geometric graph: regenerates with seed, seed+1, ...
/// until strongly connected.
DirectedGraph connected_geometric_digraph(int n, double radius, std::uint64_t seed,
                                          int max_attempts = 1000);

DirectedGraph ring_digraph(int n);      // directed cycle 0->1->...->0
DirectedGraph complete_digraph(int n);  // all ordered pairs

/// Edge-list text format: header line "n=<N>", then one "i j" pair per line.
void save_edge_list(const DirectedGraph& g, const std::string& path);
DirectedGraph load_edge_list(const std::string& path);

}  // namespace ranrc
