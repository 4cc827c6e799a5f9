#include "ranrc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "ranrc/rng.hpp"

namespace ranrc {

DirectedGraph DirectedGraph::from_edge_list(
    int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 1) throw GraphError("node count must be >= 1");
  DirectedGraph g;
  g.n_ = n;
  g.out_.resize(n);
  g.in_.resize(n);
  std::set<std::pair<int, int>> seen;
  for (const auto& [i, j] : edges) {
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw GraphError("edge endpoint out of range: (" + std::to_string(i) + ", " +
                       std::to_string(j) + ")");
    if (i == j) throw GraphError("self-loop at node " + std::to_string(i));
    if (!seen.insert({i, j}).second)
      throw GraphError("duplicate edge (" + std::to_string(i) + ", " +
                       std::to_string(j) + ")");
    g.out_[i].push_back(j);
    g.in_[j].push_back(i);
  }
  for (auto& v : g.out_) std::sort(v.begin(), v.end());
  for (auto& v : g.in_) std::sort(v.begin(), v.end());
  g.n_edges_ = static_cast<int>(edges.size());
  return g;
}

bool DirectedGraph::has_edge(int i, int j) const {
  const auto& v = out_[i];
  return std::binary_search(v.begin(), v.end(), j);
}

std::vector<std::pair<int, int>> DirectedGraph::edges() const {
  std::vector<std::pair<int, int>> e;
  e.reserve(n_edges_);
  for (int i = 0; i < n_; ++i)
    for (int j : out_[i]) e.emplace_back(i, j);
  return e;
}

namespace {

// Iterative DFS reach count from `start` following `adj`.
int reach_count(const DirectedGraph& g, int start, bool forward) {
  std::vector<char> seen(g.size(), 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    const auto& next = forward ? g.out_neighbors(u) : g.in_neighbors(u);
    for (int v : next) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count;
}

}  // namespace

bool is_strongly_connected(const DirectedGraph& g) {
  if (g.size() == 1) return true;
  // Strongly connected iff node 0 reaches everyone and everyone reaches 0.
  return reach_count(g, 0, true) == g.size() && reach_count(g, 0, false) == g.size();
}

DirectedGraph random_geometric_digraph(int n, double radius, Rng& rng) {
  if (!(radius > 0.0) || radius > std::sqrt(2.0) + 1e-12)
    throw GraphError("radius must be in (0, sqrt(2)]");
  std::vector<double> px(n), py(n);
  for (int i = 0; i < n; ++i) {
    px[i] = rng.uniform01();
    py[i] = rng.uniform01();
  }
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dx = px[i] - px[j], dy = py[i] - py[j];
      if (std::sqrt(dx * dx + dy * dy) <= radius) {
        edges.emplace_back(i, j);
        edges.emplace_back(j, i);
      }
    }
  }
  return DirectedGraph::from_edge_list(n, edges);
}

DirectedGraph connected_geometric_digraph(int n, double radius, std::uint64_t seed,
                                          int max_attempts) {
  for (int k = 0; k < max_attempts; ++k) {
    Rng rng(seed + static_cast<std::uint64_t>(k));
    DirectedGraph g = random_geometric_digraph(n, radius, rng);
    if (is_strongly_connected(g)) return g;
  }
  throw GraphError("no strongly connected geometric graph within " +
                   std::to_string(max_attempts) + " attempts");
}

DirectedGraph ring_digraph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  if (n == 1) edges.clear();
  return DirectedGraph::from_edge_list(n, edges);
}

DirectedGraph complete_digraph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) edges.emplace_back(i, j);
  return DirectedGraph::from_edge_list(n, edges);
}

void save_edge_list(const DirectedGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot open " + path + " for writing");
  out << "n=" << g.size() << "\n";
  for (const auto& [i, j] : g.edges()) out << i << " " << j << "\n";
}

DirectedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open " + path);
  std::string header;
  if (!std::getline(in, header) || header.rfind("n=", 0) != 0)
    throw GraphError("missing n=<N> header in " + path);
  const int n = std::stoi(header.substr(2));
  std::vector<std::pair<int, int>> edges;
  int i, j;
  while (in >> i >> j) edges.emplace_back(i, j);
  return DirectedGraph::from_edge_list(n, edges);
}

}  // namespace ranrc
