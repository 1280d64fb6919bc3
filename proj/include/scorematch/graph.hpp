#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

namespace scorematch {

// Undirected graph on nodes 0..m-1; edges stored as ordered pairs j < k.
struct Graph {
  int m = 0;
  std::set<std::pair<int, int>> edges;

  void add_edge(int j, int k);
  bool has_edge(int j, int k) const;
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_nonedges() const { return m * (m - 1) / 2 - num_edges(); }
  std::vector<int> degrees() const;
};

// Exact counts of nodes per degree.
std::map<int, int> degree_distribution(const Graph& graph);

}  // namespace scorematch
