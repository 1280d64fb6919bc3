#include "scorematch/graph.hpp"

#include <stdexcept>

namespace scorematch {

void Graph::add_edge(int j, int k) {
  if (j == k) throw std::invalid_argument("Graph: self-loops are not allowed");
  if (j < 0 || k < 0 || j >= m || k >= m) throw std::invalid_argument("Graph: node out of range");
  if (j > k) std::swap(j, k);
  edges.insert({j, k});
}

bool Graph::has_edge(int j, int k) const {
  if (j > k) std::swap(j, k);
  return edges.count({j, k}) > 0;
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(m, 0);
  for (const auto& [j, k] : edges) {
    ++deg[j];
    ++deg[k];
  }
  return deg;
}

std::map<int, int> degree_distribution(const Graph& graph) {
  std::map<int, int> hist;
  for (int d : graph.degrees()) ++hist[d];
  return hist;
}

}  // namespace scorematch
