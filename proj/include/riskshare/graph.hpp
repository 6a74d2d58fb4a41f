#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace riskshare {

// Undirected simple graph over agents 1..n. Every vertex index crossing this
// interface is 1-based; matrix entry (r, c) (0-based) corresponds to the agent
// pair (r+1, c+1). Edges are stored normalized (i < j) and sorted.
class Graph {
 public:
  static Graph complete(int n);
  // Two cliques of size k joined by a single bridge edge (k, k+1); n = 2k.
  static Graph barbell(int clique_size);
  static Graph path(int n);
  // Vertex 1 is the hub.
  static Graph star(int n);
  static Graph from_edges(int n, const std::vector<std::pair<int, int>>& pairs);

  int size() const noexcept { return n_; }
  const std::vector<std::pair<int, int>>& edges() const noexcept { return edges_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }

  bool has_edge(int i, int j) const;
  int degree(int v) const;
  bool is_complete() const noexcept;
  bool is_connected() const;

  Eigen::MatrixXd adjacency() const;
  // L = D - W, symmetric positive semidefinite, L1 = 0.
  Eigen::MatrixXd laplacian() const;
  // Z: zero on the diagonal and on edges, one elsewhere.
  Eigen::MatrixXd no_edge_indicator() const;
  Eigen::VectorXd degrees() const;

  // Ordered pairs (i, j), i != j, {i,j} not an edge, sorted by ascending
  // column-major vectorization index i + n(j-1). Length m = n^2 - n - 2|E|.
  // This ordering is shared by the multiplier vector gamma and by the
  // structural-zero rows of the vectorized constraint matrix.
  std::vector<std::pair<int, int>> off_edge_pairs() const;

 private:
  Graph(int n, std::vector<std::pair<int, int>> edges);

  void check_vertex(int v, const char* what) const;

  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<unsigned char> adj_;  // row-major n*n adjacency flags
};

}  // namespace riskshare
