#include "riskshare/graph.hpp"

#include <algorithm>
#include <string>

#include "riskshare/errors.hpp"

namespace riskshare {

Graph::Graph(int n, std::vector<std::pair<int, int>> edges)
    : n_(n), edges_(std::move(edges)), adj_(static_cast<size_t>(n) * n, 0) {
  for (auto& [i, j] : edges_) {
    adj_[static_cast<size_t>(i - 1) * n_ + (j - 1)] = 1;
    adj_[static_cast<size_t>(j - 1) * n_ + (i - 1)] = 1;
  }
}

void Graph::check_vertex(int v, const char* what) const {
  if (v < 1 || v > n_) {
    throw Error(ErrorKind::invalid_edge,
                std::string(what) + " index " + std::to_string(v) +
                    " is outside the vertex range 1.." + std::to_string(n_));
  }
}

Graph Graph::from_edges(int n, const std::vector<std::pair<int, int>>& pairs) {
  if (n < 2) {
    throw Error(ErrorKind::invalid_size,
                "a sharing network needs at least 2 agents, got n = " + std::to_string(n));
  }
  std::vector<std::pair<int, int>> normalized;
  normalized.reserve(pairs.size());
  std::vector<unsigned char> seen(static_cast<size_t>(n) * n, 0);
  for (auto [i, j] : pairs) {
    if (i < 1 || i > n || j < 1 || j > n) {
      throw Error(ErrorKind::invalid_edge,
                  "edge (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") is outside the vertex range 1.." + std::to_string(n));
    }
    if (i == j) {
      throw Error(ErrorKind::invalid_edge,
                  "self-loop (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") is not allowed in a simple graph");
    }
    int a = std::min(i, j), b = std::max(i, j);
    size_t key = static_cast<size_t>(a - 1) * n + (b - 1);
    if (seen[key]) {
      throw Error(ErrorKind::invalid_edge,
                  "duplicate edge (" + std::to_string(a) + ", " + std::to_string(b) + ")");
    }
    seen[key] = 1;
    normalized.emplace_back(a, b);
  }
  std::sort(normalized.begin(), normalized.end());
  return Graph(n, std::move(normalized));
}

Graph Graph::complete(int n) {
  if (n < 2) {
    throw Error(ErrorKind::invalid_size,
                "complete graph needs at least 2 vertices, got n = " + std::to_string(n));
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) edges.emplace_back(i, j);
  return Graph(n, std::move(edges));
}

Graph Graph::barbell(int clique_size) {
  if (clique_size < 2) {
    throw Error(ErrorKind::invalid_size,
                "barbell cliques need at least 2 vertices each, got k = " +
                    std::to_string(clique_size));
  }
  const int k = clique_size;
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i <= k; ++i)
    for (int j = i + 1; j <= k; ++j) edges.emplace_back(i, j);
  for (int i = k + 1; i <= 2 * k; ++i)
    for (int j = i + 1; j <= 2 * k; ++j) edges.emplace_back(i, j);
  edges.emplace_back(k, k + 1);
  std::sort(edges.begin(), edges.end());
  return Graph(2 * k, std::move(edges));
}

Graph Graph::path(int n) {
  if (n < 2) {
    throw Error(ErrorKind::invalid_size,
                "path graph needs at least 2 vertices, got n = " + std::to_string(n));
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<size_t>(n) - 1);
  for (int i = 1; i < n; ++i) edges.emplace_back(i, i + 1);
  return Graph(n, std::move(edges));
}

Graph Graph::star(int n) {
  if (n < 2) {
    throw Error(ErrorKind::invalid_size,
                "star graph needs at least 2 vertices, got n = " + std::to_string(n));
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<size_t>(n) - 1);
  for (int i = 2; i <= n; ++i) edges.emplace_back(1, i);
  return Graph(n, std::move(edges));
}

bool Graph::has_edge(int i, int j) const {
  check_vertex(i, "vertex");
  check_vertex(j, "vertex");
  if (i == j) return false;
  return adj_[static_cast<size_t>(i - 1) * n_ + (j - 1)] != 0;
}

int Graph::degree(int v) const {
  check_vertex(v, "vertex");
  int d = 0;
  for (int j = 0; j < n_; ++j) d += adj_[static_cast<size_t>(v - 1) * n_ + j];
  return d;
}

bool Graph::is_complete() const noexcept {
  return static_cast<long long>(edges_.size()) ==
         static_cast<long long>(n_) * (n_ - 1) / 2;
}

bool Graph::is_connected() const {
  std::vector<unsigned char> visited(static_cast<size_t>(n_), 0);
  std::vector<int> stack = {0};
  visited[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int j = 0; j < n_; ++j) {
      if (adj_[static_cast<size_t>(v) * n_ + j] && !visited[j]) {
        visited[j] = 1;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == n_;
}

Eigen::MatrixXd Graph::adjacency() const {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n_, n_);
  for (auto& [i, j] : edges_) {
    W(i - 1, j - 1) = 1.0;
    W(j - 1, i - 1) = 1.0;
  }
  return W;
}

Eigen::MatrixXd Graph::laplacian() const {
  Eigen::MatrixXd L = -adjacency();
  for (int v = 0; v < n_; ++v) {
    double d = 0;
    for (int j = 0; j < n_; ++j) d += adj_[static_cast<size_t>(v) * n_ + j];
    L(v, v) = d;
  }
  return L;
}

Eigen::MatrixXd Graph::no_edge_indicator() const {
  Eigen::MatrixXd Z = Eigen::MatrixXd::Ones(n_, n_) - adjacency();
  Z.diagonal().setZero();
  return Z;
}

Eigen::VectorXd Graph::degrees() const {
  Eigen::VectorXd d(n_);
  for (int v = 1; v <= n_; ++v) d(v - 1) = degree(v);
  return d;
}

std::vector<std::pair<int, int>> Graph::off_edge_pairs() const {
  // Ascending vectorization index k = i + n(j-1) means iterating j (column)
  // in the outer loop and i (row) in the inner one.
  std::vector<std::pair<int, int>> pairs;
  for (int j = 1; j <= n_; ++j) {
    for (int i = 1; i <= n_; ++i) {
      if (i == j) continue;
      if (!adj_[static_cast<size_t>(i - 1) * n_ + (j - 1)]) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

}  // namespace riskshare
