#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace umni {

using Edge = std::pair<int, int>;

/// Directed acyclic graph over nodes 0..n-1, stored as a dense adjacency matrix.
/// Mutation is limited to edge insertion/removal; insertion rejects cycles.
class Dag {
 public:
  explicit Dag(int n = 0);
  Dag(int n, const std::vector<Edge>& edges);

  int size() const noexcept { return n_; }
  bool has_edge(int from, int to) const;
  std::size_t edge_count() const noexcept { return edge_count_; }
  /// Edges sorted by (from, to).
  std::vector<Edge> edges() const;

  /// Throws StructuralError on self-loop or if the edge would close a cycle.
  /// Adding an existing edge is a no-op.
  void add_edge(int from, int to);
  void remove_edge(int from, int to);

  std::vector<int> parents(int i) const;
  std::vector<int> children(int i) const;
  std::vector<int> ancestors(int i) const;
  std::vector<int> descendants(int i) const;
  bool is_ancestor(int a, int b) const;  // a ∈ an(b)

  /// Kahn order; ties broken by smallest index.
  std::vector<int> topological_order() const;

  bool operator==(const Dag& other) const = default;

 private:
  void check_node(int i) const;
  std::vector<int> reach(int start, bool forward) const;

  int n_;
  std::size_t edge_count_ = 0;
  std::vector<std::uint8_t> adj_;  // adj_[from * n + to]
};

/// Erdős–Rényi DAG: uniform random node order, then each forward pair is an edge
/// independently with probability `density`.
Dag random_dag(int n, double density, std::uint64_t seed);

Dag transitive_closure(const Dag& g);

/// Ordered-pair structural Hamming distance: number of (i, j), i != j, whose
/// edge status differs. A reversed edge counts twice.
int shd(const Dag& a, const Dag& b);

/// Node i of `g` becomes node perm[i] of the result.
Dag relabel(const Dag& g, std::span<const int> perm);

/// One "i j" line per edge, 0-indexed.
std::string to_edge_list(const Dag& g);
Dag from_edge_list(int n, std::string_view text);

}  // namespace umni
