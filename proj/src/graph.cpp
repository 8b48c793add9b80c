#include "umni/graph.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "umni/errors.hpp"

namespace umni {

Dag::Dag(int n) : n_(n) {
  if (n < 0) throw ArgumentError("Dag: negative node count");
  adj_.assign(static_cast<std::size_t>(n) * n, 0);
}

Dag::Dag(int n, const std::vector<Edge>& edges) : Dag(n) {
  for (auto [from, to] : edges) {
    if (has_edge(from, to)) throw StructuralError("Dag: duplicate edge");
    add_edge(from, to);
  }
}

void Dag::check_node(int i) const {
  if (i < 0 || i >= n_) throw ArgumentError("Dag: node index out of range");
}

bool Dag::has_edge(int from, int to) const {
  check_node(from);
  check_node(to);
  return adj_[static_cast<std::size_t>(from) * n_ + to] != 0;
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (adj_[static_cast<std::size_t>(i) * n_ + j]) out.emplace_back(i, j);
  return out;
}

void Dag::add_edge(int from, int to) {
  check_node(from);
  check_node(to);
  if (from == to) throw StructuralError("Dag: self-loop");
  if (has_edge(from, to)) return;
  if (is_ancestor(to, from)) throw StructuralError("Dag: edge would create a cycle");
  adj_[static_cast<std::size_t>(from) * n_ + to] = 1;
  ++edge_count_;
}

void Dag::remove_edge(int from, int to) {
  if (!has_edge(from, to)) return;
  adj_[static_cast<std::size_t>(from) * n_ + to] = 0;
  --edge_count_;
}

std::vector<int> Dag::parents(int i) const {
  check_node(i);
  std::vector<int> out;
  for (int j = 0; j < n_; ++j)
    if (adj_[static_cast<std::size_t>(j) * n_ + i]) out.push_back(j);
  return out;
}

std::vector<int> Dag::children(int i) const {
  check_node(i);
  std::vector<int> out;
  for (int j = 0; j < n_; ++j)
    if (adj_[static_cast<std::size_t>(i) * n_ + j]) out.push_back(j);
  return out;
}

std::vector<int> Dag::reach(int start, bool forward) const {
  check_node(start);
  std::vector<std::uint8_t> seen(n_, 0);
  std::vector<int> stack{start};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n_; ++v) {
      bool linked = forward ? adj_[static_cast<std::size_t>(u) * n_ + v] : adj_[static_cast<std::size_t>(v) * n_ + u];
      if (linked && !seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  std::vector<int> out;
  for (int v = 0; v < n_; ++v)
    if (seen[v] && v != start) out.push_back(v);
  return out;
}

std::vector<int> Dag::ancestors(int i) const { return reach(i, false); }
std::vector<int> Dag::descendants(int i) const { return reach(i, true); }

bool Dag::is_ancestor(int a, int b) const {
  if (a == b) return false;
  auto an = ancestors(b);
  return std::binary_search(an.begin(), an.end(), a);
}

std::vector<int> Dag::topological_order() const {
  std::vector<int> indegree(n_, 0);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (adj_[static_cast<std::size_t>(i) * n_ + j]) ++indegree[j];
  std::vector<int> order;
  std::vector<std::uint8_t> done(n_, 0);
  while (static_cast<int>(order.size()) < n_) {
    int next = -1;
    for (int v = 0; v < n_; ++v)
      if (!done[v] && indegree[v] == 0) {
        next = v;
        break;
      }
    if (next < 0) throw StructuralError("Dag: cycle detected");
    done[next] = 1;
    order.push_back(next);
    for (int j = 0; j < n_; ++j)
      if (adj_[static_cast<std::size_t>(next) * n_ + j]) --indegree[j];
  }
  return order;
}

Dag random_dag(int n, double density, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("random_dag: n must be at least 1");
  if (!(density >= 0.0 && density <= 1.0)) throw ArgumentError("random_dag: density outside [0, 1]");
  std::mt19937_64 rng(seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution coin(density);
  Dag g(n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (coin(rng)) g.add_edge(order[a], order[b]);
  return g;
}

Dag transitive_closure(const Dag& g) {
  Dag out(g.size());
  for (int j = 0; j < g.size(); ++j)
    for (int i : g.ancestors(j)) out.add_edge(i, j);
  return out;
}

int shd(const Dag& a, const Dag& b) {
  if (a.size() != b.size()) throw ArgumentError("shd: node-count mismatch");
  int count = 0;
  for (int i = 0; i < a.size(); ++i)
    for (int j = 0; j < a.size(); ++j)
      if (i != j && a.has_edge(i, j) != b.has_edge(i, j)) ++count;
  return count;
}

Dag relabel(const Dag& g, std::span<const int> perm) {
  if (static_cast<int>(perm.size()) != g.size()) throw ArgumentError("relabel: permutation size mismatch");
  std::vector<std::uint8_t> seen(perm.size(), 0);
  for (int p : perm) {
    if (p < 0 || p >= g.size() || seen[p]) throw ArgumentError("relabel: not a permutation");
    seen[p] = 1;
  }
  Dag out(g.size());
  for (auto [i, j] : g.edges()) out.add_edge(perm[i], perm[j]);
  return out;
}

std::string to_edge_list(const Dag& g) {
  std::ostringstream os;
  for (auto [i, j] : g.edges()) os << i << ' ' << j << '\n';
  return os.str();
}

Dag from_edge_list(int n, std::string_view text) {
  std::istringstream is{std::string(text)};
  std::vector<Edge> edges;
  int i = 0, j = 0;
  while (is >> i >> j) edges.emplace_back(i, j);
  if (!is.eof()) throw ArgumentError("from_edge_list: malformed edge list");
  return Dag(n, edges);
}

}  // namespace umni
