#include "umni/lattice.hpp"

#include <cstdlib>
#include <limits>

#include "umni/errors.hpp"

namespace umni {

SearchBox::SearchBox(int dim, int kappa) : dim_(dim), kappa_(kappa) {
  if (dim < 1) throw ArgumentError("SearchBox: dimension must be positive");
  if (kappa < 1) throw ArgumentError("SearchBox: kappa must be positive");
}

std::uint64_t SearchBox::cardinality() const noexcept {
  const std::uint64_t side = 2 * static_cast<std::uint64_t>(kappa_) + 1;
  std::uint64_t total = 1;
  for (int i = 0; i < dim_; ++i) {
    if (total > std::numeric_limits<std::uint64_t>::max() / side) return std::numeric_limits<std::uint64_t>::max();
    total *= side;
  }
  return total;
}

namespace {

void fill_level(int pos, int remaining, int dim, int kappa, IntVector& cur, std::vector<IntVector>& out) {
  if (pos == dim - 1) {
    if (remaining > kappa) return;
    if (remaining == 0) {
      cur(pos) = 0;
      out.push_back(cur);
    } else {
      cur(pos) = -remaining;
      out.push_back(cur);
      cur(pos) = remaining;
      out.push_back(cur);
    }
    return;
  }
  const int tail_capacity = (dim - pos - 1) * kappa;
  for (int v = -kappa; v <= kappa; ++v) {
    const int rest = remaining - std::abs(v);
    if (rest < 0 || rest > tail_capacity) continue;
    cur(pos) = v;
    fill_level(pos + 1, rest, dim, kappa, cur, out);
  }
}

}  // namespace

std::vector<IntVector> SearchBox::level(int l1) const {
  std::vector<IntVector> out;
  if (l1 < 0 || l1 > max_level()) return out;
  IntVector cur = IntVector::Zero(dim_);
  fill_level(0, l1, dim_, kappa_, cur, out);
  return out;
}

void SearchBox::for_each(const std::function<bool(const IntVector&)>& visit) const {
  for (int l = 0; l <= max_level(); ++l)
    for (const auto& w : level(l))
      if (!visit(w)) return;
}

std::optional<IntVector> find_first_serial(const SearchBox& box, const LatticePredicate& pred) {
  for (int l = 1; l <= box.max_level(); ++l)
    for (const auto& w : box.level(l))
      if (pred(w)) return w;
  return std::nullopt;
}

std::optional<IntVector> find_first_parallel(const SearchBox& box, const LatticePredicate& pred) {
  constexpr std::ptrdiff_t kBlock = 256;
  for (int l = 1; l <= box.max_level(); ++l) {
    const auto points = box.level(l);
    const auto count = static_cast<std::ptrdiff_t>(points.size());
    for (std::ptrdiff_t start = 0; start < count; start += kBlock) {
      const std::ptrdiff_t stop = std::min(count, start + kBlock);
      std::ptrdiff_t best = stop;
#pragma omp parallel for schedule(dynamic, 4) reduction(min : best)
      for (std::ptrdiff_t k = start; k < stop; ++k)
        if (k < best && pred(points[k])) best = k;
      if (best < stop) return points[best];
    }
  }
  return std::nullopt;
}

}  // namespace umni
