#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "umni/linalg.hpp"

namespace umni {

/// The integer box {−κ, …, κ}ⁿ searched for aggregation vectors.
///
/// Canonical order: ascending ℓ1 norm, ties broken lexicographically (smaller
/// first coordinate first). Every lattice point appears exactly once.
class SearchBox {
 public:
  SearchBox(int dim, int kappa);

  int dim() const noexcept { return dim_; }
  int kappa() const noexcept { return kappa_; }
  int max_level() const noexcept { return dim_ * kappa_; }
  /// (2κ + 1)ⁿ, saturating at UINT64_MAX.
  std::uint64_t cardinality() const noexcept;

  /// All points with ℓ1 norm `l1`, in lexicographic order.
  std::vector<IntVector> level(int l1) const;

  /// Visits every point (including 0) in canonical order until `visit` returns false.
  void for_each(const std::function<bool(const IntVector&)>& visit) const;

 private:
  int dim_;
  int kappa_;
};

using LatticePredicate = std::function<bool(const IntVector&)>;

/// First nonzero point in canonical order satisfying `pred`. Serial reference.
std::optional<IntVector> find_first_serial(const SearchBox& box, const LatticePredicate& pred);

/// Same result as find_first_serial. Each ℓ1 level is split into blocks that are
/// evaluated with OpenMP; the lowest passing index of the first block with a hit
/// wins, so the answer does not depend on scheduling. `pred` must be thread-safe.
std::optional<IntVector> find_first_parallel(const SearchBox& box, const LatticePredicate& pred);

}  // namespace umni
