// Serial vs OpenMP timings for the two parallel kernels: the lattice scan and
// the brute-force binary determinant search.

#include <omp.h>

#include <chrono>
#include <cstdio>

#include "umni/lattice.hpp"
#include "umni/theory.hpp"

using namespace umni;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// A deliberately costly predicate that only accepts the last point of the box.
bool costly(const IntVector& w, int kappa) {
  double acc = 0;
  for (int k = 0; k < 2000; ++k) acc += static_cast<double>(w.sum() * k % 7);
  return acc >= 0 && w.minCoeff() == kappa && w.maxCoeff() == kappa;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %12s %12s %8s\n", "kernel", "serial [s]", "parallel [s]", "match");
  for (auto [dim, kappa] : {std::pair{4, 2}, {5, 2}, {5, 3}}) {
    const SearchBox box(dim, kappa);
    const LatticePredicate pred = [kappa](const IntVector& w) { return costly(w, kappa); };
    std::optional<IntVector> a, b;
    const double ts = seconds([&] { a = find_first_serial(box, pred); });
    const double tp = seconds([&] { b = find_first_parallel(box, pred); });
    char name[64];
    std::snprintf(name, sizeof name, "lattice scan n=%d k=%d", dim, kappa);
    std::printf("%-28s %12.4f %12.4f %8s\n", name, ts, tp, (a && b && *a == *b) ? "yes" : "NO");
  }
  for (int m = 3; m <= 5; ++m) {
    std::int64_t a = 0, b = 0;
    const double ts = seconds([&] { a = max_binary_determinant_serial(m); });
    const double tp = seconds([&] { b = max_binary_determinant(m); });
    char name[64];
    std::snprintf(name, sizeof name, "max binary det m=%d", m);
    std::printf("%-28s %12.4f %12.4f %8s\n", name, ts, tp, a == b ? "yes" : "NO");
  }
}
