#include <doctest.h>

#include <map>
#include <set>

#include "umni/errors.hpp"
#include "umni/lattice.hpp"
#include "umni/linalg.hpp"

using namespace umni;

namespace {

std::vector<std::int64_t> key(const IntVector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("canonical order visits every point once, by l1 then lexicographically") {
  for (auto [dim, kappa] : {std::pair{1, 3}, {2, 2}, {3, 2}, {4, 1}}) {
    const SearchBox box(dim, kappa);
    std::vector<IntVector> seen;
    box.for_each([&](const IntVector& v) {
      seen.push_back(v);
      return true;
    });
    CHECK(seen.size() == box.cardinality());
    std::set<std::vector<std::int64_t>> unique;
    for (const auto& v : seen) {
      unique.insert(key(v));
      CHECK(v.cwiseAbs().maxCoeff() <= kappa);
    }
    CHECK(unique.size() == seen.size());
    CHECK(seen.front().isZero());
    for (std::size_t k = 1; k < seen.size(); ++k) {
      const auto a = seen[k - 1].cwiseAbs().sum(), b = seen[k].cwiseAbs().sum();
      CHECK(a <= b);
      if (a == b) CHECK(key(seen[k - 1]) < key(seen[k]));
    }
  }
}

TEST_CASE("level contents") {
  const SearchBox box(2, 1);
  const auto l1 = box.level(1);
  REQUIRE(l1.size() == 4);
  CHECK(key(l1[0]) == std::vector<std::int64_t>{-1, 0});
  CHECK(key(l1[3]) == std::vector<std::int64_t>{1, 0});
  CHECK(box.level(3).empty());
  CHECK_THROWS_AS(SearchBox(0, 1), ArgumentError);
  CHECK_THROWS_AS(SearchBox(2, 0), ArgumentError);
}

TEST_CASE("parallel scan returns the serial answer") {
  for (int dim = 1; dim <= 5; ++dim) {
    const SearchBox box(dim, 2);
    std::vector<IntVector> all;
    box.for_each([&](const IntVector& v) {
      all.push_back(v);
      return true;
    });
    for (std::size_t target = 1; target < all.size(); target += 1 + all.size() / 17) {
      const IntVector goal = all[target];
      // several points share the goal's l1 level; the lexicographically first wins
      const LatticePredicate pred = [&](const IntVector& v) {
        return v.cwiseAbs().sum() == goal.cwiseAbs().sum() && v(0) >= goal(0);
      };
      const auto s = find_first_serial(box, pred);
      const auto p = find_first_parallel(box, pred);
      REQUIRE(s.has_value());
      REQUIRE(p.has_value());
      CHECK(*s == *p);
    }
    const LatticePredicate never = [](const IntVector&) { return false; };
    CHECK_FALSE(find_first_serial(box, never).has_value());
    CHECK_FALSE(find_first_parallel(box, never).has_value());
    const LatticePredicate always = [](const IntVector&) { return true; };
    CHECK(find_first_serial(box, always)->cwiseAbs().sum() == 1);
  }
}

}

TEST_SUITE("linalg") {

TEST_CASE("rank, pseudo-inverse and projectors") {
  MatrixXd a(3, 2);
  a << 1, 2, 2, 4, 3, 6;
  CHECK(numerical_rank(a, 1e-10) == 1);
  const MatrixXd p = pinv(a);
  CHECK((a * p * a - a).norm() < 1e-10);
  CHECK((p * a * p - p).norm() < 1e-10);

  MatrixXd rows(1, 3);
  rows << 1, 1, 0;
  const MatrixXd proj = nullspace_projector(rows, 3);
  CHECK((proj * proj - proj).norm() < 1e-12);
  CHECK((proj * rows.transpose()).norm() < 1e-12);
  CHECK(numerical_rank(proj, 1e-10) == 2);
  CHECK((nullspace_projector(MatrixXd(0, 3), 3) - MatrixXd::Identity(3, 3)).norm() == 0.0);

  MatrixXd x(4, 2);
  x << 1, 0, 2, 1, 3, 0, 4, 1;
  const MatrixXd c = sample_covariance(x);
  CHECK(c(0, 0) == doctest::Approx(5.0 / 3.0));
  CHECK(c(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(c(0, 1) == doctest::Approx(1.0 / 3.0));
}

}
