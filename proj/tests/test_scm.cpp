#include <doctest.h>

#include "oracles.hpp"
#include "umni/errors.hpp"
#include "umni/scm.hpp"

using namespace umni;

namespace {

LinearGaussianSem chain2(double w, double v1 = 1.0, double v2 = 1.0) {
  MatrixXd a = MatrixXd::Zero(2, 2);
  a(1, 0) = w;
  return LinearGaussianSem(Dag(2, {{0, 1}}), a, VectorXd::Map(std::vector<double>{v1, v2}.data(), 2));
}

EnvironmentSpec single(const LinearGaussianSem& sem, int node, InterventionKind kind) {
  return EnvironmentSpec(kind, {default_mechanism(sem, node, kind)});
}

}  // namespace

TEST_SUITE("scm") {

TEST_CASE("intervention signature") {
  const LinearGaussianSem sem = chain2(1.0);
  const std::vector<EnvironmentSpec> sn{single(sem, 0, InterventionKind::soft), single(sem, 1, InterventionKind::soft)};
  CHECK(intervention_signature(sn, 2) == IntMatrix::Identity(2, 2));

  const std::vector<EnvironmentSpec> multi{
      EnvironmentSpec(InterventionKind::soft,
                      {default_mechanism(sem, 0, InterventionKind::soft), default_mechanism(sem, 1, InterventionKind::soft)}),
      single(sem, 1, InterventionKind::soft)};
  IntMatrix expect(2, 2);
  expect << 1, 0, 1, 1;
  CHECK(intervention_signature(multi, 2) == expect);
}

TEST_CASE("signature round-trips random target sets") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Dag g = random_dag(5, 0.5, s);
    const LinearGaussianSem sem = random_sem(g, s);
    const auto specs = random_interventions(5, InterventionKind::hard, sem, s);
    const IntMatrix d = intervention_signature(specs, 5);
    const auto back = interventions_from_signature(d, InterventionKind::hard, sem);
    REQUIRE(back.size() == specs.size());
    for (std::size_t m = 0; m < specs.size(); ++m) CHECK(back[m].targets() == specs[m].targets());
  }
}

TEST_CASE("assumption 1") {
  CHECK(check_assumption1(IntMatrix::Identity(4, 4)));
  IntMatrix zero_row = IntMatrix::Identity(3, 3);
  zero_row(2, 2) = 0;
  CHECK_FALSE(check_assumption1(zero_row));
  IntMatrix cyc(3, 3);
  cyc << 1, 0, 1, 1, 1, 0, 0, 1, 1;
  CHECK(check_assumption1(cyc));
}

TEST_CASE("random interventions") {
  const LinearGaussianSem one(Dag(1), MatrixXd::Zero(1, 1), VectorXd::Ones(1));
  const auto envs1 = random_interventions(1, InterventionKind::soft, one, 3);
  REQUIRE(envs1.size() == 1);
  CHECK(envs1[0].targets() == std::vector<int>{0});

  for (std::uint64_t s = 0; s < 100; ++s) {
    const LinearGaussianSem sem = random_sem(random_dag(4, 0.5, s), s + 1000);
    for (auto kind : {InterventionKind::soft, InterventionKind::hard}) {
      const auto envs = random_interventions(4, kind, sem, s);
      CHECK(envs.size() == 4);
      CHECK(check_assumption1(intervention_signature(envs, 4)));
      for (const auto& e : envs) {
        CHECK_NOTHROW(e.validate(sem));
        for (const auto& m : e.mechanisms()) {
          CHECK(m.noise_var == doctest::Approx(sem.noise_vars()(m.node) / 4));
          const VectorXd expect = kind == InterventionKind::hard ? VectorXd::Zero(4)
                                                                 : VectorXd(0.5 * sem.weights().row(m.node).transpose());
          CHECK((m.weights - expect).norm() == 0.0);
        }
      }
    }
  }
}

TEST_CASE("spec validation") {
  const LinearGaussianSem sem = chain2(1.0);
  Mechanism m{1, VectorXd::Zero(2), 1.0, 0.0};
  m.weights(0) = 1.0;
  CHECK_THROWS_AS(EnvironmentSpec(InterventionKind::soft, {m}).validate(sem), ArgumentError);
  m.weights(0) = 0.5;
  CHECK_THROWS_AS(EnvironmentSpec(InterventionKind::hard, {m}), ArgumentError);
  Mechanism bad{0, VectorXd::Zero(2), 1.0, 0.0};
  bad.weights(1) = 0.3;
  CHECK_THROWS_AS(EnvironmentSpec(InterventionKind::soft, {bad}).validate(sem), ArgumentError);
}

TEST_CASE("root variance from samples") {
  const LinearGaussianSem sem(Dag(1), MatrixXd::Zero(1, 1), VectorXd::Ones(1));
  const MatrixXd z = sample_latent(sem, EnvironmentSpec::observational(), 100000, 7);
  const double var = sample_covariance(z)(0, 0);
  CHECK(var >= 0.94);
  CHECK(var <= 1.06);
}

TEST_CASE("chain covariance, analytic and sampled") {
  const double w = 0.8;
  const LinearGaussianSem sem = chain2(w);
  const MatrixXd cov = analytic_latent_covariance(sem, EnvironmentSpec::observational());
  MatrixXd expect(2, 2);
  expect << 1, w, w, 1 + w * w;
  CHECK((cov - expect).norm() < 1e-12);
  CHECK((analytic_latent_precision(sem, EnvironmentSpec::observational()) * cov - MatrixXd::Identity(2, 2)).norm() <
        1e-10);

  const MatrixXd z = sample_latent(sem, EnvironmentSpec::observational(), 100000, 11);
  CHECK(sample_covariance(z)(0, 1) == doctest::Approx(w).epsilon(0.03));

  const EnvironmentSpec hard = single(sem, 1, InterventionKind::hard);
  CHECK(analytic_latent_covariance(sem, hard)(0, 1) == 0.0);
  const MatrixXd zh = sample_latent(sem, hard, 100000, 12);
  CHECK(std::abs(sample_covariance(zh)(0, 1)) < 0.02);
}

TEST_CASE("empty graph covariance is identity") {
  const LinearGaussianSem sem(Dag(3), MatrixXd::Zero(3, 3), VectorXd::Ones(3));
  CHECK(analytic_latent_covariance(sem, EnvironmentSpec::observational()) == MatrixXd::Identity(3, 3));
}

TEST_CASE("analytic covariance matches the structural recursion and samples") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const LinearGaussianSem sem = random_sem(random_dag(4, 0.5, s), s + 50);
    std::vector<EnvironmentSpec> all{EnvironmentSpec::observational()};
    for (auto kind : {InterventionKind::soft, InterventionKind::hard}) {
      const auto envs = random_interventions(4, kind, sem, s + 99);
      all.insert(all.end(), envs.begin(), envs.end());
    }
    for (std::size_t e = 0; e < all.size(); ++e) {
      const MatrixXd cov = analytic_latent_covariance(sem, all[e]);
      CHECK((cov - oracle::recursive_covariance(sem, all[e])).norm() < 1e-10);
      if (e % 3 != 0) continue;
      const MatrixXd z = sample_latent(sem, all[e], 100000, s * 31 + e);
      const MatrixXd sc = sample_covariance(z);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          const double se = std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / 100000.0);
          CHECK(std::abs(sc(i, j) - cov(i, j)) <= 5 * se);
        }
    }
  }
}

TEST_CASE("hard intervention severs non-descendants") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const LinearGaussianSem sem = random_sem(random_dag(5, 0.6, s), s);
    for (int i = 0; i < 5; ++i) {
      const MatrixXd cov = analytic_latent_covariance(sem, single(sem, i, InterventionKind::hard));
      const auto de = sem.dag().descendants(i);
      for (int k = 0; k < 5; ++k)
        if (k != i && !std::binary_search(de.begin(), de.end(), k)) CHECK(cov(i, k) == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("mixing and transforms") {
  const LinearGaussianSem sem = random_sem(random_dag(4, 0.5, 2), 2);
  const MatrixXd z = sample_latent(sem, EnvironmentSpec::observational(), 200, 5);
  CHECK(mix(ObservationModel(MatrixXd::Identity(4, 4)), z) == z);

  const ObservationModel g = random_transform(5, 4, 9);
  const MatrixXd x = mix(g, z);
  CHECK(numerical_rank(x, 1e-9) == 4);
  CHECK((x * g.encoder().transpose() - z).norm() < 1e-10 * z.norm());
  CHECK_THROWS_AS(mix(g, MatrixXd::Zero(3, 3)), ArgumentError);

  const ObservationModel scalar = random_transform(1, 1, 4);
  CHECK(scalar.transform()(0, 0) != 0.0);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const ObservationModel t = random_transform(20, 4, s);
    CHECK(numerical_rank(t.transform(), 1e-9) == 4);
    CHECK((t.encoder() * t.transform() - MatrixXd::Identity(4, 4)).norm() < 1e-10);
  }
  CHECK_THROWS_AS(random_transform(3, 4, 0), ArgumentError);
}

}
