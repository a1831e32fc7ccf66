#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "hardy/spherical.hpp"

using namespace hardy;

namespace {

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

Eigen::SparseMatrix<double> sparse(const Eigen::MatrixXd& dense) { return dense.sparseView(); }

AngularDomain hemisphere() { return {0.0, kHalfPi, EndCondition::Natural, EndCondition::Dirichlet}; }

}  // namespace

TEST_CASE("boundary conditions per cone") {
  const HardyParams below(3, 1, 2.0, 0.0, 0.0);
  auto d = bc_for_cone(below, ComplementSigma0{});
  CHECK(d.bc1 == EndCondition::Natural);
  CHECK(d.bc2 == EndCondition::Dirichlet);
  CHECK(bc_for_cone(below, PuncturedSpace{}).constants_admissible());
  // k + a >= p: Sigma0 has zero capacity, no condition there
  CHECK(bc_for_cone(HardyParams(3, 1, 2.0, 1.5, 0.0), ComplementSigma0{}).bc2 == EndCondition::Natural);
  d = bc_for_cone(below, AxisymmetricBand(0.2, 1.0));
  CHECK(d.bc1 == EndCondition::Dirichlet);
  CHECK(d.bc2 == EndCondition::Dirichlet);
  d = bc_for_cone(below, AxisymmetricBand(0.0, 1.0));
  CHECK(d.bc1 == EndCondition::Natural);
  CHECK_THROWS_AS(bc_for_cone(HardyParams(3, 2, 2.0, -3.0, 0.0), FullSpace{}), HardyError);
  CHECK_THROWS_AS((AngularDomain{1.0, 0.5}.validate()), HardyError);
}

TEST_CASE("graded mesh") {
  const auto mesh = graded_mesh(AngularDomain{}, 100, 6.0);
  REQUIRE(mesh.size() == 101);
  CHECK(mesh.nodes.front().theta == 0.0);
  CHECK(mesh.nodes.back().coangle == 0.0);
  for (std::size_t j = 1; j < mesh.size(); ++j) {
    CHECK(mesh.nodes[j].coangle < mesh.nodes[j - 1].coangle);
    CHECK(mesh.nodes[j].theta + mesh.nodes[j].coangle == doctest::Approx(kHalfPi));
  }
  // first element at pi/2 has width L / n^gamma
  CHECK(rel(mesh.nodes[99].coangle, kHalfPi * std::pow(0.01, 6.0)) < 1e-12);
  // mu = (p - k - a) / (p - 1)
  CHECK(default_grading(HardyParams(3, 1, 2.0, 0.0, 0.0), hemisphere()) == 2.0);
  CHECK(default_grading(HardyParams(3, 1, 2.0, 0.5, 0.0), hemisphere()) == doctest::Approx(6.0));
  CHECK(default_grading(HardyParams(3, 1, 2.0, 0.9, 0.0), hemisphere()) == doctest::Approx(30.0));
  CHECK(default_grading(HardyParams(3, 1, 2.0, 0.0, 0.0), AngularDomain{}) == 2.0);
}

TEST_CASE("stiffness annihilates constants with natural ends") {
  const HardyParams params(4, 1, 2.0, 0.3, 0.0);
  const FiniteElementSpace space(params, AngularDomain{}, graded_mesh(AngularDomain{}, 40, 2.0));
  const std::vector<double> slope(space.rule().size(), 1.0), zero(space.rule().size(), 0.0);
  const Eigen::SparseMatrix<double> k = space.assemble(slope, zero);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(space.dofs()));
  CHECK((k * ones).norm() < 1e-12);
  const Eigen::SparseMatrix<double> m = space.assemble(zero, slope);
  // 1^T M 1 = Int cos^(k+a-1) sin^(d-k-1) = B((k+a)/2, (d-k)/2) / 2
  CHECK(rel(ones.dot(m * ones), 0.5 * std::beta(params.cylindrical_order() / 2, 1.5)) < 1e-10);
}

TEST_CASE("smallest generalized eigenpair") {
  SUBCASE("K = M") {
    Eigen::MatrixXd a(3, 3);
    a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    const auto pair = smallest_eigenpair(sparse(a), sparse(a), 1e-12);
    CHECK(pair.lambda == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("diagonal") {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2, 2);
    k(0, 0) = 1.0;
    k(1, 1) = 4.0;
    const auto pair = smallest_eigenpair(sparse(k), sparse(Eigen::MatrixXd::Identity(2, 2)), 1e-12);
    CHECK(pair.lambda == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(pair.vector(0)) == doctest::Approx(1.0));
    CHECK(std::abs(pair.vector(1)) < 1e-8);
  }
  SUBCASE("random SPD pencils against a dense solver") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::MatrixXd x(50, 50), y(50, 50);
      for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) {
          x(i, j) = g(rng);
          y(i, j) = g(rng);
        }
      const Eigen::MatrixXd k = x.transpose() * x;
      const Eigen::MatrixXd m = y.transpose() * y + 50.0 * Eigen::MatrixXd::Identity(50, 50);
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(k, m);
      const auto pair = smallest_eigenpair(sparse(k), sparse(m), 1e-12);
      CHECK(rel(pair.lambda, dense.eigenvalues()(0)) < 1e-10);
      CHECK(std::abs(pair.vector.dot(m * pair.vector) - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("Laplace-Beltrami on the hemisphere") {
  for (int d : {3, 4, 5}) {
    const auto r = solve_on_domain(HardyParams(d, 1, 2.0, 0.0, 0.0), hemisphere(), 1024);
    REQUIRE(r.lambda);
    CHECK(rel(*r.lambda, d - 1.0) < 1e-5);
    // eigenfunction is cos(theta)
    const auto mid = r.minimizer.at(AngularPoint::from_theta(0.5));
    const auto top = r.minimizer.at(AngularPoint::from_theta(0.0));
    CHECK(mid.value / top.value == doctest::Approx(std::cos(0.5)).epsilon(1e-4));
  }
}

TEST_CASE("solve_M examples") {
  CHECK(rel(solve_M(HardyParams(3, 1, 2.0, 0.0, 0.0), ComplementSigma0{}, 512).M, 2.25) < 1e-5);
  CHECK(rel(solve_M(HardyParams(4, 2, 2.0, -0.5, 0.0), ComplementSigma0{}, 1024).M, 1.5625) < 1e-4);
  const auto punct = solve_M(HardyParams(3, 1, 3.0, 0.5, 0.2), PuncturedSpace{}, 64);
  CHECK(rel(punct.M, std::pow(std::abs((3 + 0.5 - 3 - 0.2) / 3.0), 3.0)) < 1e-12);
  // superdegenerate p = 3, a = 2: constants are admissible, M = H^p
  CHECK(rel(solve_M(HardyParams(3, 1, 3.0, 2.0, 0.0), ComplementSigma0{}, 128).M, 8.0 / 27.0) < 1e-12);
  CHECK_THROWS_AS(solve_M(HardyParams(3, 1, 2.0, 0.0, 0.0), ComplementSigma0{}, 8), HardyError);
}

TEST_CASE("closed eigenpair on the complement") {
  const auto pair = closed_eigen_sigma0(HardyParams(3, 1, 2.0, 0.0, 0.0));
  CHECK(pair.lambda1 == doctest::Approx(2.0));
  CHECK(pair.phi1(AngularPoint::from_theta(0.4)) == doctest::Approx(std::cos(0.4)));
  CHECK(closed_eigen_sigma0(HardyParams(5, 1, 2.0, 0.999, 0.0)).lambda1 == doctest::Approx(0.004));
  CHECK_THROWS_AS(closed_eigen_sigma0(HardyParams(3, 1, 3.0, 0.0, 0.0)), HardyError);
  CHECK_THROWS_AS(closed_eigen_sigma0(HardyParams(3, 1, 2.0, 1.0, 0.0)), HardyError);
}

TEST_CASE("minimizer is positive in the interior") {
  for (const auto& [params, cone] : {std::pair{HardyParams(3, 1, 2.0, 0.3, 0.0), ConeSpec(ComplementSigma0{})},
                                     std::pair{HardyParams(4, 2, 3.0, -0.5, 0.0), ConeSpec(ComplementSigma0{})},
                                     std::pair{HardyParams(3, 1, 1.5, 0.0, 0.0), ConeSpec(AxisymmetricBand(0.3, 1.2))}}) {
    const auto r = solve_M(params, cone, 256);
    const auto& v = r.minimizer.values;
    for (std::size_t j = 1; j + 1 < v.size(); ++j) CHECK(v[j] > 0.0);
  }
}

TEST_CASE("M depends on b only through |H|") {
  const HardyParams params(4, 1, 2.0, 0.4, 0.3);
  const auto m1 = solve_M(params, ComplementSigma0{}, 256).M;
  const auto m2 = solve_M(params.with_flipped_b(), ComplementSigma0{}, 256).M;
  CHECK(std::abs(m1 - m2) <= 1e-10 * m1);
  const HardyParams p3(4, 1, 3.0, 0.4, 0.3);
  const auto q1 = solve_M(p3, AxisymmetricBand(0.2, 1.1), 128).M;
  const auto q2 = solve_M(p3.with_flipped_b(), AxisymmetricBand(0.2, 1.1), 128).M;
  CHECK(std::abs(q1 - q2) <= 1e-10 * q1);
}

TEST_CASE("band monotonicity and strict gap") {
  const HardyParams params(3, 1, 2.0, 0.0, 0.0);
  const double h2 = 0.25;
  const auto wide = solve_M(params, AxisymmetricBand(0.2, 1.3), 512).M;
  const auto narrow = solve_M(params, AxisymmetricBand(0.4, 1.0), 512).M;
  CHECK(narrow > wide);
  CHECK(wide - h2 > 1e-3);
  for (double p : {1.5, 3.0}) {
    const HardyParams q(3, 1, p, 0.0, 0.0);
    const double hp = hardy_exponent(q).abs_pow_p;
    const auto w = solve_M(q, AxisymmetricBand(0.2, 1.3), 256).M;
    const auto n = solve_M(q, AxisymmetricBand(0.4, 1.0), 256).M;
    CHECK(n > w);
    CHECK(w - hp > 1e-3);
  }
}

TEST_CASE("M >= |H|^p and closed form agreement on random configurations (property)") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ua(-0.6, 0.7), ub(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 5);
    const HardyParams params(d, 1, 2.0, ua(rng), ub(rng));
    const auto r = solve_M(params, ComplementSigma0{}, 512);
    const double exact = (d - 1) * (1.0 - params.a()) + std::pow(hardy_exponent(params).value, 2);
    CHECK(r.M >= hardy_exponent(params).abs_pow_p - 1e-8);
    CHECK(rel(r.M, exact) < 1e-3);
  }
}

TEST_CASE("discrete eigenfunction matches cos^(2-k-a)") {
  const HardyParams params(3, 1, 2.0, 0.5, 0.0);
  const auto r = solve_M(params, ComplementSigma0{}, 1024);
  const auto closed = closed_eigen_sigma0(params);
  const double scale = r.minimizer.values.front() / closed.phi1(r.minimizer.mesh.nodes.front());
  for (double theta : {0.3, 0.8, 1.2, 1.5}) {
    const auto at = AngularPoint::from_theta(theta);
    CHECK(r.minimizer.at(at).value == doctest::Approx(scale * closed.phi1(at)).epsilon(1e-3));
  }
}

TEST_CASE("p-Rayleigh descent") {
  SUBCASE("p = 2 agrees with the eigen path") {
    const HardyParams params(4, 1, 2.0, 0.2, 0.0);
    const auto domain = bc_for_cone(params, ComplementSigma0{});
    const auto eig = solve_on_domain(params, domain, 256);
    const auto mesh = graded_mesh(domain, 256, default_grading(params, domain));
    const auto desc = minimize_rayleigh_p(params, domain, 256, default_initial_profile(params, domain, mesh));
    CHECK(rel(desc.M, eig.M) < 1e-6);
  }
  SUBCASE("natural ends recover the constant minimizer") {
    for (double p : {1.5, 3.0}) {
      const HardyParams params(3, 1, p, 0.5, 0.0);
      const AngularDomain domain;
      const auto mesh = graded_mesh(domain, 128, 2.0);
      DiscretizedFunction init{mesh, std::vector<double>(mesh.size())};
      for (std::size_t j = 0; j < mesh.size(); ++j) init.values[j] = 1.0 + 0.5 * std::cos(3.0 * mesh.nodes[j].theta);
      const auto r = minimize_rayleigh_p(params, domain, 128, init);
      CHECK(rel(r.M, hardy_exponent(params).abs_pow_p) < 1e-6);
      const auto [lo, hi] = std::minmax_element(r.minimizer.values.begin(), r.minimizer.values.end());
      CHECK((*hi - *lo) / *hi < 1e-3);
    }
  }
}
