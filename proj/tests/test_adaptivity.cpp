#include <cmath>

#include <doctest.h>

#include "hpg/adaptivity.hpp"
#include "hpg/assembly.hpp"
#include "hpg/linalg.hpp"

using namespace hpg;
using Eigen::VectorXd;

namespace {

VectorXd poisson(const Discretization& d, const Field& f) {
  return SpdSolver(assemble_stiffness(d), true).solve(d.load(f));
}

EstimatorInput input(const Discretization& d, const VectorXd& u, Field f, Field phi) {
  const VectorXd z = VectorXd::Zero(d.num_psi());
  return {&d, u, z, z, 1.0, std::move(f), std::move(phi)};
}

}  // namespace

TEST_CASE("legendre derivative") {
  CHECK(legendre_derivative(VectorXd::Ones(1)).isZero());
  const VectorXd d2 = legendre_derivative(VectorXd::Unit(3, 2));
  CHECK(d2.isApprox(VectorXd::Unit(2, 1) * 3));
  // P_3' = 5 P_2 + P_0
  const VectorXd d3 = legendre_derivative(VectorXd::Unit(4, 3));
  CHECK((d3 - Eigen::Vector3d(1, 0, 5)).norm() < 1e-14);
}

TEST_CASE("H1 error and distance") {
  const Discretization d(uniform_mesh_1d(0, 1, 2, 2), ConstraintKind::Obstacle);
  const auto two = [](double, double) { return 2.0; };
  const FemFunction u = FemFunction::from_u(d, poisson(d, two));
  CHECK(u.value(0.3) == doctest::Approx(0.21).epsilon(1e-12));

  const ExactSolution1D exact{[](double x) { return x * (1 - x); }, [](double x) { return 1 - 2 * x; }, {}};
  CHECK(h1_error_1d(u, exact) < 1e-12);
  const ExactSolution1D zero{[](double) { return 0.0; }, [](double) { return 0.0; }, {0.5}};
  CHECK(h1_error_1d(u, zero) == doctest::Approx(std::sqrt(11.0 / 30)).epsilon(1e-12));
  CHECK(h1_norm(u) == doctest::Approx(std::sqrt(11.0 / 30)).epsilon(1e-12));

  const Discretization d2(uniform_mesh_1d(0, 1, 3, 4), ConstraintKind::Obstacle);
  const auto s = [](double x, double) { return std::sin(3 * x); };
  const FemFunction a = FemFunction::from_u(d, poisson(d, s));
  const FemFunction b = FemFunction::from_u(d2, poisson(d2, s));
  CHECK(h1_distance(a, a) < 1e-14);
  CHECK(h1_distance(a, b) > 0);
  CHECK(h1_distance(a, b) == doctest::Approx(h1_distance(b, a)).epsilon(1e-12));
}

TEST_CASE("analyticity indicator") {
  VectorXd a(12), c(12), e2(12);
  for (int j = 0; j < 12; ++j) {
    a(j) = std::exp(-double(j));
    c(j) = 1.0;
    e2(j) = std::exp(-2.0 * j);
  }
  CHECK(fit_analyticity(a).indicator() == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  CHECK(fit_analyticity(a).indicator() == doctest::Approx(0.3679).epsilon(1e-4));
  CHECK(fit_analyticity(c).indicator() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit_analyticity(e2).indicator() == doctest::Approx(0.1353).epsilon(1e-3));
  // |log| keeps the slope only while every |a_j| stays on one side of 1
  const VectorXd small = 1e-2 * a;
  CHECK(std::abs(fit_analyticity(10 * small).m - fit_analyticity(small).m) < 1e-10);
  CHECK(fit_analyticity(10 * small).b == doctest::Approx(fit_analyticity(small).b - std::log(10.0)).epsilon(1e-12));

  VectorXd sparse = VectorXd::Zero(12);
  sparse(0) = 1;
  sparse(5) = 0.5;
  CHECK(fit_analyticity(sparse).degenerate);
  CHECK(fit_analyticity(sparse).indicator() == 1.0);
}

TEST_CASE("marking") {
  CHECK(mark_cells({1, 1, 1, 1}, 0.7).size() == 4);
  CHECK(mark_cells({0, 0, 0}, 0.7).empty());
  const std::vector<double> eta2{1.0, 0.81, 0.36, 0.04};
  CHECK(mark_cells(eta2, 0.95) == std::set<int>{0});
  CHECK(mark_cells(eta2, 0.9) == std::set<int>{0, 1});
  CHECK(mark_cells(eta2, 0.5) == std::set<int>{0, 1, 2});
  size_t prev = 0;
  for (double delta : {0.99, 0.8, 0.6, 0.4, 0.1}) {
    const size_t n = mark_cells(eta2, delta).size();
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("estimator examples") {
  const Discretization d(uniform_mesh_1d(0, 1, 4, 2), ConstraintKind::Obstacle);
  const auto two = [](double, double) { return 2.0; };
  const VectorXd u = poisson(d, two);

  const auto feasible = estimate_error(input(d, u, two, [](double, double) { return 1.0; }));
  REQUIRE(feasible.size() == 4);
  for (const auto& e : feasible) CHECK(e.eta2() < 1e-24);

  const auto violated = estimate_error(input(d, u, two, [](double, double) { return 0.0; }));
  double total = 0;
  for (const auto& e : violated) {
    CHECK(e.infeasibility > 0);
    total += e.infeasibility;
  }
  // int_0^1 (x - x^2)^2 dx
  CHECK(total == doctest::Approx(1.0 / 30).epsilon(1e-12));
  const auto pg = estimate_error(input(d, u, two, [](double, double) { return 0.0; }), EstimatorKind::ProximalGalerkin);
  for (const auto& e : pg) CHECK(e.complementarity == 0.0);

  const EstimatorInput in = input(d, u, two, [](double, double) { return 0.0; });
  const RefineResult r = hp_refine_step(in, violated, 0.8, 0.5);
  CHECK(!r.marked.empty());
  CHECK(r.mesh.num_cells() == 4 + static_cast<int>(r.marked.size()));
  CHECK_THROWS(hp_refine_step(in, violated, 1.0, 0.5));
  CHECK_THROWS(hp_refine_step(in, violated, 0.5, 0.0));
}
