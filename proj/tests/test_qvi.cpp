#include <cmath>

#include <doctest.h>

#include "hpg/qvi.hpp"

using namespace hpg;
using Eigen::VectorXd;

namespace {

ThermoformingData constant_g(double c, double gamma) {
  ThermoformingData t = thermoforming_data();
  t.g = [c](double) { return c; };
  t.dg = [](double) { return 0.0; };
  t.gamma = gamma;
  return t;
}

}  // namespace

TEST_CASE("temperature equation with constant data") {
  const Discretization d(uniform_mesh_2d(0, 1, 3, 4), ConstraintKind::Obstacle);
  const VectorXd u = VectorXd::Random(d.num_u());

  VectorXd T;
  const auto zero = temperature_solve(d, constant_g(0.0, 1.0), u, T);
  CHECK(zero.converged);
  CHECK(zero.newton <= 1);
  CHECK(T.isZero());

  T.resize(0);
  const auto c = temperature_solve(d, constant_g(0.3, 2.0), u, T);
  CHECK(c.converged);
  CHECK(c.newton == 1);
  const FemFunction t = FemFunction::from_u(d, T);
  for (double x : {0.0, 0.1, 0.5, 0.77, 1.0})
    for (double y : {0.0, 0.33, 0.9}) CHECK(t.value(x, y) == doctest::Approx(0.15).epsilon(1e-9));

  CHECK_THROWS(temperature_solve(d, constant_g(0.3, 0.0), u, T));
}

TEST_CASE("temperature Newton on the thermoforming data") {
  const Discretization d(uniform_mesh_2d(0, 1, 2, 5), ConstraintKind::Obstacle);
  const auto data = thermoforming_data();
  VectorXd u = VectorXd::Zero(d.num_u());
  VectorXd T;
  const auto rep = temperature_solve(d, data, u, T);
  REQUIRE(rep.converged);
  CHECK(rep.newton <= 3);
  for (int g : rep.gmres) CHECK(g <= 6);
  // with u = 0 and T >= 0 the argument Phi_0 + xi T lies in (0, 1) near the centre, so T > 0 there
  CHECK(FemFunction::from_u(d, T).value(0.5, 0.5) > 0);
}

TEST_CASE("no feedback decouples the fixed point") {
  ThermoformingData data = thermoforming_data();
  data.xi = [](double, double) { return 0.0; };
  const auto r = thermoform_solve(uniform_mesh_2d(0, 1, 4, 4), data);
  CHECK(r.report.converged);
  REQUIRE(r.report.fixed_point() == 2);
  CHECK(r.report.steps[1].increment < 1e-10);
}

TEST_CASE("thermoforming setup") {
  const TensorMesh2D mesh = uniform_mesh_2d(0, 1, 4, 6);
  const auto data = thermoforming_data();
  const auto r = thermoform_solve(mesh, data);
  const auto& rep = r.report;
  CHECK(rep.converged);
  CHECK(rep.fixed_point() == 4);
  for (int i = 1; i < rep.fixed_point(); ++i) CHECK(rep.steps[i].increment < rep.steps[i - 1].increment);
  CHECK(rep.newton_II_avg() <= 3);
  CHECK(rep.gmres_II_avg() <= 4);

  const Discretization d(mesh, ConstraintKind::Obstacle);
  const FemFunction u = FemFunction::from_u(d, r.u);
  const Field phi = mould(d, data, r.T);
  double excess = 0;
  for (int i = 0; i <= 60; ++i)
    for (int j = 0; j <= 60; ++j) excess = std::max(excess, u.value(i / 60.0, j / 60.0) - phi(i / 60.0, j / 60.0));
  MESSAGE("max(u - mould) = " << excess);
  CHECK(excess < 0.05);
}
