#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "pullin/beam_fe.hpp"
#include "pullin/errors.hpp"
#include "pullin/oracles.hpp"
#include "pullin/specimens.hpp"

using namespace pullin;

namespace {

Specimen specimen(const char* id) { return *find_in_catalog(id); }

double flexural_rigidity(const BeamMesh& m) {
  return m.material.young_modulus * m.section.second_moment;
}

LoadState tip_load(const BeamMesh& mesh, double p) {
  LoadState l = LoadState::zero(mesh);
  l.nodal_loads.back().fv = p;
  return l;
}

LoadState uniform_load(const BeamMesh& mesh, double q) {
  LoadState l = LoadState::zero(mesh);
  l.distributed_pressure.assign(mesh.element_count(), q);
  return l;
}

double nonlinear_tip(const BeamMesh& mesh, const LoadState& loads) {
  NonlinearOptions opt;
  const NonlinearResult r = solve_equilibrium(mesh, loads, nullptr, opt);
  REQUIRE(r.converged());
  return tip_deflection(r.displacement);
}

LoadState initial_state_only(const BeamMesh& mesh, const InitialState& init) {
  LoadState l = LoadState::zero(mesh);
  l.equivalent_initial_loads = initial_state_loads(init, mesh);
  return l;
}

}  // namespace

TEST_SUITE("beam_fe") {

TEST_CASE("uniform meshes") {
  const BeamMesh m4 = build_mesh(specimen("4"), 40);
  CHECK(m4.node_count() == 41);
  CHECK(m4.element_count() == 40);
  for (std::size_t e = 0; e < m4.element_count(); ++e) {
    CHECK(m4.element_length(e) == doctest::Approx(5.125e-6).epsilon(1e-12));
    CHECK(m4.elements[e].second == m4.elements[e].first + 1);
  }
  CHECK(m4.nodes.front() == 0.0);
  CHECK(m4.nodes.back() == doctest::Approx(205e-6).epsilon(1e-14));

  CHECK(build_mesh(specimen("1"), 4).node_count() == 5);
  const BeamMesh m6 = build_mesh(specimen("6"), 80);
  CHECK(m6.node_count() == 81);
  CHECK(m6.element_length(17) == doctest::Approx(805e-6 / 80).epsilon(1e-12));
  CHECK(build_mesh(specimen("4")).element_count() == 40);
}

TEST_CASE("fewer than four elements is a configuration error") {
  CHECK_THROWS_AS(build_mesh(specimen("4"), 3), ConfigError);
}

TEST_CASE("element matrices") {
  const BeamMesh mesh = build_mesh(specimen("4"), 40);
  const double le = mesh.element_length(0);
  const ElementMatrices free = element_matrices(le, mesh.material, mesh.section, 0.0);
  CHECK(free.geometric_stiffness.isZero(0.0));
  CHECK((free.stiffness - free.stiffness.transpose()).norm() <= 1e-14 * free.stiffness.norm());

  const ElementMatrices loaded = element_matrices(le, mesh.material, mesh.section, 1e-3);
  CHECK_FALSE(loaded.geometric_stiffness.isZero(0.0));
  CHECK((loaded.geometric_stiffness - loaded.geometric_stiffness.transpose()).norm() <=
        1e-14 * loaded.geometric_stiffness.norm());
  const ElementMatrices doubled = element_matrices(le, mesh.material, mesh.section, 2e-3);
  CHECK((doubled.geometric_stiffness - 2.0 * loaded.geometric_stiffness).norm() <=
        1e-12 * doubled.geometric_stiffness.norm());

  CHECK_THROWS_AS(element_matrices(0.0, mesh.material, mesh.section, 0.0), NumericalError);

  const double g = mesh.material.shear_modulus();
  CHECK(g == doctest::Approx(160e9 / (2.0 * 1.22)));
  CHECK(shear_parameter(le, mesh.material, mesh.section) ==
        doctest::Approx(12.0 * 160e9 * mesh.section.second_moment /
                        (5.0 / 6.0 * g * mesh.section.area * le * le)));
}

TEST_CASE("property: clamped stiffness is symmetric positive definite") {
  for (const char* id : {"1", "4", "10"}) {
    const BeamMesh mesh = build_mesh(specimen(id), 12);
    const Eigen::MatrixXd k = Eigen::MatrixXd(assemble_linear_stiffness(mesh));
    const Eigen::MatrixXd kr = k.bottomRightCorner(k.rows() - 3, k.cols() - 3);
    CAPTURE(id);
    CHECK((kr - kr.transpose()).norm() <= 1e-14 * kr.norm());
    Eigen::LLT<Eigen::MatrixXd> llt(kr);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("tip point load on specimen 4") {
  const BeamMesh mesh = build_mesh(specimen("4"), 40);
  const double l = mesh.length();
  const double expected = 1e-6 * l * l * l / (3.0 * flexural_rigidity(mesh));
  CHECK(expected == doctest::Approx(2.09e-6).epsilon(0.01));
  const Displacement d = solve_linear(mesh, tip_load(mesh, 1e-6));
  CHECK(tip_deflection(d) == doctest::Approx(expected).epsilon(0.01));
  CHECK(tip_deflection(d) > 0.0);
  CHECK(d.reference == Reference::Undeformed);
  CHECK(d.v[0] == 0.0);
  CHECK(d.theta[0] == 0.0);
  CHECK(d.u[0] == 0.0);
}

TEST_CASE("slender Euler-Bernoulli limit") {
  Specimen s = specimen("4");
  s.length = 100.0 * s.thickness;
  s.counter_electrode_extent = s.length;
  const BeamMesh mesh = build_mesh(s, 40);
  const double p = 1e-7;
  const double l = mesh.length();
  CHECK(tip_deflection(solve_linear(mesh, tip_load(mesh, p))) ==
        doctest::Approx(p * l * l * l / (3.0 * flexural_rigidity(mesh))).epsilon(0.01));
}

TEST_CASE("uniform line load follows q l^4 / 8EJ") {
  const BeamMesh mesh = build_mesh(specimen("4"), 40);
  const double q = 1e-3;
  const double l = mesh.length();
  CHECK(tip_deflection(solve_linear(mesh, uniform_load(mesh, q))) ==
        doctest::Approx(q * std::pow(l, 4) / (8.0 * flexural_rigidity(mesh))).epsilon(0.01));
}

TEST_CASE("zero loads give zero displacement") {
  const BeamMesh mesh = build_mesh(specimen("4"), 40);
  const Displacement d = solve_linear(mesh, LoadState::zero(mesh));
  CHECK(tip_deflection(d) == 0.0);
  CHECK(d.to_vector().isZero(0.0));
  CHECK(tip_deflection(Displacement::zero(41)) == 0.0);
  CHECK(initial_state_loads(InitialState{}, mesh).isZero(0.0));
}

TEST_CASE("property: linear solution scales with the load") {
  const BeamMesh mesh = build_mesh(specimen("2"), 40);
  LoadState base = uniform_load(mesh, 3e-4);
  base.nodal_loads[20].moment = 2e-12;
  base.nodal_loads.back().fu = 1e-5;
  const Eigen::VectorXd d1 = solve_linear(mesh, base).to_vector();
  for (double alpha : {-2.0, 0.5, 7.0, 1e3}) {
    LoadState scaled = base;
    for (auto& q : scaled.distributed_pressure) q *= alpha;
    for (auto& n : scaled.nodal_loads) {
      n.fv *= alpha;
      n.moment *= alpha;
      n.fu *= alpha;
    }
    const Eigen::VectorXd d2 = solve_linear(mesh, scaled).to_vector();
    CAPTURE(alpha);
    CHECK((d2 - alpha * d1).norm() <= 1e-12 * std::abs(alpha) * d1.norm());
  }
}

TEST_CASE("property: resultants reproduce N = EA eps and M = EJ kappa") {
  const BeamMesh mesh = build_mesh(specimen("4"), 40);
  const double eps = 3e-5;
  const double kappa = 150.0;
  Displacement d = Displacement::zero(mesh.node_count());
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const double x = mesh.nodes[i];
    d.u[i] = eps * x;
    d.v[i] = 0.5 * kappa * x * x;
    d.theta[i] = kappa * x;
  }
  const double ea = mesh.material.young_modulus * mesh.section.area;
  const double ej = flexural_rigidity(mesh);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const ElementResultants r = element_resultants(mesh, d, e);
    CAPTURE(e);
    CHECK(std::abs(r.axial_force - ea * eps) <= 1e-10 * ea * eps);
    CHECK(std::abs(r.moment_i - ej * kappa) <= 1e-10 * ej * kappa);
    CHECK(std::abs(r.moment_j - ej * kappa) <= 1e-10 * ej * kappa);
  }
}

TEST_CASE("initial strain develops the axial resultant EA eps0") {
  const BeamMesh mesh = build_mesh(specimen("4"), 40);
  InitialState init;
  init.strain_initial = 1e-4;
  const Displacement d = solve_linear(mesh, initial_state_only(mesh, init));
  for (std::size_t e = 0; e < mesh.element_count(); ++e)
    CHECK(element_resultants(mesh, d, e).axial_force == doctest::Approx(4.56e-4).epsilon(1e-9));
  CHECK(d.u.back() == doctest::Approx(1e-4 * mesh.length()).epsilon(1e-9));
}

TEST_CASE("preloads and thermal terms enter the eigen-deformation") {
  const BeamMesh mesh = build_mesh(specimen("10"), 40);
  const double ea = mesh.material.young_modulus * mesh.section.area;
  const double ej = flexural_rigidity(mesh);
  const double alpha = mesh.material.thermal_expansion;
  InitialState init;
  init.axial_preload = 2e-4;
  init.moment_preload = 3e-10;
  init.temp_uniform = {{0.0, mesh.length()}, {10.0, 10.0}};
  // T = c y makes the section integral c J, so the thermal curvature is alpha c.
  const double c = 5e6;
  const double t = mesh.section.flexural_dim;
  init.temp_field = {{0.0, mesh.length()}, {-t, t}, {{-c * t, c * t}, {-c * t, c * t}}};
  CHECK(thermal_curvature(init, mesh, 0.3 * mesh.length()) ==
        doctest::Approx(alpha * c).epsilon(1e-12));
  for (const auto& ed : initial_eigen_deformation(init, mesh)) {
    CHECK(ed.axial_strain == doctest::Approx(-alpha * 10.0 + 2e-4 / ea).epsilon(1e-12));
    CHECK(ed.curvature == doctest::Approx(-alpha * c + 3e-10 / ej).epsilon(1e-12));
  }
}

TEST_CASE("curvature from tip offset") {
  CHECK(curvature_from_tip_offset(4.0e-6, 190e-6) == doctest::Approx(221.6).epsilon(1e-3));
  CHECK(curvature_from_tip_offset(0.0, 190e-6) == 0.0);
  CHECK(curvature_from_tip_offset(0.04e-6, 190e-6) == doctest::Approx(2.216).epsilon(1e-3));
  CHECK_THROWS_AS(curvature_from_tip_offset(1e-6, 0.0), ConfigError);
}

TEST_CASE("initial curvature of specimen 10 lifts the tip by the measured offset") {
  const BeamMesh mesh = build_mesh(specimen("10"), 40);
  InitialState init;
  init.curvature_initial = 221.6;
  const LoadState loads = initial_state_only(mesh, init);
  CHECK(tip_deflection(solve_linear(mesh, loads)) == doctest::Approx(4.0e-6).epsilon(0.01));
  CHECK(nonlinear_tip(mesh, loads) == doctest::Approx(4.0e-6).epsilon(0.01));
}

TEST_CASE("property: initial-curvature superposition for small kappa0 l") {
  for (const char* id : {"9", "10", "11", "12"}) {
    const BeamMesh mesh = build_mesh(specimen(id), 40);
    const double l = mesh.length();
    for (double kl : {-0.04, 0.001, 0.02, 0.049}) {
      InitialState init;
      init.curvature_initial = kl / l;
      CAPTURE(id);
      CAPTURE(kl);
      CHECK(nonlinear_tip(mesh, initial_state_only(mesh, init)) ==
            doctest::Approx(0.5 * init.curvature_initial * l * l).epsilon(0.01));
    }
  }
}

TEST_CASE("nonlinear Newton with a constant small load") {
  const BeamMesh mesh = build_mesh(specimen("4"), 40);
  const double l = mesh.length();
  const double p = 1e-4 * l * 3.0 * flexural_rigidity(mesh) / std::pow(l, 3);
  const LoadState loads = tip_load(mesh, p);
  const double linear = tip_deflection(solve_linear(mesh, loads));
  REQUIRE(linear < 1e-3 * l);
  const NonlinearResult r =
      solve_nonlinear(mesh, [&](const Displacement&) { return loads; }, 1e-10, 50);
  REQUIRE(r.converged());
  CHECK(r.iterations <= 10);
  CHECK(r.displacement.reference == Reference::Updated);
  CHECK(std::abs(tip_deflection(r.displacement) - linear) / linear < 1e-3);
}

TEST_CASE("property: nonlinear and linear agree for tip deflection below 1e-3 l") {
  for (const char* id : {"1", "4", "6", "9", "12"}) {
    const BeamMesh mesh = build_mesh(specimen(id), 40);
    const double l = mesh.length();
    const double ej = flexural_rigidity(mesh);
    for (double target : {1e-5, 1e-4, 9e-4}) {
      const LoadState point = tip_load(mesh, target * l * 3.0 * ej / std::pow(l, 3));
      const LoadState line = uniform_load(mesh, target * l * 8.0 * ej / std::pow(l, 4));
      for (const LoadState* loads : {&point, &line}) {
        const double linear = tip_deflection(solve_linear(mesh, *loads));
        CAPTURE(id);
        CAPTURE(target);
        CHECK(std::abs(nonlinear_tip(mesh, *loads) - linear) / linear < 1e-2);
      }
    }
  }
}

TEST_CASE("large tip load follows the elastica") {
  const BeamMesh mesh = build_mesh(specimen("4"), 40);
  const double l = mesh.length();
  const double ej = flexural_rigidity(mesh);
  const double p = ej / (l * l);
  const double reference = oracles::elastica_tip(p, l, ej);
  REQUIRE(reference / l == doctest::Approx(0.30).epsilon(0.02));
  CHECK(nonlinear_tip(mesh, tip_load(mesh, p)) == doctest::Approx(reference).epsilon(0.02));
  const NonlinearResult r =
      solve_nonlinear(mesh, [&](const Displacement&) { return tip_load(mesh, p); }, 1e-10, 50);
  REQUIRE(r.converged());
  CHECK(tip_deflection(r.displacement) == doctest::Approx(reference).epsilon(0.02));
}

TEST_CASE("property: tip deflection converges under mesh doubling") {
  for (const char* id : {"1", "4", "10"}) {
    const Specimen s = specimen(id);
    const BeamMesh m40 = build_mesh(s, 40);
    const BeamMesh m80 = build_mesh(s, 80);
    const double q = 0.05 * 8.0 * flexural_rigidity(m40) / std::pow(m40.length(), 3);
    const double t40 = nonlinear_tip(m40, uniform_load(m40, q));
    const double t80 = nonlinear_tip(m80, uniform_load(m80, q));
    CAPTURE(id);
    CHECK(std::abs(t80 - t40) / std::abs(t40) < 5e-3);
  }
}

TEST_CASE("hermite interpolation reproduces nodal values") {
  const BeamMesh mesh = build_mesh(specimen("4"), 40);
  const Displacement d = solve_linear(mesh, uniform_load(mesh, 1e-3));
  CHECK(d.deflection_at(mesh, mesh.nodes[13]) == doctest::Approx(d.v[13]).epsilon(1e-12));
  CHECK(d.deflection_at(mesh, mesh.length()) == doctest::Approx(tip_deflection(d)).epsilon(1e-12));
  const auto h = hermite_shape(0.5, 2.0);
  CHECK(h[0] + h[2] == doctest::Approx(1.0));
  const Displacement back =
      Displacement::from_vector(d.to_vector(), Reference::Undeformed);
  CHECK(back.v == d.v);
}

}  // TEST_SUITE
