#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "pullin/beam_fe.hpp"
#include "pullin/errors.hpp"
#include "pullin/field.hpp"
#include "pullin/specimens.hpp"

using namespace pullin;

namespace {

Specimen specimen(const char* id) { return *find_in_catalog(id); }

// Thin wide strips, w/g = 100.
Specimen strip() {
  Specimen s = specimen("4");
  s.gap = 1e-6;
  s.width = 100e-6;
  s.thickness = 0.1e-6;
  s.length = 100e-6;
  s.counter_electrode_extent = 100e-6;
  return s;
}

// Settings under which the zero-flux truncation of the FEM box is negligible.
DomainOptions far_box() {
  DomainOptions o;
  o.margin_factor = 20.0;
  return o;
}

FemOptions fine_fem() {
  FemOptions f;
  f.refinement = 4.0;
  return f;
}

// Quadratic profile v = tip (x / l)^2 with consistent rotations.
Displacement bent(const BeamMesh& mesh, double tip) {
  Displacement d = Displacement::zero(mesh.node_count());
  const double l = mesh.length();
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const double x = mesh.nodes[i];
    d.v[i] = tip * x * x / (l * l);
    d.theta[i] = 2.0 * tip * x / (l * l);
  }
  return d;
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("field") {

TEST_CASE("parallel-plate pressure") {
  CHECK(parallel_plate_pressure(0.0, 3e-6) == 0.0);
  CHECK(parallel_plate_pressure(10.0, 3e-6) == doctest::Approx(49.19).epsilon(1e-3));
  CHECK(parallel_plate_pressure(10.0, 3e-6, 1.3) ==
        doctest::Approx(1.3 * parallel_plate_pressure(10.0, 3e-6)));
  for (double v : {0.1, 3.0, 250.0})
    CHECK(parallel_plate_pressure(2.0 * v, 2e-6) == 4.0 * parallel_plate_pressure(v, 2e-6));
  CHECK_THROWS_AS(parallel_plate_pressure(1.0, 0.0), ContactSignal);
  CHECK_THROWS_AS(parallel_plate_pressure(1.0, -1e-7), ContactSignal);
}

TEST_CASE("undeformed length-plane domain of specimen 4") {
  const Specimen s = specimen("4");
  const FieldDomain dom = build_field_domain(s);
  CHECK(dom.min_gap() == doctest::Approx(10e-6));
  CHECK(dom.counter_electrode.x0 == doctest::Approx(0.0));
  CHECK(dom.counter_electrode.x1 == doctest::Approx(s.length));
  CHECK(dom.counter_electrode.y0 - dom.beam.y1 == doctest::Approx(10e-6));
  for (const Vec2& p : dom.beam_boundary()) CHECK(p.y == doctest::Approx(dom.beam.y1));
  CHECK(dom.overlap_length() == doctest::Approx(s.length));
  CHECK(dom.outer.x1 - s.length >= 5.0 * s.gap * (1.0 - 1e-12));
  CHECK_FALSE(dom.wafer_surface_boundary().has_value());
}

TEST_CASE("deformed domain follows the beam") {
  const Specimen s = specimen("4");
  const BeamMesh mesh = build_mesh(s, 40);
  const FieldDomain dom = build_field_domain(s, mesh, bent(mesh, 0.5 * s.gap));
  CHECK(dom.min_gap() == doctest::Approx(0.5 * s.gap).epsilon(1e-9));
  CHECK(dom.offset_at(s.length) == doctest::Approx(0.5 * s.gap));
  CHECK(dom.beam_boundary().back().y == doctest::Approx(dom.beam.y1 + 0.5 * s.gap));
  CHECK_THROWS_AS(build_field_domain(s, mesh, bent(mesh, 1.01 * s.gap)), ContactSignal);
}

TEST_CASE("half-length counter-electrode sits at the tip side") {
  Specimen s = specimen("4");
  s.counter_electrode_extent = s.length / 2.0;
  const FieldDomain dom = build_field_domain(s);
  const auto e = dom.counter_electrode_boundary();
  double lo = e.front().x;
  double hi = e.front().x;
  for (const Vec2& p : e) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  CHECK(lo == doctest::Approx(s.length / 2.0));
  CHECK(hi == doctest::Approx(s.length));
  CHECK(dom.overlap_length() == doctest::Approx(s.length / 2.0));
}

TEST_CASE("section domain with a wafer surface") {
  const Specimen s = specimen("4");
  const FieldDomain dom = build_section_domain(s, true);
  REQUIRE(dom.wafer_surface_boundary().has_value());
  CHECK(*dom.wafer_x == doctest::Approx(-s.gap));
  CHECK(dom.depth == doctest::Approx(s.length));
}

TEST_CASE("zero voltage gives zero charge and potential") {
  const FieldDomain dom = build_field_domain(specimen("10"));
  const FieldSolution bem = bem_solve(dom, 0.0);
  for (double sigma : bem.beam_charge_density()) CHECK(sigma == 0.0);
  CHECK(bem.beam_charge == 0.0);
  CHECK_THROWS_AS(capacitance(bem), NumericalError);
  const FieldSolution fem = fem_solve(dom, 0.0);
  for (double phi : fem.potentials) CHECK(phi == 0.0);
  const FieldSolution pp = parallel_plate_solve(dom, 0.0);
  const BeamMesh mesh = build_mesh(specimen("10"), 40);
  for (double p : surface_traction(pp, mesh).pressure) CHECK(p == 0.0);
}

TEST_CASE("wide parallel strips approach the ideal capacitance") {
  const FieldDomain dom = build_section_domain(strip(), false, far_box());
  const double ideal = kVacuumPermittivity * 100.0;
  const double c_bem = capacitance(bem_solve(dom, 1.0));
  const double c_fem = capacitance(fem_solve(dom, 1.0, fine_fem()));
  CHECK(relative(c_bem, ideal) < 0.05);
  CHECK(relative(c_fem, ideal) < 0.05);
  CHECK(relative(c_fem, c_bem) < 0.01);
  CHECK(c_bem > ideal);
}

TEST_CASE("property: BEM and FEM capacitances agree on shared domains") {
  const FieldDomain domains[] = {
      build_section_domain(specimen("4"), false, far_box()),
      build_field_domain(specimen("10"), far_box()),
      build_field_domain(specimen("4"), far_box()),
      build_section_domain(specimen("10"), false, far_box()),
  };
  for (const auto& dom : domains) {
    const double c_bem = capacitance(bem_solve(dom, 1.0));
    const double c_fem = capacitance(fem_solve(dom, 1.0, fine_fem()));
    CHECK(relative(c_fem, c_bem) < 0.01);
  }
}

TEST_CASE("FEM potential at midgap of a wide plate is half the voltage") {
  const FieldDomain dom = build_section_domain(strip(), false);
  const FieldSolution sol = fem_solve(dom, 5.0);
  const Vec2 mid{0.5 * (dom.beam.x0 + dom.beam.x1), 0.5 * (dom.beam.y1 + dom.counter_electrode.y0)};
  CHECK(sol.potential_at(mid) == doctest::Approx(2.5).epsilon(0.02));
  CHECK_THROWS_AS(bem_solve(dom, 5.0).potential_at(mid), NumericalError);
}

TEST_CASE("property: traction is exactly quadratic in voltage for every method") {
  const Specimen s = specimen("10");
  const BeamMesh mesh = build_mesh(s, 40);
  const FieldDomain dom = build_field_domain(s, mesh, bent(mesh, 0.3 * s.gap));
  for (FieldMethod m : {FieldMethod::ParallelPlate, FieldMethod::BEM, FieldMethod::FEM}) {
    const auto t1 = surface_traction(solve_field(m, dom, 7.0), mesh).line_load;
    const auto t2 = surface_traction(solve_field(m, dom, 14.0), mesh).line_load;
    const auto tn = surface_traction(solve_field(m, dom, -7.0), mesh).line_load;
    double worst = 0.0;
    double scale = 0.0;
    for (double t : t1) scale = std::max(scale, std::abs(t));
    for (std::size_t e = 0; e < t1.size(); ++e) {
      worst = std::max(worst, std::abs(t2[e] - 4.0 * t1[e]) / (4.0 * scale));
      CHECK(tn[e] == doctest::Approx(t1[e]).epsilon(1e-12));
    }
    CAPTURE(to_string(m));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("attractive traction for both polarities") {
  const Specimen s = specimen("4");
  const BeamMesh mesh = build_mesh(s, 40);
  const FieldDomain dom = build_field_domain(s);
  for (double v : {-20.0, 20.0}) {
    double total = 0.0;
    for (double q : surface_traction(bem_solve(dom, v), mesh).line_load) total += q;
    CHECK(total > 0.0);
  }
}

TEST_CASE("parallel-plate solution recovers the ideal pressure") {
  const Specimen s = specimen("4");
  const BeamMesh mesh = build_mesh(s, 40);
  const FieldSolution sol = parallel_plate_solve(build_field_domain(s), 30.0);
  const double ideal = parallel_plate_pressure(30.0, s.gap);
  for (double p : surface_traction(sol, mesh).pressure) CHECK(p == doctest::Approx(ideal).epsilon(0.02));
}

TEST_CASE("gap-facing charge has one sign") {
  const FieldDomain dom = build_field_domain(specimen("4"));
  for (double v : {-3.0, 3.0}) {
    const FieldSolution sol = bem_solve(dom, v);
    const auto& sigma = sol.beam_charge_density();
    const bool negative = sigma[sigma.size() / 2] < 0.0;
    for (std::size_t k = 0; k < sigma.size(); ++k) {
      if (sigma[k] == 0.0) continue;
      CHECK((sigma[k] < 0.0) == negative);
    }
  }
}

TEST_CASE("property: BEM charge neutrality with a far box and no wafer") {
  for (const auto& dom : {build_field_domain(specimen("10"), far_box()),
                          build_section_domain(specimen("4"), false, far_box())}) {
    const FieldSolution sol = bem_solve(dom, 1.0);
    CHECK(sol.electrode_charge / sol.beam_charge == doctest::Approx(-1.0).epsilon(0.01));
  }
}

TEST_CASE("property: charge concentrates at the tip of a finite electrode") {
  for (const char* id : {"4", "10"}) {
    for (FieldMethod m : {FieldMethod::BEM, FieldMethod::FEM}) {
      const FieldSolution sol = solve_field(m, build_field_domain(specimen(id)), 1.0);
      const FaceProfile& f = sol.front;
      const double total = f.arc.back();
      double peak = 0.0;
      for (std::size_t k = 0; k < f.arc.size(); ++k)
        if (f.arc[k] >= 0.95 * total) peak = std::max(peak, std::abs(f.sigma[k]));
      const double mid = std::abs(f.value_at(0.5 * find_in_catalog(id)->length));
      CAPTURE(id);
      CAPTURE(to_string(m));
      CHECK(peak > mid);
    }
  }
}

TEST_CASE("capacitance grows with deflection and with closer plates") {
  const Specimen s = specimen("4");
  const BeamMesh mesh = build_mesh(s, 40);
  for (FieldMethod m : {FieldMethod::ParallelPlate, FieldMethod::BEM, FieldMethod::FEM}) {
    const double flat = capacitance(solve_field(m, build_field_domain(s), 1.0));
    const double deflected =
        capacitance(solve_field(m, build_field_domain(s, mesh, bent(mesh, 0.25 * s.gap)), 1.0));
    CAPTURE(to_string(m));
    CHECK(flat > 0.0);
    CHECK(deflected > flat);
  }

  Specimen close = strip();
  close.gap /= 2.0;
  const double pp_ratio = capacitance(parallel_plate_solve(build_section_domain(close, false), 1.0)) /
                          capacitance(parallel_plate_solve(build_section_domain(strip(), false), 1.0));
  CHECK(pp_ratio == doctest::Approx(2.0).epsilon(1e-12));
  const double bem_ratio = capacitance(bem_solve(build_section_domain(close, false), 1.0)) /
                           capacitance(bem_solve(build_section_domain(strip(), false), 1.0));
  CHECK(bem_ratio == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("morphing with zero displacement keeps the mesh") {
  const FieldDomain dom = build_field_domain(specimen("10"));
  const TriMesh mesh = build_reference_mesh(dom);
  CHECK(mesh.min_signed_area() > 0.0);
  CHECK(mesh.triangles.size() >= 1000);
  const TriMesh same = morph_mesh(mesh, std::vector<Vec2>(mesh.nodes.size()));
  REQUIRE(same.nodes.size() == mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    CHECK(same.nodes[i].x == mesh.nodes[i].x);
    CHECK(same.nodes[i].y == mesh.nodes[i].y);
  }
  CHECK(same.triangles == mesh.triangles);
}

TEST_CASE("property: rigid boundary translation moves the interior rigidly") {
  const FieldDomain dom = build_field_domain(specimen("4"));
  const TriMesh mesh = build_reference_mesh(dom);
  const Vec2 shift{0.3e-6, -0.2e-6};
  const TriMesh moved = morph_mesh(mesh, std::vector<Vec2>(mesh.nodes.size(), shift));
  CHECK(moved.triangles == mesh.triangles);
  double worst = 0.0;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    worst = std::max(worst, std::abs(moved.nodes[i].x - mesh.nodes[i].x - shift.x));
    worst = std::max(worst, std::abs(moved.nodes[i].y - mesh.nodes[i].y - shift.y));
  }
  CHECK(worst < 1e-9 * 0.3e-6);
}

TEST_CASE("large tip displacement on specimen 10 keeps areas positive or signals a remesh") {
  const Specimen s = specimen("10");
  const BeamMesh beam = build_mesh(s, 40);
  const FieldDomain flat = build_field_domain(s);
  const TriMesh mesh = build_reference_mesh(flat);
  const Displacement d = bent(beam, 0.8 * s.gap);
  const BeamShape shape = BeamShape::from(beam, d);
  std::vector<Vec2> motion(mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    if (mesh.tags[i] == NodeTag::Beam && mesh.nodes[i].x >= 0.0)
      motion[i] = {0.0, shape(mesh.nodes[i].x)};
  try {
    const TriMesh morphed = morph_mesh(mesh, motion);
    CHECK(morphed.min_signed_area() > 0.0);
  } catch (const RemeshSignal&) {
    CHECK(true);
  }
  const FieldSolution sol = fem_solve(build_field_domain(s, beam, d), 1.0);
  CHECK(sol.mesh->min_signed_area() > 0.0);
  CHECK(capacitance(sol) > capacitance(fem_solve(flat, 1.0)));
}

TEST_CASE("reference force-ratio scenarios") {
  const auto sc = scenario_catalog();
  REQUIRE(sc.size() == 3);
  CHECK(sc[0].force_ratio_3d_to_2d == doctest::Approx(1.88));
  CHECK(sc[1].force_ratio_3d_to_2d == doctest::Approx(2.1));
  CHECK(sc[2].force_ratio_3d_to_2d == doctest::Approx(1.05));
  for (const auto& c : sc) CHECK(c.force_ratio_3d_to_2d > 0.0);
}

TEST_CASE("calibration of degenerate parallel strips is close to one") {
  for (FieldMethod m : {FieldMethod::BEM, FieldMethod::FEM}) {
    const CorrectionFactors f = calibrate_correction(strip(), m);
    CAPTURE(to_string(m));
    CHECK(f.correction == doctest::Approx(1.0).epsilon(0.02));
    CHECK(f.correction == doctest::Approx(f.f_length * f.f_width).epsilon(1e-12));
  }
}

TEST_CASE("calibration trends") {
  Specimen half = specimen("4");
  half.counter_electrode_extent = half.length / 2.0;
  for (FieldMethod m : {FieldMethod::BEM, FieldMethod::FEM}) {
    CAPTURE(to_string(m));
    CHECK(length_factor(half, m) > 1.0);
    const double with_wafer = width_factor(specimen("4"), true, m);
    const double without = width_factor(specimen("4"), false, m);
    CHECK(without >= 1.0);
    CHECK(std::abs(with_wafer - 1.0) < std::abs(without - 1.0));
    CHECK(calibrate_correction(specimen("10"), m).correction > 1.0);
  }
}

TEST_CASE("debug dumps") {
  const FieldDomain dom = build_field_domain(specimen("10"));
  const FieldSolution sol = fem_solve(dom, 1.0);
  const std::string csv = charge_density_csv(sol);
  CHECK(csv.rfind("arc_length_m,sigma_c_per_m2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(sol.front.x.size()) + 1);
  const std::string off = mesh_off(*sol.mesh);
  CHECK(off.rfind("OFF\n", 0) == 0);
}

}  // TEST_SUITE
