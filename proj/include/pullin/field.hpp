#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pullin/beam_fe.hpp"
#include "pullin/specimens.hpp"

namespace pullin {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Rect {
  double x0 = 0.0;
  double x1 = 0.0;
  double y0 = 0.0;
  double y1 = 0.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

enum class FieldMethod { ParallelPlate, BEM, FEM };
enum class DrivenElectrode { CounterElectrode, Beam };

std::string to_string(FieldMethod method);
FieldMethod field_method_from_string(const std::string& text);

// Transverse offset of the movable conductor as a function of the reference
// abscissa, Hermite-interpolated from beam nodes. Empty means undeformed.
struct BeamShape {
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> theta;

  double operator()(double at) const;
  bool empty() const { return x.empty(); }
  static BeamShape from(const BeamMesh& mesh, const Displacement& d);
};

// 2D electrostatic problem: a movable conductor (beam, plus a rigid anchor
// extension for x < 0) facing a counter-electrode across the gap along +y.
struct FieldDomain {
  Rect beam;                // reference rectangle of the movable conductor
  double flexible_start = 0.0;  // shape applies for x >= flexible_start
  BeamShape shape;
  Rect counter_electrode;
  std::optional<double> wafer_x;  // grounded plane x = wafer_x; the domain lies at x > wafer_x
  Rect outer;
  double permittivity = kVacuumPermittivity;
  double gap = 0.0;    // nominal gap
  double depth = 1.0;  // extrusion used for forces and capacitance in SI
  DrivenElectrode driven = DrivenElectrode::CounterElectrode;

  double beam_potential(double voltage) const {
    return driven == DrivenElectrode::Beam ? voltage : 0.0;
  }
  double electrode_potential(double voltage) const {
    return driven == DrivenElectrode::CounterElectrode ? voltage : 0.0;
  }
  double offset_at(double x) const;

  // Deformed gap-facing surface of the beam, from the anchor end to the tip.
  std::vector<Vec2> beam_boundary(int samples = 64) const;
  std::vector<Vec2> counter_electrode_boundary() const;
  std::optional<std::vector<Vec2>> wafer_surface_boundary() const;
  std::vector<Vec2> outer_boundary() const;

  // Minimum local gap over the electrode overlap.
  double min_gap() const;
  // Overlap of the flexible beam part with the counter-electrode along x.
  double overlap_length() const;
  void validate() const;
};

struct DomainOptions {
  double margin_factor = 5.0;  // outer box margin in gaps
  DrivenElectrode driven = DrivenElectrode::CounterElectrode;
};

// Length-plane domain for the current beam configuration. Throws ContactSignal
// when the deformed beam reaches the electrode.
FieldDomain build_field_domain(const Specimen& s, const BeamMesh& mesh, const Displacement& d,
                               const DomainOptions& options = {});
FieldDomain build_field_domain(const Specimen& s, const DomainOptions& options = {});

// Width-plane (cross-section) domain of the undeformed beam. The wafer, when
// requested, is a grounded plane below the lateral edge of beam and electrode.
FieldDomain build_section_domain(const Specimen& s, bool wafer_surface,
                                 const DomainOptions& options = {});

// Sampled surface charge density along one beam face, parameterized by the
// reference abscissa and interpolated linearly.
struct FaceProfile {
  std::vector<double> x;
  std::vector<double> arc;  // deformed arc length from the first sample
  std::vector<double> sigma;

  double integrate(double a, double b) const;         // of sigma
  double integrate_square(double a, double b) const;  // of sigma^2
  double value_at(double at) const;
};

// Triangulation of the dielectric region.
enum class NodeTag : int { Free = 0, Beam = 1, Electrode = 2, Wafer = 3, Outer = 4 };

struct TriMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<NodeTag> tags;

  double signed_area(std::size_t t) const;
  double min_signed_area() const;
};

struct FieldSolution {
  FieldMethod method = FieldMethod::ParallelPlate;
  double applied_voltage = 0.0;
  double permittivity = kVacuumPermittivity;
  double depth = 1.0;
  double potential_difference = 0.0;  // beam minus electrode potential
  FaceProfile front;  // gap-facing face (beam_charge_density)
  FaceProfile back;   // opposite face
  double beam_charge = 0.0;       // per unit depth, C/m
  double electrode_charge = 0.0;  // per unit depth, C/m
  std::vector<double> potentials;        // FEM nodal values
  std::shared_ptr<const TriMesh> mesh;   // FEM only
  double condition_estimate = 0.0;       // reciprocal condition, BEM only
  std::size_t element_count = 0;

  const std::vector<double>& beam_charge_density() const { return front.sigma; }
  // FEM interpolation of the potential; throws for other methods or outside points.
  double potential_at(Vec2 p) const;
};

// p = correction * eps0 * V^2 / (2 gap^2). Throws ContactSignal for gap <= 0.
double parallel_plate_pressure(double voltage, double local_gap, double correction = 1.0);

FieldSolution parallel_plate_solve(const FieldDomain& dom, double voltage);

struct BemOptions {
  int target_elements = 340;
  double grading = 5.0;  // largest-to-smallest element size ratio
  double refinement = 1.0;
};
FieldSolution bem_solve(const FieldDomain& dom, double voltage, const BemOptions& options = {});

struct FemOptions {
  int target_elements = 3000;
  double refinement = 1.0;
};
TriMesh build_reference_mesh(const FieldDomain& dom, const FemOptions& options = {});

// Relocates interior nodes by a discrete Laplacian of the prescribed boundary
// displacement (entries of non-free nodes used, free entries ignored). Throws
// RemeshSignal when a triangle inverts.
TriMesh morph_mesh(const TriMesh& mesh, const std::vector<Vec2>& boundary_displacement);

FieldSolution fem_solve(const FieldDomain& dom, double voltage, const FemOptions& options = {});

struct SolveOptions {
  BemOptions bem;
  FemOptions fem;
};
FieldSolution solve_field(FieldMethod method, const FieldDomain& dom, double voltage,
                          const SolveOptions& options = {});

// Net electrostatic traction on each beam element: (front - back) sigma^2 / (2 eps).
struct ElementTraction {
  std::vector<double> pressure;   // N/m^2, element mean
  std::vector<double> line_load;  // N/m, pressure times depth
};
ElementTraction surface_traction(const FieldSolution& sol, const BeamMesh& mesh);

// Capacitance per unit depth, Q_beam / (phi_beam - phi_electrode).
double capacitance(const FieldSolution& sol);

struct CorrectionFactors {
  double f_length = 1.0;
  double f_width = 1.0;
  double correction = 1.0;
};
// Factorized fringing correction from an undeformed length-plane and a
// width-plane field solve, each normalized by the parallel-plate traction.
CorrectionFactors calibrate_correction(const Specimen& s, FieldMethod method = FieldMethod::BEM,
                                       const SolveOptions& options = {});
double length_factor(const Specimen& s, FieldMethod method, const SolveOptions& options = {});
double width_factor(const Specimen& s, bool wafer_surface, FieldMethod method,
                    const SolveOptions& options = {});

struct CorrectionScenario {
  std::string description;
  double force_ratio_3d_to_2d = 1.0;
};
// Reference 3D-to-2D peak force ratios for the in-plane specimen 5 study.
std::vector<CorrectionScenario> scenario_catalog();

// Debug dumps: CSV of the front-face charge density and OFF-style mesh text.
std::string charge_density_csv(const FieldSolution& sol);
std::string mesh_off(const TriMesh& mesh);

}  // namespace pullin
