#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pullin {

inline constexpr double kVacuumPermittivity = 8.854187817e-12;  // F/m

struct Material {
  std::string name;
  double young_modulus = 0.0;      // Pa
  double poisson_ratio = 0.0;
  double thermal_expansion = 0.0;  // 1/K

  double shear_modulus() const { return young_modulus / (2.0 * (1.0 + poisson_ratio)); }
  void validate() const;
  bool operator==(const Material&) const = default;
};

// Literature defaults; the identified moduli of the tested wafers are not published.
Material polysilicon();
Material gold();

struct Section {
  double area = 0.0;            // m^2
  double second_moment = 0.0;   // m^4
  double flexural_dim = 0.0;    // m, along the deflection direction
  double depth = 0.0;           // m, out-of-plane extrusion
  double shear_correction = 5.0 / 6.0;
};

// Piecewise-linear temperature along the beam axis, T0(x). Empty means zero.
struct AxialProfile {
  std::vector<double> x;
  std::vector<double> value;

  double operator()(double at) const;
  bool empty() const { return x.empty(); }
  bool operator==(const AxialProfile&) const = default;
};

// Bilinear temperature over (x, y) with y measured from the section centroid
// toward the counter-electrode. Empty means zero.
struct SectionField {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::vector<double>> value;  // value[i][j] at (x[i], y[j])

  double operator()(double at_x, double at_y) const;
  bool empty() const { return x.empty(); }
  bool operator==(const SectionField&) const = default;
};

struct InitialState {
  double strain_initial = 0.0;     // eps0
  double curvature_initial = 0.0;  // kappa0, 1/m, positive bends toward the counter-electrode
  double axial_preload = 0.0;      // N0, N
  double moment_preload = 0.0;     // M0, N m
  AxialProfile temp_uniform;       // T0(x), K
  SectionField temp_field;         // T(x, y), K

  bool is_zero() const;
  bool operator==(const InitialState&) const = default;
};

enum class Layout { InPlane, OutOfPlane };
enum class TipShape { Rectangular, Rounded, SharpTriangular };

// Min/max of a quantity measured over several specimens of one geometry.
struct MeasuredRange {
  std::string field;
  double min = 0.0;
  double max = 0.0;
  double midpoint() const { return 0.5 * (min + max); }
  bool operator==(const MeasuredRange&) const = default;
};

struct Specimen {
  std::string id;
  Layout layout = Layout::InPlane;
  double length = 0.0;      // m
  double width = 0.0;       // m (depth of the 2D model)
  double thickness = 0.0;   // m (flexural dimension)
  double gap = 0.0;         // m
  double tip_offset = 0.0;  // m, zero-voltage tip rise away from the counter-electrode
  TipShape tip_shape = TipShape::Rounded;
  double counter_electrode_extent = 0.0;  // m, measured back from the tip
  bool wafer_surface_present = true;
  double wafer_distance = 0.0;  // m, wafer plane below the lateral edge; 0 means "use gap"
  Material material;
  InitialState initial_state;
  std::vector<MeasuredRange> ranges;

  void validate() const;
  double effective_wafer_distance() const { return wafer_distance > 0.0 ? wafer_distance : gap; }
  bool operator==(const Specimen&) const = default;
};

std::string to_string(Layout layout);
std::string to_string(TipShape shape);
Layout layout_from_string(const std::string& text);
TipShape tip_shape_from_string(const std::string& text);

// The twelve specimens of the in-plane (ids 1-8) and out-of-plane (ids 9-12)
// test series. Ranged entries use their midpoint; the range is kept in
// Specimen::ranges. Out-of-plane specimens carry the initial curvature implied
// by their measured tip offset.
std::vector<Specimen> catalog();

// Same as catalog(), but honours PULLIN_LAB_SEED_DIR/catalog.json when present.
std::vector<Specimen> load_catalog();
std::optional<Specimen> find_in_catalog(const std::string& id);

Section derive_section(const Specimen& s);

// Constant curvature whose free tip rises by `tip_offset` over `length`.
double curvature_from_tip_offset(double tip_offset, double length);

}  // namespace pullin
