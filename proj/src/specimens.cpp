#include "pullin/specimens.hpp"

#include <algorithm>
#include <cmath>

#include "pullin/errors.hpp"

namespace pullin {

namespace {

double lerp_table(const std::vector<double>& xs, const std::vector<double>& vs, double at) {
  if (xs.size() == 1 || at <= xs.front()) return vs.front();
  if (at >= xs.back()) return vs.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), at);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (at - xs[lo]) / (xs[hi] - xs[lo]);
  return vs[lo] + t * (vs[hi] - vs[lo]);
}

Specimen in_plane(const char* id, double length, double thickness, double gap) {
  Specimen s;
  s.id = id;
  s.layout = Layout::InPlane;
  s.length = length;
  s.width = 15e-6;
  s.thickness = thickness;
  s.gap = gap;
  s.tip_offset = 0.0;
  s.tip_shape = TipShape::Rounded;
  s.counter_electrode_extent = s.length;
  s.wafer_surface_present = true;
  s.material = polysilicon();
  return s;
}

struct Span {
  double lo;
  double hi;
  double mid() const { return 0.5 * (lo + hi); }
};

Specimen out_of_plane(const char* id, Span length, Span width, Span thickness, Span gap,
                      Span tip_offset) {
  Specimen s;
  s.id = id;
  s.layout = Layout::OutOfPlane;
  s.length = length.mid();
  s.width = width.mid();
  s.thickness = thickness.mid();
  s.gap = gap.mid();
  s.tip_offset = tip_offset.mid();
  s.tip_shape = TipShape::Rectangular;
  s.counter_electrode_extent = s.length;
  s.wafer_surface_present = false;
  s.material = gold();
  s.initial_state.curvature_initial = -curvature_from_tip_offset(s.tip_offset, s.length);
  const auto range = [&s](const char* field, Span span) {
    if (span.lo != span.hi) s.ranges.push_back({field, span.lo, span.hi});
  };
  range("length", length);
  range("width", width);
  range("thickness", thickness);
  range("gap", gap);
  range("tip_offset", tip_offset);
  return s;
}

}  // namespace

void Material::validate() const {
  if (!(young_modulus > 0.0)) throw ConfigError("young_modulus must be positive");
  if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5))
    throw ConfigError("poisson_ratio must lie in [0, 0.5)");
  if (!(thermal_expansion >= 0.0)) throw ConfigError("thermal_expansion must be non-negative");
}

Material polysilicon() { return {"epitaxial polysilicon", 160e9, 0.22, 2.6e-6}; }
Material gold() { return {"gold", 78e9, 0.44, 14.2e-6}; }

double AxialProfile::operator()(double at) const {
  if (x.empty()) return 0.0;
  return lerp_table(x, value, at);
}

double SectionField::operator()(double at_x, double at_y) const {
  if (x.empty()) return 0.0;
  std::vector<double> column(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) column[i] = lerp_table(y, value[i], at_y);
  return lerp_table(x, column, at_x);
}

bool InitialState::is_zero() const {
  return strain_initial == 0.0 && curvature_initial == 0.0 && axial_preload == 0.0 &&
         moment_preload == 0.0 && temp_uniform.empty() && temp_field.empty();
}

void Specimen::validate() const {
  if (!(length > 0.0)) throw ConfigError("length must be positive");
  if (!(width > 0.0)) throw ConfigError("width must be positive");
  if (!(thickness > 0.0)) throw ConfigError("thickness must be positive");
  if (!(gap > 0.0)) throw ConfigError("gap must be positive");
  if (!(counter_electrode_extent > 0.0 && counter_electrode_extent <= length * (1.0 + 1e-12)))
    throw ConfigError("counter_electrode_extent must lie in (0, length]");
  if (wafer_distance < 0.0) throw ConfigError("wafer_distance must be non-negative");
  material.validate();
  const auto check_profile = [](const std::vector<double>& xs, std::size_t n, const char* what) {
    if (xs.size() != n) throw ConfigError(std::string(what) + " sample counts differ");
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (!(xs[i] > xs[i - 1])) throw ConfigError(std::string(what) + " abscissae must increase");
  };
  check_profile(initial_state.temp_uniform.x, initial_state.temp_uniform.value.size(),
                "temp_uniform");
  const auto& tf = initial_state.temp_field;
  check_profile(tf.x, tf.value.size(), "temp_field");
  for (const auto& row : tf.value) check_profile(tf.y, row.size(), "temp_field");
}

std::string to_string(Layout layout) {
  return layout == Layout::InPlane ? "InPlane" : "OutOfPlane";
}

std::string to_string(TipShape shape) {
  switch (shape) {
    case TipShape::Rectangular: return "Rectangular";
    case TipShape::Rounded: return "Rounded";
    case TipShape::SharpTriangular: return "SharpTriangular";
  }
  return "Rounded";
}

Layout layout_from_string(const std::string& text) {
  if (text == "InPlane") return Layout::InPlane;
  if (text == "OutOfPlane") return Layout::OutOfPlane;
  throw ConfigError("specimen.layout: expected InPlane or OutOfPlane, got '" + text + "'");
}

TipShape tip_shape_from_string(const std::string& text) {
  if (text == "Rectangular") return TipShape::Rectangular;
  if (text == "Rounded") return TipShape::Rounded;
  if (text == "SharpTriangular") return TipShape::SharpTriangular;
  throw ConfigError("specimen.tip_shape: unknown value '" + text + "'");
}

std::vector<Specimen> catalog() {
  std::vector<Specimen> out;
  out.reserve(12);
  out.push_back(in_plane("1", 101.0e-6, 1.80e-6, 5.0e-6));
  out.push_back(in_plane("2", 101.0e-6, 1.80e-6, 10.0e-6));
  out.push_back(in_plane("3", 101.0e-6, 1.80e-6, 20.1e-6));
  out.push_back(in_plane("4", 205.0e-6, 1.90e-6, 10.0e-6));
  out.push_back(in_plane("5", 205.0e-6, 1.90e-6, 20.0e-6));
  out.push_back(in_plane("6", 805.0e-6, 2.70e-6, 39.6e-6));
  out.push_back(in_plane("7", 805.0e-6, 2.70e-6, 200.0e-6));
  out.push_back(in_plane("8", 805.0e-6, 2.70e-6, 400.0e-6));
  out.push_back(out_of_plane("9", {531e-6, 535e-6}, {32e-6, 33e-6}, {2.9e-6, 3.0e-6},
                             {2.88e-6, 2.99e-6}, {4.15e-6, 6.6e-6}));
  out.push_back(out_of_plane("10", {190e-6, 190e-6}, {32e-6, 32e-6}, {1.8e-6, 1.8e-6},
                             {2.97e-6, 3.17e-6}, {3.8e-6, 4.1e-6}));
  out.push_back(out_of_plane("11", {190e-6, 190e-6}, {32e-6, 33e-6}, {2.57e-6, 2.61e-6},
                             {2.89e-6, 2.97e-6}, {1.13e-6, 1.34e-6}));
  out.push_back(out_of_plane("12", {190e-6, 190e-6}, {33e-6, 33e-6}, {4.79e-6, 4.89e-6},
                             {3.0e-6, 3.0e-6}, {0.04e-6, 0.04e-6}));
  return out;
}

std::optional<Specimen> find_in_catalog(const std::string& id) {
  for (auto& s : load_catalog())
    if (s.id == id) return s;
  return std::nullopt;
}

Section derive_section(const Specimen& s) {
  Section sec;
  sec.flexural_dim = s.thickness;
  sec.depth = s.width;
  sec.area = s.thickness * s.width;
  sec.second_moment = s.width * s.thickness * s.thickness * s.thickness / 12.0;
  sec.shear_correction = 5.0 / 6.0;
  return sec;
}

double curvature_from_tip_offset(double tip_offset, double length) {
  if (!(length > 0.0)) throw ConfigError("length must be positive");
  return 2.0 * tip_offset / (length * length);
}

}  // namespace pullin
