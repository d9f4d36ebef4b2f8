#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pullin/errors.hpp"
#include "pullin/field.hpp"

namespace pullin {

std::string to_string(FieldMethod method) {
  switch (method) {
    case FieldMethod::ParallelPlate: return "ParallelPlate";
    case FieldMethod::BEM: return "BEM";
    case FieldMethod::FEM: return "FEM";
  }
  return "ParallelPlate";
}

FieldMethod field_method_from_string(const std::string& text) {
  if (text == "ParallelPlate") return FieldMethod::ParallelPlate;
  if (text == "BEM") return FieldMethod::BEM;
  if (text == "FEM") return FieldMethod::FEM;
  throw ConfigError("solver.field_method: expected ParallelPlate, BEM or FEM, got '" + text + "'");
}

double BeamShape::operator()(double at) const {
  if (x.empty() || at <= x.front()) return v.empty() ? 0.0 : v.front();
  if (at >= x.back()) return v.back();
  auto it = std::upper_bound(x.begin(), x.end(), at);
  const auto j = static_cast<std::size_t>(it - x.begin());
  const auto i = j - 1;
  const double le = x[j] - x[i];
  const auto n = hermite_shape((at - x[i]) / le, le);
  return n[0] * v[i] + n[1] * theta[i] + n[2] * v[j] + n[3] * theta[j];
}

BeamShape BeamShape::from(const BeamMesh& mesh, const Displacement& d) {
  return {mesh.nodes, d.v, d.theta};
}

double FieldDomain::offset_at(double x) const {
  if (shape.empty() || x < flexible_start) return 0.0;
  return shape(x);
}

std::vector<Vec2> FieldDomain::beam_boundary(int samples) const {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(samples) + 1);
  for (int k = 0; k <= samples; ++k) {
    const double x = beam.x0 + beam.width() * k / samples;
    pts.push_back({x, beam.y1 + offset_at(x)});
  }
  return pts;
}

std::vector<Vec2> FieldDomain::counter_electrode_boundary() const {
  const Rect& e = counter_electrode;
  return {{e.x0, e.y0}, {e.x1, e.y0}, {e.x1, e.y1}, {e.x0, e.y1}, {e.x0, e.y0}};
}

std::optional<std::vector<Vec2>> FieldDomain::wafer_surface_boundary() const {
  if (!wafer_x) return std::nullopt;
  return std::vector<Vec2>{{*wafer_x, outer.y0}, {*wafer_x, outer.y1}};
}

std::vector<Vec2> FieldDomain::outer_boundary() const {
  return {{outer.x0, outer.y0}, {outer.x1, outer.y0}, {outer.x1, outer.y1},
          {outer.x0, outer.y1}, {outer.x0, outer.y0}};
}

double FieldDomain::overlap_length() const {
  const double lo = std::max(std::max(beam.x0, flexible_start), counter_electrode.x0);
  const double hi = std::min(beam.x1, counter_electrode.x1);
  return std::max(0.0, hi - lo);
}

double FieldDomain::min_gap() const {
  const double lo = std::max(beam.x0, counter_electrode.x0);
  const double hi = std::min(beam.x1, counter_electrode.x1);
  double best = counter_electrode.y0 - beam.y1;
  if (hi <= lo) return best;
  std::vector<double> xs{lo, hi};
  for (double x : shape.x)
    if (x > lo && x < hi) xs.push_back(x);
  constexpr int kSamples = 64;
  for (int k = 1; k < kSamples; ++k) xs.push_back(lo + (hi - lo) * k / kSamples);
  for (double x : xs) best = std::min(best, counter_electrode.y0 - (beam.y1 + offset_at(x)));
  return best;
}

void FieldDomain::validate() const {
  if (!(gap > 0.0)) throw ConfigError("field domain gap must be positive");
  if (min_gap() <= 0.0) throw ContactSignal("beam touches the counter-electrode");
  double low = beam.y0;
  double high = beam.y1;
  for (double x : shape.x) {
    low = std::min(low, beam.y0 + offset_at(x));
    high = std::max(high, beam.y1 + offset_at(x));
  }
  if (low <= outer.y0 || beam.x0 <= outer.x0 || beam.x1 >= outer.x1 ||
      counter_electrode.y1 >= outer.y1)
    throw ConfigError("outer boundary must enclose all conductors");
  if (wafer_x && !(*wafer_x < beam.x0 && *wafer_x < counter_electrode.x0))
    throw ConfigError("wafer plane must lie outside the conductors");
}

namespace {

FieldDomain length_plane(const Specimen& s, const DomainOptions& options) {
  s.validate();
  const double g = s.gap;
  const double t = s.thickness;
  const double anchor = g;
  const double margin = options.margin_factor * g;
  FieldDomain dom;
  dom.beam = {-anchor, s.length, -t, 0.0};
  dom.flexible_start = 0.0;
  dom.counter_electrode = {s.length - s.counter_electrode_extent, s.length, g, g + t};
  dom.outer = {-anchor - margin, s.length + margin, -t - margin, g + t + margin};
  dom.gap = g;
  dom.depth = s.width;
  dom.driven = options.driven;
  return dom;
}

}  // namespace

FieldDomain build_field_domain(const Specimen& s, const DomainOptions& options) {
  FieldDomain dom = length_plane(s, options);
  dom.validate();
  return dom;
}

FieldDomain build_field_domain(const Specimen& s, const BeamMesh& mesh, const Displacement& d,
                               const DomainOptions& options) {
  FieldDomain dom = length_plane(s, options);
  dom.shape = BeamShape::from(mesh, d);
  // Room below the beam for configurations curled away from the electrode.
  double lowest = 0.0;
  for (double v : d.v) lowest = std::min(lowest, v);
  dom.outer.y0 = std::min(dom.outer.y0, -s.thickness + lowest - options.margin_factor * s.gap);
  dom.validate();
  return dom;
}

FieldDomain build_section_domain(const Specimen& s, bool wafer_surface,
                                 const DomainOptions& options) {
  s.validate();
  const double g = s.gap;
  const double t = s.thickness;
  const double w = s.width;
  const double margin = options.margin_factor * g;
  FieldDomain dom;
  dom.beam = {0.0, w, -t, 0.0};
  dom.flexible_start = 0.0;
  dom.counter_electrode = {0.0, w, g, g + t};
  if (wafer_surface) dom.wafer_x = -s.effective_wafer_distance();
  dom.outer = {wafer_surface ? *dom.wafer_x : -margin, w + margin, -t - margin, g + t + margin};
  dom.gap = g;
  dom.depth = s.length;
  dom.driven = options.driven;
  dom.validate();
  return dom;
}

double FaceProfile::value_at(double at) const {
  if (x.empty()) return 0.0;
  if (at <= x.front()) return sigma.front();
  if (at >= x.back()) return sigma.back();
  auto it = std::upper_bound(x.begin(), x.end(), at);
  const auto j = static_cast<std::size_t>(it - x.begin());
  const auto i = j - 1;
  const double h = x[j] - x[i];
  if (h <= 0.0) return sigma[j];
  const double t = (at - x[i]) / h;
  return sigma[i] + t * (sigma[j] - sigma[i]);
}

namespace {

template <class Kernel>
double integrate_linear(const FaceProfile& p, double a, double b, Kernel kernel) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < p.x.size(); ++k) {
    const double xa = p.x[k];
    const double xb = p.x[k + 1];
    const double h = xb - xa;
    if (h <= 0.0) continue;
    const double lo = std::max(a, xa);
    const double hi = std::min(b, xb);
    if (hi <= lo) continue;
    const double s_lo = p.sigma[k] + (lo - xa) / h * (p.sigma[k + 1] - p.sigma[k]);
    const double s_hi = p.sigma[k] + (hi - xa) / h * (p.sigma[k + 1] - p.sigma[k]);
    total += kernel(s_lo, s_hi) * (hi - lo);
  }
  return total;
}

}  // namespace

double FaceProfile::integrate(double a, double b) const {
  return integrate_linear(*this, a, b, [](double s0, double s1) { return 0.5 * (s0 + s1); });
}

double FaceProfile::integrate_square(double a, double b) const {
  return integrate_linear(*this, a, b,
                          [](double s0, double s1) { return (s0 * s0 + s0 * s1 + s1 * s1) / 3.0; });
}

double parallel_plate_pressure(double voltage, double local_gap, double correction) {
  if (!(local_gap > 0.0)) throw ContactSignal("local gap closed");
  return correction * kVacuumPermittivity * voltage * voltage / (2.0 * local_gap * local_gap);
}

FieldSolution parallel_plate_solve(const FieldDomain& dom, double voltage) {
  dom.validate();
  FieldSolution sol;
  sol.method = FieldMethod::ParallelPlate;
  sol.applied_voltage = voltage;
  sol.permittivity = dom.permittivity;
  sol.depth = dom.depth;
  sol.potential_difference = dom.beam_potential(voltage) - dom.electrode_potential(voltage);

  const double lo = std::max(dom.beam.x0, dom.counter_electrode.x0);
  const double hi = std::min(dom.beam.x1, dom.counter_electrode.x1);
  constexpr int kSamples = 400;
  const auto density = [&](double x) {
    const double local = dom.counter_electrode.y0 - (dom.beam.y1 + dom.offset_at(x));
    return dom.permittivity * sol.potential_difference / local;
  };
  auto& f = sol.front;
  const auto push = [&f](double x, double s) {
    f.x.push_back(x);
    f.sigma.push_back(s);
    f.arc.push_back(x);
  };
  if (lo > dom.beam.x0) push(dom.beam.x0, 0.0);
  push(lo, 0.0);
  for (int k = 0; k <= kSamples; ++k) {
    const double x = lo + (hi - lo) * k / kSamples;
    push(x, density(x));
  }
  push(hi, 0.0);
  if (hi < dom.beam.x1) push(dom.beam.x1, 0.0);
  for (auto& a : f.arc) a -= f.x.front();
  sol.back.x = {dom.beam.x0, dom.beam.x1};
  sol.back.arc = {0.0, dom.beam.width()};
  sol.back.sigma = {0.0, 0.0};
  sol.beam_charge = f.integrate(dom.beam.x0, dom.beam.x1);
  sol.electrode_charge = -sol.beam_charge;
  sol.element_count = kSamples;
  return sol;
}

FieldSolution solve_field(FieldMethod method, const FieldDomain& dom, double voltage,
                          const SolveOptions& options) {
  switch (method) {
    case FieldMethod::ParallelPlate: return parallel_plate_solve(dom, voltage);
    case FieldMethod::BEM: return bem_solve(dom, voltage, options.bem);
    case FieldMethod::FEM: return fem_solve(dom, voltage, options.fem);
  }
  return parallel_plate_solve(dom, voltage);
}

ElementTraction surface_traction(const FieldSolution& sol, const BeamMesh& mesh) {
  ElementTraction out;
  out.pressure.resize(mesh.element_count());
  out.line_load.resize(mesh.element_count());
  const double two_eps = 2.0 * sol.permittivity;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double a = mesh.nodes[static_cast<std::size_t>(mesh.elements[e].first)];
    const double b = mesh.nodes[static_cast<std::size_t>(mesh.elements[e].second)];
    const double net = sol.front.integrate_square(a, b) - sol.back.integrate_square(a, b);
    out.pressure[e] = net / (two_eps * (b - a));
    out.line_load[e] = out.pressure[e] * sol.depth;
  }
  return out;
}

double capacitance(const FieldSolution& sol) {
  if (sol.potential_difference == 0.0)
    throw NumericalError("capacitance undefined at zero applied voltage");
  return sol.beam_charge / sol.potential_difference;
}

double FieldSolution::potential_at(Vec2 p) const {
  if (method != FieldMethod::FEM || !mesh)
    throw NumericalError("nodal potentials exist only for FEM solutions");
  for (std::size_t t = 0; t < mesh->triangles.size(); ++t) {
    const auto& tri = mesh->triangles[t];
    const Vec2 a = mesh->nodes[static_cast<std::size_t>(tri[0])];
    const Vec2 b = mesh->nodes[static_cast<std::size_t>(tri[1])];
    const Vec2 c = mesh->nodes[static_cast<std::size_t>(tri[2])];
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    const double l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
    const double l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
    const double l0 = 1.0 - l1 - l2;
    constexpr double kTol = -1e-12;
    if (l0 >= kTol && l1 >= kTol && l2 >= kTol)
      return l0 * potentials[static_cast<std::size_t>(tri[0])] +
             l1 * potentials[static_cast<std::size_t>(tri[1])] +
             l2 * potentials[static_cast<std::size_t>(tri[2])];
  }
  throw NumericalError("point outside the dielectric mesh");
}

std::vector<CorrectionScenario> scenario_catalog() {
  return {
      {"geometry 5 baseline: rounded tip, equal electrode widths, no surface behind the beam, "
       "voltage on the counter-electrode",
       1.88},
      {"indefinitely long counter-electrode, zero voltage on the microbeam", 2.1},
      {"wafer surface below the lateral edge of the microcantilever", 1.05},
  };
}

std::string charge_density_csv(const FieldSolution& sol) {
  std::ostringstream out;
  out << "arc_length_m,sigma_c_per_m2\n";
  char line[64];
  for (std::size_t k = 0; k < sol.front.x.size(); ++k) {
    std::snprintf(line, sizeof line, "%.12g,%.12g\n", sol.front.arc[k], sol.front.sigma[k]);
    out << line;
  }
  return out.str();
}

std::string mesh_off(const TriMesh& mesh) {
  std::ostringstream out;
  out << "OFF\n" << mesh.nodes.size() << ' ' << mesh.triangles.size() << " 0\n";
  char line[96];
  for (const auto& n : mesh.nodes) {
    std::snprintf(line, sizeof line, "%.12g %.12g 0\n", n.x, n.y);
    out << line;
  }
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  return out.str();
}

}  // namespace pullin
