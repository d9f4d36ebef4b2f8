#include <cmath>

#include "pullin/errors.hpp"
#include "pullin/field.hpp"

namespace pullin {

namespace {

// Net attractive force per unit depth over [a, b] divided by the parallel-plate
// force on the electrode overlap.
double traction_ratio(const FieldSolution& sol, const FieldDomain& dom, double a, double b,
                      double overlap) {
  const double net = (sol.front.integrate_square(a, b) - sol.back.integrate_square(a, b)) /
                     (2.0 * sol.permittivity);
  const double reference = parallel_plate_pressure(1.0, dom.gap) * overlap;
  if (!(reference > 0.0)) throw NumericalError("no electrode overlap to normalize against");
  return net / reference;
}

}  // namespace

double length_factor(const Specimen& s, FieldMethod method, const SolveOptions& options) {
  const FieldDomain dom = build_field_domain(s);
  const FieldSolution sol = solve_field(method, dom, 1.0, options);
  return traction_ratio(sol, dom, 0.0, s.length, dom.overlap_length());
}

double width_factor(const Specimen& s, bool wafer_surface, FieldMethod method,
                    const SolveOptions& options) {
  const FieldDomain dom = build_section_domain(s, wafer_surface);
  const FieldSolution sol = solve_field(method, dom, 1.0, options);
  return traction_ratio(sol, dom, dom.beam.x0, dom.beam.x1, dom.beam.width());
}

CorrectionFactors calibrate_correction(const Specimen& s, FieldMethod method,
                                       const SolveOptions& options) {
  CorrectionFactors out;
  out.f_length = length_factor(s, method, options);
  out.f_width = width_factor(s, s.wafer_surface_present, method, options);
  out.correction = out.f_length * out.f_width;
  if (!std::isfinite(out.correction) || out.correction <= 0.0)
    throw NumericalError("correction factor is not positive");
  return out;
}

}  // namespace pullin
