#pragma once

#include "pullin/specimens.hpp"

namespace pullin::oracles {

struct LumpedModel {
  double stiffness = 1.0;  // N/m
  double gap = 1e-6;       // m
  double area = 1e-10;     // m^2
  double permittivity = kVacuumPermittivity;

  void validate() const;
};

struct LumpedPullIn {
  double v_pullin = 0.0;
  double u_pullin = 0.0;
};

// Closed form: V = sqrt(8 k g^3 / (27 eps A)), u = g / 3.
LumpedPullIn lumped_pullin(const LumpedModel& m);

// Scans V on a grid and minimizes E(u) = k u^2 / 2 - eps A V^2 / (2 (g - u))
// over a u grid for each V; the last V with an interior local minimum is
// refined by bisection. Requires grid >= 1000.
LumpedPullIn lumped_pullin_bruteforce(const LumpedModel& m, int grid);

// Single-mode Ritz estimate with phi(x) = 1 - cos(pi x / 2l) and the
// parallel-plate force acting over the whole beam.
double ritz_pullin(const Specimen& s, const Material& material);

// Transverse tip deflection of an inextensible end-loaded cantilever.
// Throws NumericalError when the shooting fails.
double elastica_tip(double load, double length, double flexural_rigidity);

}  // namespace pullin::oracles
