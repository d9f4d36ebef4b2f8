#include "pullin/oracles.hpp"

#include <array>
#include <cmath>
#include <optional>

#include "pullin/errors.hpp"

namespace pullin::oracles {

void LumpedModel::validate() const {
  if (!(stiffness > 0.0 && gap > 0.0 && area > 0.0 && permittivity > 0.0))
    throw ConfigError("lumped model parameters must be positive");
}

LumpedPullIn lumped_pullin(const LumpedModel& m) {
  m.validate();
  LumpedPullIn out;
  out.v_pullin = std::sqrt(8.0 * m.stiffness * std::pow(m.gap, 3) / (27.0 * m.permittivity * m.area));
  out.u_pullin = m.gap / 3.0;
  return out;
}

namespace {

// Position of the first stable minimum of the discretized energy, if any.
std::optional<double> stable_minimum(const LumpedModel& m, double voltage, int grid) {
  const double c = 0.5 * m.permittivity * m.area * voltage * voltage;
  const double du = m.gap / grid;
  const auto energy = [&](int i) {
    const double u = i * du;
    return 0.5 * m.stiffness * u * u - c / (m.gap - u);
  };
  double prev = energy(0);
  double cur = energy(1);
  if (prev < cur) return 0.0;
  for (int i = 1; i + 1 < grid; ++i) {
    const double next = energy(i + 1);
    if (cur < prev && cur <= next) return i * du;
    prev = cur;
    cur = next;
  }
  return std::nullopt;
}

}  // namespace

LumpedPullIn lumped_pullin_bruteforce(const LumpedModel& m, int grid) {
  m.validate();
  if (grid < 1000) throw ConfigError("brute-force grid must have at least 1000 points");
  // Voltage scale from dimensional analysis only; the scan covers [0, v_scale].
  const double v_scale = std::sqrt(m.stiffness * std::pow(m.gap, 3) / (m.permittivity * m.area));
  double low = 0.0;
  double high = v_scale;
  for (int k = 1; k <= grid; ++k) {
    const double v = v_scale * k / grid;
    if (!stable_minimum(m, v, grid)) {
      high = v;
      break;
    }
    low = v;
  }
  for (int it = 0; it < 60 && high - low > 1e-12 * v_scale; ++it) {
    const double mid = 0.5 * (low + high);
    if (stable_minimum(m, mid, grid)) low = mid;
    else high = mid;
  }
  LumpedPullIn out;
  out.v_pullin = low;
  out.u_pullin = stable_minimum(m, low, grid).value_or(0.0);
  return out;
}

namespace {

constexpr std::array<double, 4> kGaussX{-0.8611363115940526, -0.3399810435848563,
                                        0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGaussW{0.3478548451374538, 0.6521451548625461,
                                        0.6521451548625461, 0.3478548451374538};

// Squared voltage in equilibrium with modal amplitude a.
double ritz_voltage_squared(double a, double length, double gap, double width, double stiffness) {
  constexpr int kIntervals = 64;
  const double h = length / kIntervals;
  double integral = 0.0;
  for (int k = 0; k < kIntervals; ++k) {
    for (std::size_t q = 0; q < kGaussX.size(); ++q) {
      const double x = h * (k + 0.5 * (1.0 + kGaussX[q]));
      const double phi = 1.0 - std::cos(M_PI * x / (2.0 * length));
      const double local = gap - a * phi;
      integral += 0.5 * h * kGaussW[q] * phi / (local * local);
    }
  }
  return 2.0 * stiffness * a / (kVacuumPermittivity * width * integral);
}

}  // namespace

double ritz_pullin(const Specimen& s, const Material& material) {
  s.validate();
  material.validate();
  const Section sec = derive_section(s);
  const double l = s.length;
  const double g = s.gap;
  // Modal stiffness EJ * integral of phi''^2 over the length.
  const double k_modal = material.young_modulus * sec.second_moment *
                         std::pow(M_PI / (2.0 * l), 4) * l / 2.0;
  const auto v2 = [&](double a) { return ritz_voltage_squared(a, l, g, sec.depth, k_modal); };

  constexpr int kGrid = 2000;
  int best = 1;
  double best_value = 0.0;
  for (int i = 1; i < kGrid; ++i) {
    const double value = v2(g * i / kGrid);
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  // Golden-section refinement of the maximum around the best grid point.
  double a = g * (best - 1) / kGrid;
  double b = g * (best + 1) / kGrid;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = v2(c);
  double fd = v2(d);
  for (int it = 0; it < 80; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = v2(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = v2(d);
    }
  }
  return std::sqrt(std::max({fc, fd, best_value}));
}

namespace {

struct ElasticaEnd {
  double curvature = 0.0;   // theta' at the tip
  double deflection = 0.0;  // transverse tip deflection
};

// RK4 on theta'' = -(P/EJ) cos(theta), y' = sin(theta) from the clamp.
ElasticaEnd integrate_elastica(double root_curvature, double load_ratio, double length) {
  constexpr int kSteps = 4000;
  const double h = length / kSteps;
  std::array<double, 3> y{0.0, root_curvature, 0.0};
  const auto rhs = [load_ratio](const std::array<double, 3>& s) {
    return std::array<double, 3>{s[1], -load_ratio * std::cos(s[0]), std::sin(s[0])};
  };
  for (int k = 0; k < kSteps; ++k) {
    const auto k1 = rhs(y);
    std::array<double, 3> t{};
    for (int i = 0; i < 3; ++i) t[i] = y[i] + 0.5 * h * k1[i];
    const auto k2 = rhs(t);
    for (int i = 0; i < 3; ++i) t[i] = y[i] + 0.5 * h * k2[i];
    const auto k3 = rhs(t);
    for (int i = 0; i < 3; ++i) t[i] = y[i] + h * k3[i];
    const auto k4 = rhs(t);
    for (int i = 0; i < 3; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return {y[1], y[2]};
}

}  // namespace

double elastica_tip(double load, double length, double flexural_rigidity) {
  if (!(load >= 0.0)) throw ConfigError("elastica load must be non-negative");
  if (!(length > 0.0 && flexural_rigidity > 0.0))
    throw ConfigError("elastica length and rigidity must be positive");
  if (load == 0.0) return 0.0;
  const double ratio = load / flexural_rigidity;
  // The root moment lies between zero and the lever arm of the full length.
  double low = 0.0;
  double high = ratio * length;
  constexpr double kTol = 1e-8;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (low + high);
    const ElasticaEnd end = integrate_elastica(mid, ratio, length);
    if (std::abs(end.curvature) * length < kTol) return end.deflection;
    if (end.curvature < 0.0) low = mid;
    else high = mid;
  }
  throw NumericalError("elastica shooting did not meet the tip moment condition");
}

}  // namespace pullin::oracles
