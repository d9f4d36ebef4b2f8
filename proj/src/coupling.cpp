#include "pullin/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pullin/errors.hpp"

namespace pullin {

std::string to_string(CouplingMode mode) {
  return mode == CouplingMode::Iterative ? "Iterative" : "NonIncremental";
}

CouplingMode coupling_mode_from_string(const std::string& text) {
  if (text == "Iterative") return CouplingMode::Iterative;
  if (text == "NonIncremental") return CouplingMode::NonIncremental;
  throw ConfigError("unknown coupling_mode '" + text + "'");
}

void SolverConfig::validate() const {
  if (!(dv > 0.0)) throw ConfigError("dv must be positive");
  if (!(v_start >= 0.0)) throw ConfigError("v_start must be non-negative");
  if (!(v_end >= v_start)) throw ConfigError("v_end must not be below v_start");
  if (!(inner_tol > 0.0)) throw ConfigError("inner_tol must be positive");
  if (max_inner_iter < 1) throw ConfigError("max_inner_iter must be at least 1");
  if (!(pullin_bisection_tol > 0.0)) throw ConfigError("pullin_bisection_tol must be positive");
  if (n_beam_elements < 4) throw ConfigError("n_beam_elements must be at least 4");
  if (!(correction > 0.0)) throw ConfigError("correction must be positive");
  if (!(field_refinement > 0.0)) throw ConfigError("field_refinement must be positive");
  if (!(relaxation > 0.0 && relaxation <= 1.0)) throw ConfigError("relaxation must lie in (0, 1]");
}

SolveOptions SolverConfig::field_options() const {
  SolveOptions o;
  o.bem.refinement = field_refinement;
  o.fem.refinement = field_refinement;
  return o;
}

namespace {

constexpr std::array<double, 4> kGaussX{0.0694318442029737, 0.3300094782075719,
                                        0.6699905217924281, 0.9305681557970263};
constexpr std::array<double, 4> kGaussW{0.1739274225537264, 0.3260725774462736,
                                        0.3260725774462736, 0.1739274225537264};

// Transverse electrostatic line load q(x) = coefficient(x) / (g - v(x))^2,
// integrated consistently with the Hermite shape functions. The parallel-plate
// form acts on the electrode overlap; the field form rescales a field traction
// sampled on a reference shape to the current local gap.
class ElectrostaticLoad : public DeformationLoad {
 public:
  ElectrostaticLoad(const BeamMesh& mesh, double gap, double overlap_start)
      : gap_(gap), overlap_start_(overlap_start), mesh_length_(mesh.length()) {}

  void set_parallel_plate(double coefficient) {
    field_ = false;
    coefficient_ = coefficient;
  }

  void set_field(const BeamMesh& mesh, std::vector<double> line_load, const Displacement& shape,
                 double correction) {
    field_ = true;
    // Per element and Gauss point: correction * T_e * g_ref^2.
    field_coefficient_.assign(mesh.element_count(), {});
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      const double a = mesh.nodes[static_cast<std::size_t>(mesh.elements[e].first)];
      const double le = mesh.element_length(e);
      for (std::size_t k = 0; k < kGaussX.size(); ++k) {
        const double g_ref = gap_ - shape.deflection_at(mesh, a + kGaussX[k] * le);
        field_coefficient_[e][k] = correction * line_load[e] * g_ref * g_ref;
      }
    }
  }

  void evaluate(const BeamMesh& mesh, const Displacement& d, Eigen::VectorXd& force,
                std::vector<Eigen::Triplet<double>>& jacobian) const override {
    visit(mesh, d, [&](std::size_t e, const std::array<double, 4>& h, double w, double q,
                       double dq) {
      const int i = mesh.elements[e].first;
      const int j = mesh.elements[e].second;
      const std::array<int, 4> dofs{3 * i + kDofV, 3 * i + kDofTheta, 3 * j + kDofV,
                                    3 * j + kDofTheta};
      for (int a = 0; a < 4; ++a) {
        force[dofs[a]] += w * h[a] * q;
        for (int b = 0; b < 4; ++b) jacobian.emplace_back(dofs[a], dofs[b], w * h[a] * h[b] * dq);
      }
    });
  }

  double min_gap_fraction(const BeamMesh& mesh, const Displacement& d) const override {
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      const auto [a, b] = overlap_span(mesh, e);
      if (!(b > a)) continue;
      for (int k = 0; k <= 4; ++k) {
        const double x = a + (b - a) * k / 4.0;
        lowest = std::min(lowest, (gap_ - d.deflection_at(mesh, x)) / gap_);
      }
    }
    return std::isfinite(lowest) ? lowest : 1.0;
  }

  double total_force(const BeamMesh& mesh, const Displacement& d) const {
    double total = 0.0;
    visit(mesh, d, [&](std::size_t, const std::array<double, 4>&, double w, double q, double) {
      total += w * q;
    });
    return total;
  }

 private:
  std::pair<double, double> overlap_span(const BeamMesh& mesh, std::size_t e) const {
    const double a = mesh.nodes[static_cast<std::size_t>(mesh.elements[e].first)];
    const double b = mesh.nodes[static_cast<std::size_t>(mesh.elements[e].second)];
    return {std::max(a, overlap_start_), std::min(b, mesh_length_)};
  }

  template <typename Fn>
  void visit(const BeamMesh& mesh, const Displacement& d, Fn&& fn) const {
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      const double x0 = mesh.nodes[static_cast<std::size_t>(mesh.elements[e].first)];
      const double le = mesh.element_length(e);
      double a = x0;
      double b = x0 + le;
      if (!field_) std::tie(a, b) = overlap_span(mesh, e);
      if (!(b > a)) continue;
      const auto i = static_cast<std::size_t>(mesh.elements[e].first);
      const auto j = static_cast<std::size_t>(mesh.elements[e].second);
      for (std::size_t k = 0; k < kGaussX.size(); ++k) {
        const double x = a + kGaussX[k] * (b - a);
        const auto h = hermite_shape((x - x0) / le, le);
        const double v = h[0] * d.v[i] + h[1] * d.theta[i] + h[2] * d.v[j] + h[3] * d.theta[j];
        const double local_gap = gap_ - v;
        if (!(local_gap > 0.0)) throw ContactSignal("beam reached the counter-electrode");
        const double c = field_ ? field_coefficient_[e][k] : coefficient_;
        const double q = c / (local_gap * local_gap);
        fn(e, h, kGaussW[k] * (b - a), q, 2.0 * q / local_gap);
      }
    }
  }

  double gap_;
  double overlap_start_;
  double mesh_length_;
  bool field_ = false;
  double coefficient_ = 0.0;
  std::vector<std::array<double, 4>> field_coefficient_;
};

StepOutcome fail(double voltage, const Displacement& d, SolveStatus status, int iterations) {
  StepOutcome out;
  out.voltage = voltage;
  out.displacement = d;
  out.converged = false;
  out.termination = status;
  out.iterations = iterations;
  out.tip_deflection = tip_deflection(d);
  return out;
}

double relative_change(double now, double before, double scale) {
  return std::abs(now - before) / std::max(std::abs(now), scale);
}

}  // namespace

CantileverModel::CantileverModel(Specimen s, SolverConfig cfg)
    : specimen_(std::move(s)), cfg_(cfg) {
  specimen_.validate();
  cfg_.validate();
  mesh_ = build_mesh(specimen_, cfg_.n_beam_elements);
  dead_ = LoadState::zero(mesh_);
  dead_.equivalent_initial_loads = initial_state_loads(specimen_.initial_state, mesh_);
  newton_.geometric_nonlinearity = cfg_.geometric_nonlinearity;
}

StepOutcome CantileverModel::initial() const {
  const NonlinearResult r = solve_equilibrium(mesh_, dead_, nullptr, newton_);
  if (!r.converged())
    throw NumericalError(std::string("zero-voltage equilibrium failed: ") + to_string(r.status));
  StepOutcome out;
  out.voltage = 0.0;
  out.displacement = r.displacement;
  out.converged = true;
  out.iterations = 1;
  out.tip_deflection = tip_deflection(r.displacement);
  if (cfg_.field_method != FieldMethod::ParallelPlate) {
    DomainOptions dopt;
    dopt.driven = cfg_.driven;
    const FieldDomain dom = build_field_domain(specimen_, mesh_, r.displacement, dopt);
    const FieldSolution sol = solve_field(cfg_.field_method, dom, 1.0, cfg_.field_options());
    out.capacitance = capacitance(sol) * sol.depth;
  }
  return out;
}

StepOutcome CantileverModel::step(const StepOutcome& from, double voltage) const {
  const double gap = specimen_.gap;
  const double overlap_start = specimen_.length - specimen_.counter_electrode_extent;
  ElectrostaticLoad load(mesh_, gap, overlap_start);
  const double scale = 1e-6 * gap;

  if (cfg_.field_method == FieldMethod::ParallelPlate) {
    load.set_parallel_plate(cfg_.correction * kVacuumPermittivity * specimen_.width * voltage *
                            voltage / 2.0);
    NonlinearResult r;
    try {
      r = solve_equilibrium(mesh_, dead_, &load, newton_, &from.displacement);
    } catch (const ContactSignal&) {
      return fail(voltage, from.displacement, SolveStatus::Contact, 1);
    }
    if (!r.converged()) return fail(voltage, r.displacement, r.status, 1);
    StepOutcome out;
    out.voltage = voltage;
    out.displacement = r.displacement;
    out.converged = true;
    out.iterations = 1;
    out.tip_deflection = tip_deflection(r.displacement);
    out.electrostatic_force = load.total_force(mesh_, r.displacement);
    return out;
  }

  DomainOptions dopt;
  dopt.driven = cfg_.driven;
  const SolveOptions fopt = cfg_.field_options();
  const bool single_pass = cfg_.coupling_mode == CouplingMode::NonIncremental;
  Displacement geometry = from.displacement;
  std::vector<double> traction;
  for (int pass = 1; pass <= cfg_.max_inner_iter; ++pass) {
    FieldSolution sol;
    try {
      const FieldDomain dom = build_field_domain(specimen_, mesh_, geometry, dopt);
      sol = solve_field(cfg_.field_method, dom, voltage, fopt);
    } catch (const ContactSignal&) {
      return fail(voltage, geometry, SolveStatus::Contact, pass);
    } catch (const RemeshSignal&) {
      return fail(voltage, geometry, SolveStatus::NonConvergence, pass);
    } catch (const NumericalError&) {
      return fail(voltage, geometry, SolveStatus::NonConvergence, pass);
    }
    std::vector<double> fresh = surface_traction(sol, mesh_).line_load;
    if (pass > 10 && !traction.empty()) {
      for (std::size_t e = 0; e < fresh.size(); ++e)
        fresh[e] = cfg_.relaxation * fresh[e] + (1.0 - cfg_.relaxation) * traction[e];
    }
    traction = std::move(fresh);
    load.set_field(mesh_, traction, geometry, cfg_.correction);

    NonlinearResult r;
    try {
      r = solve_equilibrium(mesh_, dead_, &load, newton_, &geometry);
    } catch (const ContactSignal&) {
      return fail(voltage, geometry, SolveStatus::Contact, pass);
    }
    if (!r.converged()) return fail(voltage, r.displacement, r.status, pass);

    const double change =
        relative_change(tip_deflection(r.displacement), tip_deflection(geometry), scale);
    geometry = r.displacement;
    if (single_pass || change < cfg_.inner_tol) {
      StepOutcome out;
      out.voltage = voltage;
      out.displacement = geometry;
      out.converged = true;
      out.iterations = pass;
      out.tip_deflection = tip_deflection(geometry);
      out.electrostatic_force = load.total_force(mesh_, geometry);
      if (voltage != 0.0) {
        out.capacitance = capacitance(sol) * sol.depth;
      } else {
        const FieldDomain dom = build_field_domain(specimen_, mesh_, geometry, dopt);
        out.capacitance = capacitance(solve_field(cfg_.field_method, dom, 1.0, fopt)) * sol.depth;
      }
      return out;
    }
  }
  return fail(voltage, geometry, SolveStatus::NonConvergence, cfg_.max_inner_iter);
}

LumpedPlateModel::LumpedPlateModel(LumpedParameters p, SolverConfig cfg) : p_(p), cfg_(cfg) {
  if (!(p_.stiffness > 0.0 && p_.gap > 0.0 && p_.area > 0.0 && p_.permittivity > 0.0))
    throw ConfigError("lumped stiffness, gap, area and permittivity must be positive");
  cfg_.validate();
}

StepOutcome LumpedPlateModel::initial() const {
  StepOutcome out;
  out.displacement = Displacement::zero(1);
  out.converged = true;
  out.iterations = 1;
  out.capacitance = p_.permittivity * p_.area / p_.gap;
  return out;
}

StepOutcome LumpedPlateModel::step(const StepOutcome& from, double voltage) const {
  const double g = p_.gap;
  const double c = p_.permittivity * p_.area * voltage * voltage;
  double u = from.displacement.v.empty() ? 0.0 : from.displacement.v.back();
  Displacement d = Displacement::zero(1);
  constexpr int kMaxIter = 100;
  for (int it = 1; it <= kMaxIter; ++it) {
    const double gl = g - u;
    const double tangent = p_.stiffness - c / (gl * gl * gl);
    d.v[0] = u;
    if (!(tangent > 0.0)) return fail(voltage, d, SolveStatus::LimitPoint, it);
    double du = (c / (2.0 * gl * gl) - p_.stiffness * u) / tangent;
    int halvings = 0;
    while (u + du >= g * (1.0 - 1e-3) && halvings < 30) {
      du *= 0.5;
      ++halvings;
    }
    if (halvings == 30) return fail(voltage, d, SolveStatus::Contact, it);
    u += du;
    if (std::abs(du) <= 1e-13 * g) {
      const double gn = g - u;
      d.v[0] = u;
      if (!(p_.stiffness - c / (gn * gn * gn) > 0.0))
        return fail(voltage, d, SolveStatus::LimitPoint, it);
      StepOutcome out;
      out.voltage = voltage;
      out.displacement = d;
      out.converged = true;
      out.iterations = it;
      out.tip_deflection = u;
      out.capacitance = p_.permittivity * p_.area / gn;
      out.electrostatic_force = c / (2.0 * gn * gn);
      return out;
    }
  }
  d.v[0] = u;
  return fail(voltage, d, SolveStatus::NonConvergence, kMaxIter);
}

StepOutcome sequential_step(const Specimen& s, const StepOutcome& state, double voltage,
                            const SolverConfig& cfg) {
  return CantileverModel(s, cfg).step(state, voltage);
}

std::size_t SweepResult::converged_count() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const StepOutcome& s) { return s.converged; }));
}

const StepOutcome* SweepResult::last_converged() const {
  const StepOutcome* last = nullptr;
  for (const auto& s : steps)
    if (s.converged) last = &s;
  return last;
}

const StepOutcome* SweepResult::first_failed() const {
  for (const auto& s : steps)
    if (!s.converged) return &s;
  return nullptr;
}

SweepResult voltage_sweep(const EquilibriumModel& model, const SolverConfig& cfg,
                          const StepObserver& observer) {
  cfg.validate();
  SweepResult result;
  StepOutcome state = model.initial();
  result.initial_tip = state.tip_deflection;
  for (long k = 0;; ++k) {
    const double voltage = cfg.v_start + static_cast<double>(k) * cfg.dv;
    if (voltage > cfg.v_end + 1e-9 * cfg.dv) break;
    StepOutcome out = model.step(state, voltage);
    result.has_capacitance = result.has_capacitance || out.capacitance.has_value();
    result.steps.push_back(out);
    if (observer) observer(result.steps.back());
    if (!out.converged) break;
    state = std::move(out);
  }
  return result;
}

SweepResult voltage_sweep(const EquilibriumModel& model, const SolverConfig& cfg) {
  return voltage_sweep(model, cfg, StepObserver{});
}

SweepResult voltage_sweep(const Specimen& s, const SolverConfig& cfg) {
  return voltage_sweep(CantileverModel(s, cfg), cfg);
}

PullInResult find_pull_in(const EquilibriumModel& model, const SolverConfig& cfg) {
  PullInResult result;
  result.sweep = voltage_sweep(model, cfg);
  const StepOutcome* failed = result.sweep.first_failed();
  if (!failed) {
    std::ostringstream msg;
    msg << "no pull-in up to v_end = " << cfg.v_end << " V; raise v_end";
    throw NoPullInFound(msg.str());
  }
  const StepOutcome* last = result.sweep.last_converged();
  if (!last) throw NumericalError("the first voltage of the sweep did not converge");

  StepOutcome low = *last;
  double high = failed->voltage;
  SolveStatus termination = failed->termination;
  while (high - low.voltage > cfg.pullin_bisection_tol) {
    const double mid = 0.5 * (low.voltage + high);
    StepOutcome trial = model.step(low, mid);
    if (trial.converged) {
      low = std::move(trial);
    } else {
      high = mid;
      termination = trial.termination;
    }
  }
  result.v_pullin_low = low.voltage;
  result.v_pullin_high = high;
  result.tip_deflection_at_last_converged = low.tip_deflection;
  result.termination = termination;
  result.last_converged = std::move(low);
  return result;
}

PullInResult find_pull_in(const Specimen& s, const SolverConfig& cfg) {
  return find_pull_in(CantileverModel(s, cfg), cfg);
}

PullInResult find_pull_in(const LumpedParameters& p, const SolverConfig& cfg) {
  return find_pull_in(LumpedPlateModel(p, cfg), cfg);
}

LumpedParams extract_lumped(const SweepResult& sweep, const PullInResult* pullin) {
  std::vector<const StepOutcome*> loaded;
  for (const auto& s : sweep.steps)
    if (s.converged && s.voltage > 0.0) loaded.push_back(&s);
  if (loaded.size() < 3)
    throw ExtractionError("lumped extraction needs at least three converged nonzero voltages");
  const StepOutcome& first = *loaded.front();
  const double deflection = first.tip_deflection - sweep.initial_tip;
  LumpedParams out;
  out.k_eff = first.electrostatic_force / deflection;
  if (!std::isfinite(out.k_eff) || out.k_eff <= 0.0)
    throw ExtractionError("secant stiffness is not positive");
  for (const auto& s : sweep.steps)
    if (s.converged && s.capacitance) out.cv_table.emplace_back(s.voltage, *s.capacitance);
  if (pullin) out.v_pullin = pullin->midpoint();
  return out;
}

LumpedParams extract_lumped(const SweepResult& sweep, const Specimen& s,
                            const PullInResult* pullin) {
  s.validate();
  return extract_lumped(sweep, pullin);
}

}  // namespace pullin
