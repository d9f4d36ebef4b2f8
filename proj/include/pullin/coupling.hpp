#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pullin/beam_fe.hpp"
#include "pullin/field.hpp"
#include "pullin/specimens.hpp"

namespace pullin {

enum class CouplingMode { Iterative, NonIncremental };
std::string to_string(CouplingMode mode);
CouplingMode coupling_mode_from_string(const std::string& text);

struct SolverConfig {
  FieldMethod field_method = FieldMethod::ParallelPlate;
  CouplingMode coupling_mode = CouplingMode::Iterative;
  bool geometric_nonlinearity = true;
  double v_start = 0.0;
  double v_end = 100.0;
  double dv = 1.0;
  double inner_tol = 1e-8;
  int max_inner_iter = 50;
  double pullin_bisection_tol = 0.01;
  int n_beam_elements = 40;
  double correction = 1.0;
  double field_refinement = 1.0;  // multiplies the BEM/FEM element targets
  double relaxation = 0.7;        // traction under-relaxation after 10 staggered passes
  DrivenElectrode driven = DrivenElectrode::CounterElectrode;

  // v_end == v_start is accepted (a single-voltage sweep).
  void validate() const;
  SolveOptions field_options() const;
};

// One equilibrium (or failed attempt) at a given voltage.
struct StepOutcome {
  double voltage = 0.0;
  Displacement displacement;
  bool converged = false;
  SolveStatus termination = SolveStatus::Converged;
  int iterations = 0;
  double tip_deflection = 0.0;
  std::optional<double> capacitance;  // F, absent for the parallel-plate model
  double electrostatic_force = 0.0;   // N, total transverse force on the beam
};

// Voltage-controlled structure that can be driven by the continuation engine.
class EquilibriumModel {
 public:
  virtual ~EquilibriumModel() = default;
  // Zero-voltage state every sweep starts from.
  virtual StepOutcome initial() const = 0;
  // Equilibrium at `voltage` seeded from a previously converged state.
  virtual StepOutcome step(const StepOutcome& from, double voltage) const = 0;
};

// Cantilever beam coupled to one of the field models.
class CantileverModel : public EquilibriumModel {
 public:
  CantileverModel(Specimen s, SolverConfig cfg);
  StepOutcome initial() const override;
  StepOutcome step(const StepOutcome& from, double voltage) const override;

  const BeamMesh& mesh() const { return mesh_; }
  const Specimen& specimen() const { return specimen_; }

 private:
  Specimen specimen_;
  SolverConfig cfg_;
  BeamMesh mesh_;
  LoadState dead_;
  NonlinearOptions newton_;
};

// Rigid plate on a linear spring facing a fixed electrode.
struct LumpedParameters {
  double stiffness = 1.0;  // N/m
  double gap = 1e-6;       // m
  double area = 1e-10;     // m^2
  double permittivity = kVacuumPermittivity;
};

class LumpedPlateModel : public EquilibriumModel {
 public:
  LumpedPlateModel(LumpedParameters p, SolverConfig cfg);
  StepOutcome initial() const override;
  StepOutcome step(const StepOutcome& from, double voltage) const override;

 private:
  LumpedParameters p_;
  SolverConfig cfg_;
};

// Single voltage increment on a cantilever (staggered field/structure passes).
StepOutcome sequential_step(const Specimen& s, const StepOutcome& state, double voltage,
                            const SolverConfig& cfg);

struct SweepResult {
  std::vector<StepOutcome> steps;
  double initial_tip = 0.0;  // zero-voltage tip deflection
  bool has_capacitance = false;

  std::size_t converged_count() const;
  const StepOutcome* last_converged() const;
  const StepOutcome* first_failed() const;
};

SweepResult voltage_sweep(const EquilibriumModel& model, const SolverConfig& cfg);
SweepResult voltage_sweep(const Specimen& s, const SolverConfig& cfg);

// Called with each step as soon as it is computed.
using StepObserver = std::function<void(const StepOutcome&)>;
SweepResult voltage_sweep(const EquilibriumModel& model, const SolverConfig& cfg,
                          const StepObserver& observer);

struct PullInResult {
  double v_pullin_low = 0.0;
  double v_pullin_high = 0.0;
  double tip_deflection_at_last_converged = 0.0;
  SolveStatus termination = SolveStatus::NonConvergence;
  StepOutcome last_converged;
  SweepResult sweep;

  double midpoint() const { return 0.5 * (v_pullin_low + v_pullin_high); }
};

// Throws NoPullInFound when every voltage up to v_end converges.
PullInResult find_pull_in(const EquilibriumModel& model, const SolverConfig& cfg);
PullInResult find_pull_in(const Specimen& s, const SolverConfig& cfg);
PullInResult find_pull_in(const LumpedParameters& p, const SolverConfig& cfg);

struct LumpedParams {
  double k_eff = 0.0;  // N/m
  std::vector<std::pair<double, double>> cv_table;  // (V, C)
  std::optional<double> v_pullin;
};

// Secant stiffness at the lowest nonzero converged voltage. Throws
// ExtractionError with fewer than three converged nonzero-voltage steps.
LumpedParams extract_lumped(const SweepResult& sweep, const PullInResult* pullin = nullptr);
LumpedParams extract_lumped(const SweepResult& sweep, const Specimen& s,
                            const PullInResult* pullin = nullptr);

}  // namespace pullin
