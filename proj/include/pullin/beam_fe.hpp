#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pullin/specimens.hpp"

namespace pullin {

// Uniform two-node Timoshenko discretization of a cantilever clamped at node 0.
struct BeamMesh {
  std::vector<double> nodes;  // axial coordinates, strictly increasing from 0
  std::vector<std::pair<int, int>> elements;
  Section section;
  Material material;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t element_count() const { return elements.size(); }
  std::size_t dof_count() const { return 3 * nodes.size(); }
  double length() const { return nodes.back() - nodes.front(); }
  double element_length(std::size_t e) const {
    return nodes[static_cast<std::size_t>(elements[e].second)] -
           nodes[static_cast<std::size_t>(elements[e].first)];
  }
  // Element containing x (clamped to the mesh).
  std::size_t locate(double x) const;
};

BeamMesh build_mesh(const Specimen& s, int n_elements = 40);

// DOF layout: node i carries (u, v, theta) at 3i, 3i+1, 3i+2.
inline constexpr int kDofU = 0;
inline constexpr int kDofV = 1;
inline constexpr int kDofTheta = 2;

enum class Reference { Undeformed, Updated };

struct Displacement {
  std::vector<double> v;      // transverse, positive toward the counter-electrode
  std::vector<double> theta;  // rotation
  std::vector<double> u;      // axial
  Reference reference = Reference::Undeformed;

  static Displacement zero(std::size_t n_nodes);
  std::size_t node_count() const { return v.size(); }

  Eigen::VectorXd to_vector() const;
  static Displacement from_vector(const Eigen::VectorXd& dofs, Reference ref);

  // Cubic Hermite interpolation of v from nodal (v, theta).
  double deflection_at(const BeamMesh& mesh, double x) const;
};

double tip_deflection(const Displacement& d);

struct NodalLoad {
  double fv = 0.0;
  double moment = 0.0;
  double fu = 0.0;
};

struct LoadState {
  std::vector<double> distributed_pressure;  // per element, N/m, positive toward the electrode
  std::vector<NodalLoad> nodal_loads;        // per node
  Eigen::VectorXd equivalent_initial_loads;  // full DOF vector

  static LoadState zero(const BeamMesh& mesh);
  Eigen::VectorXd assemble(const BeamMesh& mesh) const;
};

struct ElementMatrices {
  Eigen::Matrix<double, 6, 6> stiffness;
  Eigen::Matrix<double, 6, 6> geometric_stiffness;
};

// Straight element along x. Throws NumericalError for non-positive length.
ElementMatrices element_matrices(double length, const Material& material, const Section& section,
                                 double axial_force);

// Shear parameter Phi = 12 E J / (k G A L^2).
double shear_parameter(double length, const Material& material, const Section& section);

// Values of the four Hermite shape functions (v_i, theta_i, v_j, theta_j) at xi in [0, 1].
std::array<double, 4> hermite_shape(double xi, double length);

// Generalized eigen-deformation of each element from the initial state:
// axial = eps0 - eps0T + N0/EA, curvature = kappa0 - kappa0T + M0/EJ.
struct ElementEigenDeformation {
  double axial_strain = 0.0;
  double curvature = 0.0;
};
std::vector<ElementEigenDeformation> initial_eigen_deformation(const InitialState& init,
                                                               const BeamMesh& mesh);

// Thermal curvature (alpha / J) * integral over the section of y T(x, y) dA.
double thermal_curvature(const InitialState& init, const BeamMesh& mesh, double x);

// Consistent nodal loads equivalent to the initial strain, curvature, thermal
// state and preloads (full DOF vector, clamped DOFs included).
Eigen::VectorXd initial_state_loads(const InitialState& init, const BeamMesh& mesh);

struct ElementResultants {
  double axial_force = 0.0;
  double moment_i = 0.0;
  double moment_j = 0.0;
};
// Small-displacement stress resultants recovered from K_e d_e.
ElementResultants element_resultants(const BeamMesh& mesh, const Displacement& d, std::size_t e);

Displacement solve_linear(const BeamMesh& mesh, const LoadState& loads);

// External load that depends on the current configuration and supplies its own
// stiffness contribution -d(force)/d(dofs) for the Newton tangent.
class DeformationLoad {
 public:
  virtual ~DeformationLoad() = default;
  // Adds the external force into `force` and d(force)/d(dofs) into `jacobian`.
  virtual void evaluate(const BeamMesh& mesh, const Displacement& d, Eigen::VectorXd& force,
                        std::vector<Eigen::Triplet<double>>& jacobian) const = 0;
  // Smallest local gap divided by the nominal gap; <= 0 means contact.
  virtual double min_gap_fraction(const BeamMesh&, const Displacement&) const { return 1.0; }
};

enum class SolveStatus { Converged, NonConvergence, LimitPoint, Contact };
const char* to_string(SolveStatus status);

struct NonlinearOptions {
  double tol = 1e-10;
  int max_iter = 50;
  bool geometric_nonlinearity = true;
  // Gap fraction below which an iterate is treated as touching the electrode.
  double contact_fraction = 1e-3;
};

struct NonlinearResult {
  Displacement displacement;
  SolveStatus status = SolveStatus::NonConvergence;
  int iterations = 0;
  bool converged() const { return status == SolveStatus::Converged; }
};

// Newton equilibrium with corotational element frames (or the small-displacement
// stiffness when geometric_nonlinearity is off). `dead` holds configuration
// independent loads; `load` may be null.
NonlinearResult solve_equilibrium(const BeamMesh& mesh, const LoadState& dead,
                                  const DeformationLoad* load, const NonlinearOptions& options,
                                  const Displacement* seed = nullptr);

// Newton iteration re-evaluating `load_fn` at each iterate; the load is treated
// as dead within an iteration.
NonlinearResult solve_nonlinear(const BeamMesh& mesh,
                                const std::function<LoadState(const Displacement&)>& load_fn,
                                double tol, int max_iter);

// Internal force vector and tangent of the corotational model.
void corotational_internal(const BeamMesh& mesh, const Displacement& d, Eigen::VectorXd& force,
                           std::vector<Eigen::Triplet<double>>* tangent);

// Small-displacement stiffness, full DOF set, clamp not applied.
Eigen::SparseMatrix<double> assemble_linear_stiffness(const BeamMesh& mesh);

}  // namespace pullin
