#include "pullin/beam_fe.hpp"

#include <algorithm>
#include <cmath>

#include "pullin/errors.hpp"

namespace pullin {

namespace {

constexpr int kClampedDofs = 3;

// Two- and four-point Gauss-Legendre rules on [0, 1].
constexpr std::array<double, 2> kGauss2X{0.21132486540518711775, 0.78867513459481288225};
constexpr std::array<double, 4> kGauss4X{0.06943184420297371239, 0.33000947820757186760,
                                         0.66999052179242813240, 0.93056815579702628761};
constexpr std::array<double, 4> kGauss4W{0.17392742256872692869, 0.32607257743127307131,
                                         0.32607257743127307131, 0.17392742256872692869};

std::array<int, 6> element_dofs(const BeamMesh& mesh, std::size_t e) {
  const int i = mesh.elements[e].first;
  const int j = mesh.elements[e].second;
  return {3 * i, 3 * i + 1, 3 * i + 2, 3 * j, 3 * j + 1, 3 * j + 2};
}

// Norm with rotations scaled to a length so both kinds of DOF carry metres.
double scaled_norm(const Eigen::VectorXd& x, double length) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double value = (k % 3 == kDofTheta) ? x[k] * length : x[k];
    sum += value * value;
  }
  return std::sqrt(sum);
}

double wrap_angle(double a) { return std::remainder(a, 2.0 * M_PI); }

Eigen::SparseMatrix<double> reduced(const std::vector<Eigen::Triplet<double>>& triplets,
                                    Eigen::Index n_full) {
  std::vector<Eigen::Triplet<double>> kept;
  kept.reserve(triplets.size());
  for (const auto& t : triplets)
    if (t.row() >= kClampedDofs && t.col() >= kClampedDofs)
      kept.emplace_back(t.row() - kClampedDofs, t.col() - kClampedDofs, t.value());
  Eigen::SparseMatrix<double> a(n_full - kClampedDofs, n_full - kClampedDofs);
  a.setFromTriplets(kept.begin(), kept.end());
  return a;
}

void add_block(std::vector<Eigen::Triplet<double>>& triplets, const std::array<int, 6>& dofs,
               const Eigen::Matrix<double, 6, 6>& k) {
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b)
      if (k(a, b) != 0.0) triplets.emplace_back(dofs[a], dofs[b], k(a, b));
}

}  // namespace

std::size_t BeamMesh::locate(double x) const {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - nodes.begin());
  if (hi == 0) hi = 1;
  if (hi >= nodes.size()) hi = nodes.size() - 1;
  return hi - 1;
}

BeamMesh build_mesh(const Specimen& s, int n_elements) {
  if (n_elements < 4) throw ConfigError("n_beam_elements must be at least 4");
  BeamMesh mesh;
  mesh.section = derive_section(s);
  mesh.material = s.material;
  mesh.nodes.resize(static_cast<std::size_t>(n_elements) + 1);
  for (int i = 0; i <= n_elements; ++i)
    mesh.nodes[static_cast<std::size_t>(i)] = s.length * static_cast<double>(i) / n_elements;
  mesh.nodes.back() = s.length;
  for (int e = 0; e < n_elements; ++e) mesh.elements.emplace_back(e, e + 1);
  return mesh;
}

Displacement Displacement::zero(std::size_t n_nodes) {
  Displacement d;
  d.v.assign(n_nodes, 0.0);
  d.theta.assign(n_nodes, 0.0);
  d.u.assign(n_nodes, 0.0);
  return d;
}

Eigen::VectorXd Displacement::to_vector() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(3 * v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    x[static_cast<Eigen::Index>(3 * i + kDofU)] = u[i];
    x[static_cast<Eigen::Index>(3 * i + kDofV)] = v[i];
    x[static_cast<Eigen::Index>(3 * i + kDofTheta)] = theta[i];
  }
  return x;
}

Displacement Displacement::from_vector(const Eigen::VectorXd& dofs, Reference ref) {
  Displacement d = zero(static_cast<std::size_t>(dofs.size() / 3));
  for (std::size_t i = 0; i < d.v.size(); ++i) {
    d.u[i] = dofs[static_cast<Eigen::Index>(3 * i + kDofU)];
    d.v[i] = dofs[static_cast<Eigen::Index>(3 * i + kDofV)];
    d.theta[i] = dofs[static_cast<Eigen::Index>(3 * i + kDofTheta)];
  }
  d.reference = ref;
  return d;
}

double Displacement::deflection_at(const BeamMesh& mesh, double x) const {
  if (x <= mesh.nodes.front()) return v.front();
  const std::size_t e = mesh.locate(x);
  const auto [i, j] = mesh.elements[e];
  const double le = mesh.element_length(e);
  const double xi = std::clamp((x - mesh.nodes[static_cast<std::size_t>(i)]) / le, 0.0, 1.0);
  const auto n = hermite_shape(xi, le);
  const auto ui = static_cast<std::size_t>(i);
  const auto uj = static_cast<std::size_t>(j);
  return n[0] * v[ui] + n[1] * theta[ui] + n[2] * v[uj] + n[3] * theta[uj];
}

double tip_deflection(const Displacement& d) { return d.v.empty() ? 0.0 : d.v.back(); }

LoadState LoadState::zero(const BeamMesh& mesh) {
  LoadState l;
  l.distributed_pressure.assign(mesh.element_count(), 0.0);
  l.nodal_loads.assign(mesh.node_count(), NodalLoad{});
  l.equivalent_initial_loads = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
  return l;
}

Eigen::VectorXd LoadState::assemble(const BeamMesh& mesh) const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
  if (equivalent_initial_loads.size() == f.size()) f += equivalent_initial_loads;
  for (std::size_t n = 0; n < nodal_loads.size() && n < mesh.node_count(); ++n) {
    f[static_cast<Eigen::Index>(3 * n + kDofU)] += nodal_loads[n].fu;
    f[static_cast<Eigen::Index>(3 * n + kDofV)] += nodal_loads[n].fv;
    f[static_cast<Eigen::Index>(3 * n + kDofTheta)] += nodal_loads[n].moment;
  }
  for (std::size_t e = 0; e < distributed_pressure.size() && e < mesh.element_count(); ++e) {
    const double q = distributed_pressure[e];
    if (q == 0.0) continue;
    const double le = mesh.element_length(e);
    const auto dofs = element_dofs(mesh, e);
    f[dofs[1]] += q * le / 2.0;
    f[dofs[2]] += q * le * le / 12.0;
    f[dofs[4]] += q * le / 2.0;
    f[dofs[5]] -= q * le * le / 12.0;
  }
  return f;
}

double shear_parameter(double length, const Material& material, const Section& section) {
  const double g = material.shear_modulus();
  return 12.0 * material.young_modulus * section.second_moment /
         (section.shear_correction * g * section.area * length * length);
}

ElementMatrices element_matrices(double length, const Material& material, const Section& section,
                                 double axial_force) {
  if (!(length > 0.0)) throw NumericalError("element length must be positive");
  const double l = length;
  const double ea = material.young_modulus * section.area;
  const double ej = material.young_modulus * section.second_moment;
  const double phi = shear_parameter(l, material, section);

  ElementMatrices m;
  m.stiffness.setZero();
  m.geometric_stiffness.setZero();

  const double ka = ea / l;
  m.stiffness(0, 0) = ka;
  m.stiffness(0, 3) = -ka;
  m.stiffness(3, 0) = -ka;
  m.stiffness(3, 3) = ka;

  const double c = ej / (l * l * l * (1.0 + phi));
  const std::array<int, 4> b{1, 2, 4, 5};
  const double kb[4][4] = {
      {12.0, 6.0 * l, -12.0, 6.0 * l},
      {6.0 * l, (4.0 + phi) * l * l, -6.0 * l, (2.0 - phi) * l * l},
      {-12.0, -6.0 * l, 12.0, -6.0 * l},
      {6.0 * l, (2.0 - phi) * l * l, -6.0 * l, (4.0 + phi) * l * l},
  };
  const double g = axial_force / (30.0 * l);
  const double kg[4][4] = {
      {36.0, 3.0 * l, -36.0, 3.0 * l},
      {3.0 * l, 4.0 * l * l, -3.0 * l, -l * l},
      {-36.0, -3.0 * l, 36.0, -3.0 * l},
      {3.0 * l, -l * l, -3.0 * l, 4.0 * l * l},
  };
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s) {
      m.stiffness(b[r], b[s]) = c * kb[r][s];
      m.geometric_stiffness(b[r], b[s]) = g * kg[r][s];
    }
  return m;
}

std::array<double, 4> hermite_shape(double xi, double length) {
  const double xi2 = xi * xi;
  const double xi3 = xi2 * xi;
  return {1.0 - 3.0 * xi2 + 2.0 * xi3, length * (xi - 2.0 * xi2 + xi3), 3.0 * xi2 - 2.0 * xi3,
          length * (xi3 - xi2)};
}

double thermal_curvature(const InitialState& init, const BeamMesh& mesh, double x) {
  if (init.temp_field.empty()) return 0.0;
  const double t = mesh.section.flexural_dim;
  double integral = 0.0;  // integral of y T dy across the thickness
  for (std::size_t g = 0; g < kGauss4X.size(); ++g) {
    const double y = -t / 2.0 + kGauss4X[g] * t;
    integral += kGauss4W[g] * t * y * init.temp_field(x, y);
  }
  return mesh.material.thermal_expansion * mesh.section.depth * integral /
         mesh.section.second_moment;
}

std::vector<ElementEigenDeformation> initial_eigen_deformation(const InitialState& init,
                                                               const BeamMesh& mesh) {
  const double ea = mesh.material.young_modulus * mesh.section.area;
  const double ej = mesh.material.young_modulus * mesh.section.second_moment;
  const double alpha = mesh.material.thermal_expansion;
  std::vector<ElementEigenDeformation> out(mesh.element_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const double x0 = mesh.nodes[static_cast<std::size_t>(mesh.elements[e].first)];
    const double le = mesh.element_length(e);
    double eps_t = 0.0;
    double kappa_t = 0.0;
    for (double gx : kGauss2X) {
      const double x = x0 + gx * le;
      eps_t += 0.5 * alpha * init.temp_uniform(x);
      kappa_t += 0.5 * thermal_curvature(init, mesh, x);
    }
    out[e].axial_strain = init.strain_initial - eps_t + init.axial_preload / ea;
    out[e].curvature = init.curvature_initial - kappa_t + init.moment_preload / ej;
  }
  return out;
}

Eigen::VectorXd initial_state_loads(const InitialState& init, const BeamMesh& mesh) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
  if (init.is_zero()) return f;
  const double ea = mesh.material.young_modulus * mesh.section.area;
  const double ej = mesh.material.young_modulus * mesh.section.second_moment;
  const auto eigen = initial_eigen_deformation(init, mesh);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto dofs = element_dofs(mesh, e);
    const double n = ea * eigen[e].axial_strain;
    const double m = ej * eigen[e].curvature;
    f[dofs[0]] -= n;
    f[dofs[3]] += n;
    f[dofs[2]] -= m;
    f[dofs[5]] += m;
  }
  return f;
}

ElementResultants element_resultants(const BeamMesh& mesh, const Displacement& d, std::size_t e) {
  const auto dofs = element_dofs(mesh, e);
  const Eigen::VectorXd all = d.to_vector();
  Eigen::Matrix<double, 6, 1> de;
  for (int k = 0; k < 6; ++k) de[k] = all[dofs[k]];
  const auto km = element_matrices(mesh.element_length(e), mesh.material, mesh.section, 0.0);
  const Eigen::Matrix<double, 6, 1> fe = km.stiffness * de;
  return {fe[3], -fe[2], fe[5]};
}

Eigen::SparseMatrix<double> assemble_linear_stiffness(const BeamMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto km = element_matrices(mesh.element_length(e), mesh.material, mesh.section, 0.0);
    add_block(trip, element_dofs(mesh, e), km.stiffness);
  }
  const auto n = static_cast<Eigen::Index>(mesh.dof_count());
  Eigen::SparseMatrix<double> k(n, n);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

Displacement solve_linear(const BeamMesh& mesh, const LoadState& loads) {
  const Eigen::VectorXd f = loads.assemble(mesh);
  const auto n = static_cast<Eigen::Index>(mesh.dof_count());
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto km = element_matrices(mesh.element_length(e), mesh.material, mesh.section, 0.0);
    add_block(trip, element_dofs(mesh, e), km.stiffness);
  }
  const auto k = reduced(trip, n);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(k);
  if (solver.info() != Eigen::Success) throw NumericalError("singular beam stiffness");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x.tail(n - kClampedDofs) = solver.solve(f.tail(n - kClampedDofs));
  return Displacement::from_vector(x, Reference::Undeformed);
}

void corotational_internal(const BeamMesh& mesh, const Displacement& d, Eigen::VectorXd& force,
                           std::vector<Eigen::Triplet<double>>* tangent) {
  const double ea = mesh.material.young_modulus * mesh.section.area;
  const double ej = mesh.material.young_modulus * mesh.section.second_moment;
  force = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto [i, j] = mesh.elements[e];
    const auto ui = static_cast<std::size_t>(i);
    const auto uj = static_cast<std::size_t>(j);
    const double l0 = mesh.element_length(e);
    const double dx = l0 + d.u[uj] - d.u[ui];
    const double dy = d.v[uj] - d.v[ui];
    const double ln = std::hypot(dx, dy);
    const double beta = std::atan2(dy, dx);
    const double c = dx / ln;
    const double s = dy / ln;

    const double axial = ln - l0;
    const double rot_i = wrap_angle(d.theta[ui] - beta);
    const double rot_j = wrap_angle(d.theta[uj] - beta);

    const double phi = shear_parameter(l0, mesh.material, mesh.section);
    const double kb = ej / (l0 * (1.0 + phi));
    Eigen::Matrix3d kl = Eigen::Matrix3d::Zero();
    kl(0, 0) = ea / l0;
    kl(1, 1) = kb * (4.0 + phi);
    kl(1, 2) = kb * (2.0 - phi);
    kl(2, 1) = kb * (2.0 - phi);
    kl(2, 2) = kb * (4.0 + phi);
    const Eigen::Vector3d local = kl * Eigen::Vector3d(axial, rot_i, rot_j);

    Eigen::Matrix<double, 6, 1> r;
    r << -c, -s, 0.0, c, s, 0.0;
    Eigen::Matrix<double, 6, 1> z;
    z << s, -c, 0.0, -s, c, 0.0;
    Eigen::Matrix<double, 3, 6> b;
    b.row(0) = r.transpose();
    b.row(1) = -z.transpose() / ln;
    b.row(2) = -z.transpose() / ln;
    b(1, 2) += 1.0;
    b(2, 5) += 1.0;

    const Eigen::Matrix<double, 6, 1> fe = b.transpose() * local;
    const auto dofs = element_dofs(mesh, e);
    for (int k = 0; k < 6; ++k) force[dofs[k]] += fe[k];

    if (tangent) {
      Eigen::Matrix<double, 6, 6> kt = b.transpose() * kl * b;
      kt += (local[0] / ln) * (z * z.transpose());
      kt += ((local[1] + local[2]) / (ln * ln)) * (r * z.transpose() + z * r.transpose());
      add_block(*tangent, dofs, kt);
    }
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::NonConvergence: return "NonConvergence";
    case SolveStatus::LimitPoint: return "LimitPoint";
    case SolveStatus::Contact: return "Contact";
  }
  return "NonConvergence";
}

NonlinearResult solve_equilibrium(const BeamMesh& mesh, const LoadState& dead,
                                  const DeformationLoad* load, const NonlinearOptions& options,
                                  const Displacement* seed) {
  if (!(options.tol > 0.0)) throw ConfigError("tol must be positive");
  const auto n = static_cast<Eigen::Index>(mesh.dof_count());
  const Reference ref = options.geometric_nonlinearity ? Reference::Updated : Reference::Undeformed;
  const double length = mesh.length();

  NonlinearResult result;
  result.displacement = seed ? *seed : Displacement::zero(mesh.node_count());
  result.displacement.reference = ref;
  Eigen::VectorXd x = result.displacement.to_vector();
  x.head(kClampedDofs).setZero();

  const Eigen::VectorXd f_dead = dead.assemble(mesh);
  std::vector<Eigen::Triplet<double>> linear_trip;
  if (!options.geometric_nonlinearity) {
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      const auto km = element_matrices(mesh.element_length(e), mesh.material, mesh.section, 0.0);
      add_block(linear_trip, element_dofs(mesh, e), km.stiffness);
    }
  }
  Eigen::SparseMatrix<double> k_linear;
  if (!options.geometric_nonlinearity) {
    k_linear.resize(n, n);
    k_linear.setFromTriplets(linear_trip.begin(), linear_trip.end());
  }

  const auto gap_ok = [&](const Eigen::VectorXd& trial) {
    if (!load) return 1.0;
    return load->min_gap_fraction(mesh, Displacement::from_vector(trial, ref));
  };

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    result.iterations = iter;
    const Displacement current = Displacement::from_vector(x, ref);
    Eigen::VectorXd f_int;
    std::vector<Eigen::Triplet<double>> trip;
    if (options.geometric_nonlinearity) {
      corotational_internal(mesh, current, f_int, &trip);
    } else {
      f_int = k_linear * x;
      trip = linear_trip;
    }
    Eigen::VectorXd f_ext = f_dead;
    if (load) {
      std::vector<Eigen::Triplet<double>> jac;
      load->evaluate(mesh, current, f_ext, jac);
      for (const auto& t : jac) trip.emplace_back(t.row(), t.col(), -t.value());
    }
    const Eigen::VectorXd residual = f_ext - f_int;
    const auto tangent = reduced(trip, n);
    solver.compute(tangent);
    if (solver.info() != Eigen::Success) {
      result.status = SolveStatus::LimitPoint;
      result.displacement = current;
      return result;
    }
    Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
    step.tail(n - kClampedDofs) = solver.solve(residual.tail(n - kClampedDofs));
    if (!step.allFinite()) {
      result.status = SolveStatus::NonConvergence;
      result.displacement = current;
      return result;
    }

    double scale = 1.0;
    int halvings = 0;
    while (gap_ok(x + scale * step) <= options.contact_fraction && halvings < 30) {
      scale *= 0.5;
      ++halvings;
    }
    if (halvings == 30) {
      result.status = SolveStatus::Contact;
      result.displacement = current;
      return result;
    }
    x += scale * step;

    const double step_norm = scaled_norm(scale * step, length);
    const double floor = 1e-14 * length;
    if (scale == 1.0 && step_norm <= options.tol * std::max(scaled_norm(x, length), floor)) {
      result.displacement = Displacement::from_vector(x, ref);
      const Eigen::VectorXd pivots = solver.vectorD();
      result.status = (pivots.array() > 0.0).all() ? SolveStatus::Converged : SolveStatus::LimitPoint;
      return result;
    }
  }
  result.displacement = Displacement::from_vector(x, ref);
  result.status = SolveStatus::NonConvergence;
  if (load && gap_ok(x) <= 10.0 * options.contact_fraction) result.status = SolveStatus::Contact;
  return result;
}

NonlinearResult solve_nonlinear(const BeamMesh& mesh,
                                const std::function<LoadState(const Displacement&)>& load_fn,
                                double tol, int max_iter) {
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  NonlinearOptions options;
  options.tol = tol;
  options.max_iter = 1;
  options.geometric_nonlinearity = true;

  NonlinearResult result;
  result.displacement = Displacement::zero(mesh.node_count());
  result.displacement.reference = Reference::Updated;
  const double length = mesh.length();
  for (int iter = 1; iter <= max_iter; ++iter) {
    const LoadState loads = load_fn(result.displacement);
    const Eigen::VectorXd before = result.displacement.to_vector();
    NonlinearResult one = solve_equilibrium(mesh, loads, nullptr, options, &result.displacement);
    result.iterations = iter;
    if (one.status == SolveStatus::LimitPoint) {
      result.status = SolveStatus::LimitPoint;
      return result;
    }
    result.displacement = one.displacement;
    const Eigen::VectorXd after = result.displacement.to_vector();
    const double step = scaled_norm(after - before, length);
    if (!std::isfinite(step)) break;
    if (step <= tol * std::max(scaled_norm(after, length), 1e-14 * length)) {
      result.status = SolveStatus::Converged;
      return result;
    }
  }
  result.status = SolveStatus::NonConvergence;
  return result;
}

}  // namespace pullin
