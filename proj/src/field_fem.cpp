// P1 finite elements for the 2D Laplace problem on a graded, conductor-aligned
// tensor triangulation, morphed to follow the deformed beam.

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Sparse>

#include "pullin/errors.hpp"
#include "pullin/field.hpp"

namespace pullin {

namespace {

constexpr double kGrowth = 0.3;
// Element size near conductor edges and the far-field ceiling, in gaps, before
// the global scaling that meets the requested element count.
constexpr double kBaseSize = 0.05;
constexpr double kMaxSize = 3.0;

double feature_distance(double c, const std::vector<double>& features) {
  double d = std::numeric_limits<double>::infinity();
  for (double f : features) d = std::min(d, std::abs(c - f));
  return d;
}

struct Grading {
  std::vector<double> features;
  double base = 1.0;  // size at a feature before scaling
  double cap = 1.0;   // largest size before scaling
  double scale = 1.0;
  double size(double c) const {
    return scale * std::min(cap, base + kGrowth * feature_distance(c, features));
  }
};

std::vector<double> unique_sorted(std::vector<double> v, double tol) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

// Coordinates along one axis: every breakpoint is kept and each interval is
// filled by equidistributing 1/size.
std::vector<double> axis_nodes(const std::vector<double>& breaks, const Grading& grading) {
  constexpr int kSamples = 200;
  std::vector<double> out{breaks.front()};
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    std::vector<double> cumulative(kSamples + 1, 0.0);
    for (int s = 1; s <= kSamples; ++s) {
      const double c = a + (b - a) * (s - 0.5) / kSamples;
      cumulative[static_cast<std::size_t>(s)] =
          cumulative[static_cast<std::size_t>(s - 1)] + (b - a) / kSamples / grading.size(c);
    }
    const int count = std::max(1, static_cast<int>(std::lround(cumulative.back())));
    for (int n = 1; n < count; ++n) {
      const double target = cumulative.back() * n / count;
      auto it = std::lower_bound(cumulative.begin(), cumulative.end(), target);
      const auto s = static_cast<std::size_t>(it - cumulative.begin());
      const double lo = cumulative[s - 1];
      const double hi = cumulative[s];
      const double frac = hi > lo ? (target - lo) / (hi - lo) : 0.0;
      out.push_back(a + (b - a) * (static_cast<double>(s - 1) + frac) / kSamples);
    }
    out.push_back(b);
  }
  return out;
}

bool strictly_inside(const Rect& r, double x, double y) {
  return x > r.x0 && x < r.x1 && y > r.y0 && y < r.y1;
}

bool on_closure(const Rect& r, Vec2 p, double tol) {
  return p.x >= r.x0 - tol && p.x <= r.x1 + tol && p.y >= r.y0 - tol && p.y <= r.y1 + tol;
}

Eigen::Matrix3d p1_stiffness(Vec2 a, Vec2 b, Vec2 c) {
  const double area = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  const std::array<double, 3> bx{b.y - c.y, c.y - a.y, a.y - b.y};
  const std::array<double, 3> by{c.x - b.x, a.x - c.x, b.x - a.x};
  Eigen::Matrix3d k;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k(i, j) = (bx[i] * bx[j] + by[i] * by[j]) / (4.0 * area);
  return k;
}

// Solves for free-node positions given a symmetric weight matrix over all nodes.
TriMesh harmonic_relocation(const TriMesh& mesh, const std::vector<Vec2>& displacement,
                            const std::vector<Eigen::Triplet<double>>& weights) {
  const std::size_t n = mesh.nodes.size();
  std::vector<int> free_index(n, -1);
  int n_free = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (mesh.tags[i] == NodeTag::Free) free_index[i] = n_free++;

  TriMesh out = mesh;
  for (std::size_t i = 0; i < n; ++i)
    if (mesh.tags[i] != NodeTag::Free) {
      out.nodes[i].x += displacement[i].x;
      out.nodes[i].y += displacement[i].y;
    }
  if (n_free == 0) return out;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rx = Eigen::VectorXd::Zero(n_free);
  Eigen::VectorXd ry = Eigen::VectorXd::Zero(n_free);
  for (const auto& w : weights) {
    const int fi = free_index[static_cast<std::size_t>(w.row())];
    if (fi < 0) continue;
    const int fj = free_index[static_cast<std::size_t>(w.col())];
    if (fj >= 0) {
      trip.emplace_back(fi, fj, w.value());
    } else {
      const auto& d = displacement[static_cast<std::size_t>(w.col())];
      rx[fi] -= w.value() * d.x;
      ry[fi] -= w.value() * d.y;
    }
  }
  Eigen::SparseMatrix<double> l(n_free, n_free);
  l.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(l);
  if (solver.info() != Eigen::Success) throw NumericalError("mesh morphing system is singular");
  const Eigen::VectorXd dx = solver.solve(rx);
  const Eigen::VectorXd dy = solver.solve(ry);
  for (std::size_t i = 0; i < n; ++i) {
    const int fi = free_index[i];
    if (fi < 0) continue;
    out.nodes[i].x += dx[fi];
    out.nodes[i].y += dy[fi];
  }
  return out;
}

// Vertical relocation that is linear in y along every grid column, between the
// moving beam faces and the fixed electrode, outer box or far end. The map is
// monotone in each column, so no triangle of the tensor grid can invert.
TriMesh column_morph(const TriMesh& mesh, const FieldDomain& dom) {
  const Rect& b = dom.beam;
  const Rect& e = dom.counter_electrode;
  const Rect& o = dom.outer;
  TriMesh out = mesh;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const Vec2 p = mesh.nodes[i];
    double shift = dom.offset_at(std::min(p.x, b.x1));
    if (p.x > b.x1) shift *= (o.x1 - p.x) / (o.x1 - b.x1);
    if (shift == 0.0) continue;
    const bool under_electrode = p.x >= e.x0 && p.x <= e.x1;
    const double top = under_electrode ? e.y0 : o.y1;
    double w = 1.0;
    if (p.y > b.y1) w = p.y >= top ? 0.0 : (top - p.y) / (top - b.y1);
    else if (p.y < b.y0) w = (p.y - o.y0) / (b.y0 - o.y0);
    out.nodes[i].y += w * shift;
  }
  if (out.min_signed_area() <= 0.0) throw RemeshSignal("inverted triangle after morphing");
  return out;
}

using EdgeKey = std::pair<int, int>;
EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

}  // namespace

double TriMesh::signed_area(std::size_t t) const {
  const auto& tri = triangles[t];
  const Vec2 a = nodes[static_cast<std::size_t>(tri[0])];
  const Vec2 b = nodes[static_cast<std::size_t>(tri[1])];
  const Vec2 c = nodes[static_cast<std::size_t>(tri[2])];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double TriMesh::min_signed_area() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < triangles.size(); ++t) best = std::min(best, signed_area(t));
  return best;
}

TriMesh build_reference_mesh(const FieldDomain& dom, const FemOptions& options) {
  const double tol = 1e-9 * dom.gap;
  const Rect& b = dom.beam;
  const Rect& e = dom.counter_electrode;
  const Rect& o = dom.outer;
  std::vector<double> xb{o.x0, o.x1, b.x0, b.x1, e.x0, e.x1};
  std::vector<double> yb{o.y0, o.y1, b.y0, b.y1, e.y0, e.y1};
  if (dom.flexible_start > b.x0 && dom.flexible_start < b.x1) xb.push_back(dom.flexible_start);
  xb = unique_sorted(xb, tol);
  yb = unique_sorted(yb, tol);

  const double base = kBaseSize * dom.gap;
  Grading gx{unique_sorted({b.x0, b.x1, e.x0, e.x1}, tol), base, kMaxSize * dom.gap};
  Grading gy{unique_sorted({b.y0, b.y1, e.y0, e.y1}, tol), base, kMaxSize * dom.gap};
  const double target = std::max(200.0, options.target_elements * options.refinement);

  // Uniform scaling of the size function to reach the requested triangle count.
  double lo = 1e-3;
  double hi = 1e3;
  for (int it = 0; it < 50; ++it) {
    const double mid = std::sqrt(lo * hi);
    gx.scale = gy.scale = mid;
    const double count = 2.0 * static_cast<double>(axis_nodes(xb, gx).size() - 1) *
                         static_cast<double>(axis_nodes(yb, gy).size() - 1);
    if (count > target) lo = mid;
    else hi = mid;
  }
  gx.scale = gy.scale = hi;
  const auto xs = axis_nodes(xb, gx);
  const auto ys = axis_nodes(yb, gy);
  const std::size_t nx = xs.size();
  const std::size_t ny = ys.size();

  const auto grid = [ny](std::size_t i, std::size_t j) { return static_cast<int>(i * ny + j); };
  std::vector<int> remap(nx * ny, -1);
  std::vector<std::array<int, 3>> tris;
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const double xc = 0.5 * (xs[i] + xs[i + 1]);
      const double yc = 0.5 * (ys[j] + ys[j + 1]);
      if (strictly_inside(b, xc, yc) || strictly_inside(e, xc, yc)) continue;
      const int p00 = grid(i, j);
      const int p10 = grid(i + 1, j);
      const int p01 = grid(i, j + 1);
      const int p11 = grid(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        tris.push_back({p00, p10, p11});
        tris.push_back({p00, p11, p01});
      } else {
        tris.push_back({p00, p10, p01});
        tris.push_back({p10, p11, p01});
      }
    }
  }
  TriMesh mesh;
  for (auto& t : tris)
    for (int& v : t) {
      auto& slot = remap[static_cast<std::size_t>(v)];
      if (slot < 0) {
        slot = static_cast<int>(mesh.nodes.size());
        const std::size_t i = static_cast<std::size_t>(v) / ny;
        const std::size_t j = static_cast<std::size_t>(v) % ny;
        const Vec2 p{xs[i], ys[j]};
        mesh.nodes.push_back(p);
        NodeTag tag = NodeTag::Free;
        if (on_closure(b, p, tol)) tag = NodeTag::Beam;
        else if (on_closure(e, p, tol)) tag = NodeTag::Electrode;
        else if (dom.wafer_x && std::abs(p.x - *dom.wafer_x) <= tol) tag = NodeTag::Wafer;
        else if (i == 0 || j == 0 || i + 1 == nx || j + 1 == ny) tag = NodeTag::Outer;
        mesh.tags.push_back(tag);
      }
      v = slot;
    }
  mesh.triangles = std::move(tris);
  return mesh;
}

TriMesh morph_mesh(const TriMesh& mesh, const std::vector<Vec2>& boundary_displacement) {
  if (boundary_displacement.size() != mesh.nodes.size())
    throw NumericalError("boundary displacement must cover every mesh node");
  std::map<EdgeKey, bool> edges;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) edges[edge_key(t[k], t[(k + 1) % 3])] = true;
  std::vector<Eigen::Triplet<double>> weights;
  for (const auto& [edge, unused] : edges) {
    weights.emplace_back(edge.first, edge.first, 1.0);
    weights.emplace_back(edge.second, edge.second, 1.0);
    weights.emplace_back(edge.first, edge.second, -1.0);
    weights.emplace_back(edge.second, edge.first, -1.0);
  }
  TriMesh out = harmonic_relocation(mesh, boundary_displacement, weights);
  if (out.min_signed_area() <= 0.0) throw RemeshSignal("inverted triangle after morphing");
  return out;
}

FieldSolution fem_solve(const FieldDomain& dom, double voltage, const FemOptions& options) {
  dom.validate();
  const TriMesh reference = build_reference_mesh(dom, options);
  const std::size_t n = reference.nodes.size();

  const TriMesh mesh = dom.shape.empty() ? reference : column_morph(reference, dom);

  const double phi_beam = dom.beam_potential(voltage);
  const double phi_el = dom.electrode_potential(voltage);
  std::vector<double> phi(n, 0.0);
  std::vector<int> free_index(n, -1);
  int n_free = 0;
  for (std::size_t i = 0; i < n; ++i) {
    switch (mesh.tags[i]) {
      case NodeTag::Beam: phi[i] = phi_beam; break;
      case NodeTag::Electrode: phi[i] = phi_el; break;
      case NodeTag::Wafer: phi[i] = 0.0; break;
      default: free_index[i] = n_free++; break;
    }
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (const auto& t : mesh.triangles) {
    const Eigen::Matrix3d k = p1_stiffness(mesh.nodes[static_cast<std::size_t>(t[0])],
                                           mesh.nodes[static_cast<std::size_t>(t[1])],
                                           mesh.nodes[static_cast<std::size_t>(t[2])]);
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) trip.emplace_back(t[a], t[c], k(a, c));
  }
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::SparseMatrix<double> k_full(ni, ni);
  k_full.setFromTriplets(trip.begin(), trip.end());

  std::vector<Eigen::Triplet<double>> free_trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_free);
  for (int col = 0; col < k_full.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(k_full, col); it; ++it) {
      const int fr = free_index[static_cast<std::size_t>(it.row())];
      if (fr < 0) continue;
      const int fc = free_index[static_cast<std::size_t>(it.col())];
      if (fc >= 0) free_trip.emplace_back(fr, fc, it.value());
      else rhs[fr] -= it.value() * phi[static_cast<std::size_t>(it.col())];
    }
  }
  if (n_free > 0) {
    Eigen::SparseMatrix<double> kff(n_free, n_free);
    kff.setFromTriplets(free_trip.begin(), free_trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(kff);
    if (solver.info() != Eigen::Success) throw NumericalError("singular field stiffness");
    const Eigen::VectorXd x = solver.solve(rhs);
    for (std::size_t i = 0; i < n; ++i)
      if (free_index[i] >= 0) phi[i] = x[free_index[i]];
  }

  const Eigen::Map<const Eigen::VectorXd> phi_vec(phi.data(), ni);
  const Eigen::VectorXd reaction = dom.permittivity * (k_full * phi_vec);

  // Tributary lengths along the beam surface from its boundary edges.
  std::map<EdgeKey, int> edge_count;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) ++edge_count[edge_key(t[k], t[(k + 1) % 3])];
  std::vector<double> tributary(n, 0.0);
  for (const auto& [edge, count] : edge_count) {
    if (count != 1) continue;
    const auto a = static_cast<std::size_t>(edge.first);
    const auto c = static_cast<std::size_t>(edge.second);
    if (mesh.tags[a] != NodeTag::Beam || mesh.tags[c] != NodeTag::Beam) continue;
    const double len =
        std::hypot(mesh.nodes[a].x - mesh.nodes[c].x, mesh.nodes[a].y - mesh.nodes[c].y);
    tributary[a] += 0.5 * len;
    tributary[c] += 0.5 * len;
  }

  FieldSolution sol;
  sol.method = FieldMethod::FEM;
  sol.applied_voltage = voltage;
  sol.permittivity = dom.permittivity;
  sol.depth = dom.depth;
  sol.potential_difference = phi_beam - phi_el;
  sol.element_count = mesh.triangles.size();

  const double tol = 1e-9 * dom.gap;
  std::vector<std::size_t> front_nodes;
  std::vector<std::size_t> back_nodes;
  for (std::size_t i = 0; i < n; ++i) {
    if (mesh.tags[i] == NodeTag::Beam) {
      sol.beam_charge += reaction[static_cast<Eigen::Index>(i)];
      const Vec2 r = reference.nodes[i];
      if (std::abs(r.y - dom.beam.y1) <= tol) front_nodes.push_back(i);
      if (std::abs(r.y - dom.beam.y0) <= tol) back_nodes.push_back(i);
    } else if (mesh.tags[i] == NodeTag::Electrode) {
      sol.electrode_charge += reaction[static_cast<Eigen::Index>(i)];
    }
  }
  const auto profile = [&](std::vector<std::size_t> nodes) {
    std::sort(nodes.begin(), nodes.end(), [&](std::size_t a, std::size_t c) {
      return reference.nodes[a].x < reference.nodes[c].x;
    });
    FaceProfile p;
    double arc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const std::size_t i = nodes[k];
      if (k > 0) {
        const Vec2 prev = mesh.nodes[nodes[k - 1]];
        arc += std::hypot(mesh.nodes[i].x - prev.x, mesh.nodes[i].y - prev.y);
      }
      p.x.push_back(reference.nodes[i].x);
      p.arc.push_back(arc);
      p.sigma.push_back(tributary[i] > 0.0 ? reaction[static_cast<Eigen::Index>(i)] / tributary[i]
                                           : 0.0);
    }
    return p;
  };
  sol.front = profile(front_nodes);
  sol.back = profile(back_nodes);
  sol.potentials = std::move(phi);
  sol.mesh = std::make_shared<const TriMesh>(std::move(mesh));
  return sol;
}

}  // namespace pullin
