// Collocation boundary elements for the 2D Laplace problem with Dirichlet
// conductors: straight two-node elements, linear charge interpolation and
// analytic integration of the logarithmic kernel.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "pullin/errors.hpp"
#include "pullin/field.hpp"

namespace pullin {

namespace {

struct BoundaryNode {
  Vec2 ref;
  Vec2 pos;
  int conductor = 0;  // 0 beam, 1 counter-electrode
  int face = 0;       // 0 bottom, 1 right, 2 top, 3 left
};

struct Boundary {
  std::vector<BoundaryNode> nodes;
  // (first node, node count) of each closed polygon
  std::vector<std::pair<std::size_t, std::size_t>> polygons;
};

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Integrals over a straight segment a->b of N_a ln r and N_b ln r, with r the
// distance to p and N linear shape functions in arc length.
std::pair<double, double> log_integrals(Vec2 p, Vec2 a, Vec2 b) {
  const double len = dist(a, b);
  const double tx = (b.x - a.x) / len;
  const double ty = (b.y - a.y) / len;
  const double s0 = (p.x - a.x) * tx + (p.y - a.y) * ty;
  const double h = std::abs(-(p.x - a.x) * ty + (p.y - a.y) * tx);
  const double h2 = h * h;
  const auto f0 = [&](double u) {
    const double r2 = u * u + h2;
    const double log_term = r2 > 0.0 ? u * 0.5 * std::log(r2) : 0.0;
    const double atan_term = h > 0.0 ? h * std::atan(u / h) : 0.0;
    return log_term - u + atan_term;
  };
  const auto f1 = [&](double u) {
    const double r2 = u * u + h2;
    const double log_term = r2 > 0.0 ? 0.25 * r2 * std::log(r2) : 0.0;
    return log_term - 0.25 * u * u;
  };
  const double u0 = -s0;
  const double u1 = len - s0;
  const double i0 = f0(u1) - f0(u0);
  const double is = (f1(u1) - f1(u0)) + s0 * i0;
  return {i0 - is / len, is / len};
}

struct Hotspots {
  std::vector<Vec2> points;
  double radius = 1.0;
  double grading = 5.0;
  double weight(Vec2 p) const {
    double d = radius;
    for (const auto& h : points) d = std::min(d, dist(p, h));
    return 1.0 / (1.0 + (grading - 1.0) * d / radius);
  }
};

std::vector<Vec2> corners(const Rect& r) {
  return {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}};
}

// Equidistributes `count` nodes on the segment a->b (a included, b excluded)
// so that each carries the same integral of the density weight.
std::vector<Vec2> place_on_segment(Vec2 a, Vec2 b, int count, const Hotspots& hot) {
  constexpr int kSamples = 400;
  std::vector<double> cumulative(kSamples + 1, 0.0);
  const double len = dist(a, b);
  for (int k = 1; k <= kSamples; ++k) {
    const double t = (k - 0.5) / kSamples;
    const Vec2 p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    cumulative[static_cast<std::size_t>(k)] =
        cumulative[static_cast<std::size_t>(k - 1)] + hot.weight(p) * len / kSamples;
  }
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(count));
  const double total = cumulative.back();
  for (int n = 0; n < count; ++n) {
    const double target = total * n / count;
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), target);
    std::size_t k = static_cast<std::size_t>(it - cumulative.begin());
    double t = 0.0;
    if (k > 0) {
      const double lo = cumulative[k - 1];
      const double hi = cumulative[k];
      const double frac = hi > lo ? (target - lo) / (hi - lo) : 0.0;
      t = (static_cast<double>(k - 1) + frac) / kSamples;
    }
    out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
  }
  return out;
}

double segment_weight(Vec2 a, Vec2 b, const Hotspots& hot) {
  constexpr int kSamples = 200;
  double total = 0.0;
  const double len = dist(a, b);
  for (int k = 0; k < kSamples; ++k) {
    const double t = (k + 0.5) / kSamples;
    total += hot.weight({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
  }
  return total * len / kSamples;
}

Boundary discretize(const FieldDomain& dom, const BemOptions& options) {
  Hotspots hot;
  hot.radius = dom.gap;
  hot.grading = options.grading;
  for (const auto& c : corners(dom.beam)) hot.points.push_back(c);
  for (const auto& c : corners(dom.counter_electrode)) hot.points.push_back(c);

  const std::array<Rect, 2> rects{dom.beam, dom.counter_electrode};
  std::array<std::array<double, 4>, 2> weights{};
  double total = 0.0;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto cs = corners(rects[c]);
    for (std::size_t f = 0; f < 4; ++f) {
      weights[c][f] = segment_weight(cs[f], cs[(f + 1) % 4], hot);
      total += weights[c][f];
    }
  }
  const double target = std::max(16.0, options.target_elements * options.refinement);

  Boundary b;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto cs = corners(rects[c]);
    const std::size_t first = b.nodes.size();
    for (std::size_t f = 0; f < 4; ++f) {
      const int count =
          std::max(2, static_cast<int>(std::lround(target * weights[c][f] / total)));
      for (const auto& ref : place_on_segment(cs[f], cs[(f + 1) % 4], count, hot)) {
        BoundaryNode n;
        n.ref = ref;
        n.pos = ref;
        if (c == 0) n.pos.y += dom.offset_at(ref.x);
        n.conductor = static_cast<int>(c);
        n.face = static_cast<int>(f);
        b.nodes.push_back(n);
      }
    }
    b.polygons.emplace_back(first, b.nodes.size() - first);
  }
  return b;
}

// Samples of one face of the beam polygon; the trailing corner (first node of
// the next face) is included so the profile spans the whole face.
FaceProfile face_profile(const Boundary& b, const std::vector<double>& sigma, int face,
                         bool reverse) {
  const auto [first, count] = b.polygons[0];
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < count; ++k)
    if (b.nodes[first + k].face == face) idx.push_back(first + k);
  if (!idx.empty()) idx.push_back(first + (idx.back() - first + 1) % count);
  if (reverse) std::reverse(idx.begin(), idx.end());
  FaceProfile p;
  double arc = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& n = b.nodes[idx[k]];
    if (k > 0) arc += dist(n.pos, b.nodes[idx[k - 1]].pos);
    p.x.push_back(n.ref.x);
    p.arc.push_back(arc);
    p.sigma.push_back(sigma[idx[k]]);
  }
  return p;
}

}  // namespace

FieldSolution bem_solve(const FieldDomain& dom, double voltage, const BemOptions& options) {
  dom.validate();
  const Boundary b = discretize(dom, options);
  const std::size_t n = b.nodes.size();
  const bool image = dom.wafer_x.has_value();
  const double scale = dom.gap;
  const auto scaled = [scale](Vec2 p) { return Vec2{p.x / scale, p.y / scale}; };
  const auto mirror = [&dom, scale](Vec2 p) {
    return Vec2{(2.0 * *dom.wafer_x - p.x) / scale, p.y / scale};
  };

  // Unknowns: s_i = sigma_i * gap / eps at every node, plus the free-space
  // potential constant when no grounded plane is present.
  const auto size = static_cast<Eigen::Index>(image ? n : n + 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  const double inv_two_pi = 1.0 / (2.0 * M_PI);

  for (const auto& [first, count] : b.polygons) {
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t ia = first + k;
      const std::size_t ib = first + (k + 1) % count;
      const Vec2 pa = scaled(b.nodes[ia].pos);
      const Vec2 pb = scaled(b.nodes[ib].pos);
      const Vec2 ma = image ? mirror(b.nodes[ia].pos) : Vec2{};
      const Vec2 mb = image ? mirror(b.nodes[ib].pos) : Vec2{};
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = scaled(b.nodes[i].pos);
        auto [wa, wb] = log_integrals(p, pa, pb);
        if (image) {
          const auto [ma_w, mb_w] = log_integrals(p, ma, mb);
          wa -= ma_w;
          wb -= mb_w;
        }
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(ia)) -= inv_two_pi * wa;
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(ib)) -= inv_two_pi * wb;
      }
      if (!image) {
        const double half = 0.5 * dist(pa, pb);
        a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ia)) += half;
        a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ib)) += half;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    rhs[static_cast<Eigen::Index>(i)] = b.nodes[i].conductor == 0
                                            ? dom.beam_potential(voltage)
                                            : dom.electrode_potential(voltage);
    if (!image) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = 1.0;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14))
    throw NumericalError("ill-conditioned boundary-element matrix (rcond " + std::to_string(rcond) +
                         ")");
  const Eigen::VectorXd s = lu.solve(rhs);

  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i)
    sigma[i] = s[static_cast<Eigen::Index>(i)] * dom.permittivity / scale;

  FieldSolution sol;
  sol.method = FieldMethod::BEM;
  sol.applied_voltage = voltage;
  sol.permittivity = dom.permittivity;
  sol.depth = dom.depth;
  sol.potential_difference = dom.beam_potential(voltage) - dom.electrode_potential(voltage);
  sol.condition_estimate = rcond;
  sol.element_count = n;
  std::array<double, 2> charge{0.0, 0.0};
  for (const auto& [first, count] : b.polygons) {
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t ia = first + k;
      const std::size_t ib = first + (k + 1) % count;
      const double len = dist(b.nodes[ia].pos, b.nodes[ib].pos);
      charge[static_cast<std::size_t>(b.nodes[ia].conductor)] +=
          0.5 * len * (sigma[ia] + sigma[ib]);
    }
  }
  sol.beam_charge = charge[0];
  sol.electrode_charge = charge[1];
  sol.front = face_profile(b, sigma, 2, true);
  sol.back = face_profile(b, sigma, 0, false);
  return sol;
}

}  // namespace pullin
