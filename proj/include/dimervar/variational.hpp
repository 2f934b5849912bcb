#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "errors.hpp"
#include "lattice.hpp"
#include "thermo.hpp"

namespace dimervar {

struct Point2 {
  double x = 0, y = 0;
};

/// Simple polygon, counterclockwise.
struct ContinuousRegion {
  std::vector<Point2> boundary;
};

struct BoundarySample {
  Point2 p;
  double h = 0;
};

struct BoundaryData {
  std::vector<BoundarySample> samples;
};

namespace geom {

inline double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

inline double signed_area(const std::vector<Point2>& P) {
  double A = 0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const auto& p = P[i];
    const auto& q = P[(i + 1) % P.size()];
    A += p.x * q.y - q.x * p.y;
  }
  return A / 2;
}

inline bool segments_cross(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

/// Closest point on segment ab to p, with its parameter in [0, 1].
inline std::pair<Point2, double> project(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double L2 = dx * dx + dy * dy;
  double u = L2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / L2 : 0;
  u = std::clamp(u, 0.0, 1.0);
  return {{a.x + u * dx, a.y + u * dy}, u};
}

inline double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline double dist_sup(Point2 a, Point2 b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

}  // namespace geom

inline void validate_region(const ContinuousRegion& R) {
  const auto& P = R.boundary;
  if (P.size() < 3) throw InvalidRegion("polygon needs at least three vertices");
  for (const auto& p : P)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InvalidRegion("polygon vertex is not finite");
  if (!(geom::signed_area(P) > 0)) throw InvalidRegion("polygon must be counterclockwise with positive area");
  const std::size_t n = P.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (geom::segments_cross(P[i], P[(i + 1) % n], P[j], P[(j + 1) % n]))
        throw InvalidRegion("polygon edges intersect");
    }
}

/// Arc-length position of the closest boundary point and the distance to it.
inline std::pair<double, double> boundary_param(const ContinuousRegion& R, Point2 p) {
  const auto& P = R.boundary;
  double best = std::numeric_limits<double>::infinity(), param = 0, acc = 0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const Point2 a = P[i], b = P[(i + 1) % P.size()];
    auto [q, u] = geom::project(p, a, b);
    const double d = geom::dist(p, q), len = geom::dist(a, b);
    if (d < best) best = d, param = acc + u * len;
    acc += len;
  }
  return {param, best};
}

inline double perimeter(const ContinuousRegion& R) {
  double L = 0;
  for (std::size_t i = 0; i < R.boundary.size(); ++i)
    L += geom::dist(R.boundary[i], R.boundary[(i + 1) % R.boundary.size()]);
  return L;
}

inline bool polygon_contains(const ContinuousRegion& R, Point2 p) {
  const auto& P = R.boundary;
  bool in = false;
  for (std::size_t i = 0, j = P.size() - 1; i < P.size(); j = i++) {
    if ((P[i].y > p.y) != (P[j].y > p.y)) {
      const double x = (P[j].x - P[i].x) * (p.y - P[i].y) / (P[j].y - P[i].y) + P[i].x;
      if (p.x < x) in = !in;
    }
  }
  return in;
}

/// Heights at boundary points by linear interpolation in arc length
/// between the (projected) samples.
class BoundaryInterpolant {
 public:
  BoundaryInterpolant(const ContinuousRegion& R, const BoundaryData& data) : R_(&R) {
    if (data.samples.empty()) throw InfeasibleBoundary("no boundary samples");
    L_ = perimeter(R);
    for (const auto& s : data.samples) {
      if (!std::isfinite(s.h)) throw InfeasibleBoundary("boundary height is not finite");
      knots_.push_back({boundary_param(R, s.p).first, s.h});
    }
    std::sort(knots_.begin(), knots_.end());
  }

  double operator()(Point2 p) const { return at(boundary_param(*R_, p).first); }

  double at(double u) const {
    if (knots_.size() == 1) return knots_[0].second;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), std::pair{u, std::numeric_limits<double>::infinity()});
    const auto& hi = it == knots_.end() ? knots_.front() : *it;
    const auto& lo = it == knots_.begin() ? knots_.back() : *(it - 1);
    double span = hi.first - lo.first, off = u - lo.first;
    if (span <= 0) span += L_;
    if (off < 0) off += L_;
    return span > 0 ? lo.second + (hi.second - lo.second) * off / span : lo.second;
  }

 private:
  const ContinuousRegion* R_;
  double L_ = 0;
  std::vector<std::pair<double, double>> knots_;
};

/// Pairwise check |h(p) - h(q)| <= 2 d_sup(p, q) + tol over the samples.
inline void validate_boundary(const BoundaryData& data, double tol = 1e-9) {
  const auto& S = data.samples;
  for (std::size_t i = 0; i < S.size(); ++i)
    for (std::size_t j = i + 1; j < S.size(); ++j)
      if (std::abs(S[i].h - S[j].h) > 2 * geom::dist_sup(S[i].p, S[j].p) + tol)
        throw InfeasibleBoundary("boundary data is not 2-Lipschitz in the sup norm");
}

/// One triangle of the union-jack subdivision: the tilt is s = cs . f,
/// t = ct . f over its three nodes.
struct MeshTriangle {
  std::array<int, 3> v{};
  std::array<double, 3> cs{}, ct{};
  double weight = 0;
};

struct DiscreteField {
  double delta = 0;
  int i0 = 0, j0 = 0, nx = 0, ny = 0;  // grid points (i0 + i) delta, i < nx
  std::vector<int> node_at;            // grid -> node, -1 if outside
  std::vector<std::array<int, 2>> grid;  // node -> (i, j)
  std::vector<Point2> nodes;
  std::vector<double> values, lower, upper;
  std::vector<char> pinned, on_boundary;
  std::vector<MeshTriangle> triangles;
  double area = 0;

  int node(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return -1;
    return node_at[static_cast<std::size_t>(j) * nx + i];
  }
  Tilt tilt(const MeshTriangle& T) const {
    Tilt r;
    for (int k = 0; k < 3; ++k) r.s += T.cs[k] * values[T.v[k]], r.t += T.ct[k] * values[T.v[k]];
    return r;
  }
};

struct SolverConfig {
  double mu_start = 1e-1;
  double mu_min = 1e-10;
  double mu_factor = 0.1;
  double tol = 1e-10;  // relative Newton decrement at the final barrier weight
  int max_iterations = 2000;
  bool random_start = false;
  std::uint64_t seed = 0;
};

struct SolveReport {
  double ent = 0;
  int iterations = 0;
  double gradient_norm = 0;
  double residual_norm = 0;
  std::vector<Tilt> tilts;  // per mesh cell
  struct Step {
    int stage;
    double mu;
    double objective;
  };
  std::vector<Step> history;
};

namespace detail {

inline Tilt clip_tilt(Tilt t) {
  const double m = std::abs(t.s) + std::abs(t.t);
  if (m > 2) t.s *= 2 / m, t.t *= 2 / m;
  return t;
}

}  // namespace detail

inline DiscreteField discretize(const ContinuousRegion& region, const BoundaryData& data, double delta,
                                double lipschitz_tol = 1e-9) {
  validate_region(region);
  if (!(delta > 0)) throw InvalidRegion("mesh spacing must be positive");
  validate_boundary(data, lipschitz_tol);
  const BoundaryInterpolant interp(region, data);
  const auto& P = region.boundary;
  double xmin = P[0].x, xmax = P[0].x, ymin = P[0].y, ymax = P[0].y;
  for (const auto& p : P)
    xmin = std::min(xmin, p.x), xmax = std::max(xmax, p.x), ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
  DiscreteField F;
  F.delta = delta;
  F.i0 = static_cast<int>(std::floor(xmin / delta + 1e-9));
  F.j0 = static_cast<int>(std::floor(ymin / delta + 1e-9));
  F.nx = static_cast<int>(std::ceil(xmax / delta - 1e-9)) - F.i0 + 1;
  F.ny = static_cast<int>(std::ceil(ymax / delta - 1e-9)) - F.j0 + 1;
  if (static_cast<double>(F.nx) * F.ny > 2e7) throw InvalidRegion("mesh too fine");
  F.node_at.assign(static_cast<std::size_t>(F.nx) * F.ny, -1);
  const double eps = 1e-9 * std::max({1.0, xmax - xmin, ymax - ymin});
  for (int j = 0; j < F.ny; ++j)
    for (int i = 0; i < F.nx; ++i) {
      const Point2 p{(F.i0 + i) * delta, (F.j0 + j) * delta};
      const bool edge = boundary_param(region, p).second <= eps;
      if (!edge && !polygon_contains(region, p)) continue;
      F.node_at[static_cast<std::size_t>(j) * F.nx + i] = static_cast<int>(F.nodes.size());
      F.nodes.push_back(p);
      F.grid.push_back({i, j});
      F.on_boundary.push_back(edge);
    }
  const std::size_t N = F.nodes.size();
  if (N == 0) throw InvalidRegion("mesh has no nodes inside the region");

  // Sup-norm Lipschitz envelopes from the boundary nodes and samples.
  std::vector<BoundarySample> anchors = data.samples;
  for (std::size_t k = 0; k < N; ++k)
    if (F.on_boundary[k]) anchors.push_back({F.nodes[k], interp(F.nodes[k])});
  F.lower.assign(N, -std::numeric_limits<double>::infinity());
  F.upper.assign(N, std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < N; ++k)
    for (const auto& a : anchors) {
      const double d = 2 * geom::dist_sup(F.nodes[k], a.p);
      F.upper[k] = std::min(F.upper[k], a.h + d);
      F.lower[k] = std::max(F.lower[k], a.h - d);
    }
  F.values.assign(N, 0);
  F.pinned.assign(N, 0);
  for (std::size_t k = 0; k < N; ++k) {
    if (F.lower[k] > F.upper[k] + lipschitz_tol)
      throw InfeasibleBoundary("Lipschitz envelopes cross at (" + std::to_string(F.nodes[k].x) + ", " +
                               std::to_string(F.nodes[k].y) + ")");
    if (F.on_boundary[k]) {
      F.values[k] = interp(F.nodes[k]);
      F.pinned[k] = 1;
    } else if (F.upper[k] - F.lower[k] <= 1e-12) {
      F.values[k] = F.upper[k];
      F.pinned[k] = 1;
    } else {
      F.values[k] = 0.5 * (F.lower[k] + F.upper[k]);
    }
  }

  // Union-jack subdivision: both diagonal splittings of each cell, each
  // triangle carrying half its area unless it is the only one present.
  const double id = 1 / delta;
  for (int j = 0; j + 1 < F.ny; ++j)
    for (int i = 0; i + 1 < F.nx; ++i) {
      const int n00 = F.node(i, j), n10 = F.node(i + 1, j), n01 = F.node(i, j + 1), n11 = F.node(i + 1, j + 1);
      std::vector<MeshTriangle> tris;
      auto add = [&](std::array<int, 3> v, std::array<double, 3> cs, std::array<double, 3> ct) {
        for (int x : v)
          if (x < 0) return;
        Point2 c{(F.nodes[v[0]].x + F.nodes[v[1]].x + F.nodes[v[2]].x) / 3,
                 (F.nodes[v[0]].y + F.nodes[v[1]].y + F.nodes[v[2]].y) / 3};
        if (!polygon_contains(region, c)) return;
        tris.push_back({v, cs, ct, 0});
      };
      add({n00, n10, n11}, {-id, id, 0}, {0, -id, id});
      add({n00, n01, n11}, {0, -id, id}, {-id, id, 0});
      add({n00, n10, n01}, {-id, id, 0}, {-id, 0, id});
      add({n10, n01, n11}, {0, -id, id}, {-id, 0, id});
      const double w = tris.size() == 1 ? delta * delta / 2 : delta * delta / 4;
      for (auto& t : tris) {
        t.weight = w;
        F.area += w;
        F.triangles.push_back(t);
      }
    }
  if (F.triangles.empty()) throw InvalidRegion("mesh too coarse for the region");
  return F;
}

/// Per-dimer entropy (1/area) sum_T w_T ent(tilt_T).
inline double evaluate_Ent(const DiscreteField& F) {
  double total = 0;
  for (const auto& T : F.triangles) total += T.weight * ent_from_tilt(detail::clip_tilt(F.tilt(T)));
  return total / F.area;
}

namespace detail {

// Affine constraint sum_k coef_k f[node_k] <= bound, measured in tilt units.
struct Constraint {
  std::array<int, 3> v{-1, -1, -1};
  std::array<double, 3> coef{};
  double bound = 2;
  double weight = 0;
};

class BarrierProblem {
 public:
  BarrierProblem(DiscreteField& F) : F_(F) {
    const std::size_t N = F.nodes.size();
    var_.assign(N, -1);
    for (std::size_t k = 0; k < N; ++k)
      if (!F.pinned[k]) var_[k] = nvar_++;
    constant_ = 0;
    for (std::size_t ti = 0; ti < F.triangles.size(); ++ti) {
      const auto& T = F.triangles[ti];
      bool any_free = false, dead = false;
      for (int k = 0; k < 3; ++k) any_free |= var_[T.v[k]] >= 0;
      for (int e1 : {1, -1})
        for (int e2 : {1, -1}) {
          Constraint c;
          bool has_free = false;
          double fixed = 0;
          for (int k = 0; k < 3; ++k) {
            c.v[k] = T.v[k];
            c.coef[k] = e1 * T.cs[k] + e2 * T.ct[k];
            if (std::abs(c.coef[k]) > 0 && var_[T.v[k]] >= 0) has_free = true;
            fixed += c.coef[k] * F.values[T.v[k]];
          }
          if (has_free) {
            c.weight = T.weight;
            cons_.push_back(c);
          } else if (2 - fixed <= 1e-12) {
            if (2 - fixed < -1e-7) throw InfeasibleBoundary("boundary data forces a tilt outside |s|+|t| <= 2");
            dead = true;
          }
        }
      if (dead) continue;
      if (any_free) obj_.push_back(static_cast<int>(ti));
      else constant_ += T.weight * ent_from_tilt(clip_tilt(F.tilt(T)));
    }
    // Near-boundary free nodes also respect the envelopes directly.
    const double id = 1 / F.delta;
    for (std::size_t k = 0; k < N; ++k) {
      if (var_[k] < 0) continue;
      const auto [i, j] = F.grid[k];
      bool full = true;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) full &= F.node(i + di, j + dj) >= 0;
      if (full) continue;
      const double w = F.delta * F.delta / 4;
      cons_.push_back({{static_cast<int>(k), -1, -1}, {id, 0, 0}, F.upper[k] * id, w});
      cons_.push_back({{static_cast<int>(k), -1, -1}, {-id, 0, 0}, -F.lower[k] * id, w});
    }
    for (const auto& c : cons_) wsum_ += c.weight;
    for (int ti : obj_) tw_ += F.triangles[ti].weight;
  }

  int nvar() const { return nvar_; }
  double objective_weight() const { return tw_; }
  const std::vector<int>& var() const { return var_; }

  double slack(const Constraint& c, const std::vector<double>& f) const {
    double s = c.bound;
    for (int k = 0; k < 3; ++k)
      if (c.v[k] >= 0) s -= c.coef[k] * f[c.v[k]];
    return s;
  }
  double slope(const Constraint& c, const Eigen::VectorXd& dx) const {
    double s = 0;
    for (int k = 0; k < 3; ++k)
      if (c.v[k] >= 0 && var_[c.v[k]] >= 0) s += c.coef[k] * dx[var_[c.v[k]]];
    return s;
  }

  double min_slack(const std::vector<double>& f) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : cons_) m = std::min(m, slack(c, f));
    return m;
  }

  /// Largest step along dx keeping every slack positive (capped at 1).
  double max_step(const std::vector<double>& f, const Eigen::VectorXd& dx, double shift = 0,
                  double dshift = 0) const {
    double a = 1;
    for (const auto& c : cons_) {
      const double rate = slope(c, dx) - dshift;
      if (rate > 0) a = std::min(a, (slack(c, f) + shift) / rate);
    }
    return a;
  }

  std::vector<double> moved(const std::vector<double>& f, const Eigen::VectorXd& dx, double a) const {
    std::vector<double> g = f;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (var_[k] >= 0) g[k] += a * dx[var_[k]];
    return g;
  }

  double entropy_part(const std::vector<double>& f) const {
    double s = constant_;
    for (int ti : obj_) {
      const auto& T = F_.triangles[ti];
      s += T.weight * ent_from_tilt(clip_tilt(tilt(T, f)));
    }
    return s;
  }

  double barrier_objective(const std::vector<double>& f, double mu) const {
    double s = entropy_part(f);
    for (const auto& c : cons_) {
      const double r = slack(c, f);
      if (!(r > 0)) return -std::numeric_limits<double>::infinity();
      s += mu * c.weight * std::log(r);
    }
    return s;
  }

  /// Gradient and negated Hessian of the barrier objective in the free variables.
  void derivatives(const std::vector<double>& f, double mu, Eigen::VectorXd& g,
                   std::vector<Eigen::Triplet<double>>& trip) const {
    g.setZero(nvar_);
    trip.clear();
    for (int ti : obj_) {
      const auto& T = F_.triangles[ti];
      const Tilt tl = tilt(T, f);
      auto [es, et] = ent_gradient(tl);
      HessianMatrix H;
      const double m = std::abs(tl.s) + std::abs(tl.t);
      if (m < 2) H = hessian(tl);
      double hss = -H.ent_ss, hst = -H.ent_st, htt = -H.ent_tt;
      if (!std::isfinite(es) || !std::isfinite(et)) es = et = 0;
      const double cap = 1e12;
      if (!std::isfinite(hss) || !std::isfinite(htt) || !std::isfinite(hst) || hss > cap || htt > cap)
        hss = htt = cap, hst = 0;
      for (int a = 0; a < 3; ++a) {
        const int va = var_[T.v[a]];
        if (va < 0) continue;
        g[va] += T.weight * (es * T.cs[a] + et * T.ct[a]);
        for (int b = 0; b < 3; ++b) {
          const int vb = var_[T.v[b]];
          if (vb < 0) continue;
          const double q = hss * T.cs[a] * T.cs[b] + hst * (T.cs[a] * T.ct[b] + T.ct[a] * T.cs[b]) +
                           htt * T.ct[a] * T.ct[b];
          trip.emplace_back(va, vb, T.weight * q);
        }
      }
    }
    for (const auto& c : cons_) {
      const double r = slack(c, f);
      const double w1 = mu * c.weight / r, w2 = w1 / r;
      for (int a = 0; a < 3; ++a) {
        if (c.v[a] < 0) continue;
        const int va = var_[c.v[a]];
        if (va < 0) continue;
        g[va] -= w1 * c.coef[a];
        for (int b = 0; b < 3; ++b) {
          if (c.v[b] < 0) continue;
          const int vb = var_[c.v[b]];
          if (vb >= 0) trip.emplace_back(va, vb, w2 * c.coef[a] * c.coef[b]);
        }
      }
    }
  }

  /// Phase one: drive the common relaxation sigma below zero.
  void find_interior(std::vector<double>& f, int& iterations, int max_iterations) const {
    if (min_slack(f) > 0 || cons_.empty()) return;
    double sigma = std::max(0.0, -min_slack(f)) + 1;
    double t = 1;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    bool analysed = false;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd gf(nvar_), h(nvar_);
    Eigen::SparseMatrix<double> A(nvar_, nvar_);
    while (true) {
      if (++iterations > max_iterations) throw NonConvergence("no strictly feasible field found");
      gf.setZero();
      h.setZero();
      trip.clear();
      double gs = t, c = 0;
      for (const auto& con : cons_) {
        const double r = slack(con, f) + sigma;
        const double w1 = 1 / r, w2 = w1 * w1;
        gs -= w1;
        c += w2;
        for (int a = 0; a < 3; ++a) {
          if (con.v[a] < 0 || var_[con.v[a]] < 0) continue;
          const int va = var_[con.v[a]];
          gf[va] += w1 * con.coef[a];
          h[va] -= w2 * con.coef[a];
          for (int b = 0; b < 3; ++b)
            if (con.v[b] >= 0 && var_[con.v[b]] >= 0) trip.emplace_back(va, var_[con.v[b]], w2 * con.coef[a] * con.coef[b]);
        }
      }
      for (int k = 0; k < nvar_; ++k) trip.emplace_back(k, k, 1e-12);
      A.setFromTriplets(trip.begin(), trip.end());
      if (!analysed) solver.analyzePattern(A), analysed = true;
      solver.factorize(A);
      if (solver.info() != Eigen::Success) throw NonConvergence("phase-one factorization failed");
      const Eigen::VectorXd y1 = solver.solve(gf), y2 = solver.solve(h);
      const double schur = c - h.dot(y2);
      const double ds = (-gs + h.dot(y1)) / schur;
      const Eigen::VectorXd dx = -y1 - y2 * ds;
      const double dec = -(gf.dot(dx) + gs * ds);
      double a = 0.99 * max_step(f, dx, sigma, ds);
      a = std::min(a, 1.0);
      auto psi = [&](const std::vector<double>& ff, double sg) {
        double v = t * sg;
        for (const auto& con : cons_) {
          const double r = slack(con, ff) + sg;
          if (!(r > 0)) return std::numeric_limits<double>::infinity();
          v -= std::log(r);
        }
        return v;
      };
      const double base = psi(f, sigma);
      while (a > 1e-14 && psi(moved(f, dx, a), sigma + a * ds) > base - 1e-4 * a * dec) a *= 0.5;
      f = moved(f, dx, a);
      sigma += a * ds;
      if (min_slack(f) > 0) return;
      if (dec / 2 < 1e-6) t *= 10;
    }
  }

  Tilt tilt(const MeshTriangle& T, const std::vector<double>& f) const {
    Tilt r;
    for (int k = 0; k < 3; ++k) r.s += T.cs[k] * f[T.v[k]], r.t += T.ct[k] * f[T.v[k]];
    return r;
  }

 private:
  DiscreteField& F_;
  std::vector<int> var_;
  int nvar_ = 0;
  std::vector<Constraint> cons_;
  std::vector<int> obj_;
  double constant_ = 0;
  double wsum_ = 0, tw_ = 0;
};

}  // namespace detail

/// Mesh-cell tilts (average of the cell's triangles), clipped to the tilt square.
inline std::vector<Tilt> tilt_field(const DiscreteField& F) {
  std::vector<Tilt> out;
  for (int j = 0; j + 1 < F.ny; ++j)
    for (int i = 0; i + 1 < F.nx; ++i) {
      const int a = F.node(i, j), b = F.node(i + 1, j), c = F.node(i, j + 1), d = F.node(i + 1, j + 1);
      if (a < 0 || b < 0 || c < 0 || d < 0) continue;
      const double s = (F.values[b] + F.values[d] - F.values[a] - F.values[c]) / (2 * F.delta);
      const double t = (F.values[c] + F.values[d] - F.values[a] - F.values[b]) / (2 * F.delta);
      out.push_back(detail::clip_tilt({s, t}));
    }
  return out;
}

/// Centres of the cells reported by tilt_field, in the same order.
inline std::vector<Point2> cell_centres(const DiscreteField& F) {
  std::vector<Point2> out;
  for (int j = 0; j + 1 < F.ny; ++j)
    for (int i = 0; i + 1 < F.nx; ++i) {
      if (F.node(i, j) < 0 || F.node(i + 1, j) < 0 || F.node(i, j + 1) < 0 || F.node(i + 1, j + 1) < 0) continue;
      out.push_back({(F.i0 + i + 0.5) * F.delta, (F.j0 + j + 0.5) * F.delta});
    }
  return out;
}

inline bool is_extremal(Tilt t, double eta = 1e-3) { return std::abs(t.s) + std::abs(t.t) >= 2 - eta; }

/// Limiting local statistics per cell; extremal tilts give the brickwork indicator.
inline std::vector<EdgeProbabilities> predicted_probabilities(const DiscreteField& F, double eta = 1e-3) {
  std::vector<EdgeProbabilities> out;
  for (Tilt t : tilt_field(F)) {
    if (!is_extremal(t, eta)) {
      out.push_back(probs_from_tilt(t));
      continue;
    }
    // Dominant class at the nearest corner of the tilt square.
    EdgeProbabilities p{0, 0, 0, 0};
    if (std::abs(t.t) >= std::abs(t.s)) (t.t > 0 ? p.pa : p.pb) = 1;
    else (t.s > 0 ? p.pd : p.pc) = 1;
    out.push_back(p);
  }
  return out;
}

struct ResidualOptions {
  double margin = 0.05;
  double disk_radius = std::numeric_limits<double>::infinity();  // optional restriction
  Point2 disk_centre{};
};

struct PdeResidual {
  std::vector<double> values;  // per node, NaN where not evaluated
  double norm = 0;
  int count = 0;
};

inline PdeResidual pde_residual(const DiscreteField& F, const ResidualOptions& opt = {}) {
  PdeResidual R;
  R.values.assign(F.nodes.size(), std::numeric_limits<double>::quiet_NaN());
  const double d = F.delta;
  double sum = 0;
  for (std::size_t k = 0; k < F.nodes.size(); ++k) {
    const auto [i, j] = F.grid[k];
    std::array<std::array<double, 3>, 3> v{};
    bool full = true;
    for (int dj = -1; dj <= 1 && full; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const int n = F.node(i + di, j + dj);
        if (n < 0) {
          full = false;
          break;
        }
        v[di + 1][dj + 1] = F.values[n];
      }
    if (!full) continue;
    if (geom::dist(F.nodes[k], opt.disk_centre) >= opt.disk_radius) continue;
    const Tilt t{(v[2][1] - v[0][1]) / (2 * d), (v[1][2] - v[1][0]) / (2 * d)};
    if (std::abs(t.s) + std::abs(t.t) >= 2 - opt.margin) continue;
    const double fxx = (v[2][1] - 2 * v[1][1] + v[0][1]) / (d * d);
    const double fyy = (v[1][2] - 2 * v[1][1] + v[1][0]) / (d * d);
    const double fxy = (v[2][2] - v[2][0] - v[0][2] + v[0][0]) / (4 * d * d);
    const auto A = pde_coefficients(t);
    const double r = A.A_xx * fxx + A.A_xy * fxy + A.A_yy * fyy;
    R.values[k] = r;
    sum += r * r * d * d;
    ++R.count;
  }
  R.norm = std::sqrt(sum);
  return R;
}

/// Maximizes sum_T w_T ent(tilt_T) over fields with the given boundary
/// values and |s| + |t| <= 2 on every triangle, by a log-barrier Newton
/// method with a decreasing barrier weight.
inline SolveReport maximize_entropy(DiscreteField& F, const SolverConfig& cfg = {}) {
  SolveReport rep;
  detail::BarrierProblem prob(F);
  std::vector<double> f = F.values;
  if (cfg.random_start) {
    std::mt19937_64 gen(cfg.seed);
    std::uniform_real_distribution<double> U(0, 1);
    for (std::size_t k = 0; k < f.size(); ++k)
      if (!F.pinned[k]) {
        const double lam = U(gen);
        f[k] = lam * F.upper[k] + (1 - lam) * F.lower[k];
      }
  }
  int iters = 0;
  if (prob.nvar() > 0) {
    prob.find_interior(f, iters, cfg.max_iterations);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    bool analysed = false;
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd g;
    Eigen::SparseMatrix<double> H(prob.nvar(), prob.nvar());
    const double W = std::max(prob.objective_weight(), 1e-300);
    int stage = 0;
    for (double mu = cfg.mu_start;; mu *= cfg.mu_factor, ++stage) {
      const bool last = mu <= cfg.mu_min * (1 + 1e-9);
      const double stop = last ? cfg.tol * W : std::max(cfg.tol, 1e-3 * mu) * W;
      double obj = prob.barrier_objective(f, mu);
      rep.history.push_back({stage, mu, obj});
      for (;;) {
        if (++iters > cfg.max_iterations)
          throw NonConvergence("Newton iteration cap reached at barrier weight " + std::to_string(mu));
        prob.derivatives(f, mu, g, trip);
        H.setFromTriplets(trip.begin(), trip.end());
        if (!analysed) solver.analyzePattern(H), analysed = true;
        solver.factorize(H);
        if (solver.info() != Eigen::Success) throw NonConvergence("Newton system is not positive definite");
        const Eigen::VectorXd dx = solver.solve(g);
        const double dec = g.dot(dx);
        rep.gradient_norm = g.norm();
        if (dec / 2 <= stop) break;
        double a = 0.99 * prob.max_step(f, dx);
        double next = -std::numeric_limits<double>::infinity();
        std::vector<double> trial;
        while (a > 1e-16) {
          trial = prob.moved(f, dx, a);
          next = prob.barrier_objective(trial, mu);
          if (next >= obj + 1e-4 * a * dec) break;
          a *= 0.5;
        }
        if (!(next >= obj)) break;  // no further progress at this weight
        f = std::move(trial);
        obj = next;
        rep.history.push_back({stage, mu, obj});
      }
      if (last) break;
    }
  }
  F.values = f;
  rep.iterations = iters;
  rep.ent = evaluate_Ent(F);
  rep.tilts = tilt_field(F);
  rep.residual_norm = pde_residual(F).norm;
  return rep;
}

/// Boundary data of the normalized Aztec diamond |x| + |y| <= 1, read off
/// the lattice diamond of the given order (vertices lying on the polygon).
inline BoundaryData aztec_boundary_data(int order) {
  const Region R = aztec_diamond(order);
  const auto b = boundary_heights(R);
  BoundaryData data;
  for (const auto& [v, h] : b.values)
    if (std::abs(v.x) + std::abs(v.y) == order)
      data.samples.push_back({{static_cast<double>(v.x) / order, static_cast<double>(v.y) / order},
                              static_cast<double>(h) / order});
  return data;
}

inline ContinuousRegion aztec_polygon() { return {{{-1, 0}, {0, -1}, {1, 0}, {0, 1}}}; }

inline ContinuousRegion unit_square() { return {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}; }

/// Field value at an arbitrary point, by linear interpolation on the
/// lower-left/upper-right triangle pair of the containing cell.
inline double field_at(const DiscreteField& F, Point2 p) {
  const double u = p.x / F.delta - F.i0, v = p.y / F.delta - F.j0;
  int i = std::clamp(static_cast<int>(std::floor(u)), 0, F.nx - 2);
  int j = std::clamp(static_cast<int>(std::floor(v)), 0, F.ny - 2);
  const double a = u - i, b = v - j;
  const int n00 = F.node(i, j), n10 = F.node(i + 1, j), n01 = F.node(i, j + 1), n11 = F.node(i + 1, j + 1);
  auto val = [&](int n) { return n >= 0 ? F.values[n] : std::numeric_limits<double>::quiet_NaN(); };
  const double r = a >= b ? val(n00) + a * (val(n10) - val(n00)) + b * (val(n11) - val(n10))
                          : val(n00) + b * (val(n01) - val(n00)) + a * (val(n11) - val(n01));
  if (!std::isnan(r)) return r;
  // Cell cut by the boundary: nearest grid node within one cell.
  double best = std::numeric_limits<double>::infinity(), out = r;
  for (int dj = -1; dj <= 2; ++dj)
    for (int di = -1; di <= 2; ++di) {
      const int n = F.node(i + di, j + dj);
      if (n < 0) continue;
      const double d2 = geom::dist(F.nodes[n], p);
      if (d2 < best) best = d2, out = F.values[n];
    }
  return out;
}

}  // namespace dimervar
