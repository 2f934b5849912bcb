#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/zeta.hpp>

#include "errors.hpp"
#include "quadrature.hpp"

namespace dimervar {

inline constexpr double pi = std::numbers::pi;
inline constexpr double catalan = 0.915965594177219015054603514932384110774;

/// Average slope (s, t) = (df/dx, df/dy) of a normalized height function.
struct Tilt {
  double s = 0;
  double t = 0;
};

/// Edge activities of the four domino classes.
struct WeightVector {
  double a = 1, b = 1, c = 1, d = 1;

  double operator[](int i) const { return std::array<double, 4>{a, b, c, d}[i]; }
  bool conditionally_uniform(double rel_tol = 1e-12) const {
    return std::abs(a * b - c * d) <= rel_tol * std::max({a * b, c * d, 1e-300});
  }
};

struct EdgeProbabilities {
  double pa = 0.25, pb = 0.25, pc = 0.25, pd = 0.25;

  double operator[](int i) const { return std::array<double, 4>{pa, pb, pc, pd}[i]; }
  double sum() const { return pa + pb + pc + pd; }
};

/// Location of the zero of F on the torus of phases.
struct SpectralPoint {
  double theta0 = pi;
  double phi0 = pi;
  double residual = 0;    // |F(theta0, phi0)| for the reordered weights
  WeightVector ordered;   // weights reordered so that a >= b, c >= d
};

struct HessianMatrix {
  double ent_ss = 0, ent_st = 0, ent_tt = 0;
  double det() const { return ent_ss * ent_tt - ent_st * ent_st; }
};

struct PdeCoefficients {
  double A_xx = 0, A_xy = 0, A_yy = 0, D = 0;
};

inline void validate_weights(const WeightVector& w) {
  for (double x : {w.a, w.b, w.c, w.d})
    if (!std::isfinite(x) || x < 0) throw InvalidWeights("weights must be finite and non-negative");
  if (w.a + w.b + w.c + w.d <= 0) throw InvalidWeights("at least one weight must be positive");
}

namespace detail {

inline const std::vector<double>& clausen_coefficients() {
  // Cl2(x) = x - x log|x| + sum_k 2 zeta(2k) x^(2k+1) / ((2 pi)^(2k) 2k (2k+1)).
  static const std::vector<double> coef = [] {
    std::vector<double> c;
    double scale = 1;
    for (int k = 1; k <= 40; ++k) {
      scale /= (2 * pi) * (2 * pi);
      c.push_back(2 * boost::math::zeta(2.0 * k) * scale / (2.0 * k * (2.0 * k + 1)));
    }
    return c;
  }();
  return coef;
}

inline double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace detail

/// Clausen function Cl2(x) = -int_0^x log|2 sin(t/2)| dt.
inline double clausen2(double x) {
  double th = std::remainder(x, 2 * pi);
  if (th == 0) return 0;
  const auto& coef = detail::clausen_coefficients();
  double sum = th - th * std::log(std::abs(th));
  double comp = 0;
  double th2 = th * th, p = th;
  for (double c : coef) {
    p *= th2;
    double term = c * p;
    double y = term - comp;
    double tsum = sum + y;
    comp = (tsum - sum) - y;
    sum = tsum;
    if (std::abs(term) < 1e-18) break;
  }
  return sum;
}

/// Lobachevsky function L(x) = -int_0^x log|2 sin t| dt = Cl2(2x)/2.
inline double lobachevsky(double x) { return 0.5 * clausen2(2 * x); }

inline EdgeProbabilities probs_from_tilt(Tilt tilt) {
  const double s = tilt.s, t = tilt.t;
  if (!std::isfinite(s) || !std::isfinite(t) || std::abs(s) + std::abs(t) > 2 + 1e-12)
    throw TiltOutOfRange("tilt (" + std::to_string(s) + ", " + std::to_string(t) +
                         ") violates |s|+|t| <= 2");
  const double cs = std::cos(pi * s / 2), ct = std::cos(pi * t / 2);
  const double ab = std::acos(detail::clamp_unit((ct - cs) / 2)) / (2 * pi);
  const double cd = std::acos(detail::clamp_unit((cs - ct) / 2)) / (2 * pi);
  auto unit = [](double p) { return std::clamp(p, 0.0, 1.0); };
  return {unit(t / 4 + ab), unit(-t / 4 + ab), unit(-s / 4 + cd), unit(s / 4 + cd)};
}

/// Weights in the sine normalization a = sin(pi p_a), ...; these satisfy ab = cd.
inline WeightVector weights_from_tilt(Tilt tilt) {
  if (std::abs(tilt.s) + std::abs(tilt.t) >= 2)
    throw TiltOutOfRange("extremal tilt has no finite weight system");
  auto p = probs_from_tilt(tilt);
  return {std::sin(pi * p.pa), std::sin(pi * p.pb), std::sin(pi * p.pc), std::sin(pi * p.pd)};
}

/// Index of the weight that is at least the sum of the others, or -1.
inline int dominant_index(const WeightVector& w) {
  const double total = w.a + w.b + w.c + w.d;
  int found = -1;
  for (int i = 0; i < 4; ++i) {
    if (w[i] >= total - w[i]) {
      if (found >= 0) throw DegenerateWeights("two weights each dominate; no limiting measure");
      found = i;
    }
  }
  return found;
}

inline EdgeProbabilities probs_from_weights(const WeightVector& w) {
  validate_weights(w);
  std::array<double, 4> x{w.a, w.b, w.c, w.d};
  std::array<double, 4> p{};
  if (int k = dominant_index(w); k >= 0) {
    p[k] = 1;
    return {p[0], p[1], p[2], p[3]};
  }
  const double a = w.a, b = w.b, c = w.c, d = w.d;
  const double num = (a * b + c * d) * (a * c + b * d) * (a * d + b * c);
  const double den = (a + b + c - d) * (a + b - c + d) * (a - b + c + d) * (-a + b + c + d);
  if (!(num > 0) || !(den > 0)) throw DegenerateWeights("no cyclic quadrilateral for these weights");
  const double r = std::sqrt(num / den);
  const int m = static_cast<int>(std::max_element(x.begin(), x.end()) - x.begin());
  double others = 0;
  for (int i = 0; i < 4; ++i) {
    p[i] = std::asin(std::min(1.0, x[i] / (2 * r))) / pi;
    if (i != m) others += p[i];
  }
  // The longest edge subtends a major arc exactly when the other three arcs
  // add up to less than a half circle.
  const double branch = others >= 0.5 ? p[m] : 1 - p[m];
  p[m] = 1 - others;
  if (std::abs(p[m] - branch) > 1e-6)
    throw DegenerateWeights("arc lengths do not close up (sum of probabilities != 1)");
  return {p[0], p[1], p[2], p[3]};
}

inline double ent_from_probs(const EdgeProbabilities& p) {
  return (lobachevsky(pi * p.pa) + lobachevsky(pi * p.pb) + lobachevsky(pi * p.pc) +
          lobachevsky(pi * p.pd)) /
         pi;
}

inline double ent_from_tilt(Tilt tilt) { return ent_from_probs(probs_from_tilt(tilt)); }

inline double ent_from_weights(const WeightVector& w) { return ent_from_probs(probs_from_weights(w)); }

/// (ent_s, ent_t) in closed form; infinite on the edges of the tilt square.
inline std::pair<double, double> ent_gradient(Tilt tilt) {
  auto p = probs_from_tilt(tilt);
  return {-0.25 * std::log(std::sin(pi * p.pd) / std::sin(pi * p.pc)),
          -0.25 * std::log(std::sin(pi * p.pa) / std::sin(pi * p.pb))};
}

inline HessianMatrix hessian(Tilt tilt) {
  const double s = tilt.s, t = tilt.t;
  if (std::abs(s) + std::abs(t) >= 2) throw TiltOutOfRange("Hessian requires a non-extremal tilt");
  auto p = probs_from_tilt(tilt);
  const double denom = 32 * std::sin(pi * (p.pa + p.pb)) * std::sin(pi * p.pa) * std::sin(pi * p.pb);
  const double ss = std::sin(pi * s / 2), st = std::sin(pi * t / 2);
  const double cc = std::cos(pi * s / 2) + std::cos(pi * t / 2);
  HessianMatrix h;
  h.ent_tt = -pi / denom * (ss * ss + cc * cc / 2);
  h.ent_ss = -pi / denom * (st * st + cc * cc / 2);
  h.ent_st = -pi / denom * ss * st;
  return h;
}

inline PdeCoefficients pde_coefficients(Tilt tilt) {
  const double s = tilt.s, t = tilt.t;
  if (std::abs(s) + std::abs(t) >= 2) throw TiltOutOfRange("PDE holds only at non-extremal tilt");
  PdeCoefficients k;
  k.D = 0.5 * (std::cos(pi * s / 2) - std::cos(pi * t / 2));
  const double ss = std::sin(pi * s / 2), st = std::sin(pi * t / 2);
  k.A_xx = 2 * (1 - k.D * k.D) - ss * ss;
  k.A_xy = 2 * ss * st;
  k.A_yy = 2 * (1 - k.D * k.D) - st * st;
  return k;
}

/// F(theta, phi) = a^2 e^{-i theta} + 2ab + b^2 e^{i theta} + c^2 e^{-i phi} + 2cd + d^2 e^{i phi}.
inline std::complex<double> symbol_F(const WeightVector& w, double theta, double phi) {
  const std::complex<double> z = std::polar(1.0, theta), u = std::polar(1.0, phi);
  return (w.a + w.b * z) * (w.a + w.b * z) / z + (w.c + w.d * u) * (w.c + w.d * u) / u;
}

namespace detail {

struct Ordering {
  WeightVector w;
  bool swap_ab = false, swap_cd = false, swap_pairs = false;
};

inline Ordering order_weights(WeightVector w, bool largest_first) {
  Ordering o;
  if (w.a < w.b) std::swap(w.a, w.b), o.swap_ab = true;
  if (w.c < w.d) std::swap(w.c, w.d), o.swap_cd = true;
  if (largest_first && w.c > w.a) {
    std::swap(w.a, w.c);
    std::swap(w.b, w.d);
    o.swap_pairs = true;
  }
  o.w = w;
  return o;
}

}  // namespace detail

inline SpectralPoint singularity(const WeightVector& w) {
  validate_weights(w);
  SpectralPoint sp;
  sp.ordered = detail::order_weights(w, false).w;
  auto p = probs_from_weights(sp.ordered);
  sp.theta0 = pi - pi * (p.pc - p.pd);
  sp.phi0 = pi * (p.pa - p.pb) - pi;
  if (dominant_index(sp.ordered) >= 0) sp.theta0 = pi;
  sp.residual = std::abs(symbol_F(sp.ordered, sp.theta0, sp.phi0));
  return sp;
}

/// Zeros of F on [-pi, pi]^2 for the weights as given (not reordered).
inline std::vector<std::pair<double, double>> torus_zeros(const WeightVector& w) {
  auto sp = singularity(w);
  auto o = detail::order_weights(w, false);
  double th = sp.theta0, ph = sp.phi0;
  if (o.swap_ab) th = -th;
  if (o.swap_cd) ph = -ph;
  return {{th, ph}, {-th, -ph}};
}

/// log Z via the one-dimensional reduction over the arc |theta| < theta0.
inline double log_Z(const WeightVector& w0, const quad::Options& opt = {}) {
  validate_weights(w0);
  const WeightVector w = detail::order_weights(w0, true).w;
  const double a = w.a, b = w.b, c = w.c, d = w.d;
  if (c == 0) return std::log(a);
  const double theta0 = a >= b + c + d ? pi : singularity(w).theta0;
  const double cd = c * d;
  // log|c beta| + log d = log|r + sqrt(r^2 - c^2 d^2)| with the larger-modulus branch.
  auto g = [&](double th) {
    const std::complex<double> z = std::polar(1.0, th);
    const std::complex<double> r = cd + (a + b * z) * (a + b * z) / (2.0 * z);
    const std::complex<double> s = std::sqrt(r * r - cd * cd);
    return std::log(std::max(std::abs(r + s), std::abs(r - s)));
  };
  double integral = theta0 > 0 ? quad::integrate(g, 0.0, theta0, {}, opt) : 0.0;
  double head = theta0 < pi ? (1 - theta0 / pi) * std::log(c) : 0.0;
  return head + integral / (2 * pi);
}

/// log Z as the double integral (1/8 pi^2) int int log|F|, for cross-checking.
inline double log_Z_2d(const WeightVector& w0, const quad::Options& opt = {1e-10, 1e-12, 2000, 1e-6}) {
  validate_weights(w0);
  const WeightVector w = detail::order_weights(w0, true).w;
  if (w.c == 0) return std::log(w.a);
  const auto sp = singularity(w);
  quad::Options inner = opt;
  inner.rel_tol = opt.rel_tol * 1e-2;
  inner.abs_tol = opt.abs_tol * 1e-2;
  auto row = [&](double th) {
    auto f = [&](double ph) { return std::log(std::abs(symbol_F(w, th, ph))); };
    return quad::integrate(f, -pi, pi, {-sp.phi0, sp.phi0, 0.0}, inner);
  };
  // log|F| is invariant under (theta, phi) -> (-theta, -phi).
  double val = quad::integrate(row, 0.0, pi, {sp.theta0}, opt);
  return val / (4 * pi * pi);
}

/// Coupling function P(dx, dy) for a white-to-black displacement (dx + dy odd).
/// The phi integral is done exactly by residues: with u = e^{i phi},
/// u F = d^2 u^2 + (A + 2cd) u + c^2 for A = (a + bz)^2 / z. The remaining
/// theta integral is adaptive, split where a root crosses |u| = 1.
inline std::complex<double> coupling_P(int dx, int dy, const WeightVector& w,
                                       const quad::Options& opt = {1e-11, 1e-13, 4000, 1e-8}) {
  validate_weights(w);
  if (((dx + dy) % 2 + 2) % 2 != 1)
    throw ParityViolation("displacement must join a white square to a black one");
  const bool horizontal = ((dx % 2) + 2) % 2 == 1;
  // Both displacement components are exact multiples of two after removing the odd unit.
  const int fx = horizontal ? (dx - 1) / 2 : dx / 2;
  const int fy = horizontal ? dy / 2 : (dy - 1) / 2;
  if (w.c == 0 && w.d == 0) throw DegenerateWeights("vertical weights vanish; F has no phi dependence");
  std::vector<double> tb{0.0};
  try {
    for (auto [th, ph] : torus_zeros(w)) tb.push_back(th);
  } catch (const DegenerateWeights&) {
  }
  const std::complex<double> I(0, 1);
  const double c = w.c, d = w.d;
  auto row = [&](double th) {
    const std::complex<double> z = std::polar(1.0, th);
    const std::complex<double> A = (w.a + w.b * z) * (w.a + w.b * z) / z + 2.0 * c * d;
    std::vector<std::complex<double>> roots;
    if (d > 0) {
      const std::complex<double> disc = std::sqrt(A * A - 4.0 * c * c * d * d);
      roots = {(-A + disc) / (2.0 * d * d), (-A - disc) / (2.0 * d * d)};
    } else {
      roots = {-c * c / A};
    }
    // Sum of residues of u^m / (u F) inside the unit disk. For m < 0 the
    // pole at the origin is avoided by summing the outside roots instead.
    auto S = [&](int m) {
      std::complex<double> acc = 0;
      for (auto r : roots) {
        const bool inside = std::abs(r) < 1;
        if (inside != (m >= 0)) continue;
        acc += std::pow(r, m) / (2.0 * d * d * r + A);
      }
      return m >= 0 ? acc : -acc;
    };
    const std::complex<double> inner = horizontal ? (w.b + w.a / z) * S(-fy) : -I * (d * S(-fy) + c * S(-fy - 1));
    return std::polar(1.0, -fx * th) * inner;
  };
  return quad::integrate(row, -pi, pi, tb, opt) / (2 * pi);
}

/// Domino classes: horizontal with white left (a), white right (b),
/// vertical with white below (c), white above (d).
enum class DominoClass { a = 0, b = 1, c = 2, d = 3 };

inline char class_letter(DominoClass k) { return "abcd"[static_cast<int>(k)]; }

/// A domino given by its white cell and its black cell.
struct ColoredDomino {
  int wx, wy;  // white cell
  int bx, by;  // black cell
};

inline DominoClass colored_class(const ColoredDomino& dm) {
  const int dx = dm.bx - dm.wx, dy = dm.by - dm.wy;
  if (dx == 1 && dy == 0) return DominoClass::a;
  if (dx == -1 && dy == 0) return DominoClass::b;
  if (dx == 0 && dy == 1) return DominoClass::c;
  if (dx == 0 && dy == -1) return DominoClass::d;
  throw ConfigOverlap("cells of a domino must be adjacent");
}

/// Limiting probability of seeing all the given dominos, |w det M| with
/// M_ij = P(black_j - white_i). With `gauge` the rescaled kernel is used and
/// the determinant is returned directly (requires ab = cd).
inline double config_probability(const std::vector<ColoredDomino>& config, const WeightVector& w,
                                 bool gauge = false) {
  validate_weights(w);
  std::vector<std::pair<int, int>> seen;
  for (const auto& dm : config) {
    if (((dm.wx + dm.wy) % 2 + 2) % 2 != 0 || ((dm.bx + dm.by) % 2 + 2) % 2 != 1)
      throw ConfigOverlap("domino cells have the wrong colors");
    colored_class(dm);
    for (auto cell : {std::pair{dm.wx, dm.wy}, std::pair{dm.bx, dm.by}}) {
      if (std::find(seen.begin(), seen.end(), cell) != seen.end())
        throw ConfigOverlap("dominos overlap");
      seen.push_back(cell);
    }
  }
  const int k = static_cast<int>(config.size());
  if (k == 0) return 1;
  if (gauge && (!w.conditionally_uniform(1e-9) || w.a <= 0 || w.b <= 0 || w.c <= 0 || w.d <= 0))
    throw DegenerateWeights("rescaled kernel needs positive weights with ab = cd");
  Eigen::MatrixXcd M(k, k);
  double wprod = 1;
  for (int i = 0; i < k; ++i) {
    wprod *= w[static_cast<int>(colored_class(config[i]))];
    for (int j = 0; j < k; ++j) {
      const int dx = config[j].bx - config[i].wx, dy = config[j].by - config[i].wy;
      std::complex<double> v = coupling_P(dx, dy, w);
      if (gauge) {
        const bool horizontal = ((dx % 2) + 2) % 2 == 1;
        const int hx = horizontal ? (dx - 1) / 2 : dx / 2;
        const int hy = horizontal ? dy / 2 : (dy - 1) / 2;
        v *= (horizontal ? w.a : w.c) * std::pow(w.a / w.b, hx) * std::pow(w.c / w.d, hy);
      }
      M(i, j) = v;
    }
  }
  const double det = std::abs(M.determinant());
  return gauge ? det : wprod * det;
}

}  // namespace dimervar
