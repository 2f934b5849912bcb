#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "errors.hpp"
#include "thermo.hpp"

namespace dimervar {

/// The four signed products P1..P4 on the 2n x 2n torus, stored as
/// (log |P|, sign) so that large n does not overflow.
struct PartitionComponents {
  int n = 0;
  std::array<double, 4> log_abs{};  // -inf where P vanishes
  std::array<int, 4> sign{};        // -1, 0 or +1
  double log_Z = 0;

  double P(int l) const { return sign[l] == 0 ? 0.0 : sign[l] * std::exp(log_abs[l]); }
  double Z() const { return std::exp(log_Z); }
};

namespace detail {

inline void check_torus_size(int n) {
  if (n < 2 || n % 2 != 0) throw InvalidRegion("torus size n must be even and at least 2");
  if (n > 512) throw NumericOverflow("torus size n > 512 is beyond the supported range");
}

// Grid angles for product l: P1 unshifted, P2 shifts phi, P3 shifts theta, P4 both.
inline std::pair<double, double> torus_angles(int l, int n, int j, int k) {
  const double th = (2 * j + (l == 2 || l == 3 ? 1 : 0)) * pi / n;
  const double ph = (2 * k + (l == 1 || l == 3 ? 1 : 0)) * pi / n;
  return {th, ph};
}

inline double zero_threshold(const WeightVector& w) {
  const double s = w.a + w.b + w.c + w.d;
  return 1e-13 * s * s;
}

}  // namespace detail

/// Sign of P1 from the four real factors at theta, phi in {0, pi}; the
/// remaining factors pair into squared moduli.
inline int p1_sign_rule(const WeightVector& w) {
  const double f1 = (w.a + w.b) * (w.a + w.b) - (w.c - w.d) * (w.c - w.d);
  const double f2 = (w.c + w.d) * (w.c + w.d) - (w.a - w.b) * (w.a - w.b);
  const double f3 = (w.a - w.b) * (w.a - w.b) + (w.c - w.d) * (w.c - w.d);
  const double prod = f1 * f2 * f3;
  return prod > 0 ? -1 : (prod < 0 ? 1 : 0);
}

/// Sign of P_l obtained by tracking the phase of every factor.
inline int product_sign_numeric(int l, int n, const WeightVector& w) {
  detail::check_torus_size(n);
  double phase = 0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      auto [th, ph] = detail::torus_angles(l, n, j, k);
      auto F = symbol_F(w, th, ph);
      if (std::abs(F) <= detail::zero_threshold(w)) return 0;
      phase += std::arg(F);
    }
  return std::cos(phase) > 0 ? 1 : -1;
}

inline PartitionComponents partition_components(int n, const WeightVector& w) {
  validate_weights(w);
  detail::check_torus_size(n);
  PartitionComponents pc;
  pc.n = n;
  const double tiny = detail::zero_threshold(w);
  for (int l = 0; l < 4; ++l) {
    double sum = 0, comp = 0, phase = 0;
    bool zero = false;
    for (int j = 0; j < n && !zero; ++j)
      for (int k = 0; k < n; ++k) {
        auto [th, ph] = detail::torus_angles(l, n, j, k);
        auto F = symbol_F(w, th, ph);
        const double m = std::abs(F);
        if (m <= tiny) {
          zero = true;
          break;
        }
        const double y = std::log(m) - comp, t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        phase += std::arg(F);
      }
    if (zero) {
      pc.log_abs[l] = -std::numeric_limits<double>::infinity();
      pc.sign[l] = 0;
      continue;
    }
    pc.log_abs[l] = sum;
    pc.sign[l] = l == 0 ? p1_sign_rule(w) : (std::cos(phase) > 0 ? 1 : -1);
    if (pc.sign[l] == 0) pc.log_abs[l] = -std::numeric_limits<double>::infinity();
  }
  double M = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < 4; ++l)
    if (pc.sign[l] != 0) M = std::max(M, pc.log_abs[l]);
  double S = 0;
  for (int l = 0; l < 4; ++l)
    if (pc.sign[l] != 0) S += (l == 0 ? -1 : 1) * pc.sign[l] * std::exp(pc.log_abs[l] - M);
  if (!(S > 0)) throw DegenerateWeights("torus partition function vanishes");
  pc.log_Z = M + std::log(S / 2);
  return pc;
}

inline double torus_log_partition(int n, const WeightVector& w) { return partition_components(n, w).log_Z; }

inline double torus_partition(int n, const WeightVector& w) {
  const double lz = torus_log_partition(n, w);
  if (lz > std::log(std::numeric_limits<double>::max()))
    throw NumericOverflow("Z_n overflows double precision; use the logarithm");
  return std::exp(lz);
}

/// Probability that a given edge of each class is occupied on the 2n x 2n torus.
inline EdgeProbabilities edge_probability_finite(int n, const WeightVector& w) {
  const auto pc = partition_components(n, w);
  double M = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < 4; ++l)
    if (pc.sign[l] != 0) M = std::max(M, pc.log_abs[l]);
  std::array<double, 4> num{};
  double den = 0;
  for (int l = 0; l < 4; ++l) {
    if (pc.sign[l] == 0) continue;
    const double coef = (l == 0 ? -1 : 1) * pc.sign[l] * std::exp(pc.log_abs[l] - M);
    std::array<std::complex<double>, 4> S{};
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        auto [th, ph] = detail::torus_angles(l, n, j, k);
        const std::complex<double> z = std::polar(1.0, th), u = std::polar(1.0, ph);
        const std::complex<double> F = symbol_F(w, th, ph);
        const std::complex<double> hx = w.a + w.b * z, vy = w.c + w.d * u;
        S[0] += 2.0 * w.a * hx / z / F;
        S[1] += 2.0 * w.b * hx / F;
        S[2] += 2.0 * w.c * vy / u / F;
        S[3] += 2.0 * w.d * vy / F;
      }
    for (int x = 0; x < 4; ++x) num[x] += coef * S[x].real();
    den += coef;
  }
  const double scale = 1.0 / (2.0 * n * n * den);
  return {num[0] * scale, num[1] * scale, num[2] * scale, num[3] * scale};
}

struct KasteleynCheck {
  std::array<std::complex<double>, 4> det{};
  std::array<double, 4> P{};
  double max_rel_err = 0;  // max |det A_l - P_l^2| / max(1, max_l P_l^2)
};

/// Dense 16 x 16 matrices for the 4 x 4 torus: vertical weights carry a
/// factor i, and A2/A3/A4 flip the sign of the vertical/horizontal/both
/// wrap-around edges.
inline KasteleynCheck dense_kasteleyn_check(const WeightVector& w) {
  validate_weights(w);
  constexpr int L = 4;
  const auto pc = partition_components(2, w);
  const std::complex<double> I(0, 1);
  KasteleynCheck out;
  double scale = 1;
  for (int l = 0; l < 4; ++l) {
    out.P[l] = pc.P(l);
    scale = std::max(scale, out.P[l] * out.P[l]);
  }
  for (int l = 0; l < 4; ++l) {
    const bool flip_v = l == 1 || l == 3, flip_h = l == 2 || l == 3;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(L * L, L * L);
    for (int y = 0; y < L; ++y)
      for (int x = 0; x < L; ++x) {
        const int u = y * L + x;
        const bool even = ((x + y) & 1) == 0;
        const int e = y * L + (x + 1) % L;
        std::complex<double> wh = even ? w.a : w.b;
        if (flip_h && x == L - 1) wh = -wh;
        A(u, e) += wh;
        A(e, u) += wh;
        const int nn = ((y + 1) % L) * L + x;
        std::complex<double> wv = I * (even ? w.c : w.d);
        if (flip_v && y == L - 1) wv = -wv;
        A(u, nn) += wv;
        A(nn, u) += wv;
      }
    out.det[l] = A.fullPivLu().determinant();
    out.max_rel_err = std::max(out.max_rel_err, std::abs(out.det[l] - out.P[l] * out.P[l]) / scale);
  }
  return out;
}

}  // namespace dimervar
