#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"
#include "lattice.hpp"
#include "thermo.hpp"

namespace dimervar {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Number of tilings, by a broken-profile transfer over the bounding box.
/// The profile runs along the shorter side; bit c of the mask marks a cell
/// of the next row already covered by a vertical domino.
inline BigInt count_tilings(const Region& region, std::size_t max_cells = 64) {
  if (region.area() > max_cells)
    throw CapExceeded("region has " + std::to_string(region.area()) + " cells, cap is " + std::to_string(max_cells));
  if (region.white_count() != region.black_count()) return 0;
  const bool transpose = region.width() > region.height();
  const int W = transpose ? region.height() : region.width();
  const int H = transpose ? region.width() : region.height();
  if (W > 62) throw CapExceeded("profile too wide");
  const int x0 = region.xmin(), y0 = region.ymin();
  auto inside = [&](int r, int c) {
    if (r >= H || c >= W) return false;
    return region.contains(transpose ? Cell{x0 + r, y0 + c} : Cell{x0 + c, y0 + r});
  };
  std::map<std::uint64_t, BigInt> cur{{0, 1}}, next;
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) {
      next.clear();
      const std::uint64_t bit = std::uint64_t{1} << c;
      const bool here = inside(r, c), below = inside(r + 1, c), beside = inside(r, c + 1);
      for (const auto& [mask, ways] : cur) {
        if (!here || (mask & bit)) {
          next[mask & ~bit] += ways;
          continue;
        }
        if (below) next[mask | bit] += ways;
        if (beside && !(mask & (bit << 1))) next[mask | (bit << 1)] += ways;
      }
      std::swap(cur, next);
    }
  auto it = cur.find(0);
  return it == cur.end() ? BigInt(0) : it->second;
}

/// Calls f(tiling) for each tiling in a fixed order until f returns false.
/// Returns the number of tilings visited.
template <class F>
std::size_t for_each_tiling(const Region& region, F&& f) {
  const auto& C = region.cells();
  const std::size_t n = C.size();
  if (n % 2 || region.white_count() != region.black_count()) return 0;
  std::vector<char> covered(n, 0);
  std::vector<Domino> stack;
  stack.reserve(n / 2);
  std::size_t visited = 0;
  bool stop = false;
  // Cells are sorted by (x, y): the first uncovered cell can only pair
  // with its east or north neighbour.
  auto rec = [&](auto&& self, std::size_t from) -> void {
    while (from < n && covered[from]) ++from;
    if (from == n) {
      ++visited;
      if (!f(make_tiling(stack))) stop = true;
      return;
    }
    const Cell c = C[from];
    for (Cell q : {Cell{c.x + 1, c.y}, Cell{c.x, c.y + 1}}) {
      const int j = region.cell_index(q);
      if (j < 0 || covered[j]) continue;
      covered[from] = covered[j] = 1;
      stack.push_back(make_domino(c, q));
      self(self, from + 1);
      stack.pop_back();
      covered[from] = covered[j] = 0;
      if (stop) return;
    }
  };
  rec(rec, 0);
  return visited;
}

inline std::vector<Tiling> enumerate_tilings(const Region& region, std::size_t cap = 100000) {
  std::vector<Tiling> out;
  bool over = false;
  for_each_tiling(region, [&](Tiling t) {
    if (out.size() == cap) {
      over = true;
      return false;
    }
    out.push_back(std::move(t));
    return true;
  });
  if (over) throw CapExceeded("more than " + std::to_string(cap) + " tilings");
  return out;
}

struct MatchingStats {
  int N_a = 0, N_b = 0, N_c = 0, N_d = 0;
  auto operator<=>(const MatchingStats&) const = default;
  int total() const { return N_a + N_b + N_c + N_d; }
};

/// Edge of the 2n x 2n torus starting at (x, y), pointing east or north.
struct TorusEdge {
  int x = 0, y = 0;
  bool vertical = false;
  DominoClass cls = DominoClass::a;
};

inline DominoClass torus_edge_class(int x, int y, bool vertical) {
  const bool even = ((x + y) & 1) == 0;
  if (vertical) return even ? DominoClass::c : DominoClass::d;
  return even ? DominoClass::a : DominoClass::b;
}

/// All perfect matchings of the 2n x 2n torus (n = 2 only).
inline std::vector<std::vector<TorusEdge>> torus_matchings(int n) {
  if (n != 2) throw CapExceeded("torus enumeration is limited to n = 2");
  const int L = 2 * n, V = L * L;
  std::vector<char> used(V, 0);
  std::vector<TorusEdge> cur;
  std::vector<std::vector<TorusEdge>> out;
  auto id = [&](int x, int y) { return ((y % L + L) % L) * L + (x % L + L) % L; };
  auto rec = [&](auto&& self, int from) -> void {
    while (from < V && used[from]) ++from;
    if (from == V) {
      out.push_back(cur);
      return;
    }
    const int x = from % L, y = from / L;
    // East, north, west, south partners; an edge is stored at its west/south end.
    const std::array<std::array<int, 3>, 4> moves{{{1, 0, 0}, {0, 1, 1}, {-1, 0, 0}, {0, -1, 1}}};
    for (auto [dx, dy, vert] : moves) {
      const int j = id(x + dx, y + dy);
      if (used[j]) continue;
      const int sx = (dx < 0 || dy < 0) ? (x + dx + L) % L : x;
      const int sy = (dx < 0 || dy < 0) ? (y + dy + L) % L : y;
      used[from] = used[j] = 1;
      cur.push_back({sx, sy, vert == 1, torus_edge_class(sx, sy, vert == 1)});
      self(self, from + 1);
      cur.pop_back();
      used[from] = used[j] = 0;
    }
  };
  rec(rec, 0);
  return out;
}

inline MatchingStats matching_stats(const std::vector<TorusEdge>& m) {
  MatchingStats s;
  for (const auto& e : m) {
    switch (e.cls) {
      case DominoClass::a: ++s.N_a; break;
      case DominoClass::b: ++s.N_b; break;
      case DominoClass::c: ++s.N_c; break;
      case DominoClass::d: ++s.N_d; break;
    }
  }
  return s;
}

/// Coefficients of the matching polynomial: number of matchings per class count.
inline std::map<MatchingStats, BigInt> torus_matching_polynomial(int n) {
  std::map<MatchingStats, BigInt> poly;
  for (const auto& m : torus_matchings(n)) poly[matching_stats(m)] += 1;
  return poly;
}

namespace detail {

template <class T>
T ipow(T x, int k) {
  T r(1);
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace detail

/// Sum over perfect matchings of a^N_a b^N_b c^N_c d^N_d, from the matching polynomial.
template <class T>
T torus_weighted_sum(int n, const std::array<T, 4>& w) {
  T total(0);
  for (const auto& [s, k] : torus_matching_polynomial(n))
    total += T(k) * detail::ipow(w[0], s.N_a) * detail::ipow(w[1], s.N_b) * detail::ipow(w[2], s.N_c) *
             detail::ipow(w[3], s.N_d);
  return total;
}

/// Same sum by a memoized subset recursion over the 4n^2 vertices.
template <class T>
T torus_weighted_sum_dp(int n, const std::array<T, 4>& w) {
  if (n != 2) throw CapExceeded("torus enumeration is limited to n = 2");
  const int L = 2 * n, V = L * L;
  const std::uint32_t full = (std::uint32_t{1} << V) - 1;
  std::vector<std::optional<T>> memo(std::size_t{1} << V);
  auto id = [&](int x, int y) { return ((y % L + L) % L) * L + (x % L + L) % L; };
  auto rec = [&](auto&& self, std::uint32_t mask) -> T {
    if (mask == full) return T(1);
    if (memo[mask]) return *memo[mask];
    int v = 0;
    while (mask >> v & 1) ++v;
    const int x = v % L, y = v / L;
    T total(0);
    const std::array<std::array<int, 3>, 4> moves{{{1, 0, 0}, {0, 1, 1}, {-1, 0, 0}, {0, -1, 1}}};
    for (auto [dx, dy, vert] : moves) {
      const int j = id(x + dx, y + dy);
      if (mask >> j & 1) continue;
      const int sx = (dx < 0 || dy < 0) ? (x + dx + L) % L : x;
      const int sy = (dx < 0 || dy < 0) ? (y + dy + L) % L : y;
      const T& wt = w[static_cast<int>(torus_edge_class(sx, sy, vert == 1))];
      total += wt * self(self, mask | (std::uint32_t{1} << v) | (std::uint32_t{1} << j));
    }
    memo[mask] = total;
    return total;
  };
  return rec(rec, 0);
}

/// Floating-point evaluation with compensated summation over the polynomial.
inline double torus_weighted_sum(int n, const WeightVector& w) {
  validate_weights(w);
  double sum = 0, comp = 0;
  for (const auto& [s, k] : torus_matching_polynomial(n)) {
    double term = static_cast<double>(k) * std::pow(w.a, s.N_a) * std::pow(w.b, s.N_b) *
                  std::pow(w.c, s.N_c) * std::pow(w.d, s.N_d);
    double y = term - comp, t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace dimervar
