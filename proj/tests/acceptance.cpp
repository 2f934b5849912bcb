// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <random>
#include <string>
#include <thread>
#include <unordered_set>

#include <boost/math/distributions/chi_squared.hpp>

#include <dimervar/enumerate.hpp>
#include <dimervar/sampler.hpp>
#include <dimervar/thermo.hpp>
#include <dimervar/torus.hpp>
#include <dimervar/variational.hpp>

using namespace dimervar;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Shared Aztec solutions (unit diamond, spacing 1/64 and 1/128).
struct AztecSolution {
  DiscreteField field;
  SolveReport report;
};

const AztecSolution& aztec_solution(int mesh) {
  static std::map<int, AztecSolution> cache;
  auto it = cache.find(mesh);
  if (it == cache.end()) {
    AztecSolution s{discretize(aztec_polygon(), aztec_boundary_data(64), 1.0 / mesh), {}};
    s.report = maximize_entropy(s.field);
    it = cache.emplace(mesh, std::move(s)).first;
  }
  return it->second;
}

// 1. Entropy constants.
Outcome c1() {
  const double e0 = std::abs(ent_from_tilt({0, 0}) - 2 * catalan / pi);
  bool zeros = true;
  for (Tilt t : {Tilt{2, 0}, Tilt{-2, 0}, Tilt{0, 2}, Tilt{0, -2}}) zeros = zeros && ent_from_tilt(t) == 0.0;
  return {e0 <= 1e-9 && zeros, fmt("|ent(0,0) - 2G/pi| = %.2e (tol 1e-9); corner values exactly 0: %s", e0,
                                   zeros ? "yes" : "no")};
}

// 2. Torus partition function against exact enumeration.
Outcome c2() {
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> num(1, 30), den(1, 10);
  double worst = 0, worst_det = 0;
  for (int k = 0; k < 50; ++k) {
    std::array<Rational, 4> q;
    WeightVector w;
    for (int i = 0; i < 4; ++i) q[i] = Rational(num(gen), den(gen));
    w = {static_cast<double>(q[0]), static_cast<double>(q[1]), static_cast<double>(q[2]),
         static_cast<double>(q[3])};
    const double exact = static_cast<double>(torus_weighted_sum(2, q));
    worst = std::max(worst, std::abs(partition_components(2, w).Z() - exact) / exact);
    worst_det = std::max(worst_det, dense_kasteleyn_check(w).max_rel_err);
  }
  return {worst <= 1e-9 && worst_det <= 1e-8,
          fmt("Z_2 max rel err %.2e (tol 1e-9); det A_l vs P_l^2 max rel err %.2e (tol 1e-8)", worst, worst_det)};
}

// 3. Closed-form edge probabilities against quadrature of the coupling function.
Outcome c3() {
  std::vector<WeightVector> ws = {
      {1, 1, 1, 1},       {2, 2, 2, 2},         {0.5, 0.5, 0.5, 0.5}, {1, 1, 2, 2},       {2, 2, 1, 1},
      {3.5, 1, 1, 1},     {1, 4, 1, 1},         {1, 1, 5, 0.5},       {0.3, 1, 0.4, 3},   {2.97, 1, 1, 1},
      {3.03, 1, 1, 1},    {1, 2.9, 0.9, 1.05},  {0.5, 0.5, 0.5, 1.47}, {1, 1, 2.05, 1},  {1.2, 0.8, 1.1, 0.9},
      {1.7, 0.6, 1.3, 0.4}, {0.9, 1.6, 0.5, 1.2}, {1, 2, 1.5, 0.7},    {2.5, 1, 1, 0.6},   {0.2, 0.3, 0.25, 0.35},
      {1.4, 1.4, 0.7, 0.7}, {0.8, 1.1, 1.9, 0.95}, {1, 1.01, 0.99, 1}, {2.2, 0.9, 0.6, 0.8}, {1, 0.2, 0.3, 0.4}};
  double worst = 0;
  for (const auto& w : ws) {
    const auto p = probs_from_weights(w);
    const std::array<double, 4> q = {w.a * coupling_P(1, 0, w).real(), w.b * coupling_P(-1, 0, w).real(),
                                     -w.c * coupling_P(0, 1, w).imag(), -w.d * coupling_P(0, -1, w).imag()};
    for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(p[i] - q[i]));
  }
  const auto half = probs_from_weights({2, 1, 1, 1});
  const auto frozen = probs_from_weights({3, 1, 1, 1});
  const bool exact = half.pa == 0.5 && frozen.pa == 1 && frozen.pb == 0 && frozen.pc == 0 && frozen.pd == 0;
  return {worst <= 1e-6 && exact,
          fmt("%zu weight vectors, max |closed form - quadrature| %.2e (tol 1e-6); p_a(2,1,1,1) = %.17g; "
              "(3,1,1,1) -> (%g,%g,%g,%g)",
              ws.size(), worst, half.pa, frozen.pa, frozen.pb, frozen.pc, frozen.pd)};
}

// 4. Tilt, probability and weight coordinates.
Outcome c4() {
  double tilt_err = 0, gauge_err = 0, inv_err = 0;
  int points = 0;
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 40; ++j) {
      const Tilt t{-2 + 0.1 * i, -2 + 0.1 * j};
      if (std::abs(t.s) + std::abs(t.t) >= 2 - 1e-12) continue;
      ++points;
      const auto p = probs_from_tilt(t);
      tilt_err = std::max({tilt_err, std::abs(2 * (p.pd - p.pc) - t.s), std::abs(2 * (p.pa - p.pb) - t.t)});
      const auto w = weights_from_tilt(t);
      gauge_err = std::max(gauge_err, std::abs(w.a * w.b - w.c * w.d));
      const auto q = probs_from_weights(w);
      for (int k = 0; k < 4; ++k) inv_err = std::max(inv_err, std::abs(q[k] - p[k]));
    }
  return {tilt_err <= 1e-10 && gauge_err <= 1e-10 && inv_err <= 1e-8,
          fmt("%d interior tilts: recovery %.2e (tol 1e-10), |ab - cd| %.2e (tol 1e-10), inverse %.2e (tol 1e-8)",
              points, tilt_err, gauge_err, inv_err)};
}

// 5. Free energy.
Outcome c5() {
  const std::vector<WeightVector> ws = {
      {1, 1, 1, 1}, {1.5, 0.7, 1.2, 0.9}, {2, 1, 1, 1}, {0.4, 1.3, 0.8, 2.2}, {4, 1, 1, 1}, {1, 1, 2, 0.5}};
  double d12 = 0;
  for (const auto& w : ws) d12 = std::max(d12, std::abs(log_Z(w) - log_Z_2d(w)));
  const double uni = std::abs(log_Z({1, 1, 1, 1}) - 2 * catalan / pi);
  double fin = 0;
  for (int k = 0; k < 5; ++k) {
    const int n = 64;
    fin = std::max(fin, std::abs(torus_log_partition(n, ws[k]) / (2.0 * n * n) - log_Z(ws[k])));
  }
  return {d12 <= 1e-6 && uni <= 1e-6 && fin <= 1e-2,
          fmt("1D vs 2D %.2e (tol 1e-6); log Z(1,1,1,1) - 2G/pi %.2e (tol 1e-6); n=64 torus %.2e (tol 1e-2)", d12,
              uni, fin)};
}

// 6. Concavity.
Outcome c6() {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> U(-2, 2);
  auto sample = [&] {
    for (;;) {
      Tilt t{U(gen), U(gen)};
      if (std::abs(t.s) + std::abs(t.t) < 1.98) return t;
    }
  };
  double fd = 0;
  const double h = 1e-5;
  for (int k = 0; k < 200; ++k) {
    const Tilt t = sample();
    if (std::abs(t.s) + std::abs(t.t) > 1.9) continue;
    const auto H = hessian(t);
    const auto gsp = ent_gradient({t.s + h, t.t}), gsm = ent_gradient({t.s - h, t.t});
    const auto gtp = ent_gradient({t.s, t.t + h}), gtm = ent_gradient({t.s, t.t - h});
    fd = std::max({fd, std::abs((gsp.first - gsm.first) / (2 * h) - H.ent_ss),
                   std::abs((gtp.second - gtm.second) / (2 * h) - H.ent_tt),
                   std::abs((gtp.first - gtm.first) / (2 * h) - H.ent_st)});
  }
  int definite = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto H = hessian(sample());
    definite += H.ent_ss < 0 && H.det() > 0;
  }
  const auto H0 = hessian({0, 0});
  const double c = std::max(std::abs(H0.ent_ss + pi / 8), std::abs(H0.ent_tt + pi / 8));
  return {fd <= 1e-5 && definite == 1000 && c <= 1e-8,
          fmt("Hessian vs finite differences %.2e (tol 1e-5); negative definite at %d/1000; "
              "|ent_ss(0,0) + pi/8| etc. %.2e (tol 1e-8)",
              fd, definite, c)};
}

// 7. Flat square.
Outcome c7() {
  BoundaryData flat;
  for (int k = 0; k < 64; ++k) {
    const double u = k / 64.0;
    for (Point2 p : {Point2{u, 0}, Point2{1, u}, Point2{1 - u, 1}, Point2{0, 1 - u}}) flat.samples.push_back({p, 0});
  }
  auto F = discretize(unit_square(), flat, 1.0 / 64);
  const auto rep = maximize_entropy(F);
  const double target = 2 * catalan / pi;
  const double rel = std::abs(rep.ent - target) / target;
  double dev = 0;
  for (double v : F.values) dev = std::max(dev, std::abs(v));
  return {rel <= 0.005 && dev <= 1e-4, fmt("Ent %.9f, rel err %.2e (tol 5e-3); max |f| %.2e (tol 1e-4)", rep.ent, rel, dev)};
}

double misclassified_fraction(const DiscreteField& F) {
  const auto tilts = tilt_field(F);
  const auto centres = cell_centres(F);
  int wrong = 0;
  for (std::size_t c = 0; c < tilts.size(); ++c) {
    const bool outside = centres[c].x * centres[c].x + centres[c].y * centres[c].y > 0.5;
    wrong += is_extremal(tilts[c]) != outside;
  }
  return static_cast<double>(wrong) / static_cast<double>(tilts.size());
}

// 8. Aztec diamond limit shape.
Outcome c8() {
  const auto start = std::chrono::steady_clock::now();
  const auto& S = aztec_solution(64);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double target = std::log(2.0) / 2;
  const double rel = std::abs(S.report.ent - target) / target;
  const double miss = misclassified_fraction(S.field);
  return {rel <= 0.02 && miss < 0.05 && secs <= 300,
          fmt("Ent %.6f vs (log 2)/2, rel err %.2e (tol 2e-2); misclassified %.2f%% (tol 5%%); %.1f s (limit 300)",
              S.report.ent, rel, 100 * miss, secs)};
}

// 9. Discrete PDE residual under refinement.
Outcome c9() {
  ResidualOptions opt;
  opt.disk_radius = 0.95 / std::sqrt(2.0);
  const auto r64 = pde_residual(aztec_solution(64).field, opt);
  const auto r128 = pde_residual(aztec_solution(128).field, opt);
  const double ratio = r64.norm / r128.norm;
  return {ratio >= 2, fmt("residual %.3e at 64, %.3e at 128, ratio %.2f (need >= 2)", r64.norm, r128.norm, ratio)};
}

// 10. Exact sampling.
Outcome c10() {
  const Region R = rectangle_region(4, 4);
  const auto all = enumerate_tilings(R);
  const int N = 100000;
  std::map<Tiling, int> hits;
  for (const auto& t : all) hits[t] = 0;
  const auto samples = cftp_samples(R, 10, N, worker_threads());
  bool valid = true;
  for (const auto& s : samples) {
    auto it = hits.find(s.tiling);
    if (it == hits.end()) valid = false;
    else ++it->second;
  }
  double chi2 = 0;
  const double expect = static_cast<double>(N) / static_cast<double>(all.size());
  for (const auto& [t, k] : hits) chi2 += (k - expect) * (k - expect) / expect;
  const boost::math::chi_squared dist(static_cast<double>(all.size() - 1));
  const double p = boost::math::cdf(boost::math::complement(dist, chi2));

  // Monotone coupling on random ordered pairs of Aztec order-4 heights.
  const Region A = aztec_diamond(4);
  std::vector<HeightFunction> hs;
  for (const auto& t : enumerate_tilings(A)) hs.push_back(tiling_to_height(A, t));
  std::mt19937_64 gen(10);
  std::uniform_int_distribution<std::size_t> pick(0, hs.size() - 1);
  std::uniform_int_distribution<int> site(0, static_cast<int>(A.vertices().size()) - 1);
  int broken = 0;
  for (int k = 0; k < 100000; ++k) {
    auto g = meet(hs[pick(gen)], hs[pick(gen)]);
    auto h = join(g, hs[pick(gen)]);
    const int v = site(gen);
    const bool up = gen() & 1;
    glauber_step(A, g, v, up);
    glauber_step(A, h, v, up);
    for (std::size_t i = 0; i < g.values.size(); ++i)
      if (g[i] > h[i]) {
        ++broken;
        break;
      }
  }

  // Same seed, different thread counts.
  const Region B = aztec_diamond(8);
  const auto x = cftp_samples(B, 99, 16, 1), y = cftp_samples(B, 99, 16, worker_threads());
  bool same = x.size() == y.size();
  for (std::size_t i = 0; same && i < x.size(); ++i) same = x[i].height == y[i].height && x[i].sweeps == y[i].sweeps;

  return {valid && p > 1e-3 && broken == 0 && same,
          fmt("4x4: %zu tilings, chi2 %.2f, p = %.4f (need > 0.001); order violations %d/100000; reproducible: %s",
              all.size(), chi2, p, broken, same ? "yes" : "no")};
}

// 11. Sampled Aztec diamond against the limit shape.
Outcome c11() {
  const int n = 48, m = 6;
  const Region R = aztec_diamond(n);
  std::vector<Tiling> tilings;
  std::vector<HeightFunction> heights;
  for (auto& s : cftp_samples(R, 11, 200, worker_threads())) {
    tilings.push_back(std::move(s.tiling));
    heights.push_back(std::move(s.height));
  }
  // Windows hugging the four corners, and one at the centre.
  const std::array<Cell, 4> corners = {Cell{-n, -m / 2}, Cell{n - m, -m / 2}, Cell{-m / 2, -n}, Cell{-m / 2, n - m}};
  double corner_min = 1;
  for (Cell o : corners) {
    const auto wd = window_density(R, tilings, o, m);
    corner_min = std::min(corner_min, *std::max_element(wd.freq.begin(), wd.freq.end()));
  }
  const auto centre = window_density(R, tilings, {-m / 2, -m / 2}, m);
  double centre_dev = 0;
  for (double f : centre.freq) centre_dev = std::max(centre_dev, std::abs(f - 0.25));

  const auto mo = height_moments(R, heights);
  const auto& F = aztec_solution(64).field;
  double sup = 0;
  for (std::size_t v = 0; v < R.vertices().size(); ++v) {
    const Vertex p = R.vertices()[v];
    const double f = field_at(F, {static_cast<double>(p.x) / n, static_cast<double>(p.y) / n});
    sup = std::max(sup, std::abs(mo.mean[v] - n * f));
  }
  return {corner_min > 0.95 && centre_dev <= 0.05 && sup <= 0.05 * n,
          fmt("corner dominant frequency min %.4f (need > 0.95); centre max |f - 1/4| %.4f (tol 0.05); "
              "mean height sup distance %.3f (tol %.2f)",
              corner_min, centre_dev, sup, 0.05 * n)};
}

// 12. Combinatorial invariants over a family of small regions.
struct VecHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (int x : v) h = (h ^ static_cast<std::size_t>(x + 1000)) * 1099511628211ull;
    return h;
  }
};

std::vector<Region> invariant_family() {
  std::vector<Region> out;
  for (int w = 1; w <= 6; ++w)
    for (int h = 1; h <= 6; ++h)
      if (w * h % 2 == 0) out.push_back(rectangle_region(w, h));
  for (int k = 1; k <= 4; ++k) out.push_back(aztec_diamond(k));
  // Random simply connected polyominoes in a 6 x 6 box.
  std::mt19937_64 gen(12);
  std::uniform_int_distribution<int> coord(0, 5), size(6, 30);
  int found = 0;
  for (int attempt = 0; found < 40 && attempt < 100000; ++attempt) {
    std::set<std::pair<int, int>> cells{{coord(gen), coord(gen)}};
    const int target = size(gen);
    while (static_cast<int>(cells.size()) < target) {
      auto it = cells.begin();
      std::advance(it, std::uniform_int_distribution<std::size_t>(0, cells.size() - 1)(gen));
      static constexpr int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
      const int d = static_cast<int>(gen() % 4);
      const int x = it->first + dx[d], y = it->second + dy[d];
      if (x >= 0 && x < 6 && y >= 0 && y < 6) cells.insert({x, y});
    }
    std::vector<Cell> cs;
    for (auto [x, y] : cells) cs.push_back({x, y});
    const Cell low = *std::min_element(cs.begin(), cs.end(), [](Cell a, Cell b) {
      return std::pair{a.y, a.x} < std::pair{b.y, b.x};
    });
    try {
      Region R(cs, {low.x, low.y});
      if (!tileable(R) || count_tilings(R) > 10000) continue;
      out.push_back(std::move(R));
      ++found;
    } catch (const InvalidRegion&) {
    }
  }
  return out;
}

Outcome c12() {
  const auto family = invariant_family();
  long long tilings = 0, pairs = 0, triples = 0;
  int bad_bijection = 0, bad_extremes = 0, bad_laws = 0;
  std::mt19937_64 gen(1212);
  for (const Region& R : family) {
    const auto ts = enumerate_tilings(R, 10000);
    if (BigInt(ts.size()) != count_tilings(R)) ++bad_bijection;
    std::vector<HeightFunction> hs;
    std::unordered_set<std::vector<int>, VecHash> seen;
    for (const auto& t : ts) {
      auto h = tiling_to_height(R, t);
      if (!is_height_function(R, h) || !(height_to_tiling(R, h) == t)) ++bad_bijection;
      seen.insert(h.values);
      hs.push_back(std::move(h));
    }
    if (seen.size() != ts.size()) ++bad_bijection;
    tilings += static_cast<long long>(ts.size());

    HeightFunction lo = hs.front(), hi = hs.front();
    for (const auto& h : hs) lo = meet(lo, h), hi = join(hi, h);
    const auto [fmin, fmax] = min_max_extensions(R);
    if (!(fmin == lo) || !(fmax == hi) || !seen.count(lo.values) || !seen.count(hi.values)) ++bad_extremes;

    for (std::size_t i = 0; i < hs.size(); ++i)
      for (std::size_t j = i; j < hs.size(); ++j) {
        ++pairs;
        const auto mn = meet(hs[i], hs[j]), mx = join(hs[i], hs[j]);
        if (!seen.count(mn.values) || !seen.count(mx.values)) ++bad_laws;
        else if (!(mn == meet(hs[j], hs[i])) || !(mx == join(hs[j], hs[i])) || !(meet(hs[i], mx) == hs[i]) ||
                 !(join(hs[i], mn) == hs[i]))
          ++bad_laws;
      }
    std::uniform_int_distribution<std::size_t> pick(0, hs.size() - 1);
    for (int k = 0; k < 500; ++k) {
      ++triples;
      const auto &x = hs[pick(gen)], &y = hs[pick(gen)], &z = hs[pick(gen)];
      if (!(meet(x, meet(y, z)) == meet(meet(x, y), z)) || !(join(x, join(y, z)) == join(join(x, y), z)) ||
          !(meet(x, join(y, z)) == join(meet(x, y), meet(x, z))) ||
          !(join(x, meet(y, z)) == meet(join(x, y), join(x, z))))
        ++bad_laws;
    }
  }
  return {bad_bijection == 0 && bad_extremes == 0 && bad_laws == 0,
          fmt("%zu regions, %lld tilings: bijection failures %d, extreme mismatches %d, lattice law failures %d "
              "(%lld pairs, %lld triples)",
              family.size(), tilings, bad_bijection, bad_extremes, bad_laws, pairs, triples)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"entropy constants", c1},          {"torus partition function", c2}, {"edge probabilities", c3},
      {"coordinate round trips", c4},     {"free energy", c5},              {"concavity", c6},
      {"flat square limit shape", c7},    {"Aztec limit shape", c8},        {"PDE residual refinement", c9},
      {"exact sampling", c10},            {"sampled Aztec statistics", c11}, {"combinatorial invariants", c12}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
