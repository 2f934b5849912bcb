#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"

namespace dimervar::quad {

struct Options {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  int max_panels = 4000;
  double fail_error = 1e-6;  // error estimate above which QuadratureFailure is raised
};

// Globally adaptive Gauss-Kronrod (21 points): the panel with the largest
// error estimate is bisected until the summed estimate meets the tolerance.
// Supplied breakpoints start as panel ends, which keeps integrable
// singularities off the quadrature nodes.
template <class F>
auto integrate(F&& f, double lo, double hi, std::vector<double> breaks, const Options& opt = {})
    -> decltype(f(lo)) {
  using R = decltype(f(lo));
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  struct Panel {
    double a, b, err;
    R val;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  auto eval = [&](double a, double b) {
    double err = 0;
    R v = GK::integrate(f, a, b, 0, 0.0, &err);
    return Panel{a, b, err, v};
  };

  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  std::priority_queue<Panel> heap;
  R total{};
  double total_err = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double a = std::max(lo, breaks[i]), b = std::min(hi, breaks[i + 1]);
    if (!(b - a > 1e-15 * (hi - lo))) continue;
    Panel p = eval(a, b);
    total += p.val;
    total_err += p.err;
    heap.push(p);
  }
  const double min_width = 1e-13 * (hi - lo);
  while (!heap.empty() && total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total)) &&
         static_cast<int>(heap.size()) < opt.max_panels) {
    Panel p = heap.top();
    if (p.b - p.a < min_width) break;
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    Panel l = eval(p.a, m), r = eval(m, p.b);
    total += l.val + r.val - p.val;
    total_err += l.err + r.err - p.err;
    heap.push(l);
    heap.push(r);
  }
  // Recompute the sums from the panels to shed accumulated cancellation.
  total = R{};
  total_err = 0;
  for (auto h = heap; !h.empty(); h.pop()) {
    total += h.top().val;
    total_err += h.top().err;
  }
  if (!(total_err <= opt.fail_error) || !std::isfinite(std::abs(total)))
    throw QuadratureFailure("refinement stalled on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            "] with error estimate " + std::to_string(total_err) + " after " +
                            std::to_string(heap.size()) + " panels");
  return total;
}

}  // namespace dimervar::quad
