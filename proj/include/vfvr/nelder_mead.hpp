#pragma once

// Derivative-free simplex minimizer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "vfvr/errors.hpp"

namespace vfvr {

struct NelderMeadOptions {
  int max_evals = 2000;
  int stall_iterations = 50;   // window for the stall test
  double stall_rel = 1e-4;     // minimum relative improvement over the window
  double initial_step = 0.5;   // simplex edge along each coordinate
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  int iterations = 0;
  bool stalled = false;  // stopped by the stall test rather than the budget
};

/// Minimizes `f(const std::vector<double>&)`. Throws NumericError when f is not finite.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    ++res.evals;
    if (!std::isfinite(v)) throw NumericError("objective is not finite");
    return v;
  };
  if (n == 0) {
    res.x = x0;
    res.f = eval(x0);
    return res;
  }

  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += opt.initial_step;
  for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

  std::vector<double> history;  // best value per iteration
  std::vector<std::size_t> idx(n + 1);
  auto point = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = c[k] + t * (w[k] - c[k]);
    return p;
  };

  while (res.evals < opt.max_evals) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const std::size_t best = idx[0], worst = idx[n], second = idx[n - 1];

    history.push_back(vals[best]);
    const auto h = history.size();
    if (h > static_cast<std::size_t>(opt.stall_iterations)) {
      const double old = history[h - 1 - static_cast<std::size_t>(opt.stall_iterations)];
      if (old - vals[best] < opt.stall_rel * std::max(std::abs(old), 1e-300)) {
        res.stalled = true;
        break;
      }
    }
    ++res.iterations;

    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) c[k] += pts[i][k] / static_cast<double>(n);

    const auto xr = point(c, pts[worst], -1.0);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      const auto xe = point(c, pts[worst], -2.0);
      const double fe = eval(xe);
      if (fe < fr) pts[worst] = xe, vals[worst] = fe;
      else pts[worst] = xr, vals[worst] = fr;
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr, vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const auto xc = point(c, outside ? xr : pts[worst], 0.5);
    const double fc = eval(xc);
    if (fc < std::min(fr, vals[worst])) {
      pts[worst] = xc, vals[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      pts[i] = point(pts[best], pts[i], 0.5);
      vals[i] = eval(pts[i]);
    }
  }

  const auto b = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  res.x = pts[b];
  res.f = vals[b];
  return res;
}

}  // namespace vfvr
