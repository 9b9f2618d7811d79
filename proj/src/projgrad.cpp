#include "denum/projgrad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace denum {

// Spectral projected gradient ascent (Barzilai-Borwein steps with a
// nonmonotone line search); plain Armijo projected gradient crawls on the
// ill-conditioned agent subproblems this library produces.
PgResult pg_maximize(const LocalSet& X,
                     const std::function<double(const Vec&)>& f,
                     const std::function<Vec(const Vec&)>& grad,
                     const SolveConfig& cfg, const Vec* warm) {
  constexpr double kGamma = 1e-4;     // sufficient-ascent fraction
  constexpr int kWindow = 10;         // nonmonotone reference window
  constexpr double kLamMin = 1e-12, kLamMax = 1e12;

  Vec x = warm ? X.project(*warm) : X.project(Vec::Zero(X.dim()));
  double fx = f(x);
  Vec g = grad(x);
  double lam = 1.0;
  double hist[kWindow];
  std::fill(hist, hist + kWindow, -std::numeric_limits<double>::infinity());
  hist[0] = fx;
  int hist_pos = 1;

  PgResult out;
  double best_pg = std::numeric_limits<double>::infinity();
  int stall = 0;
  bool retried = false;

  for (int it = 0; it < cfg.max_iters; ++it) {
    // fixed-point residual with unit step: 0 iff x is stationary; judged
    // relative to the iterate's scale so large-valued problems terminate
    const double scale = 1.0 + x.lpNorm<Eigen::Infinity>();
    Vec px = X.project(x + g);
    const double pg = (x - px).lpNorm<Eigen::Infinity>() / scale;
    out.x = x;
    out.value = fx;
    out.iters = it;
    out.pg_norm = pg;
    if (pg <= cfg.tol) {
      out.converged = true;
      return out;
    }
    if (pg < 0.9 * best_pg) {
      best_pg = pg;
      stall = 0;
    } else if (++stall > 100 && pg <= 1e-6) {
      // residual floor: the remaining ascent is below rounding noise in f
      out.converged = true;
      return out;
    }

    Vec xt = lam == 1.0 ? px : X.project(x + lam * g);
    Vec d = xt - x;
    double gd = g.dot(d);
    if (gd <= 0.0) {  // bad spectral step; fall back to the unit arc point
      lam = 1.0;
      xt = px;
      d = xt - x;
      gd = g.dot(d);
      if (gd <= 0.0) {
        out.converged = true;  // no ascent direction left
        return out;
      }
    }

    // nonmonotone Armijo along the feasible segment x + alpha*d; the
    // reference is the smallest recent value so short-term dips are allowed
    // (classic GLL rule, stated for maximization)
    double fref = hist[0];
    for (int j = 1; j < kWindow; ++j)
      if (std::isfinite(hist[j]) && hist[j] < fref) fref = hist[j];

    double alpha = 1.0;
    bool accepted = false;
    Vec xn;
    double fn = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      xn = x + alpha * d;
      fn = f(xn);
      if (fn >= fref + kGamma * alpha * gd) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (retried) {
        out.converged = true;  // stationary to machine precision
        return out;
      }
      retried = true;
      lam = 1.0;
      continue;
    }

    Vec gn = grad(xn);
    Vec s = xn - x;
    const double ss = s.squaredNorm();
    const double sy = -s.dot(gn - g);  // positive under concave curvature
    lam = sy > 1e-30 ? std::clamp(ss / sy, kLamMin, kLamMax) : kLamMax;

    x = std::move(xn);
    fx = fn;
    g = std::move(gn);
    hist[hist_pos % kWindow] = fx;
    ++hist_pos;
  }

  const double scale = 1.0 + x.lpNorm<Eigen::Infinity>();
  out.x = x;
  out.value = fx;
  out.iters = cfg.max_iters;
  out.pg_norm = (x - X.project(x + g)).lpNorm<Eigen::Infinity>() / scale;
  out.converged = out.pg_norm <= cfg.tol;
  return out;
}

PgResult pg_maximize_or_throw(const LocalSet& X,
                              const std::function<double(const Vec&)>& f,
                              const std::function<Vec(const Vec&)>& grad,
                              const SolveConfig& cfg, const Vec* warm) {
  PgResult r = pg_maximize(X, f, grad, cfg, warm);
  if (!r.converged)
    throw LocalSolveFailed("projected gradient did not converge (pg_norm=" +
                           std::to_string(r.pg_norm) + ")");
  return r;
}

double linear_max(const LocalSet& X, const Vec& a) {
  if (X.affine_ineqs.empty() && X.affine_eqs.empty() && !X.custom_projection) {
    double v = 0.0;
    for (int l = 0; l < a.size(); ++l)
      v += a[l] >= 0 ? a[l] * X.hi[l] : a[l] * X.lo[l];
    return v;
  }
  SolveConfig cfg;
  cfg.tol = 1e-10;
  Vec corner(X.dim());
  for (int l = 0; l < a.size(); ++l) corner[l] = a[l] >= 0 ? X.hi[l] : X.lo[l];
  PgResult r = pg_maximize(
      X, [&a](const Vec& x) { return a.dot(x); },
      [&a](const Vec&) { return a; }, cfg, &corner);
  return r.value;
}

}  // namespace denum
