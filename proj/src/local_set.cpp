#include "denum/local_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace denum {

LocalSet LocalSet::box(Vec lo, Vec hi) {
  LocalSet s;
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  return s;
}

namespace {

Vec clamp_box(const Vec& x, const Vec& lo, const Vec& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

Vec project_halfspace(const Vec& x, const HalfSpace& h) {
  const double v = h.g.dot(x) - h.d;
  if (v <= 0.0) return x;
  return x - (v / h.g.squaredNorm()) * h.g;
}

Vec project_hyperplane(const Vec& x, const HalfSpace& h) {
  const double v = h.g.dot(x) - h.d;
  return x - (v / h.g.squaredNorm()) * h.g;
}

// Exact projection onto box /\ {C_E z = r_E} /\ {C_I z <= r_I} via projected
// semismooth Newton on the dual. The minimizer has the form
// z = clip(x - C^T w, lo, hi) with w free on equality rows and w >= 0 on
// half-space rows; the dual objective theta(w) = 1/2|z-x|^2 + w.(Cz - r) is
// concave and C^1 with piecewise-linear gradient F(w) = C z(w) - r, so a
// Newton step on the free rows plus Armijo backtracking converges globally
// (the dual is bounded above whenever the set is nonempty). Returns false if
// the iteration stalls, in which case the caller falls back to Dykstra.
bool newton_dual_projection(const Vec& x, const Vec& lo, const Vec& hi,
                            const Mat& C, const Vec& r, int ne, Vec& w,
                            Vec& z) {
  const int m = static_cast<int>(C.rows());
  const auto clamp_ineq = [&](Vec& v) {
    for (int k = ne; k < m; ++k) v[k] = std::max(0.0, v[k]);
  };
  const auto theta = [&](const Vec& v, Vec& zz, Vec& FF) {
    zz = (x - C.transpose() * v).cwiseMax(lo).cwiseMin(hi);
    FF = C * zz - r;
    return 0.5 * (zz - x).squaredNorm() + v.dot(FF);
  };
  {
    Mat G = C * C.transpose();
    G.diagonal().array() += 1e-12 * (1.0 + G.diagonal().maxCoeff());
    w = G.ldlt().solve(C * x - r);
    clamp_ineq(w);
  }
  Vec F(m), zt(x.size()), Ft(m), wt(m);
  double th = theta(w, z, F);
  for (int it = 0; it < 100; ++it) {
    double res = 0.0;
    for (int k = 0; k < m; ++k) {
      const double rk = (k < ne || w[k] > 0.0) ? F[k] : std::max(F[k], 0.0);
      res = std::max(res, std::abs(rk));
    }
    if (res < 1e-11 * (1.0 + z.lpNorm<Eigen::Infinity>())) return true;
    std::vector<int> free_rows;
    for (int k = 0; k < m; ++k)
      if (k < ne || w[k] > 0.0 || F[k] > 0.0) free_rows.push_back(k);
    const int mf = static_cast<int>(free_rows.size());
    Vec d = Vec::Zero(m);
    if (mf > 0) {
      Mat J(mf, mf);
      const Vec p = x - C.transpose() * w;
      for (int a = 0; a < mf; ++a)
        for (int b = a; b < mf; ++b) {
          double sum = 0.0;
          for (int l = 0; l < p.size(); ++l)
            if (p[l] > lo[l] && p[l] < hi[l])
              sum += C(free_rows[a], l) * C(free_rows[b], l);
          J(a, b) = sum;
          J(b, a) = sum;
        }
      J.diagonal().array() += 1e-14 * (1.0 + J.diagonal().maxCoeff());
      Vec Ff(mf);
      for (int a = 0; a < mf; ++a) Ff[a] = F[free_rows[a]];
      Vec df = J.ldlt().solve(Ff);
      if (!df.allFinite()) return false;
      for (int a = 0; a < mf; ++a) d[free_rows[a]] = df[a];
    }
    // pin half-space rows sitting at zero that the step would push negative;
    // the projected path must leave them at zero anyway
    for (int k = ne; k < m; ++k)
      if (w[k] <= 0.0 && d[k] < 0.0) d[k] = 0.0;
    // fall back to the projected gradient of theta when the Newton step is
    // not an ascent direction
    if (F.dot(d) <= 0.0) {
      d = F;
      for (int k = ne; k < m; ++k)
        if (w[k] <= 0.0 && F[k] < 0.0) d[k] = 0.0;
    }
    // keep w + alpha*d >= 0 on half-space rows so the path stays linear
    double amax = std::numeric_limits<double>::infinity();
    for (int k = ne; k < m; ++k)
      if (d[k] < 0.0) amax = std::min(amax, w[k] / -d[k]);
    const auto dtheta = [&](double a) {
      wt = w + a * d;
      clamp_ineq(wt);
      zt = (x - C.transpose() * wt).cwiseMax(lo).cwiseMin(hi);
      return d.dot(C * zt - r);
    };
    // theta is concave piecewise quadratic along d: expand until the slope
    // turns nonpositive, then bisect the breakpoint
    double alo = 0.0, ahi = std::min(1.0, amax);
    if (dtheta(ahi) > 0.0) {
      while (ahi < amax && ahi < 1e12) {
        const double anext = std::min(amax, ahi * 2.0);
        alo = ahi;
        ahi = anext;
        if (anext <= alo || dtheta(anext) <= 0.0) break;
      }
    }
    for (int bt = 0; bt < 80 && ahi - alo > 1e-14 * (1.0 + ahi); ++bt) {
      const double amid = 0.5 * (alo + ahi);
      if (dtheta(amid) > 0.0) alo = amid; else ahi = amid;
    }
    double astar = ahi;
    wt = w + astar * d;
    clamp_ineq(wt);
    double tht = theta(wt, zt, Ft);
    if (tht < th) {  // concavity says this cannot happen; guard anyway
      astar = alo;
      wt = w + astar * d;
      clamp_ineq(wt);
      tht = theta(wt, zt, Ft);
      if (tht < th) return res < 1e-9 * (1.0 + z.lpNorm<Eigen::Infinity>());
    }
    const bool stalled = tht <= th + 1e-16 * (1.0 + std::abs(th));
    w = wt; z = zt; F = Ft; th = tht;
    if (stalled) {
      double res2 = 0.0;
      for (int k = 0; k < m; ++k) {
        const double rk = (k < ne || w[k] > 0.0) ? F[k] : std::max(F[k], 0.0);
        res2 = std::max(res2, std::abs(rk));
      }
      return res2 < 1e-9 * (1.0 + z.lpNorm<Eigen::Infinity>());
    }
  }
  {
    double res = 0.0;
    for (int k = 0; k < m; ++k) {
      const double rk = (k < ne || w[k] > 0.0) ? F[k] : std::max(F[k], 0.0);
      res = std::max(res, std::abs(rk));
    }
    return res < 1e-9 * (1.0 + z.lpNorm<Eigen::Infinity>());
  }
}

}  // namespace

Vec LocalSet::project(const Vec& x) const {
  if (custom_projection) return custom_projection(x);
  if (x.size() != lo.size()) throw DimensionMismatch("LocalSet::project: bad dimension");
  if (affine_ineqs.empty() && affine_eqs.empty()) return clamp_box(x, lo, hi);

  const int n = dim();
  const int ne = static_cast<int>(affine_eqs.size());
  const int ni = static_cast<int>(affine_ineqs.size());

  // Fast path: projected semismooth Newton on the dual of the projection
  // problem (one multiplier per hyperplane/half-space). This is the
  // innermost hot loop of every solver; the Dykstra fallback below only
  // runs if the Newton iteration fails to certify optimality.
  {
    Mat C(ne + ni, n);
    Vec r(ne + ni);
    // normalized rows keep the dual Gram matrix well scaled; this only
    // rescales the multipliers, not the projected point or their signs
    for (int j = 0; j < ne; ++j) {
      const double nrm = affine_eqs[j].g.norm();
      C.row(j) = affine_eqs[j].g.transpose() / nrm;
      r[j] = affine_eqs[j].d / nrm;
    }
    for (int k = 0; k < ni; ++k) {
      const double nrm = affine_ineqs[k].g.norm();
      C.row(ne + k) = affine_ineqs[k].g.transpose() / nrm;
      r[ne + k] = affine_ineqs[k].d / nrm;
    }
    Vec w, z;
    if (newton_dual_projection(x, lo, hi, C, r, ne, w, z)) return z;
    if (const char* dump = std::getenv("DENUM_PROJ_DUMP")) {
      if (FILE* f = std::fopen(dump, "a")) {
        std::fprintf(f, "%d %d %d", n, ne, ni);
        for (int j = 0; j < n; ++j) std::fprintf(f, " %.17g", x[j]);
        for (int j = 0; j < n; ++j) std::fprintf(f, " %.17g", lo[j]);
        for (int j = 0; j < n; ++j) std::fprintf(f, " %.17g", hi[j]);
        for (int j = 0; j < ne + ni; ++j) {
          for (int c = 0; c < n; ++c) std::fprintf(f, " %.17g", C(j, c));
          std::fprintf(f, " %.17g", r[j]);
        }
        std::fprintf(f, "\n");
        std::fclose(f);
      }
    }
  }

  // Dykstra's algorithm over the box, each hyperplane, and each half-space;
  // written to avoid heap allocation inside the cycle.
  const int m = 1 + ne + ni;
  Mat incr = Mat::Zero(n, m);
  Vec z = x, y(n), z_prev(n);
  const double scale = 1.0 + clamp_box(x, lo, hi).lpNorm<Eigen::Infinity>();
  for (int cycle = 0; cycle < 5000; ++cycle) {
    z_prev = z;
    // box
    y = z + incr.col(0);
    z = y.cwiseMax(lo).cwiseMin(hi);
    incr.col(0) = y - z;
    // hyperplanes, then half-spaces
    for (int s = 1; s < m; ++s) {
      const HalfSpace& h = s <= ne ? affine_eqs[s - 1] : affine_ineqs[s - 1 - ne];
      y = z + incr.col(s);
      double v = (h.g.dot(y) - h.d) / h.g.squaredNorm();
      if (s > ne && v < 0.0) v = 0.0;
      z = y - v * h.g;
      incr.col(s) = v * h.g;
    }
    if ((z - z_prev).lpNorm<Eigen::Infinity>() < 1e-13 * scale &&
        max_violation(z) < 1e-11 * scale)
      break;
  }
  // Dykstra can run out of cycles when the input is far outside; repair with
  // plain cyclic projections, which restore feasibility geometrically.
  for (int cycle = 0; cycle < 20000 && max_violation(z) > 1e-11 * scale; ++cycle) {
    y = z.cwiseMax(lo).cwiseMin(hi);
    z = y;
    for (const auto& h : affine_eqs) z = project_hyperplane(z, h);
    for (const auto& h : affine_ineqs) z = project_halfspace(z, h);
  }
  return z;
}

bool LocalSet::contains(const Vec& x, double tol) const {
  return max_violation(x) <= tol;
}

double LocalSet::max_violation(const Vec& x) const {
  double v = 0.0;
  for (int l = 0; l < x.size(); ++l) {
    v = std::max(v, lo[l] - x[l]);
    v = std::max(v, x[l] - hi[l]);
  }
  for (const auto& h : affine_ineqs) v = std::max(v, h.g.dot(x) - h.d);
  for (const auto& h : affine_eqs) v = std::max(v, std::abs(h.g.dot(x) - h.d));
  return v;
}

bool LocalSet::bounded() const {
  for (int l = 0; l < lo.size(); ++l) {
    if (!std::isfinite(lo[l]) || !std::isfinite(hi[l])) return false;
  }
  return true;
}

void LocalSet::build_default_constraint_fns() {
  if (!constraint_fns.empty()) return;
  const int n = dim();
  for (int l = 0; l < n; ++l) {
    constraint_fns.push_back(
        {[l, ub = hi[l]](const Vec& x) { return x[l] - ub; },
         [l, n](const Vec&) {
           Vec g = Vec::Zero(n);
           g[l] = 1.0;
           return g;
         }});
    constraint_fns.push_back(
        {[l, lb = lo[l]](const Vec& x) { return lb - x[l]; },
         [l, n](const Vec&) {
           Vec g = Vec::Zero(n);
           g[l] = -1.0;
           return g;
         }});
  }
  for (const auto& h : affine_ineqs) {
    constraint_fns.push_back({[h](const Vec& x) { return h.g.dot(x) - h.d; },
                              [h](const Vec&) { return h.g; }});
  }
  for (const auto& h : affine_eqs) {
    // one-sided pair so multiplier estimates can stay sign-constrained
    constraint_fns.push_back({[h](const Vec& x) { return h.g.dot(x) - h.d; },
                              [h](const Vec&) { return h.g; }});
    constraint_fns.push_back({[h](const Vec& x) { return h.d - h.g.dot(x); },
                              [h](const Vec&) { return Vec(-h.g); }});
  }
}

Vec LocalSet::sample(Rng& rng) const {
  Vec x(dim());
  for (int l = 0; l < dim(); ++l) x[l] = rng.uniform(lo[l], hi[l]);
  return project(x);
}

}  // namespace denum
