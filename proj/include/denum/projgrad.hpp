#ifndef DENUM_PROJGRAD_HPP
#define DENUM_PROJGRAD_HPP

#include <functional>

#include "denum/common.hpp"
#include "denum/local_set.hpp"

namespace denum {

struct PgResult {
  Vec x;
  double value = 0.0;
  int iters = 0;
  bool converged = false;
  double pg_norm = 0.0;  // ||x - P(x + grad)||_inf at the final iterate
};

// Maximizes a concave differentiable f over a compact convex LocalSet by
// projected gradient ascent with Armijo backtracking. `warm` seeds the
// iteration (projected first); defaults to the projected zero vector.
PgResult pg_maximize(const LocalSet& X,
                     const std::function<double(const Vec&)>& f,
                     const std::function<Vec(const Vec&)>& grad,
                     const SolveConfig& cfg, const Vec* warm = nullptr);

// Same but throws LocalSolveFailed instead of returning converged=false.
PgResult pg_maximize_or_throw(const LocalSet& X,
                              const std::function<double(const Vec&)>& f,
                              const std::function<Vec(const Vec&)>& grad,
                              const SolveConfig& cfg,
                              const Vec* warm = nullptr);

// max a.x over the set (exact for box, PG fallback when half-spaces bind).
double linear_max(const LocalSet& X, const Vec& a);

}  // namespace denum

#endif
