#ifndef DENUM_LOCAL_SET_HPP
#define DENUM_LOCAL_SET_HPP

#include <functional>
#include <vector>

#include "denum/common.hpp"

namespace denum {

struct HalfSpace {
  Vec g;     // row vector
  double d;  // g.dot(x) <= d
};

// Differentiable convex f with f(x) <= 0 on the set; used for KKT residuals.
struct ConstraintFn {
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;
};

// A compact convex local feasible set: box intersected with half-spaces and
// hyperplanes. Projection is built in (Dykstra's alternating projections); a
// custom projection oracle can be supplied for other set shapes.
class LocalSet {
 public:
  Vec lo, hi;
  std::vector<HalfSpace> affine_ineqs;
  std::vector<HalfSpace> affine_eqs;  // g.dot(x) == d
  std::function<Vec(const Vec&)> custom_projection;
  std::vector<ConstraintFn> constraint_fns;

  LocalSet() = default;
  static LocalSet box(Vec lo, Vec hi);

  int dim() const { return static_cast<int>(lo.size()); }

  Vec project(const Vec& x) const;
  bool contains(const Vec& x, double tol = 1e-9) const;
  double max_violation(const Vec& x) const;
  bool bounded() const;

  // Populates constraint_fns from the box bounds and half-spaces when the
  // caller has not supplied them.
  void build_default_constraint_fns();

  // Uniform sample from the box, projected onto the set.
  Vec sample(Rng& rng) const;
};

}  // namespace denum

#endif
