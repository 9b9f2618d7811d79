#ifndef DENUM_FORMS_HPP
#define DENUM_FORMS_HPP

#include <functional>

#include <nlohmann/json.hpp>

#include "denum/common.hpp"

namespace denum {

using json = nlohmann::json;

// Differentiable utility oracle. `form` carries a named parametric
// description when the utility is file-representable; it stays null for
// code-constructed oracles (which then cannot be serialized).
struct Utility {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  json form;
};

struct Influence {
  enum class Kind { Affine, GeneralConvex };
  Kind kind = Kind::Affine;
  Vec coeffs;  // affine: eval(x) = coeffs.dot(x); offset is always 0
  std::function<double(const Vec&)> eval_fn;
  std::function<Vec(const Vec&)> grad_fn;

  double eval(const Vec& x) const {
    return kind == Kind::Affine ? coeffs.dot(x) : eval_fn(x);
  }
  Vec grad(const Vec& x) const {
    return kind == Kind::Affine ? coeffs : grad_fn(x);
  }

  static Influence affine(Vec a) {
    Influence h;
    h.kind = Kind::Affine;
    h.coeffs = std::move(a);
    return h;
  }
  static Influence general(std::function<double(const Vec&)> e,
                           std::function<Vec(const Vec&)> g) {
    Influence h;
    h.kind = Kind::GeneralConvex;
    h.eval_fn = std::move(e);
    h.grad_fn = std::move(g);
    return h;
  }
};

// Named parametric utility forms accepted by the instance file format.
// A utility is a sum of terms; each term is one of:
//   {"form":"log1p", "coeffs":[...]}            sum_l c_l*log(1+x_l)
//   {"form":"alpha_fair","alpha":a,"coeffs":[...],"eps":e}
//       ((c.x+e)^(1-a) - e^(1-a))/(1-a) applied to the linear rate c.x
//   {"form":"neg_quadratic","Q":[[..]],"b":[...]} -0.5 x'Qx + b.x
//   {"form":"affine","a":[...]}                  a.x
//   {"form":"energy_cost","delta":d,"E":E,"coeffs":[...]} -d/(E - c.x)
//   {"form":"quadratic_diag","q":[...]}          -sum_l q_l x_l^2
// The top-level utility descriptor is {"terms":[...]} or a single term.
Utility make_utility(const json& form, int dim);

// Influence named forms: {"form":"affine","a":[...]} only. Arbitrary code is
// never deserialized.
Influence make_influence(const json& form, int dim);

// Convenience constructors used by tests and scenario builders.
Utility utility_log1p(int dim);
Utility utility_alpha_fair(double alpha, Vec coeffs, double eps = 1e-3);
Utility utility_neg_quadratic(Mat Q, Vec b);
Utility utility_affine(Vec a);

}  // namespace denum

#endif
