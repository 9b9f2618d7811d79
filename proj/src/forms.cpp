#include "denum/forms.hpp"

#include <cmath>

namespace denum {

namespace {

Vec vec_from_json(const json& j, int dim, const char* field) {
  if (!j.is_array()) throw SchemaError(std::string("expected array for ") + field);
  Vec v(j.size());
  for (std::size_t l = 0; l < j.size(); ++l) v[l] = j[l].get<double>();
  if (dim >= 0 && v.size() != dim)
    throw SchemaError(std::string("wrong length for ") + field);
  return v;
}

Utility make_term(const json& term, int dim) {
  if (!term.contains("form")) throw SchemaError("utility term missing \"form\"");
  const std::string f = term["form"].get<std::string>();
  if (f == "log1p") {
    Vec c = term.contains("coeffs") ? vec_from_json(term["coeffs"], dim, "coeffs")
                                    : Vec::Ones(dim);
    Utility u;
    u.value = [c](const Vec& x) {
      double s = 0;
      for (int l = 0; l < x.size(); ++l) s += c[l] * std::log1p(x[l]);
      return s;
    };
    u.grad = [c](const Vec& x) {
      Vec g(x.size());
      for (int l = 0; l < x.size(); ++l) g[l] = c[l] / (1.0 + x[l]);
      return g;
    };
    u.form = term;
    return u;
  }
  if (f == "alpha_fair") {
    const double alpha = term.at("alpha").get<double>();
    const double eps = term.value("eps", 1e-3);
    Vec c = vec_from_json(term.at("coeffs"), dim, "coeffs");
    if (alpha < 0 || alpha >= 1) throw SchemaError("alpha_fair needs alpha in [0,1)");
    Utility u;
    u.value = [alpha, eps, c](const Vec& x) {
      const double r = c.dot(x);
      return (std::pow(r + eps, 1.0 - alpha) - std::pow(eps, 1.0 - alpha)) /
             (1.0 - alpha);
    };
    u.grad = [alpha, eps, c](const Vec& x) {
      const double r = c.dot(x);
      return Vec(std::pow(r + eps, -alpha) * c);
    };
    u.form = term;
    return u;
  }
  if (f == "neg_quadratic") {
    const json& qj = term.at("Q");
    Mat Q(qj.size(), qj.size());
    for (std::size_t r = 0; r < qj.size(); ++r)
      for (std::size_t cidx = 0; cidx < qj.size(); ++cidx)
        Q(r, cidx) = qj[r][cidx].get<double>();
    Vec b = vec_from_json(term.at("b"), dim, "b");
    if (dim >= 0 && Q.rows() != dim) throw SchemaError("neg_quadratic Q size mismatch");
    Utility u;
    u.value = [Q, b](const Vec& x) { return -0.5 * x.dot(Q * x) + b.dot(x); };
    u.grad = [Q, b](const Vec& x) { return Vec(-(Q * x) + b); };
    u.form = term;
    return u;
  }
  if (f == "affine") {
    Vec a = vec_from_json(term.at("a"), dim, "a");
    Utility u = utility_affine(a);
    u.form = term;
    return u;
  }
  if (f == "quadratic_diag") {
    // -sum_l q_l x_l^2, a small strictly-concave regularizer
    Vec q = vec_from_json(term.at("q"), dim, "q");
    Utility u;
    u.value = [q](const Vec& x) {
      double s = 0;
      for (int l = 0; l < x.size(); ++l) s -= q[l] * x[l] * x[l];
      return s;
    };
    u.grad = [q](const Vec& x) {
      Vec g(x.size());
      for (int l = 0; l < x.size(); ++l) g[l] = -2.0 * q[l] * x[l];
      return g;
    };
    u.form = term;
    return u;
  }
  if (f == "energy_cost") {
    const double delta = term.at("delta").get<double>();
    const double E = term.at("E").get<double>();
    Vec c = vec_from_json(term.at("coeffs"), dim, "coeffs");
    Utility u;
    u.value = [delta, E, c](const Vec& x) { return -delta / (E - c.dot(x)); };
    u.grad = [delta, E, c](const Vec& x) {
      const double s = E - c.dot(x);
      return Vec(-(delta / (s * s)) * c);
    };
    u.form = term;
    return u;
  }
  throw SchemaError("unknown utility form \"" + f + "\"");
}

}  // namespace

Utility make_utility(const json& form, int dim) {
  json terms;
  if (form.contains("terms"))
    terms = form["terms"];
  else
    terms = json::array({form});
  if (!terms.is_array() || terms.empty()) throw SchemaError("utility: empty term list");

  std::vector<Utility> parts;
  for (const auto& t : terms) parts.push_back(make_term(t, dim));

  if (parts.size() == 1) return parts[0];
  Utility u;
  u.value = [parts](const Vec& x) {
    double s = 0;
    for (const auto& p : parts) s += p.value(x);
    return s;
  };
  u.grad = [parts](const Vec& x) {
    Vec g = parts[0].grad(x);
    for (std::size_t i = 1; i < parts.size(); ++i) g += parts[i].grad(x);
    return g;
  };
  u.form = json{{"terms", terms}};
  return u;
}

Influence make_influence(const json& form, int dim) {
  if (!form.contains("form")) throw SchemaError("influence missing \"form\"");
  const std::string f = form["form"].get<std::string>();
  if (f != "affine") throw SchemaError("unknown influence form \"" + f + "\"");
  if (form.contains("b") && form["b"].get<double>() != 0.0)
    throw SchemaError("affine influence offset must be 0");
  return Influence::affine(vec_from_json(form.at("a"), dim, "a"));
}

Utility utility_log1p(int dim) {
  return make_utility(json{{"form", "log1p"}, {"coeffs", std::vector<double>(dim, 1.0)}}, dim);
}

Utility utility_alpha_fair(double alpha, Vec coeffs, double eps) {
  json c = json::array();
  for (int l = 0; l < coeffs.size(); ++l) c.push_back(coeffs[l]);
  return make_utility(
      json{{"form", "alpha_fair"}, {"alpha", alpha}, {"eps", eps}, {"coeffs", c}},
      static_cast<int>(coeffs.size()));
}

Utility utility_neg_quadratic(Mat Q, Vec b) {
  json qj = json::array();
  for (int r = 0; r < Q.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < Q.cols(); ++c) row.push_back(Q(r, c));
    qj.push_back(row);
  }
  json bj = json::array();
  for (int l = 0; l < b.size(); ++l) bj.push_back(b[l]);
  return make_utility(json{{"form", "neg_quadratic"}, {"Q", qj}, {"b", bj}},
                      static_cast<int>(b.size()));
}

Utility utility_affine(Vec a) {
  Utility u;
  json aj = json::array();
  for (int l = 0; l < a.size(); ++l) aj.push_back(a[l]);
  u.form = json{{"form", "affine"}, {"a", aj}};
  u.value = [a](const Vec& x) { return a.dot(x); };
  u.grad = [a](const Vec&) { return a; };
  return u;
}

}  // namespace denum
