#include "denum/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include "denum/projgrad.hpp"

namespace denum {

namespace {

double access_energy(AccessType t) {
  switch (t) {
    case AccessType::ThreeG: return 100.0;
    case AccessType::LTE: return 4.65;
    case AccessType::WiFi: return 2.85;
    case AccessType::None: return 0.0;
  }
  return 0.0;
}

std::vector<int> others(int i, int I) {
  std::vector<int> out;
  for (int j = 1; j <= I; ++j)
    if (j != i) out.push_back(j);
  return out;
}

int neighbor_pos(int i, int j, int I) {
  // position of j in others(i)
  return j < i ? j - 1 : j - 2;
}

}  // namespace

int UpnInstance::r_index(int i, int j, int n) const {
  const int I = params.num_users;
  return I + neighbor_pos(i, j, I) * I + (n - 1);
}

int UpnInstance::s_index(int i, int j, int n) const {
  const int I = params.num_users;
  return I + (I - 1) * I + neighbor_pos(i, j, I) * I + (n - 1);
}

UpnInstance gen_upn(const UpnParams& params) {
  const int I = params.num_users;
  if (I < 1 || static_cast<int>(params.access.size()) < I ||
      static_cast<int>(params.downlink_mbps.size()) < I)
    throw InvalidParams("gen_upn: need access type and downlink per user");

  UpnInstance upn;
  upn.params = params;
  // Traffic variables are sustained rates in Mbps; energy coefficients are
  // quoted in J/MB, so each Mbps costs (period/8) MB worth of Joules.
  const double j_per_mbps = params.period_s / 8.0;

  Rng rng(params.seed);
  for (int i = 0; i < I; ++i) {
    double px = rng.uniform(0.0, params.area_side);
    double py = rng.uniform(0.0, params.area_side);
    upn.pos.emplace_back(px, py);
  }
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < i; ++j) {
      double dx = upn.pos[i].first - upn.pos[j].first;
      double dy = upn.pos[i].second - upn.pos[j].second;
      if (dx * dx + dy * dy < 1e-12)
        throw DegeneratePlacement("duplicate user coordinates; reseed");
    }
  for (int i = 0; i < I; ++i)
    upn.alpha.push_back(rng.uniform(params.alpha_lo, params.alpha_hi));

  auto dist = [&](int i, int j) {
    double dx = upn.pos[i - 1].first - upn.pos[j - 1].first;
    double dy = upn.pos[i - 1].second - upn.pos[j - 1].second;
    return std::sqrt(dx * dx + dy * dy);
  };
  // WiFi-Direct link capacity, full mesh; (receiver, sender) in Mbps
  for (int i = 1; i <= I; ++i)
    for (int j = 1; j <= I; ++j) {
      if (i == j) continue;
      double d = dist(i, j);
      upn.link_cap_mbps[{i, j}] = 100.0 * std::log(1.0 + 0.9 / (d * d));
    }

  const int dim = I + 2 * (I - 1) * I;
  upn.dim_per_agent = dim;

  // ----- constraints: interference (one per directed link), consistency
  // (one per link per destination)
  std::vector<ConstraintSpec> constraints;
  std::map<std::pair<int, int>, int> interference_id;  // link (i<-j) -> id
  std::map<std::pair<std::pair<int, int>, int>, int> consistency_id;
  int next_id = 1;
  for (int i = 1; i <= I; ++i)
    for (int j = 1; j <= I; ++j) {
      if (i == j) continue;
      ConstraintSpec c;
      c.id = next_id++;
      c.relation = Relation::Inequality;
      c.rhs = 1.0;
      interference_id[{i, j}] = c.id;
      upn.constraint_tag[c.id] = "interference";
      constraints.push_back(c);
    }
  for (int i = 1; i <= I; ++i)
    for (int j = 1; j <= I; ++j) {
      if (i == j) continue;
      for (int n = 1; n <= I; ++n) {
        ConstraintSpec c;
        c.id = next_id++;
        c.relation = Relation::Equality;
        c.rhs = 0.0;
        consistency_id[{{i, j}, n}] = c.id;
        upn.constraint_tag[c.id] = "consistency";
        constraints.push_back(c);
      }
    }

  // ----- agents
  std::vector<AgentSpec> agents;
  for (int i = 1; i <= I; ++i) {
    AgentSpec a;
    a.id = i;
    a.dim = dim;
    const double cap0 = params.downlink_mbps[i - 1];
    const double e0 = access_energy(params.access[i - 1]);

    Vec lo = Vec::Zero(dim), hi = Vec::Zero(dim);
    for (int n = 1; n <= I; ++n) hi[upn.y_index(n)] = cap0;
    for (int j : others(i, I))
      for (int n = 1; n <= I; ++n) {
        hi[upn.r_index(i, j, n)] = upn.link_cap_mbps.at({i, j});
        hi[upn.s_index(i, j, n)] = upn.link_cap_mbps.at({j, i});
      }
    a.local_set = LocalSet::box(lo, hi);

    // (A3) downlink capacity: sum_n y_i(n) <= cap0
    {
      Vec g = Vec::Zero(dim);
      for (int n = 1; n <= I; ++n) g[upn.y_index(n)] = 1.0;
      a.local_set.affine_ineqs.push_back({g, cap0});
    }
    // (A6) flow balance at i for destinations n != i (equality: two rows)
    for (int n = 1; n <= I; ++n) {
      if (n == i) continue;
      Vec g = Vec::Zero(dim);
      g[upn.y_index(n)] = 1.0;
      for (int j : others(i, I)) {
        g[upn.r_index(i, j, n)] = 1.0;
        g[upn.s_index(i, j, n)] = -1.0;
      }
      a.local_set.affine_eqs.push_back({g, 0.0});
    }
    // energy budget with pole guard
    Vec e = Vec::Zero(dim);
    for (int n = 1; n <= I; ++n) e[upn.y_index(n)] = e0 * j_per_mbps;
    for (int j : others(i, I))
      for (int n = 1; n <= I; ++n) {
        e[upn.r_index(i, j, n)] = params.recv_energy * j_per_mbps;
        e[upn.s_index(i, j, n)] = (2.77 + 0.008 * dist(j, i)) * j_per_mbps;
      }
    a.local_set.affine_ineqs.push_back({e, 0.99 * params.energy_budget});
    a.local_set.build_default_constraint_fns();

    // utility: alpha-fair in received data, minus energy cost, minus a small
    // quadratic regularizer that makes the payoff strictly concave
    Vec r_coeffs = Vec::Zero(dim);
    r_coeffs[upn.y_index(i)] = 1.0;
    for (int j : others(i, I)) r_coeffs[upn.r_index(i, j, i)] = 1.0;
    json terms = json::array();
    {
      json cj = json::array();
      for (int l = 0; l < dim; ++l) cj.push_back(r_coeffs[l]);
      terms.push_back({{"form", "alpha_fair"},
                       {"alpha", upn.alpha[i - 1]},
                       {"eps", 1e-3},
                       {"coeffs", cj}});
      json ej = json::array();
      for (int l = 0; l < dim; ++l) ej.push_back(e[l]);
      terms.push_back({{"form", "energy_cost"},
                       {"delta", params.delta},
                       {"E", params.energy_budget},
                       {"coeffs", ej}});
      json qj = json::array();
      for (int l = 0; l < dim; ++l) qj.push_back(params.quad_reg);
      terms.push_back({{"form", "quadratic_diag"}, {"q", qj}});
    }
    a.utility = make_utility(json{{"terms", terms}}, dim);
    agents.push_back(std::move(a));
  }

  // ----- influences
  // interference on link (i<-j): airtime of the link plus all links sharing
  // an endpoint (single-radio rule); participants are the senders
  for (int i = 1; i <= I; ++i)
    for (int j = 1; j <= I; ++j) {
      if (i == j) continue;
      const int cid = interference_id.at({i, j});
      std::map<int, Vec> coeff;  // sender -> coefficient vector
      auto add_link = [&](int rcv, int snd) {
        Vec& v = coeff.try_emplace(snd, Vec::Zero(dim)).first->second;
        const double cap = upn.link_cap_mbps.at({rcv, snd});
        for (int n = 1; n <= I; ++n)
          v[upn.s_index(snd, rcv, n)] += 1.0 / cap;
      };
      add_link(i, j);
      for (int k = 1; k <= I; ++k)
        for (int m = 1; m <= I; ++m) {
          if (k == m || (k == i && m == j)) continue;
          if (k == i || k == j || m == i || m == j) add_link(k, m);
        }
      for (auto& [snd, v] : coeff) {
        AgentSpec& a = agents[snd - 1];
        a.influences[cid] = Influence::affine(v);
        double bound = 0.0;  // box relaxation; cheap and valid
        for (int l = 0; l < dim; ++l)
          bound += std::max(0.0, v[l]) * a.local_set.hi[l];
        a.influence_bound[cid] = bound;
      }
    }
  // consistency on link (i<-j), destination n: x^s (sender j) = x^r (recv i)
  for (int i = 1; i <= I; ++i)
    for (int j = 1; j <= I; ++j) {
      if (i == j) continue;
      for (int n = 1; n <= I; ++n) {
        const int cid = consistency_id.at({{i, j}, n});
        Vec vs = Vec::Zero(dim), vr = Vec::Zero(dim);
        vs[upn.s_index(j, i, n)] = 1.0;
        vr[upn.r_index(i, j, n)] = -1.0;
        agents[j - 1].influences[cid] = Influence::affine(vs);
        agents[j - 1].influence_bound[cid] =
            agents[j - 1].local_set.hi[upn.s_index(j, i, n)];
        agents[i - 1].influences[cid] = Influence::affine(vr);
        agents[i - 1].influence_bound[cid] = 0.0;
      }
    }

  upn.inst = build_instance(std::move(agents), std::move(constraints));
  return upn;
}

std::vector<double> upn_benchmark(const UpnInstance& upn,
                                  const SolveConfig& cfg) {
  const int I = upn.params.num_users;
  std::vector<double> payoff;
  for (int i = 1; i <= I; ++i) {
    const AgentSpec& a = upn.inst.agent(i);
    const int yi = upn.y_index(i);
    // scalar problem over the own-download coordinate only
    LocalSet X = LocalSet::box(Vec::Zero(1),
                               Vec::Constant(1, a.local_set.hi[yi]));
    const double e0 =
        access_energy(upn.params.access[i - 1]) * upn.params.period_s / 8.0;
    if (e0 > 0.0) {
      Vec g = Vec::Constant(1, e0);
      X.affine_ineqs.push_back({g, 0.99 * upn.params.energy_budget});
    }
    auto embed = [&, yi](double y) {
      Vec x = Vec::Zero(a.dim);
      x[yi] = y;
      return x;
    };
    auto f = [&](const Vec& v) { return a.utility.value(embed(v[0])); };
    auto gr = [&](const Vec& v) {
      return Vec(Vec::Constant(1, a.utility.grad(embed(v[0]))[yi]));
    };
    payoff.push_back(pg_maximize_or_throw(X, f, gr, cfg).value);
  }
  return payoff;
}

MisreportResult misreport_equilibrium(const MisreportScenario& s) {
  if (s.A <= 0 || s.A > 1 || s.A_tilde <= 0 || s.A_tilde > 1 || s.c <= 0 ||
      s.c_tilde <= 0)
    throw InvalidParams("misreport scenario parameters out of range");

  // x* maximizes U(x) - C(x/A~) on [0, c~]; marginal condition
  // U'(x) = C'(x/A~)/A~
  auto g = [&](double x) {
    return s.Uprime(x) - s.Cprime(x / s.A_tilde) / s.A_tilde;
  };
  MisreportResult out;
  double lo = 0.0, hi = s.c_tilde;
  if (g(hi) >= 0.0) {
    out.x_star = hi;  // capacity binds
  } else if (g(lo) <= 0.0) {
    out.x_star = lo;
  } else {
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (g(mid) > 0.0 ? lo : hi) = mid;
    }
    out.x_star = 0.5 * (lo + hi);
  }
  out.p_star = s.Uprime(out.x_star);
  // the provider actually serves x*/A to deliver x* (true ratio A)
  out.provider_profit = out.x_star * out.p_star - s.C(out.x_star / s.A);
  out.network_utility = s.U(out.x_star) - s.C(out.x_star / s.A);
  return out;
}

ProblemInstance fog_fixture() {
  // provider (CPUs x_C <= 9, RAM x_R <= 18) and a fog user with jobs a, b
  AgentSpec provider;
  provider.id = 1;
  provider.dim = 2;
  provider.local_set =
      LocalSet::box(Vec::Zero(2), (Vec(2) << 9.0, 18.0).finished());
  provider.utility = utility_affine((Vec(2) << -0.1, -0.1).finished());
  provider.influences[1] = Influence::affine((Vec(2) << -1.0, 0.0).finished());
  provider.influences[2] = Influence::affine((Vec(2) << 0.0, -1.0).finished());

  AgentSpec user;
  user.id = 2;
  user.dim = 2;
  user.local_set =
      LocalSet::box(Vec::Zero(2), (Vec(2) << 3.0, 2.0).finished());
  user.utility = utility_log1p(2);
  user.influences[1] = Influence::affine((Vec(2) << 1.0, 3.0).finished());
  user.influences[2] = Influence::affine((Vec(2) << 4.0, 2.0).finished());

  ConstraintSpec c1;  // x_a + 3 x_b - x_C = 0
  c1.id = 1;
  c1.relation = Relation::Equality;
  c1.rhs = 0.0;
  ConstraintSpec c2;  // 4 x_a + 2 x_b - x_R = 0
  c2.id = 2;
  c2.relation = Relation::Equality;
  c2.rhs = 0.0;

  return build_instance({provider, user}, {c1, c2});
}

}  // namespace denum
