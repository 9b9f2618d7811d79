#include "denum/instance.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "denum/projgrad.hpp"

namespace denum {

ProblemInstance build_instance(std::vector<AgentSpec> agents,
                               std::vector<ConstraintSpec> constraints) {
  ProblemInstance inst;

  std::sort(agents.begin(), agents.end(),
            [](const AgentSpec& a, const AgentSpec& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (i > 0 && agents[i].id == agents[i - 1].id)
      throw DuplicateAgentId("duplicate agent id " + std::to_string(agents[i].id));
    if (agents[i].id != static_cast<int>(i) + 1)
      throw InvalidParams("agent ids must be contiguous 1..I; got " +
                          std::to_string(agents[i].id) + " at position " +
                          std::to_string(i + 1));
  }

  std::set<int> cids;
  for (auto& c : constraints) {
    if (!cids.insert(c.id).second)
      throw InvalidParams("duplicate constraint id " + std::to_string(c.id));
    if (c.relation == Relation::Inequality && c.rhs < 0)
      throw NullInfeasible(c.id, "inequality constraint " + std::to_string(c.id) +
                                     " has c_n < 0; null profile infeasible");
    if (c.relation == Relation::Equality && c.rhs != 0.0)
      throw NullInfeasible(c.id, "equality constraint " + std::to_string(c.id) +
                                     " has c_n != 0; null profile infeasible");
    c.participants.clear();
  }

  for (auto& a : agents) {
    if (a.dim <= 0) throw InvalidParams("agent dim must be positive");
    if (!a.local_set.bounded())
      throw UnboundedLocalSet("agent " + std::to_string(a.id) +
                              " local set has unbounded box coordinates");
    if (a.local_set.dim() != a.dim)
      throw DimensionMismatch("agent " + std::to_string(a.id) +
                              " local set dimension != dim");
    if (a.local_set.constraint_fns.empty())
      a.local_set.build_default_constraint_fns();
    Vec zero = Vec::Zero(a.dim);
    if (!a.local_set.contains(zero, 1e-9))
      throw InvalidParams("agent " + std::to_string(a.id) +
                          " local set does not contain the origin");
    for (const auto& [n, h] : a.influences) {
      if (!cids.count(n))
        throw UnknownConstraintRef("agent " + std::to_string(a.id) +
                                   " references undeclared constraint " +
                                   std::to_string(n));
      if (std::abs(h.eval(zero)) > 1e-12)
        throw NonZeroInfluenceAtOrigin(
            "agent " + std::to_string(a.id) + ", constraint " +
            std::to_string(n) + ": h(0) != 0");
    }
  }

  for (auto& c : constraints)
    for (const auto& a : agents)
      if (a.influences.count(c.id)) c.participants.push_back(a.id);
  for (const auto& c : constraints)
    if (c.participants.empty())
      throw InvalidParams("constraint " + std::to_string(c.id) +
                          " has no participants");

  inst.agents = std::move(agents);
  inst.constraints = std::move(constraints);
  for (std::size_t k = 0; k < inst.constraints.size(); ++k)
    inst.constraint_index[inst.constraints[k].id] = static_cast<int>(k);
  return inst;
}

double network_utility(const ProblemInstance& inst, const ActionProfile& x) {
  if (x.size() != inst.agents.size())
    throw DimensionMismatch("profile has wrong number of agents");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != inst.agents[i].dim)
      throw DimensionMismatch("agent " + std::to_string(i + 1) +
                              " action has wrong dimension");
    s += inst.agents[i].utility.value(x[i]);
  }
  return s;
}

FeasibilityReport feasibility_report(const ProblemInstance& inst,
                                     const ActionProfile& x, double tol) {
  if (x.size() != inst.agents.size())
    throw DimensionMismatch("profile has wrong number of agents");
  FeasibilityReport rep;
  rep.max_violation = 0.0;
  for (const auto& c : inst.constraints) {
    double s = -c.rhs;
    for (int i : c.participants) {
      if (x[i - 1].size() != inst.agents[i - 1].dim)
        throw DimensionMismatch("agent " + std::to_string(i) +
                                " action has wrong dimension");
      s += inst.agents[i - 1].influences.at(c.id).eval(x[i - 1]);
    }
    rep.slack[c.id] = s;
    double viol = c.relation == Relation::Inequality ? std::max(0.0, s)
                                                     : std::abs(s);
    rep.max_violation = std::max(rep.max_violation, viol);
  }
  for (const auto& a : inst.agents) {
    double v = a.local_set.max_violation(x[a.id - 1]);
    rep.local_violation.push_back(v);
    rep.max_violation = std::max(rep.max_violation, v);
  }
  rep.feasible = rep.max_violation <= tol;
  return rep;
}

double opt_out_payoff(const ProblemInstance& inst, int i,
                      const SolveConfig& cfg) {
  const AgentSpec& a = inst.agent(i);
  bool all_affine = true;
  for (const auto& [n, h] : a.influences)
    if (h.kind != Influence::Kind::Affine) all_affine = false;

  if (all_affine) {
    LocalSet X = a.local_set;  // copy; add h <=/= 0 as half-spaces
    for (const auto& [n, h] : a.influences) {
      if (inst.constraint(n).relation == Relation::Equality)
        X.affine_eqs.push_back({h.coeffs, 0.0});
      else
        X.affine_ineqs.push_back({h.coeffs, 0.0});
    }
    X.constraint_fns.clear();
    X.build_default_constraint_fns();
    PgResult r = pg_maximize_or_throw(X, a.utility.value, a.utility.grad, cfg);
    return r.value;
  }

  // exterior quadratic penalty with increasing weights
  Vec x0 = Vec::Zero(a.dim);
  PgResult r;
  for (double w : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    auto f = [&](const Vec& x) {
      double v = a.utility.value(x);
      for (const auto& [n, h] : a.influences) {
        double hv = h.eval(x);
        double viol = inst.constraint(n).relation == Relation::Inequality
                          ? std::max(0.0, hv)
                          : hv;
        v -= w * viol * viol;
      }
      return v;
    };
    auto g = [&](const Vec& x) {
      Vec gr = a.utility.grad(x);
      for (const auto& [n, h] : a.influences) {
        double hv = h.eval(x);
        double viol = inst.constraint(n).relation == Relation::Inequality
                          ? std::max(0.0, hv)
                          : hv;
        if (viol != 0.0) gr -= (2.0 * w * viol) * h.grad(x);
      }
      return gr;
    };
    r = pg_maximize_or_throw(a.local_set, f, g, cfg, &x0);
    x0 = r.x;
  }
  return a.utility.value(r.x);
}

ProblemInstance exclude_agent(const ProblemInstance& inst, int i) {
  std::vector<AgentSpec> agents;
  for (const auto& a : inst.agents) {
    if (a.id == i) continue;
    AgentSpec b = a;
    b.id = a.id < i ? a.id : a.id - 1;
    agents.push_back(std::move(b));
  }
  std::vector<ConstraintSpec> constraints;
  for (const auto& c : inst.constraints) {
    bool touched = false;
    for (const auto& a : agents)
      if (a.influences.count(c.id)) touched = true;
    if (touched) constraints.push_back(c);
  }
  return build_instance(std::move(agents), std::move(constraints));
}

}  // namespace denum
