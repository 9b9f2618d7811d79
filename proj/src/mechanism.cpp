#include "denum/mechanism.hpp"

#include <algorithm>
#include <cmath>

#include "denum/projgrad.hpp"

namespace denum {

double TaxStatement::sum_total() const {
  double s = 0.0;
  for (const auto& [i, v] : total) s += v;
  return s;
}

double TaxStatement::sum_abs_total() const {
  double s = 0.0;
  for (const auto& [i, v] : total) s += std::abs(v);
  return s;
}

int circular_neighbor(int n, int i, const ProblemInstance& inst) {
  const auto& I_n = inst.constraint(n).participants;  // sorted ascending
  auto it = std::find(I_n.begin(), I_n.end(), i);
  if (it == I_n.end())
    throw NotParticipant("agent " + std::to_string(i) +
                         " does not participate in constraint " +
                         std::to_string(n));
  ++it;
  return it == I_n.end() ? I_n.front() : *it;
}

std::vector<double> compute_budgets(const std::vector<double>& tau_n,
                                    double c_n, std::size_t card) {
  if (tau_n.size() != card)
    throw DimensionMismatch("tau vector length != |I_n|");
  double sum = 0.0;
  for (double t : tau_n) sum += t;
  const double corr = (sum - c_n) / static_cast<double>(card);
  std::vector<double> t(card);
  for (std::size_t j = 0; j < card; ++j) t[j] = tau_n[j] - corr;
  return t;
}

TaxParts compute_tax(int i, int n, const std::map<int, Message>& msgs_n,
                     double c_n, const ProblemInstance& inst) {
  const auto& I_n = inst.constraint(n).participants;
  if (!msgs_n.count(i))
    throw NotParticipant("no message from agent " + std::to_string(i) +
                         " on constraint " + std::to_string(n));
  std::vector<double> tau;
  tau.reserve(I_n.size());
  for (int j : I_n) tau.push_back(msgs_n.at(j).budget);
  std::vector<double> t = compute_budgets(tau, c_n, I_n.size());

  const std::size_t pos =
      std::find(I_n.begin(), I_n.end(), i) - I_n.begin();
  const int nb = circular_neighbor(n, i, inst);
  const double p_nb = msgs_n.at(nb).price;
  const double p_i = msgs_n.at(i).price;
  const double share = c_n / static_cast<double>(I_n.size());

  TaxParts parts;
  parts.payment = p_nb * (t[pos] - share);
  parts.penalty = (p_i - p_nb) * (p_i - p_nb);
  parts.total = parts.payment + parts.penalty;
  return parts;
}

TaxStatement total_taxes(const MessageProfile& messages,
                         const ProblemInstance& inst) {
  TaxStatement st;
  for (const auto& a : inst.agents) {
    st.payment_part[a.id] = 0.0;
    st.penalty_part[a.id] = 0.0;
    st.total[a.id] = 0.0;
  }
  for (const auto& [n, msgs_n] : messages.by_constraint) {
    const double c_n = inst.constraint(n).rhs;
    for (const auto& [i, m] : msgs_n) {
      TaxParts parts = compute_tax(i, n, msgs_n, c_n, inst);
      st.tax[n][i] = parts.total;
      st.payment_part[i] += parts.payment;
      st.penalty_part[i] += parts.penalty;
      st.total[i] += parts.total;
    }
  }
  return st;
}

double compute_t_up(const ProblemInstance& inst, int i, int n) {
  const AgentSpec& a = inst.agent(i);
  auto it = a.influences.find(n);
  if (it == a.influences.end())
    throw NotParticipant("agent " + std::to_string(i) +
                         " does not participate in constraint " +
                         std::to_string(n));
  auto bit = a.influence_bound.find(n);
  if (bit != a.influence_bound.end()) return bit->second;
  if (it->second.kind == Influence::Kind::Affine)
    return linear_max(a.local_set, it->second.coeffs);
  if (bit == a.influence_bound.end())
    throw MissingInfluenceBound("agent " + std::to_string(i) +
                                ", constraint " + std::to_string(n) +
                                ": non-affine influence without a bound");
  return bit->second;
}

std::map<int, double> all_t_up(const ProblemInstance& inst, int i) {
  std::map<int, double> out;
  for (const auto& [n, h] : inst.agent(i).influences)
    out[n] = compute_t_up(inst, i, n);
  return out;
}

ApmResult apm_solve(const ProblemInstance& inst, int i,
                    const std::map<int, double>& prices,
                    const std::map<int, double>& t_up, const SolveConfig& cfg,
                    const Vec* warm) {
  const AgentSpec& a = inst.agent(i);
  // Branch per constraint: t = h(x) unless a negative price on an inequality
  // makes t = t_up optimal (the budget becomes a subsidy, taken in full).
  std::map<int, bool> t_is_h;
  double const_part = 0.0;
  for (const auto& [n, h] : a.influences) {
    if (!prices.count(n))
      throw InvalidParams("missing price for constraint " + std::to_string(n));
    const double p = prices.at(n);
    const bool ineq = inst.constraint(n).relation == Relation::Inequality;
    if (ineq && p < 0.0) {
      if (!t_up.count(n))
        throw MissingInfluenceBound("t_up required for constraint " +
                                    std::to_string(n));
      t_is_h[n] = false;
      const_part -= p * t_up.at(n);
    } else {
      t_is_h[n] = true;
    }
  }

  auto f = [&](const Vec& x) {
    double v = a.utility.value(x);
    for (const auto& [n, h] : a.influences)
      if (t_is_h.at(n)) v -= prices.at(n) * h.eval(x);
    return v;
  };
  auto g = [&](const Vec& x) {
    Vec gr = a.utility.grad(x);
    for (const auto& [n, h] : a.influences)
      if (t_is_h.at(n)) gr -= prices.at(n) * h.grad(x);
    return gr;
  };
  PgResult r = pg_maximize_or_throw(a.local_set, f, g, cfg, warm);

  ApmResult out;
  out.x = r.x;
  out.payoff = r.value + const_part;
  for (const auto& [n, h] : a.influences)
    out.t[n] = t_is_h.at(n) ? h.eval(r.x) : t_up.at(n);
  return out;
}

namespace {

// Stationarity of the APM in x with multipliers p on the active h-branches,
// local multipliers fitted by least squares on active local constraints.
double apm_stationarity_residual(const ProblemInstance& inst, int i,
                                 const std::map<int, double>& prices,
                                 const Vec& xi) {
  const AgentSpec& a = inst.agent(i);
  Vec r = a.utility.grad(xi);
  for (const auto& [n, h] : a.influences) {
    double p = prices.at(n);
    if (inst.constraint(n).relation == Relation::Inequality) p = std::max(p, 0.0);
    r -= p * h.grad(xi);
  }
  const double act_tol = 1e-6;
  const auto& fns = a.local_set.constraint_fns;
  std::vector<Vec> cols;
  for (const auto& fn : fns)
    if (fn.f(xi) >= -act_tol) cols.push_back(fn.grad(xi));
  if (!cols.empty()) {
    Mat G(xi.size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) G.col(j) = cols[j];
    // least squares, then clip negatives and recompute residual
    Vec gamma = G.colPivHouseholderQr().solve(r);
    for (int j = 0; j < gamma.size(); ++j) gamma[j] = std::max(0.0, gamma[j]);
    r -= G * gamma;
  }
  return r.lpNorm<Eigen::Infinity>();
}

}  // namespace

GneReport verify_gne(const ProblemInstance& inst, const ActionProfile& x,
                     const MessageProfile& messages,
                     const OracleSolution& oracle, const SolveConfig& cfg,
                     bool deep) {
  GneReport rep;

  for (const auto& [n, msgs_n] : messages.by_constraint) {
    for (const auto& [i, mi] : msgs_n)
      for (const auto& [j, mj] : msgs_n)
        rep.common_price_dev =
            std::max(rep.common_price_dev, std::abs(mi.price - mj.price));

    // budget feasibility vs Eq-style budgets
    const ConstraintSpec& c = inst.constraint(n);
    std::vector<double> tau;
    for (int j : c.participants) tau.push_back(msgs_n.at(j).budget);
    std::vector<double> t = compute_budgets(tau, c.rhs, c.participants.size());
    for (std::size_t j = 0; j < c.participants.size(); ++j) {
      const int i = c.participants[j];
      const double h = inst.agent(i).influences.at(n).eval(x[i - 1]);
      const double v = c.relation == Relation::Inequality
                           ? std::max(0.0, h - t[j])
                           : std::abs(h - t[j]);
      rep.budget_feas = std::max(rep.budget_feas, v);
    }
  }

  TaxStatement taxes = total_taxes(messages, inst);
  rep.budget_balance = std::abs(taxes.sum_total());
  rep.efficiency_gap = oracle.objective - network_utility(inst, x);

  for (const auto& a : inst.agents) {
    std::map<int, double> prices;
    for (const auto& [n, h] : a.influences)
      prices[n] = messages.by_constraint.at(n).at(a.id).price;
    rep.apm_stationarity =
        std::max(rep.apm_stationarity,
                 apm_stationarity_residual(inst, a.id, prices, x[a.id - 1]));

    const double payoff = a.utility.value(x[a.id - 1]) - taxes.total.at(a.id);
    rep.ir_slacks[a.id] = payoff - opt_out_payoff(inst, a.id, cfg);

    if (deep) {
      // best response against neighbors' prices; tax uses p_nb*(t - c/|I_n|)
      std::map<int, double> nb_prices;
      double share_credit = 0.0;
      for (const auto& [n, h] : a.influences) {
        const int nb = circular_neighbor(n, a.id, inst);
        nb_prices[n] = messages.by_constraint.at(n).at(nb).price;
        const ConstraintSpec& c = inst.constraint(n);
        share_credit +=
            nb_prices[n] * c.rhs / static_cast<double>(c.participants.size());
      }
      ApmResult br =
          apm_solve(inst, a.id, nb_prices, all_t_up(inst, a.id), cfg);
      const double br_payoff = br.payoff + share_credit;  // penalty = 0 at p=p_nb
      rep.best_response_gain =
          std::max(rep.best_response_gain, br_payoff - payoff);
    }
  }
  return rep;
}

std::pair<ActionProfile, MessageProfile> gne_from_oracle(
    const ProblemInstance& inst, const OracleSolution& oracle) {
  MessageProfile m;
  for (const auto& c : inst.constraints) {
    const double lam = oracle.lambda_opt.lambda[inst.constraint_index.at(c.id)];
    for (int i : c.participants) {
      Message msg;
      msg.price = lam;
      msg.budget = inst.agent(i).influences.at(c.id).eval(oracle.x_opt[i - 1]);
      m.by_constraint[c.id][i] = msg;
    }
  }
  return {oracle.x_opt, m};
}

}  // namespace denum
