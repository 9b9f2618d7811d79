#include "denum/algorithm.hpp"

#include <cmath>

namespace denum {

std::map<int, std::map<int, double>> draw_initial_prices(
    const ProblemInstance& inst, const RunConfig& cfg) {
  Rng rng(cfg.seed);
  std::map<int, std::map<int, double>> init;  // i -> n -> p
  for (const auto& a : inst.agents)
    for (const auto& [n, h] : a.influences)
      init[a.id][n] = cfg.price_init.kind == PriceInit::Kind::Constant
                          ? cfg.price_init.c
                          : rng.uniform(cfg.price_init.lo, cfg.price_init.hi);
  return init;
}

DenumRunResult run_denum(const ProblemInstance& inst, const RunConfig& cfg) {
  const int I = inst.num_agents();
  auto init = draw_initial_prices(inst, cfg);

  // most recent price per constraint; seeded with the last participant's
  // initial draw so the first agent sees its ring predecessor's value
  std::map<int, double> P;
  std::map<int, std::map<int, double>> tau_state;  // n -> i -> latest tau
  for (const auto& c : inst.constraints) {
    P[c.id] = init.at(c.participants.back()).at(c.id);
    for (int i : c.participants) tau_state[c.id][i] = 0.0;
  }

  std::map<int, std::map<int, double>> prev_p = init;  // i -> n -> p_i[k-1]
  std::vector<std::map<int, double>> t_up(I + 1);
  for (int i = 1; i <= I; ++i) t_up[i] = all_t_up(inst, i);

  ActionProfile x_cur = inst.zero_profile();
  DenumRunResult out;
  int conv_count = 0;
  bool done = false;

  for (int k = 1; k <= cfg.max_iters && !done; ++k) {
    const double alpha = cfg.schedule.alpha(k);
    for (int i = 1; i <= I && !done; ++i) {
      const AgentSpec& a = inst.agent(i);
      std::map<int, double> prices_in;
      for (const auto& [n, h] : a.influences) prices_in[n] = P.at(n);

      ApmResult apm =
          apm_solve(inst, i, prices_in, t_up[i], cfg.local, &x_cur[i - 1]);
      x_cur[i - 1] = apm.x;

      std::map<int, double> p_new;
      double diff2 = 0.0, norm2 = 0.0;
      for (const auto& [n, tv] : apm.t) {
        const ConstraintSpec& c = inst.constraint(n);
        const double share = c.rhs / static_cast<double>(c.participants.size());
        const double pn = prices_in.at(n) + alpha * (tv - share);
        p_new[n] = pn;
        P[n] = pn;
        tau_state[n][i] = tv;
        const double prev = prev_p[i][n];
        diff2 += (pn - prev) * (pn - prev);
        norm2 += prev * prev;
      }
      const bool pass = norm2 > 1e-24
                            ? std::sqrt(diff2) < cfg.eps * std::sqrt(norm2)
                            : std::sqrt(diff2) < cfg.abs_eps;
      conv_count = pass ? conv_count + 1 : 0;
      prev_p[i] = p_new;

      if (cfg.log_every > 0 && (k % cfg.log_every == 0 || conv_count >= I)) {
        SubIterRecord rec;
        rec.k = k;
        rec.i = i;
        rec.p = p_new;
        rec.tau = apm.t;
        for (const auto& [n, tv] : apm.t) {
          const ConstraintSpec& c = inst.constraint(n);
          std::vector<double> tau;
          for (int j : c.participants) tau.push_back(tau_state[n][j]);
          std::vector<double> t =
              compute_budgets(tau, c.rhs, c.participants.size());
          for (std::size_t j = 0; j < c.participants.size(); ++j)
            if (c.participants[j] == i) rec.t[n] = t[j];
        }
        rec.x = apm.x;
        rec.utility = network_utility(inst, x_cur);
        rec.alpha = alpha;
        out.trace.records.push_back(std::move(rec));
      }
      if (conv_count >= I) done = true;
    }
    out.trace.iterations = k;
  }
  out.trace.converged = done;

  // final messages: the converged (most recent) price is common per
  // constraint; budgets are each agent's latest proposal
  for (const auto& c : inst.constraints)
    for (int i : c.participants) {
      Message m;
      m.price = P.at(c.id);
      m.budget = tau_state.at(c.id).at(i);
      out.messages.by_constraint[c.id][i] = m;
    }
  out.x = x_cur;
  out.taxes = total_taxes(out.messages, inst);
  return out;
}

std::vector<RefRecord> incremental_subgradient_reference(
    const ProblemInstance& inst, const RunConfig& cfg, int iters) {
  const int I = inst.num_agents();
  auto init = draw_initial_prices(inst, cfg);
  std::map<int, double> lambda;
  for (const auto& c : inst.constraints)
    lambda[c.id] = init.at(c.participants.back()).at(c.id);

  std::vector<std::map<int, double>> t_up(I + 1);
  for (int i = 1; i <= I; ++i) t_up[i] = all_t_up(inst, i);
  ActionProfile warm = inst.zero_profile();

  std::vector<RefRecord> out;
  for (int k = 1; k <= iters; ++k) {
    // dual value at the sweep-start multiplier (fresh solves; does not touch
    // the trajectory state)
    double dual = 0.0;
    for (int i = 1; i <= I; ++i) {
      const AgentSpec& a = inst.agent(i);
      std::map<int, double> li;
      double shares = 0.0;
      for (const auto& [n, h] : a.influences) {
        li[n] = lambda.at(n);
        const ConstraintSpec& c = inst.constraint(n);
        shares += lambda.at(n) * c.rhs /
                  static_cast<double>(c.participants.size());
      }
      dual += apm_solve(inst, i, li, t_up[i], cfg.local).payoff + shares;
    }

    const double alpha = cfg.schedule.alpha(k);
    for (int i = 1; i <= I; ++i) {
      const AgentSpec& a = inst.agent(i);
      std::map<int, double> li;
      for (const auto& [n, h] : a.influences) li[n] = lambda.at(n);
      ApmResult apm = apm_solve(inst, i, li, t_up[i], cfg.local, &warm[i - 1]);
      warm[i - 1] = apm.x;
      RefRecord rec;
      rec.k = k;
      rec.i = i;
      rec.dual_value = dual;
      for (const auto& [n, tv] : apm.t) {
        const ConstraintSpec& c = inst.constraint(n);
        const double share = c.rhs / static_cast<double>(c.participants.size());
        lambda[n] = li.at(n) + alpha * (tv - share);
        rec.lambda[n] = lambda[n];
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace denum
