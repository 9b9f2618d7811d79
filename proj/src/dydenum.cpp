#include "denum/dydenum.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "denum/projgrad.hpp"

namespace denum {

Vec dy_demand_update(const ProblemInstance& inst, int i,
                     const std::map<int, double>& prices,
                     const SolveConfig& cfg, const Vec* warm) {
  const AgentSpec& a = inst.agent(i);
  for (const auto& [n, h] : a.influences) {
    if (!prices.count(n))
      throw InvalidParams("missing price for constraint " + std::to_string(n));
    if (prices.at(n) < 0.0 && h.kind == Influence::Kind::GeneralConvex)
      throw NonconcaveSubproblem(
          "negative price on a general convex influence (constraint " +
          std::to_string(n) + ")");
  }
  auto f = [&](const Vec& x) {
    double v = a.utility.value(x);
    for (const auto& [n, h] : a.influences) v -= prices.at(n) * h.eval(x);
    return v;
  };
  auto g = [&](const Vec& x) {
    Vec gr = a.utility.grad(x);
    for (const auto& [n, h] : a.influences) gr -= prices.at(n) * h.grad(x);
    return gr;
  };
  PgResult r = pg_maximize_or_throw(a.local_set, f, g, cfg, warm);
  if (std::getenv("DENUM_DY_DEBUG"))
    std::fprintf(stderr, "[dy] agent=%d iters=%d pg=%.2e\n", i, r.iters, r.pg_norm);
  return r.x;
}

double dy_price_update(double pbar, const Vec& d_i, const ProblemInstance& inst,
                       int i, int n, double alpha_k) {
  const ConstraintSpec& c = inst.constraint(n);
  const double share = c.rhs / static_cast<double>(c.participants.size());
  const double h = inst.agent(i).influences.at(n).eval(d_i);
  double p = pbar + alpha_k * (h - share);
  if (c.relation == Relation::Inequality) p = std::max(0.0, p);
  return p;
}

namespace {

struct DyState {
  ActionProfile d;                 // current demands
  std::vector<Vec> grad_u;         // marginal utilities at current demands
  DyTrace trace;
};

// Core Gauss-Seidel loop shared by the main run and the exclusion runs.
DyState dy_loop(const ProblemInstance& inst, const DyConfig& cfg,
                const std::function<void(int /*k*/, const ActionProfile& prev,
                                         const ActionProfile& cur,
                                         const std::vector<Vec>& grads)>&
                    per_iteration) {
  const int I = inst.num_agents();
  std::map<int, double> P;  // most recent price per constraint
  for (const auto& c : inst.constraints) P[c.id] = cfg.init_price;

  DyState st;
  st.d.resize(I);
  st.grad_u.resize(I);
  // d[0]: demand at the common initial prices
  for (int i = 1; i <= I; ++i) {
    std::map<int, double> prices;
    for (const auto& [n, h] : inst.agent(i).influences) prices[n] = P.at(n);
    st.d[i - 1] = dy_demand_update(inst, i, prices, cfg.local);
    st.grad_u[i - 1] = inst.agent(i).utility.grad(st.d[i - 1]);
  }

  std::map<int, std::map<int, double>> prev_p;  // i -> n -> p_i[k-1]
  for (const auto& a : inst.agents)
    for (const auto& [n, h] : a.influences) prev_p[a.id][n] = cfg.init_price;

  int conv_count = 0;
  bool done = false;
  for (int k = 1; k <= cfg.max_iters && !done; ++k) {
    const double alpha = cfg.schedule.alpha(k);
    ActionProfile prev_d = st.d;
    for (int i = 1; i <= I; ++i) {
      const AgentSpec& a = inst.agent(i);
      std::map<int, double> prices;
      for (const auto& [n, h] : a.influences) prices[n] = P.at(n);
      std::map<int, double> demand_prices = prices;
      if (i == cfg.deviant)
        for (auto& [n, p] : demand_prices) p *= cfg.deviant_price_scale;

      st.d[i - 1] =
          dy_demand_update(inst, i, demand_prices, cfg.local, &st.d[i - 1]);
      st.grad_u[i - 1] = a.utility.grad(st.d[i - 1]);

      std::map<int, double> p_new;
      double diff2 = 0.0, norm2 = 0.0;
      for (const auto& [n, h] : a.influences) {
        const double pn =
            dy_price_update(prices.at(n), st.d[i - 1], inst, i, n, alpha);
        p_new[n] = pn;
        P[n] = pn;
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
        DyRecord rec;
        rec.k = k;
        rec.i = i;
        rec.d = st.d[i - 1];
        rec.p = p_new;
        rec.grad_u = st.grad_u[i - 1];
        rec.utility = network_utility(inst, st.d);
        rec.alpha = alpha;
        st.trace.records.push_back(std::move(rec));
      }
      if (conv_count >= I) done = true;
    }
    per_iteration(k, prev_d, st.d, st.grad_u);
    st.trace.iterations = k;
  }
  st.trace.converged = done || I == 0;
  return st;
}

}  // namespace

DyRunResult run_dydenum(const ProblemInstance& inst, const DyConfig& cfg,
                        const std::map<int, double>* pi0) {
  const int I = inst.num_agents();
  DyRunResult out;
  for (int i = 1; i <= I; ++i)
    out.ledger.pi0[i] = pi0 && pi0->count(i) ? pi0->at(i) : 0.0;
  out.ledger.total = out.ledger.pi0;

  // telescoped increments per agent, for the approximation diagnostic
  std::map<int, double> telescoped;
  for (int i = 1; i <= I; ++i) telescoped[i] = 0.0;
  ActionProfile d0;

  DyState st = dy_loop(
      inst, cfg,
      [&](int, const ActionProfile& prev, const ActionProfile& cur,
          const std::vector<Vec>& grads) {
        std::map<int, double> inc;
        for (int i = 1; i <= I; ++i) {
          double delta = 0.0;
          for (int j = 1; j <= I; ++j) {
            if (j == i) continue;
            delta += grads[j - 1].dot(prev[j - 1] - cur[j - 1]);
          }
          inc[i] = delta;
          out.ledger.total[i] += delta;
        }
        out.ledger.increments.push_back(std::move(inc));
        for (int j = 1; j <= I; ++j)
          telescoped[j] += grads[j - 1].dot(cur[j - 1] - prev[j - 1]);
      });

  // recover d[0] for the diagnostic (same common initial prices)
  {
    std::map<int, double> P0;
    for (const auto& c : inst.constraints) P0[c.id] = cfg.init_price;
    d0.resize(I);
    for (int i = 1; i <= I; ++i) {
      std::map<int, double> prices;
      for (const auto& [n, h] : inst.agent(i).influences) prices[n] = P0.at(n);
      d0[i - 1] = dy_demand_update(inst, i, prices, cfg.local);
    }
  }

  out.d = st.d;
  out.trace = std::move(st.trace);
  for (int j = 1; j <= I; ++j) {
    const double exact = inst.agent(j).utility.value(out.d[j - 1]) -
                         inst.agent(j).utility.value(d0[j - 1]);
    const double err = std::abs(telescoped[j] - exact) /
                       std::max(std::abs(exact), 1e-12);
    out.approx.rel_error[j] = err;
    out.approx.max_rel_error = std::max(out.approx.max_rel_error, err);
  }
  return out;
}

TaxLedger initial_taxes(const ProblemInstance& inst, const DyConfig& cfg) {
  TaxLedger ledger;
  for (const auto& a : inst.agents) {
    const int i = a.id;
    ProblemInstance sub = exclude_agent(inst, i);
    double pi0 = 0.0;
    dy_loop(sub, cfg,
            [&](int, const ActionProfile& prev, const ActionProfile& cur,
                const std::vector<Vec>& grads) {
              for (std::size_t j = 0; j < cur.size(); ++j)
                pi0 += grads[j].dot(cur[j] - prev[j]);
            });
    ledger.pi0[i] = pi0;
    ledger.total[i] = pi0;
  }
  return ledger;
}

VcgReport vcg_payoff_check(const ProblemInstance& inst, const DyRunResult& run,
                           const OracleSolution& full,
                           const std::vector<OracleSolution>& exclusion,
                           const SolveConfig& cfg) {
  VcgReport rep;
  for (const auto& a : inst.agents) {
    const int i = a.id;
    const double payoff =
        a.utility.value(run.d[i - 1]) - run.ledger.total.at(i);
    rep.payoff[i] = payoff;
    rep.payoff_identity_err[i] =
        payoff - (full.objective - exclusion[i - 1].objective);
    rep.ir_slack[i] = payoff - opt_out_payoff(inst, i, cfg);
  }
  return rep;
}

}  // namespace denum
