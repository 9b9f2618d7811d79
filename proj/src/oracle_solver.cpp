#include "denum/oracle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "denum/projgrad.hpp"

namespace denum {

double KktReport::max_residual() const {
  return std::max(std::max(stationarity, comp_slackness),
                  std::max(primal_feas, dual_feas));
}

DualPoint project_dual(const ProblemInstance& inst, Vec lambda) {
  for (int k = 0; k < inst.num_constraints(); ++k)
    if (inst.constraints[k].relation == Relation::Inequality)
      lambda[k] = std::max(0.0, lambda[k]);
  return DualPoint{std::move(lambda)};
}

LocalDualResult local_dual_value(const ProblemInstance& inst, int i,
                                 const DualPoint& lambda,
                                 const SolveConfig& cfg, const Vec* warm) {
  if (lambda.lambda.size() != inst.num_constraints())
    throw DimensionMismatch("dual vector has wrong length");
  const AgentSpec& a = inst.agent(i);

  auto f = [&](const Vec& x) {
    double v = a.utility.value(x);
    for (const auto& [n, h] : a.influences)
      v -= lambda.lambda[inst.constraint_index.at(n)] * h.eval(x);
    return v;
  };
  auto g = [&](const Vec& x) {
    Vec gr = a.utility.grad(x);
    for (const auto& [n, h] : a.influences)
      gr -= lambda.lambda[inst.constraint_index.at(n)] * h.grad(x);
    return gr;
  };
  PgResult r = pg_maximize_or_throw(a.local_set, f, g, cfg, warm);

  LocalDualResult out;
  out.x = r.x;
  out.value = r.value;
  for (const auto& [n, h] : a.influences) {
    const ConstraintSpec& c = inst.constraint(n);
    double share = c.rhs / static_cast<double>(c.participants.size());
    double sg = h.eval(r.x) - share;
    out.subgrad[n] = sg;
    out.value += lambda.lambda[inst.constraint_index.at(n)] * share;
  }
  return out;
}

namespace {

// Nonnegative least squares min ||r - G gamma||, gamma >= 0, by column
// deletion (few local constraints; exactness is not load-bearing — the
// residual only shrinks when columns help).
Vec nnls(const Mat& G, const Vec& r) {
  std::vector<int> cols(G.cols());
  for (int j = 0; j < G.cols(); ++j) cols[j] = j;
  Vec gamma = Vec::Zero(G.cols());
  while (!cols.empty()) {
    Mat Gs(G.rows(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) Gs.col(j) = G.col(cols[j]);
    Vec gs = Gs.colPivHouseholderQr().solve(r);
    int worst = -1;
    double worst_val = -1e-12;
    for (int j = 0; j < gs.size(); ++j)
      if (gs[j] < worst_val) {
        worst_val = gs[j];
        worst = j;
      }
    if (worst < 0) {
      gamma.setZero();
      for (std::size_t j = 0; j < cols.size(); ++j) gamma[cols[j]] = gs[j];
      return gamma;
    }
    cols.erase(cols.begin() + worst);
  }
  return gamma;
}

}  // namespace

KktReport kkt_residual(const ProblemInstance& inst, const ActionProfile& x,
                       const DualPoint& lambda,
                       const std::vector<Vec>* local_multipliers) {
  if (x.size() != inst.agents.size() ||
      lambda.lambda.size() != inst.num_constraints())
    throw DimensionMismatch("kkt_residual: inconsistent dimensions");
  KktReport rep;

  for (int k = 0; k < inst.num_constraints(); ++k) {
    const ConstraintSpec& c = inst.constraints[k];
    double s = -c.rhs;
    for (int i : c.participants)
      s += inst.agents[i - 1].influences.at(c.id).eval(x[i - 1]);
    const double lam = lambda.lambda[k];
    if (c.relation == Relation::Inequality) {
      rep.primal_feas = std::max(rep.primal_feas, std::max(0.0, s));
      rep.dual_feas = std::max(rep.dual_feas, std::max(0.0, -lam));
      rep.comp_slackness = std::max(rep.comp_slackness, std::abs(lam * s));
    } else {
      rep.primal_feas = std::max(rep.primal_feas, std::abs(s));
      rep.comp_slackness = std::max(rep.comp_slackness, std::abs(s));
    }
  }

  const double act_tol = 1e-6;
  for (const auto& a : inst.agents) {
    const Vec& xi = x[a.id - 1];
    Vec r = a.utility.grad(xi);
    for (const auto& [n, h] : a.influences)
      r -= lambda.lambda[inst.constraint_index.at(n)] * h.grad(xi);

    const auto& fns = a.local_set.constraint_fns;
    Vec gamma;
    std::vector<int> active;
    for (std::size_t j = 0; j < fns.size(); ++j)
      if (fns[j].f(xi) >= -act_tol) active.push_back(static_cast<int>(j));

    if (local_multipliers) {
      gamma = (*local_multipliers)[a.id - 1];
      if (gamma.size() != static_cast<int>(fns.size()))
        throw DimensionMismatch("local multiplier vector has wrong length");
      for (std::size_t j = 0; j < fns.size(); ++j) {
        r -= gamma[j] * fns[j].grad(xi);
        rep.dual_feas = std::max(rep.dual_feas, -gamma[j]);
        rep.comp_slackness =
            std::max(rep.comp_slackness, std::abs(gamma[j] * fns[j].f(xi)));
      }
    } else if (!active.empty()) {
      Mat G(xi.size(), active.size());
      for (std::size_t j = 0; j < active.size(); ++j)
        G.col(j) = fns[active[j]].grad(xi);
      Vec gs = nnls(G, r);
      for (std::size_t j = 0; j < active.size(); ++j) {
        r -= gs[j] * G.col(j);
        rep.comp_slackness = std::max(
            rep.comp_slackness, std::abs(gs[j] * fns[active[j]].f(xi)));
      }
    }
    rep.stationarity =
        std::max(rep.stationarity, r.lpNorm<Eigen::Infinity>());
    rep.primal_feas = std::max(rep.primal_feas, a.local_set.max_violation(xi));
  }
  return rep;
}

namespace {

// Multiplier estimates mu_n(x) = lambda_n + rho*s_n, clipped at 0 for
// inequalities; also the gradient weights of the augmented Lagrangian.
Vec alm_multipliers(const ProblemInstance& inst, const Vec& lambda, double rho,
                    const Vec& slack) {
  Vec mu(lambda.size());
  for (int k = 0; k < lambda.size(); ++k) {
    double v = lambda[k] + rho * slack[k];
    if (inst.constraints[k].relation == Relation::Inequality)
      v = std::max(0.0, v);
    mu[k] = v;
  }
  return mu;
}

Vec slacks(const ProblemInstance& inst, const ActionProfile& x) {
  Vec s(inst.num_constraints());
  for (int k = 0; k < inst.num_constraints(); ++k) {
    const ConstraintSpec& c = inst.constraints[k];
    double v = -c.rhs;
    for (int i : c.participants)
      v += inst.agents[i - 1].influences.at(c.id).eval(x[i - 1]);
    s[k] = v;
  }
  return s;
}

// Joint projected-gradient maximization of the augmented Lagrangian over the
// product of local sets.
void alm_inner(const ProblemInstance& inst, const Vec& lambda, double rho,
               ActionProfile& x, double tol, int max_iters) {
  const int I = inst.num_agents();
  auto L = [&](const ActionProfile& z) {
    double v = 0.0;
    for (int i = 0; i < I; ++i) v += inst.agents[i].utility.value(z[i]);
    Vec s = slacks(inst, z);
    for (int k = 0; k < s.size(); ++k) {
      if (inst.constraints[k].relation == Relation::Equality) {
        v -= lambda[k] * s[k] + 0.5 * rho * s[k] * s[k];
      } else {
        double m = std::max(0.0, lambda[k] + rho * s[k]);
        v -= (m * m - lambda[k] * lambda[k]) / (2.0 * rho);
      }
    }
    return v;
  };
  auto Lgrad = [&](const ActionProfile& z) {
    Vec s = slacks(inst, z);
    Vec mu = alm_multipliers(inst, lambda, rho, s);
    ActionProfile g(I);
    for (int i = 0; i < I; ++i) {
      g[i] = inst.agents[i].utility.grad(z[i]);
      for (const auto& [n, h] : inst.agents[i].influences)
        g[i] -= mu[inst.constraint_index.at(n)] * h.grad(z[i]);
    }
    return g;
  };

  // Spectral projected gradient over the product set (same scheme as
  // pg_maximize; see projgrad.cpp).
  constexpr double kGamma = 1e-4;
  constexpr int kWindow = 10;
  double fx = L(x);
  ActionProfile g = Lgrad(x);
  double lam = 1.0;
  double hist[kWindow];
  std::fill(hist, hist + kWindow, -std::numeric_limits<double>::infinity());
  hist[0] = fx;
  int hist_pos = 1;
  double best_pg = std::numeric_limits<double>::infinity();
  int stall = 0;
  bool retried = false;

  ActionProfile xt(I), xn(I);
  for (int it = 0; it < max_iters; ++it) {
    double pg = 0.0;
    for (int i = 0; i < I; ++i) {
      const double scale = 1.0 + x[i].lpNorm<Eigen::Infinity>();
      pg = std::max(pg, (x[i] - inst.agents[i].local_set.project(x[i] + g[i]))
                            .lpNorm<Eigen::Infinity>() /
                        scale);
    }
    if (pg <= tol) return;
    if (pg < 0.9 * best_pg) {
      best_pg = pg;
      stall = 0;
    } else if (++stall > 100 && pg <= 1e-6) {
      return;  // residual floor: ascent is below rounding noise in L
    }

    double gd = 0.0;
    for (int i = 0; i < I; ++i) {
      xt[i] = inst.agents[i].local_set.project(x[i] + lam * g[i]);
      gd += g[i].dot(xt[i] - x[i]);
    }
    if (gd <= 0.0) {
      if (lam == 1.0) return;  // no ascent direction left
      lam = 1.0;
      continue;
    }

    double fref = hist[0];
    for (int j = 1; j < kWindow; ++j)
      if (std::isfinite(hist[j]) && hist[j] < fref) fref = hist[j];

    double alpha = 1.0;
    bool accepted = false;
    double fn = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      for (int i = 0; i < I; ++i) xn[i] = x[i] + alpha * (xt[i] - x[i]);
      fn = L(xn);
      if (fn >= fref + kGamma * alpha * gd) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (retried) return;  // stationary to machine precision
      retried = true;
      lam = 1.0;
      continue;
    }

    ActionProfile gn = Lgrad(xn);
    double ss = 0.0, sy = 0.0;
    for (int i = 0; i < I; ++i) {
      Vec s = xn[i] - x[i];
      ss += s.squaredNorm();
      sy -= s.dot(gn[i] - g[i]);
    }
    lam = sy > 1e-30 ? std::clamp(ss / sy, 1e-12, 1e12) : 1e12;

    std::swap(x, xn);
    fx = fn;
    std::swap(g, gn);
    hist[hist_pos % kWindow] = fx;
    ++hist_pos;
  }
}

}  // namespace

OracleSolution solve_centralized(const ProblemInstance& inst,
                                 const SolveConfig& cfg,
                                 const OracleWarmStart* warm_start) {
  const int I = inst.num_agents();
  const int N = inst.num_constraints();
  OracleSolution sol;

  if (N == 0) {
    sol.lambda_opt.lambda = Vec(0);
    sol.x_opt.resize(I);
    for (int i = 0; i < I; ++i) {
      const AgentSpec& a = inst.agents[i];
      sol.x_opt[i] =
          pg_maximize_or_throw(a.local_set, a.utility.value, a.utility.grad, cfg)
              .x;
    }
    sol.objective = network_utility(inst, sol.x_opt);
    sol.kkt = kkt_residual(inst, sol.x_opt, sol.lambda_opt);
    sol.converged = sol.kkt.max_residual() <= cfg.tol;
    return sol;
  }

  SolveConfig local_cfg = cfg;
  local_cfg.tol = std::max(cfg.tol * 1e-2, 1e-11);

  // Phase 1: projected dual subgradient, diminishing steps, ergodic recovery.
  // The dual subgradient tolerates inexact local maximizers, so phase 1 runs
  // the local solves loosely; the ALM polish below works at local_cfg.tol.
  SolveConfig p1_cfg = local_cfg;
  p1_cfg.tol = std::max(cfg.tol, 1e-6);
  p1_cfg.max_iters = std::min(cfg.max_iters, 3000);
  Vec lambda = Vec::Zero(N);
  Vec lambda_best = lambda;
  double best_dual = std::numeric_limits<double>::infinity();
  ActionProfile ergodic = inst.zero_profile();
  ActionProfile warm = inst.zero_profile();
  const int phase1 = warm_start ? 0 : std::min(100, cfg.max_iters);
  int iters = 0;
  for (int k = 1; k <= phase1; ++k) {
    DualPoint lp{lambda};
    double dual = 0.0;
    Vec sg = Vec::Zero(N);
    for (int i = 1; i <= I; ++i) {
      if (std::getenv("DENUM_ORACLE_DEBUG"))
        std::fprintf(stderr, "[p1] k=%d agent=%d\n", k, i);
      LocalDualResult r = local_dual_value(inst, i, lp, p1_cfg, &warm[i - 1]);
      warm[i - 1] = r.x;
      dual += r.value;
      for (const auto& [n, v] : r.subgrad) sg[inst.constraint_index.at(n)] += v;
      ergodic[i - 1] = (ergodic[i - 1] * (k - 1) + r.x) / k;
    }
    if (dual < best_dual) {
      best_dual = dual;
      lambda_best = lambda;
    }
    ++iters;
    const double alpha = 1.0 / (k + 10.0);
    lambda = project_dual(inst, lambda + alpha * sg).lambda;
    if (k % 50 == 0) {
      KktReport rep = kkt_residual(inst, ergodic, DualPoint{lambda_best});
      if (rep.max_residual() <= cfg.tol) {
        sol.x_opt = ergodic;
        sol.lambda_opt = DualPoint{lambda_best};
        sol.objective = network_utility(inst, ergodic);
        sol.kkt = rep;
        sol.iterations = iters;
        sol.converged = true;
        return sol;
      }
    }
  }

  // Phase 2: augmented-Lagrangian polish from the best dual iterate.
  lambda = lambda_best;
  ActionProfile x = ergodic;
  if (warm_start) {
    if (warm_start->lambda.size() != N ||
        static_cast<int>(warm_start->x.size()) != I)
      throw DimensionMismatch("solve_centralized: bad warm-start shape");
    x = warm_start->x;
    for (int i = 0; i < I; ++i) {
      const AgentSpec& a = inst.agents[i];
      if (x[i].size() != a.dim)
        throw DimensionMismatch("solve_centralized: bad warm-start profile");
      x[i] = a.local_set.project(x[i]);
    }
    lambda = project_dual(inst, warm_start->lambda).lambda;
  }
  double rho = 10.0;
  double prev_viol = std::numeric_limits<double>::infinity();
  KktReport rep;
  // Inner iterations are cheap on small instances and dominate runtime on
  // large ones; budget them by total dimension.
  int total_dim = 0;
  for (const auto& a : inst.agents) total_dim += a.dim;
  const int inner_budget =
      std::min(cfg.max_iters, std::max(5000, 400000 / std::max(1, total_dim)));
  ActionProfile best_x = x;
  Vec best_lambda = lambda;
  KktReport best_rep = kkt_residual(inst, x, DualPoint{lambda});
  int since_improve = 0;
  for (int outer = 0; outer < 120; ++outer) {
    alm_inner(inst, lambda, rho, x, local_cfg.tol, inner_budget);
    Vec s = slacks(inst, x);
    lambda = alm_multipliers(inst, lambda, rho, s);
    ++iters;
    rep = kkt_residual(inst, x, DualPoint{lambda});
    if (std::getenv("DENUM_ORACLE_DEBUG"))
      std::fprintf(stderr, "[alm] outer=%d rho=%.1e s0=%.3e lam0=%.8f st=%.3e pf=%.3e\n",
                   outer, rho, s[0], lambda[0], rep.stationarity, rep.primal_feas);
    if (rep.max_residual() < best_rep.max_residual()) {
      best_rep = rep;
      best_x = x;
      best_lambda = lambda;
      since_improve = 0;
    } else if (++since_improve >= 5) {
      break;  // residual floor reached; further outer steps only add noise
    }
    if (rep.max_residual() <= cfg.tol) break;
    double viol = rep.primal_feas;
    // once the violation is at rounding-noise level, growing rho only
    // amplifies that noise through the multiplier update
    if (viol > 0.25 * prev_viol && viol > 1e-11) rho = std::min(rho * 4.0, 1e8);
    prev_viol = viol;
  }
  x = best_x;
  lambda = best_lambda;
  rep = best_rep;

  sol.x_opt = x;
  sol.lambda_opt = DualPoint{lambda};
  sol.objective = network_utility(inst, x);
  sol.kkt = rep;
  sol.iterations = iters;
  sol.converged = rep.max_residual() <= cfg.tol;
  return sol;
}

GridResult brute_force_grid(const ProblemInstance& inst, int resolution,
                            double guard) {
  if (resolution < 2) throw InvalidParams("resolution must be >= 2");
  int D = 0;
  for (const auto& a : inst.agents) D += a.dim;
  double total = std::pow(static_cast<double>(resolution), D);
  if (total > guard)
    throw GridTooLarge("grid has " + std::to_string(total) +
                       " points, guard is " + std::to_string(guard));

  // flatten coordinate bounds
  std::vector<double> lo(D), step(D);
  std::vector<int> owner(D), local(D);
  {
    int d = 0;
    for (const auto& a : inst.agents)
      for (int l = 0; l < a.dim; ++l, ++d) {
        lo[d] = a.local_set.lo[l];
        step[d] = (a.local_set.hi[l] - a.local_set.lo[l]) / (resolution - 1);
        owner[d] = a.id;
        local[d] = l;
      }
  }

  std::vector<double> sys_tol;
  for (const auto& c : inst.constraints)
    sys_tol.push_back(std::max(c.rhs, 1.0) / resolution);

  GridResult best;
  best.objective = -std::numeric_limits<double>::infinity();
  ActionProfile x = inst.zero_profile();
  std::vector<int> idx(D, 0);
  for (int d = 0; d < D; ++d) x[owner[d] - 1][local[d]] = lo[d];

  const double local_tol = 1e-9;
  while (true) {
    bool ok = true;
    for (const auto& a : inst.agents)
      if (a.local_set.max_violation(x[a.id - 1]) > local_tol) {
        ok = false;
        break;
      }
    if (ok) {
      for (int k = 0; k < inst.num_constraints() && ok; ++k) {
        const ConstraintSpec& c = inst.constraints[k];
        double s = -c.rhs;
        for (int i : c.participants)
          s += inst.agents[i - 1].influences.at(c.id).eval(x[i - 1]);
        double viol =
            c.relation == Relation::Inequality ? std::max(0.0, s) : std::abs(s);
        if (viol > sys_tol[k]) ok = false;
      }
    }
    if (ok) {
      double obj = network_utility(inst, x);
      if (obj > best.objective) {
        best.objective = obj;
        best.x = x;
        best.feasible_found = true;
      }
    }
    // odometer
    int d = 0;
    while (d < D) {
      if (++idx[d] < resolution) {
        x[owner[d] - 1][local[d]] = lo[d] + idx[d] * step[d];
        break;
      }
      idx[d] = 0;
      x[owner[d] - 1][local[d]] = lo[d];
      ++d;
    }
    if (d == D) break;
  }
  if (!best.feasible_found) best.objective = 0.0;
  return best;
}

}  // namespace denum
