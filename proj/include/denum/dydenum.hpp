#ifndef DENUM_DYDENUM_HPP
#define DENUM_DYDENUM_HPP

#include <map>
#include <vector>

#include "denum/algorithm.hpp"
#include "denum/instance.hpp"
#include "denum/oracle_solver.hpp"

namespace denum {

struct DyConfig {
  StepSchedule schedule{350.0, 2000.0};
  double eps = 1e-4;
  double abs_eps = 1e-8;
  int max_iters = 10000;
  double init_price = 1.0;  // the common constant C
  int log_every = 1;
  SolveConfig local;
  // deviation probe: agent `deviant` best-responds to scaled prices instead
  // of following the honest demand rule (0 = everyone honest)
  int deviant = 0;
  double deviant_price_scale = 1.0;
};

struct DyRecord {
  int k = 0;
  int i = 0;
  Vec d;
  std::map<int, double> p;  // prices set by i this sub-iteration
  Vec grad_u;               // reported marginal utility at d
  double utility = 0.0;
  double alpha = 0.0;
};

struct DyTrace {
  std::vector<DyRecord> records;
  bool converged = false;
  int iterations = 0;
};

struct TaxLedger {
  std::map<int, double> pi0;                       // Pi_i[0]
  std::map<int, double> total;                     // Pi_i[k_final]
  std::vector<std::map<int, double>> increments;   // per iteration, i -> delta
};

struct ApproxReport {
  std::map<int, double> rel_error;  // per agent j
  double max_rel_error = 0.0;
};

struct DyRunResult {
  ActionProfile d;
  TaxLedger ledger;
  DyTrace trace;
  ApproxReport approx;
};

// d = argmax over X_i of U_i(x) - sum_n pbar_n h_{i,n}(x).
Vec dy_demand_update(const ProblemInstance& inst, int i,
                     const std::map<int, double>& prices,
                     const SolveConfig& cfg, const Vec* warm = nullptr);

// p = pbar + alpha*(h_{i,n}(d) - c_n/|I_n|), clipped at 0 for inequalities.
double dy_price_update(double pbar, const Vec& d_i, const ProblemInstance& inst,
                       int i, int n, double alpha_k);

DyRunResult run_dydenum(const ProblemInstance& inst, const DyConfig& cfg,
                        const std::map<int, double>* pi0 = nullptr);

// Pi_i[0] from the exclusion runs: for each i, the remaining agents rerun the
// dynamic updates without i, accumulating sum_j grad_u_j.(d_j[k]-d_j[k-1]),
// which telescopes to sum_{j!=i} U_j(best without i) - U_j(d_j[0]).
TaxLedger initial_taxes(const ProblemInstance& inst, const DyConfig& cfg);

struct VcgReport {
  std::map<int, double> payoff;               // U_i(d_i) - Pi_i
  std::map<int, double> payoff_identity_err;  // vs marginal contribution
  std::map<int, double> ir_slack;             // payoff - opt_out
};

VcgReport vcg_payoff_check(const ProblemInstance& inst, const DyRunResult& run,
                           const OracleSolution& full,
                           const std::vector<OracleSolution>& exclusion,
                           const SolveConfig& cfg);

}  // namespace denum

#endif
