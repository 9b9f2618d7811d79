#ifndef DENUM_ORACLE_SOLVER_HPP
#define DENUM_ORACLE_SOLVER_HPP

#include <map>
#include <vector>

#include "denum/instance.hpp"

namespace denum {

// Dual multipliers, one per system constraint, in inst.constraints order.
// lambda[k] >= 0 when constraints[k] is an inequality; free sign for equality.
struct DualPoint {
  Vec lambda;
};

// Projects inequality components to [0, inf); leaves equality components free.
DualPoint project_dual(const ProblemInstance& inst, Vec lambda);

struct KktReport {
  double stationarity = 0.0;
  double comp_slackness = 0.0;
  double primal_feas = 0.0;
  double dual_feas = 0.0;
  double max_residual() const;
};

struct OracleSolution {
  ActionProfile x_opt;
  DualPoint lambda_opt;
  double objective = 0.0;
  KktReport kkt;
  int iterations = 0;
  bool converged = false;
};

struct LocalDualResult {
  double value = 0.0;           // g~_i(lambda)
  Vec x;                        // the maximizer
  std::map<int, double> subgrad;  // n -> h_{i,n}(x) - c_n/|I_n|, n in N_i
};

LocalDualResult local_dual_value(const ProblemInstance& inst, int i,
                                 const DualPoint& lambda,
                                 const SolveConfig& cfg,
                                 const Vec* warm = nullptr);

// Optional warm start for solve_centralized: a primal profile (one vector
// per agent, inst order) and dual multipliers. When supplied, the subgradient
// phase is skipped and the augmented-Lagrangian polish starts here.
struct OracleWarmStart {
  ActionProfile x;
  Vec lambda;
};

// Dual subgradient with diminishing steps and ergodic primal recovery,
// followed by an augmented-Lagrangian polish to drive KKT residuals down.
OracleSolution solve_centralized(const ProblemInstance& inst,
                                 const SolveConfig& cfg,
                                 const OracleWarmStart* warm_start = nullptr);

// KKT residuals at (x, lambda). When local multipliers gamma are not given,
// they are estimated per agent by least squares on the active local
// constraints.
KktReport kkt_residual(const ProblemInstance& inst, const ActionProfile& x,
                       const DualPoint& lambda,
                       const std::vector<Vec>* local_multipliers = nullptr);

struct GridResult {
  ActionProfile x;
  double objective = 0.0;
  bool feasible_found = false;
};

// Exhaustive box-grid scan; feasibility tolerance per system constraint is
// max(c_n, 1)/resolution. Guard: total point count must not exceed `guard`.
GridResult brute_force_grid(const ProblemInstance& inst, int resolution,
                            double guard = 1e7);

}  // namespace denum

#endif
