#ifndef DENUM_MECHANISM_HPP
#define DENUM_MECHANISM_HPP

#include <map>
#include <utility>
#include <vector>

#include "denum/instance.hpp"
#include "denum/oracle_solver.hpp"

namespace denum {

struct Message {
  double price = 0.0;   // p_{i,n}
  double budget = 0.0;  // tau_{i,n}
};

struct MessageProfile {
  // n -> (i -> message), keys exactly {(i,n) : i in I_n}
  std::map<int, std::map<int, Message>> by_constraint;
};

struct TaxStatement {
  std::map<int, std::map<int, double>> tax;  // n -> i -> pi_{i,n}
  std::map<int, double> payment_part;        // per agent
  std::map<int, double> penalty_part;        // per agent, always >= 0
  std::map<int, double> total;               // Pi_i
  double sum_total() const;
  double sum_abs_total() const;
};

struct GneReport {
  double common_price_dev = 0.0;
  double budget_balance = 0.0;
  double budget_feas = 0.0;
  double apm_stationarity = 0.0;
  double efficiency_gap = 0.0;
  std::map<int, double> ir_slacks;
  double best_response_gain = 0.0;  // filled only in deep mode
};

// omega(n, i+1): next-larger participant index on n, wrapping.
int circular_neighbor(int n, int i, const ProblemInstance& inst);

// t_{i,n} = tau_{i,n} - (sum_j tau_{j,n} - c_n)/|I_n|; sums to c_n exactly.
std::vector<double> compute_budgets(const std::vector<double>& tau_n,
                                    double c_n, std::size_t card);

struct TaxParts {
  double total = 0.0;
  double payment = 0.0;
  double penalty = 0.0;
};

TaxParts compute_tax(int i, int n, const std::map<int, Message>& msgs_n,
                     double c_n, const ProblemInstance& inst);

TaxStatement total_taxes(const MessageProfile& messages,
                         const ProblemInstance& inst);

struct ApmResult {
  Vec x;
  std::map<int, double> t;  // chosen budget proposal per n in N_i
  double payoff = 0.0;      // U(x) - sum_n p_n t_n
};

// max U_i(x) - sum_n p_n t_n  s.t.  h_{i,n}(x) <=/= t_n <= t_up_n, x in X_i.
ApmResult apm_solve(const ProblemInstance& inst, int i,
                    const std::map<int, double>& prices,
                    const std::map<int, double>& t_up, const SolveConfig& cfg,
                    const Vec* warm = nullptr);

// t_up_{i,n} = max over X_i of h_{i,n}; exact for affine h, otherwise the
// user-supplied influence_bound.
double compute_t_up(const ProblemInstance& inst, int i, int n);
std::map<int, double> all_t_up(const ProblemInstance& inst, int i);

GneReport verify_gne(const ProblemInstance& inst, const ActionProfile& x,
                     const MessageProfile& messages,
                     const OracleSolution& oracle, const SolveConfig& cfg,
                     bool deep = false);

std::pair<ActionProfile, MessageProfile> gne_from_oracle(
    const ProblemInstance& inst, const OracleSolution& oracle);

}  // namespace denum

#endif
