#ifndef DENUM_ALGORITHM_HPP
#define DENUM_ALGORITHM_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "denum/mechanism.hpp"

namespace denum {

struct StepSchedule {
  double a = 51.0;  // alpha[k] = a/(k+b); defaults are the beta form, beta=50
  double b = 50.0;
  double alpha(int k) const { return a / (k + b); }
  static StepSchedule from_beta(double beta) { return {1.0 + beta, beta}; }
};

struct PriceInit {
  enum class Kind { Uniform, Constant };
  Kind kind = Kind::Uniform;
  double lo = 0.0, hi = 1.0;  // Uniform(lo, hi)
  double c = 1.0;             // Constant(c)
};

struct RunConfig {
  StepSchedule schedule;
  double eps = 1e-4;      // relative price-change termination
  double abs_eps = 1e-8;  // fallback when the previous price norm is ~0
  int max_iters = 10000;
  std::uint64_t seed = 1;
  PriceInit price_init;
  int log_every = 1;
  SolveConfig local;
};

struct SubIterRecord {
  int k = 0;
  int i = 0;
  std::map<int, double> p;    // prices set by i this sub-iteration
  std::map<int, double> tau;  // budget proposals chosen
  std::map<int, double> t;    // budgets from the current tau snapshot
  Vec x;
  double utility = 0.0;  // network utility of the current running profile
  double alpha = 0.0;
};

struct RunTrace {
  std::vector<SubIterRecord> records;
  bool converged = false;
  int iterations = 0;
};

struct DenumRunResult {
  ActionProfile x;
  MessageProfile messages;  // final: common most-recent price per constraint
  TaxStatement taxes;
  RunTrace trace;
};

DenumRunResult run_denum(const ProblemInstance& inst, const RunConfig& cfg);

// Textbook incremental subgradient on the relaxed dual: lambda updated
// agent-by-agent, free sign (all relaxed constraints are equalities after the
// auxiliary-variable reformulation). Same seed/schedule => same trajectory as
// run_denum; used only to certify the equivalence.
struct RefRecord {
  int k = 0;
  int i = 0;
  std::map<int, double> lambda;  // entries i touched this sub-iteration
  double dual_value = 0.0;       // sum_i g_i at the iteration-start lambda
};

std::vector<RefRecord> incremental_subgradient_reference(
    const ProblemInstance& inst, const RunConfig& cfg, int iters);

// Initial price draw shared by run_denum and the reference: one value per
// (i, n) pair in (agent, constraint) sorted order from Rng(seed).
std::map<int, std::map<int, double>> draw_initial_prices(
    const ProblemInstance& inst, const RunConfig& cfg);

}  // namespace denum

#endif
