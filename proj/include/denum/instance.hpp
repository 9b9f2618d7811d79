#ifndef DENUM_INSTANCE_HPP
#define DENUM_INSTANCE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "denum/common.hpp"
#include "denum/forms.hpp"
#include "denum/local_set.hpp"

namespace denum {

struct AgentSpec {
  int id = 0;   // 1-based
  int dim = 0;  // L_i
  Utility utility;
  std::map<int, Influence> influences;        // n -> h_{i,n}, keys = N_i
  LocalSet local_set;                         // X_i
  std::map<int, double> influence_bound;      // optional t_up override per n
};

enum class Relation { Equality, Inequality };

struct ConstraintSpec {
  int id = 0;
  Relation relation = Relation::Inequality;
  double rhs = 0.0;                 // c_n
  std::vector<int> participants;    // I_n, sorted ascending (derived at build)
};

struct ProblemInstance {
  std::vector<AgentSpec> agents;           // index = id-1
  std::vector<ConstraintSpec> constraints; // arbitrary ids; order is the
                                           // canonical dual-vector order
  std::map<int, int> constraint_index;     // id -> position in `constraints`

  int num_agents() const { return static_cast<int>(agents.size()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }
  const AgentSpec& agent(int id) const { return agents.at(id - 1); }
  const ConstraintSpec& constraint(int id) const {
    return constraints.at(constraint_index.at(id));
  }
  ActionProfile zero_profile() const {
    ActionProfile x;
    for (const auto& a : agents) x.push_back(Vec::Zero(a.dim));
    return x;
  }
};

ProblemInstance build_instance(std::vector<AgentSpec> agents,
                               std::vector<ConstraintSpec> constraints);

double network_utility(const ProblemInstance& inst, const ActionProfile& x);

struct FeasibilityReport {
  std::map<int, double> slack;           // n -> sum_i h_{i,n}(x_i) - c_n
  std::vector<double> local_violation;   // per agent, max over X_i constraints
  bool feasible = false;
  double max_violation = 0.0;
};

FeasibilityReport feasibility_report(const ProblemInstance& inst,
                                     const ActionProfile& x,
                                     double tol = 1e-9);

// max U_i over X_i^Out = {x in X_i : h_{i,n}(x) <=/= 0 for all n in N_i}.
double opt_out_payoff(const ProblemInstance& inst, int i,
                      const SolveConfig& cfg);

// Removes agent i (and its influence entries) from the instance; constraints
// left with no participants are dropped. Used by exclusion oracles.
ProblemInstance exclude_agent(const ProblemInstance& inst, int i);

}  // namespace denum

#endif
