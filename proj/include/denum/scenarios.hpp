#ifndef DENUM_SCENARIOS_HPP
#define DENUM_SCENARIOS_HPP

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "denum/instance.hpp"

namespace denum {

enum class AccessType { LTE, ThreeG, WiFi, None };

struct UpnParams {
  int num_users = 5;
  double area_side = 30.0;   // meters
  double period_s = 120.0;   // T
  std::vector<AccessType> access = {AccessType::LTE, AccessType::None,
                                    AccessType::ThreeG, AccessType::ThreeG,
                                    AccessType::WiFi};
  std::vector<double> downlink_mbps = {12.7, 0.0, 1.0, 1.0, 4.12};
  double energy_budget = 2000.0;  // E_i, Joules
  double delta = 1.0;             // cost sensitivity
  double recv_energy = 1.0;       // e^r, J/MB
  double quad_reg = 1e-4;         // strict-concavity regularizer weight
  double alpha_lo = 0.3, alpha_hi = 0.9;
  std::uint64_t seed = 42;
};

// Per-user decision vector layout (full WiFi-Direct mesh):
//   [0, I)                         y_i(n), data downloaded by i destined to n
//   [I, I + (I-1)*I)               x^r_{i<-j}(n), receive, j in others(i)
//   [I + (I-1)*I, I + 2(I-1)*I)    x^s_{j<-i}(n), send to j, j in others(i)
// All traffic in MB over the period; capacities scaled by T/8.
struct UpnInstance {
  ProblemInstance inst;
  UpnParams params;
  std::vector<std::pair<double, double>> pos;
  std::vector<double> alpha;
  std::map<std::pair<int, int>, double> link_cap_mbps;  // (receiver, sender)
  std::map<int, std::string> constraint_tag;          // id -> group
  int dim_per_agent = 0;

  int y_index(int n) const { return n - 1; }
  int r_index(int i, int j, int n) const;  // x^r_{i<-j}(n) in agent i's vector
  int s_index(int i, int j, int n) const;  // x^s_{j<-i}(n) in agent i's vector
};

UpnInstance gen_upn(const UpnParams& params);

// Standalone own-downlink payoffs (the non-cooperative benchmark).
std::vector<double> upn_benchmark(const UpnInstance& upn,
                                  const SolveConfig& cfg);

struct MisreportScenario {
  std::function<double(double)> U = [](double x) { return std::log1p(x); };
  std::function<double(double)> Uprime = [](double x) { return 1.0 / (1 + x); };
  std::function<double(double)> C = [](double x) { return 0.5 * x * x; };
  std::function<double(double)> Cprime = [](double x) { return x; };
  double c = 10.0;       // true capacity
  double A = 1.0;        // true delivery ratio
  double c_tilde = 10.0; // reported capacity
  double A_tilde = 1.0;  // reported delivery ratio
};

struct MisreportResult {
  double x_star = 0.0;
  double p_star = 0.0;
  double provider_profit = 0.0;
  double network_utility = 0.0;
};

MisreportResult misreport_equilibrium(const MisreportScenario& s);

ProblemInstance fog_fixture();

}  // namespace denum

#endif
