#ifndef DENUM_IO_HPP
#define DENUM_IO_HPP

#include <string>

#include "denum/algorithm.hpp"
#include "denum/dydenum.hpp"
#include "denum/instance.hpp"

namespace denum {

json instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const json& doc);

ProblemInstance load_instance(const std::string& path);
void save_instance(const ProblemInstance& inst, const std::string& path);

// Canonical serialization (sorted keys, compact separators); the basis of
// the portable instance hash (FNV-1a, 64-bit, hex).
std::string canonical_dump(const json& doc);
std::string instance_hash(const ProblemInstance& inst);

enum class TraceFormat { Csv, Jsonl };

// CSV columns: k,sub_i,constraint,p,tau,t,utility,alpha (one row per
// (sub-iteration, constraint); 17 significant digits).
void export_trace(const RunTrace& trace, const std::string& path,
                  TraceFormat fmt);
// Same layout plus demand/marginal-utility columns.
void export_dy_trace(const DyTrace& trace, const std::string& path,
                     TraceFormat fmt);

struct RunSummary {
  std::string instance_hash;
  json config_echo;
  std::string mechanism;  // "denum" | "dydenum" | "oracle" | "benchmark"
  bool converged = false;
  int iterations = 0;
  double final_objective = 0.0;
  double oracle_gap = 0.0;          // E1
  std::map<int, double> ir_slacks;  // E2
  double budget_residual = 0.0;     // E3: |sum_i Pi_i|
  bool budget_residual_expected_nonzero = false;
  double wall_ms = 0.0;
};

json summary_to_json(const RunSummary& s);

// Human-readable verification table for the three economic properties.
std::string report_table(const std::vector<RunSummary>& runs);

}  // namespace denum

#endif
