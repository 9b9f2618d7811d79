#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "denum/io.hpp"
#include "denum/oracle_solver.hpp"
#include "denum/scenarios.hpp"

namespace {

using namespace denum;

bool log_enabled() {
  const char* v = std::getenv("DENUM_LOG");
  return v && *v && std::string(v) != "0";
}

void logln(const std::string& msg) {
  if (log_enabled()) std::cerr << "[denum] " << msg << "\n";
}

json load_doc(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// config precedence: CLI flag > instance-embedded "config" object > default
double cfg_num(const CLI::Option* opt, double cli_val, const json& embedded,
               const char* key, double fallback) {
  if (opt && opt->count() > 0) return cli_val;
  if (embedded.is_object() && embedded.contains(key))
    return embedded[key].get<double>();
  return fallback;
}

void write_or_print(const json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open " + out_path + " for writing");
    out << doc.dump(2) << "\n";
  }
}

json oracle_to_json(const ProblemInstance& inst, const OracleSolution& sol) {
  json j;
  j["objective"] = sol.objective;
  j["converged"] = sol.converged;
  j["iterations"] = sol.iterations;
  json lam = json::object();
  for (int k = 0; k < inst.num_constraints(); ++k)
    lam[std::to_string(inst.constraints[k].id)] = sol.lambda_opt.lambda[k];
  j["lambda"] = lam;
  json xs = json::array();
  for (const auto& xi : sol.x_opt) {
    json a = json::array();
    for (int l = 0; l < xi.size(); ++l) a.push_back(xi[l]);
    xs.push_back(a);
  }
  j["x"] = xs;
  j["kkt"] = {{"stationarity", sol.kkt.stationarity},
              {"comp_slackness", sol.kkt.comp_slackness},
              {"primal_feas", sol.kkt.primal_feas},
              {"dual_feas", sol.kkt.dual_feas}};
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DeNUM mechanism simulation kit"};
  app.require_subcommand(1);

  std::string instance_path, out_path, trace_path, format = "csv";
  std::string summary_path;
  double tol = 1e-6, eps = 1e-4, sched_a = 51.0, sched_b = 50.0;
  double init_price = 1.0, ctilde = 10.0, atilde = 1.0;
  int max_iters = 10000, resolution = 0;
  std::uint64_t seed = 1;
  bool deep = false;

  auto add_common = [&](CLI::App* sub, bool needs_instance = true) {
    if (needs_instance)
      sub->add_option("--instance", instance_path, "instance JSON file")
          ->required();
    sub->add_option("--tol", tol, "solver tolerance");
    sub->add_option("--max-iters", max_iters, "iteration cap");
    sub->add_option("--out", out_path, "output file (default: stdout)");
  };

  CLI::App* solve = app.add_subcommand("solve", "centralized oracle solve");
  add_common(solve);

  CLI::App* rden = app.add_subcommand("run-denum", "run the DeNUM algorithm");
  add_common(rden);
  auto* rden_seed = rden->add_option("--seed", seed, "price-init RNG seed");
  auto* rden_eps = rden->add_option("--eps", eps, "termination tolerance");
  auto* rden_a = rden->add_option("--sched-a", sched_a, "step numerator");
  auto* rden_b = rden->add_option("--sched-b", sched_b, "step offset");
  rden->add_option("--trace", trace_path, "trace output file");
  rden->add_option("--format", format, "trace format: csv|jsonl");

  CLI::App* rdy = app.add_subcommand("run-dydenum", "run the DyDeNUM mechanism");
  add_common(rdy);
  auto* rdy_eps = rdy->add_option("--eps", eps, "termination tolerance");
  auto* rdy_a = rdy->add_option("--sched-a", sched_a, "step numerator");
  auto* rdy_b = rdy->add_option("--sched-b", sched_b, "step offset");
  auto* rdy_c = rdy->add_option("--init-price", init_price, "common constant C");
  rdy->add_option("--trace", trace_path, "trace output file");
  rdy->add_option("--format", format, "trace format: csv|jsonl");
  bool with_initial_taxes = false;
  rdy->add_flag("--with-initial-taxes", with_initial_taxes,
                "also run the exclusion loops for Pi[0]");

  CLI::App* itx = app.add_subcommand("initial-taxes",
                                     "distributed initial-tax computation");
  add_common(itx);
  auto* itx_eps = itx->add_option("--eps", eps, "termination tolerance");
  auto* itx_a = itx->add_option("--sched-a", sched_a, "step numerator");
  auto* itx_b = itx->add_option("--sched-b", sched_b, "step offset");
  auto* itx_c = itx->add_option("--init-price", init_price, "common constant C");

  CLI::App* verify = app.add_subcommand(
      "verify", "construct a GNE from the oracle and verify it");
  add_common(verify);
  verify->add_flag("--deep", deep, "also re-solve per-agent best responses");

  CLI::App* scen = app.add_subcommand("scenario", "scenario generators");
  scen->require_subcommand(1);
  CLI::App* scen_upn = scen->add_subcommand("upn", "user-provided network");
  scen_upn->add_option("--seed", seed, "placement seed");
  scen_upn->add_option("--users", resolution, "number of users")->default_val(5);
  scen_upn->add_option("--out", out_path, "instance output file");
  CLI::App* scen_mis = scen->add_subcommand("misreport", "misreport demo");
  scen_mis->add_option("--ctilde", ctilde, "reported capacity");
  scen_mis->add_option("--atilde", atilde, "reported delivery ratio");
  int scan = 0;
  scen_mis->add_option("--scan", scan, "emit a CSV scan with N report values");
  CLI::App* scen_fog = scen->add_subcommand("fog", "two-agent fog fixture");
  scen_fog->add_option("--out", out_path, "instance output file");

  CLI::App* report = app.add_subcommand("report", "verification table");
  std::vector<std::string> summaries;
  report->add_option("--summary", summaries, "run summary JSON file(s)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    SolveConfig scfg;
    scfg.tol = tol;

    if (solve->parsed()) {
      ProblemInstance inst = load_instance(instance_path);
      logln("instance " + instance_hash(inst));
      OracleSolution sol = solve_centralized(inst, scfg);
      write_or_print(oracle_to_json(inst, sol), out_path);
      return sol.converged ? 0 : 3;
    }

    if (rden->parsed()) {
      json doc = load_doc(instance_path);
      ProblemInstance inst = instance_from_json(doc);
      const json embedded = doc.value("config", json::object());
      RunConfig cfg;
      cfg.eps = cfg_num(rden_eps, eps, embedded, "eps", 1e-4);
      cfg.schedule.a = cfg_num(rden_a, sched_a, embedded, "sched_a", 51.0);
      cfg.schedule.b = cfg_num(rden_b, sched_b, embedded, "sched_b", 50.0);
      cfg.seed = rden_seed->count() ? seed
                                    : static_cast<std::uint64_t>(
                                          embedded.value("seed", 1));
      cfg.max_iters = max_iters;
      cfg.local.tol = std::min(tol, 1e-9);

      auto t0 = std::chrono::steady_clock::now();
      DenumRunResult run = run_denum(inst, cfg);
      auto t1 = std::chrono::steady_clock::now();
      if (!trace_path.empty())
        export_trace(run.trace, trace_path,
                     format == "jsonl" ? TraceFormat::Jsonl : TraceFormat::Csv);

      RunSummary s;
      s.instance_hash = instance_hash(inst);
      s.config_echo = {{"eps", cfg.eps},
                       {"sched_a", cfg.schedule.a},
                       {"sched_b", cfg.schedule.b},
                       {"seed", cfg.seed}};
      s.mechanism = "denum";
      s.converged = run.trace.converged;
      s.iterations = run.trace.iterations;
      s.final_objective = network_utility(inst, run.x);
      s.budget_residual = std::abs(run.taxes.sum_total());
      for (const auto& a : inst.agents)
        s.ir_slacks[a.id] = a.utility.value(run.x[a.id - 1]) -
                            run.taxes.total.at(a.id) -
                            opt_out_payoff(inst, a.id, scfg);
      s.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      write_or_print(summary_to_json(s), out_path);
      return run.trace.converged ? 0 : 3;
    }

    if (rdy->parsed() || itx->parsed()) {
      CLI::App* sub = rdy->parsed() ? rdy : itx;
      json doc = load_doc(instance_path);
      ProblemInstance inst = instance_from_json(doc);
      const json embedded = doc.value("config", json::object());
      DyConfig cfg;
      cfg.eps = cfg_num(sub == rdy ? rdy_eps : itx_eps, eps, embedded, "eps",
                        1e-4);
      cfg.schedule.a =
          cfg_num(sub == rdy ? rdy_a : itx_a, sched_a, embedded, "sched_a", 350.0);
      cfg.schedule.b =
          cfg_num(sub == rdy ? rdy_b : itx_b, sched_b, embedded, "sched_b", 2000.0);
      cfg.init_price = cfg_num(sub == rdy ? rdy_c : itx_c, init_price, embedded,
                               "init_price", 1.0);
      cfg.max_iters = max_iters;
      cfg.local.tol = std::min(tol, 1e-9);

      if (itx->parsed()) {
        TaxLedger ledger = initial_taxes(inst, cfg);
        json j;
        for (const auto& [i, v] : ledger.pi0) j[std::to_string(i)] = v;
        write_or_print(json{{"pi0", j}}, out_path);
        return 0;
      }

      std::map<int, double> pi0;
      if (with_initial_taxes) pi0 = initial_taxes(inst, cfg).pi0;
      auto t0 = std::chrono::steady_clock::now();
      DyRunResult run = run_dydenum(inst, cfg, with_initial_taxes ? &pi0 : nullptr);
      auto t1 = std::chrono::steady_clock::now();
      if (!trace_path.empty())
        export_dy_trace(run.trace, trace_path,
                        format == "jsonl" ? TraceFormat::Jsonl
                                          : TraceFormat::Csv);

      RunSummary s;
      s.instance_hash = instance_hash(inst);
      s.config_echo = {{"eps", cfg.eps},
                       {"sched_a", cfg.schedule.a},
                       {"sched_b", cfg.schedule.b},
                       {"init_price", cfg.init_price}};
      s.mechanism = "dydenum";
      s.converged = run.trace.converged;
      s.iterations = run.trace.iterations;
      s.final_objective = network_utility(inst, run.d);
      double sum = 0.0;
      for (const auto& [i, v] : run.ledger.total) sum += v;
      s.budget_residual = std::abs(sum);
      s.budget_residual_expected_nonzero = true;
      for (const auto& a : inst.agents)
        s.ir_slacks[a.id] = a.utility.value(run.d[a.id - 1]) -
                            run.ledger.total.at(a.id) -
                            opt_out_payoff(inst, a.id, scfg);
      s.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      json out = summary_to_json(s);
      out["approx_max_rel_error"] = run.approx.max_rel_error;
      write_or_print(out, out_path);
      return run.trace.converged ? 0 : 3;
    }

    if (verify->parsed()) {
      ProblemInstance inst = load_instance(instance_path);
      OracleSolution sol = solve_centralized(inst, scfg);
      auto [x, messages] = gne_from_oracle(inst, sol);
      GneReport rep = verify_gne(inst, x, messages, sol, scfg, deep);
      json j;
      j["common_price_dev"] = rep.common_price_dev;
      j["budget_balance"] = rep.budget_balance;
      j["budget_feas"] = rep.budget_feas;
      j["apm_stationarity"] = rep.apm_stationarity;
      j["efficiency_gap"] = rep.efficiency_gap;
      json ir = json::object();
      for (const auto& [i, v] : rep.ir_slacks) ir[std::to_string(i)] = v;
      j["ir_slacks"] = ir;
      if (deep) j["best_response_gain"] = rep.best_response_gain;
      write_or_print(j, out_path);
      return sol.converged ? 0 : 3;
    }

    if (scen->parsed()) {
      if (scen_upn->parsed()) {
        UpnParams p;
        p.seed = seed;
        if (resolution >= 1 && resolution != 5) {
          p.num_users = resolution;
          p.access.resize(resolution, AccessType::ThreeG);
          p.downlink_mbps.resize(resolution, 1.0);
        }
        UpnInstance upn = gen_upn(p);
        if (out_path.empty()) throw InvalidParams("scenario upn needs --out");
        save_instance(upn.inst, out_path);
        logln("wrote " + out_path + " hash " + instance_hash(upn.inst));
        return 0;
      }
      if (scen_mis->parsed()) {
        MisreportScenario s;
        if (scan > 0) {
          std::cout << "ctilde,atilde,x,p,profit,welfare\n";
          MisreportScenario t;  // truthful baseline bounds the scan domain
          MisreportResult truthful = misreport_equilibrium(t);
          for (int q = 1; q <= scan; ++q) {
            MisreportScenario sc;
            sc.c_tilde = truthful.x_star * q / (scan + 1.0);
            MisreportResult r = misreport_equilibrium(sc);
            std::cout << sc.c_tilde << ',' << sc.A_tilde << ',' << r.x_star
                      << ',' << r.p_star << ',' << r.provider_profit << ','
                      << r.network_utility << "\n";
          }
          for (int q = 1; q <= scan; ++q) {
            MisreportScenario sc;
            sc.A_tilde = q / (scan + 1.0);
            MisreportResult r = misreport_equilibrium(sc);
            std::cout << sc.c_tilde << ',' << sc.A_tilde << ',' << r.x_star
                      << ',' << r.p_star << ',' << r.provider_profit << ','
                      << r.network_utility << "\n";
          }
          return 0;
        }
        s.c_tilde = ctilde;
        s.A_tilde = atilde;
        MisreportResult r = misreport_equilibrium(s);
        json j{{"x", r.x_star},
               {"p", r.p_star},
               {"provider_profit", r.provider_profit},
               {"network_utility", r.network_utility}};
        write_or_print(j, out_path);
        return 0;
      }
      if (scen_fog->parsed()) {
        if (out_path.empty()) throw InvalidParams("scenario fog needs --out");
        save_instance(fog_fixture(), out_path);
        return 0;
      }
    }

    if (report->parsed()) {
      std::vector<RunSummary> runs;
      for (const auto& path : summaries) {
        json j = load_doc(path);
        RunSummary s;
        s.mechanism = j.value("mechanism", "?");
        s.oracle_gap = j.value("oracle_gap", 0.0);
        s.budget_residual = j.value("budget_residual", 0.0);
        s.budget_residual_expected_nonzero =
            j.value("budget_residual_expected_nonzero", false);
        if (j.contains("ir_slacks"))
          for (const auto& [k, v] : j["ir_slacks"].items())
            s.ir_slacks[std::stoi(k)] = v.get<double>();
        runs.push_back(std::move(s));
      }
      std::cout << report_table(runs);
      return 0;
    }
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DenumError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
