#include "denum/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace denum {

namespace {

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int l = 0; l < v.size(); ++l) a.push_back(v[l]);
  return a;
}

Vec vec_from(const json& a, const std::string& field) {
  if (!a.is_array()) throw SchemaError("expected array for " + field);
  Vec v(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (!a[l].is_number()) throw SchemaError("non-numeric entry in " + field);
    v[l] = a[l].get<double>();
  }
  return v;
}

json influence_to_json(const Influence& h) {
  if (h.kind != Influence::Kind::Affine)
    throw IoError("general convex influences are not serializable");
  return json{{"form", "affine"}, {"a", vec_to_json(h.coeffs)}};
}

}  // namespace

json instance_to_json(const ProblemInstance& inst) {
  json doc;
  doc["agents"] = json::array();
  for (const auto& a : inst.agents) {
    json ja;
    ja["id"] = a.id;
    ja["dim"] = a.dim;
    if (a.utility.form.is_null())
      throw IoError("agent " + std::to_string(a.id) +
                    " has a code-constructed utility; cannot serialize");
    ja["utility"] = a.utility.form;
    json ls;
    ls["lo"] = vec_to_json(a.local_set.lo);
    ls["hi"] = vec_to_json(a.local_set.hi);
    ls["affine_ineqs"] = json::array();
    for (const auto& hs : a.local_set.affine_ineqs)
      ls["affine_ineqs"].push_back(
          json{{"g", vec_to_json(hs.g)}, {"d", hs.d}});
    ls["affine_eqs"] = json::array();
    for (const auto& hs : a.local_set.affine_eqs)
      ls["affine_eqs"].push_back(json{{"g", vec_to_json(hs.g)}, {"d", hs.d}});
    ja["local_set"] = ls;
    json inf = json::object();
    for (const auto& [n, h] : a.influences)
      inf[std::to_string(n)] = influence_to_json(h);
    ja["influences"] = inf;
    if (!a.influence_bound.empty()) {
      json b = json::object();
      for (const auto& [n, v] : a.influence_bound) b[std::to_string(n)] = v;
      ja["influence_bound"] = b;
    }
    doc["agents"].push_back(ja);
  }
  doc["constraints"] = json::array();
  for (const auto& c : inst.constraints)
    doc["constraints"].push_back(
        json{{"id", c.id},
             {"relation", c.relation == Relation::Equality ? "eq" : "le"},
             {"rhs", c.rhs}});
  return doc;
}

ProblemInstance instance_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("agents") || !doc.contains("constraints"))
    throw SchemaError("instance document needs \"agents\" and \"constraints\"");
  std::vector<AgentSpec> agents;
  for (const auto& ja : doc["agents"]) {
    AgentSpec a;
    if (!ja.contains("id") || !ja.contains("dim"))
      throw SchemaError("agent entry needs \"id\" and \"dim\"");
    a.id = ja["id"].get<int>();
    a.dim = ja["dim"].get<int>();
    if (!ja.contains("utility")) throw SchemaError("agent missing \"utility\"");
    a.utility = make_utility(ja["utility"], a.dim);
    if (!ja.contains("local_set")) throw SchemaError("agent missing \"local_set\"");
    const json& ls = ja["local_set"];
    a.local_set = LocalSet::box(vec_from(ls.at("lo"), "local_set.lo"),
                                vec_from(ls.at("hi"), "local_set.hi"));
    if (ls.contains("affine_ineqs"))
      for (const auto& hs : ls["affine_ineqs"])
        a.local_set.affine_ineqs.push_back(
            {vec_from(hs.at("g"), "affine_ineqs.g"), hs.at("d").get<double>()});
    if (ls.contains("affine_eqs"))
      for (const auto& hs : ls["affine_eqs"])
        a.local_set.affine_eqs.push_back(
            {vec_from(hs.at("g"), "affine_eqs.g"), hs.at("d").get<double>()});
    if (ja.contains("influences"))
      for (const auto& [key, form] : ja["influences"].items())
        a.influences[std::stoi(key)] = make_influence(form, a.dim);
    if (ja.contains("influence_bound"))
      for (const auto& [key, v] : ja["influence_bound"].items())
        a.influence_bound[std::stoi(key)] = v.get<double>();
    agents.push_back(std::move(a));
  }
  std::vector<ConstraintSpec> constraints;
  for (const auto& jc : doc["constraints"]) {
    ConstraintSpec c;
    c.id = jc.at("id").get<int>();
    const std::string rel = jc.at("relation").get<std::string>();
    if (rel == "eq")
      c.relation = Relation::Equality;
    else if (rel == "le")
      c.relation = Relation::Inequality;
    else
      throw SchemaError("unknown relation \"" + rel + "\"");
    c.rhs = jc.at("rhs").get<double>();
    constraints.push_back(c);
  }
  return build_instance(std::move(agents), std::move(constraints));
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return instance_from_json(doc);
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << canonical_dump(instance_to_json(inst)) << "\n";
}

std::string canonical_dump(const json& doc) {
  return doc.dump();  // nlohmann::json keeps object keys sorted
}

std::string instance_hash(const ProblemInstance& inst) {
  const std::string s = canonical_dump(instance_to_json(inst));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return std::string(buf);
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void export_trace(const RunTrace& trace, const std::string& path,
                  TraceFormat fmt) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  if (fmt == TraceFormat::Csv) {
    out << "k,sub_i,constraint,p,tau,t,utility,alpha\n";
    for (const auto& r : trace.records)
      for (const auto& [n, p] : r.p)
        out << r.k << ',' << r.i << ',' << n << ',' << num(p) << ','
            << num(r.tau.at(n)) << ',' << num(r.t.at(n)) << ','
            << num(r.utility) << ',' << num(r.alpha) << "\n";
  } else {
    for (const auto& r : trace.records) {
      json j;
      j["k"] = r.k;
      j["sub_i"] = r.i;
      j["p"] = r.p;
      j["tau"] = r.tau;
      j["t"] = r.t;
      j["x"] = vec_to_json(r.x);
      j["utility"] = r.utility;
      j["alpha"] = r.alpha;
      out << j.dump() << "\n";
    }
  }
  if (!out) throw IoError("write failure on " + path);
}

void export_dy_trace(const DyTrace& trace, const std::string& path,
                     TraceFormat fmt) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  if (fmt == TraceFormat::Csv) {
    out << "k,sub_i,constraint,p,utility,alpha\n";
    for (const auto& r : trace.records)
      for (const auto& [n, p] : r.p)
        out << r.k << ',' << r.i << ',' << n << ',' << num(p) << ','
            << num(r.utility) << ',' << num(r.alpha) << "\n";
  } else {
    for (const auto& r : trace.records) {
      json j;
      j["k"] = r.k;
      j["sub_i"] = r.i;
      j["p"] = r.p;
      j["d"] = vec_to_json(r.d);
      j["grad_u"] = vec_to_json(r.grad_u);
      j["utility"] = r.utility;
      j["alpha"] = r.alpha;
      out << j.dump() << "\n";
    }
  }
  if (!out) throw IoError("write failure on " + path);
}

json summary_to_json(const RunSummary& s) {
  json j;
  j["instance_hash"] = s.instance_hash;
  j["config"] = s.config_echo;
  j["mechanism"] = s.mechanism;
  j["converged"] = s.converged;
  j["iterations"] = s.iterations;
  j["final_objective"] = s.final_objective;
  j["oracle_gap"] = s.oracle_gap;
  json ir = json::object();
  for (const auto& [i, v] : s.ir_slacks) ir[std::to_string(i)] = v;
  j["ir_slacks"] = ir;
  j["budget_residual"] = s.budget_residual;
  j["budget_residual_expected_nonzero"] = s.budget_residual_expected_nonzero;
  j["wall_ms"] = s.wall_ms;
  return j;
}

std::string report_table(const std::vector<RunSummary>& runs) {
  std::ostringstream os;
  os << "mechanism    E1 gap        E2 min IR slack  E3 |sum taxes|  note\n";
  for (const auto& s : runs) {
    double min_ir = 0.0;
    bool have_ir = !s.ir_slacks.empty();
    if (have_ir) {
      min_ir = s.ir_slacks.begin()->second;
      for (const auto& [i, v] : s.ir_slacks) min_ir = std::min(min_ir, v);
    }
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %-13.6g %-16s %-15s %s\n",
                  s.mechanism.c_str(), s.oracle_gap,
                  have_ir ? num(min_ir).c_str() : "-",
                  s.mechanism == "benchmark" ? "-" : num(s.budget_residual).c_str(),
                  s.budget_residual_expected_nonzero ? "deficiency expected"
                                                     : "");
    os << line;
  }
  return os.str();
}

}  // namespace denum
