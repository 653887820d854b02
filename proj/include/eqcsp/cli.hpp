#pragma once

// Command implementations behind the eqcsp tool.  Each returns one JSON
// record; fields appear in a fixed order with "version" first.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eqcsp/abelian_solver.hpp"
#include "eqcsp/error.hpp"
#include "eqcsp/group_universe.hpp"
#include "eqcsp/oracle.hpp"
#include "eqcsp/pseudo_siggers.hpp"
#include "eqcsp/semilattice.hpp"
#include "eqcsp/term.hpp"
#include "eqcsp/verdict.hpp"

namespace eqcsp::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* version = "0.1.0";

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read file: " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// --budget if given, else EQCSP_BUDGET, else the library default.
inline std::uint64_t resolve_budget(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("EQCSP_BUDGET")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string_view(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InputError("EQCSP_BUDGET is not a nonnegative integer");
  }
  return default_budget;
}

inline json header(std::string_view command) {
  json j;
  j["version"] = version;
  j["command"] = command;
  j["status"] = nullptr;
  return j;
}

/// Either a group descriptor or the universal semilattice.
struct Structure {
  bool is_U = false;
  GroupDescriptor group;

  static Structure parse(std::string_view text) {
    Structure s;
    std::string t;
    for (char c : text)
      if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    if (t == "U") {
      s.is_U = true;
      return s;
    }
    s.group = parse_descriptor(text);
    return s;
  }

  SignatureKind kind() const { return is_U ? SignatureKind::semilattice : SignatureKind::group; }
  std::string text() const { return is_U ? "U" : to_string(group); }
};

inline json normal_form_json(const BiEmbedClass& cls) {
  json out = json::object();
  for (const auto& [p, c] : cls.primes) {
    json finite = json::object();
    for (const auto& [level, count] : c.finite) finite[std::to_string(level)] = count;
    out[std::to_string(p)] = {{"m", c.m}, {"finite", finite}};
  }
  return out;
}

inline json classification_json(const GroupDescriptor& d) {
  const Classification c = classify(d);
  json j;
  j["group"] = to_string(d);
  j["normal_form"] = normal_form_json(biembed_normal_form(d));
  j["class"] = c.tractable ? "tractable" : "np-hard";
  if (c.tractable) {
    j["m"] = c.m;
    j["with_double"] = c.with_double;
  }
  return j;
}

inline json group_witness_json(const GroupWitness& w, const std::vector<std::string>& names, std::size_t shown) {
  json j;
  j["moduli"] = w.moduli;
  if (w.shape) j["shape"] = {{"m", w.shape->m}, {"k", w.shape->k}, {"with_double", w.shape->with_double}};
  json a = json::object();
  for (std::size_t v = 0; v < shown; ++v) a[names[v]] = w.values[v];
  j["assignment"] = a;
  return j;
}

inline json semilattice_witness_json(const SemilatticeWitness& w, const std::vector<std::string>& names,
                                     std::size_t shown) {
  json j;
  j["m"] = w.m;
  json a = json::object();
  for (std::size_t v = 0; v < shown; ++v) a[names[v]] = w.sets[v];
  j["assignment"] = a;
  return j;
}

inline json cmd_classify(const std::string& group) {
  const GroupDescriptor d = parse_descriptor(group);
  json j = header("classify");
  json c = classification_json(d);
  j["status"] = c["class"];
  j["group"] = c["group"];
  j["normal_form"] = c["normal_form"];
  if (c.contains("m")) {
    j["m"] = c["m"];
    j["with_double"] = c["with_double"];
  }
  return j;
}

inline json cmd_solve(const std::string& structure, const std::string& instance_path,
                      std::optional<std::uint64_t> budget_flag = std::nullopt) {
  const Structure s = Structure::parse(structure);
  const std::uint64_t budget = resolve_budget(budget_flag);
  const Instance inst = parse_instance(read_file(instance_path));
  if (inst.kind != s.kind())
    throw InputError("instance signature " + std::string(to_string(inst.kind)) + " does not match structure " +
                     s.text());
  const FlatInstance flat = flatten(inst);
  json j = header("solve");
  j["structure"] = s.text();
  j["instance"] = instance_path;
  auto name_pair = [&](VarIndex x, VarIndex y) { return json::array({flat.variables[x], flat.variables[y]}); };

  if (s.is_U) {
    j["method"] = "horn";
    const SemilatticeVerdict v = solve_U(flat);
    j["status"] = to_string(v.status);
    if (v.sat()) {
      j["witness"] = semilattice_witness_json(*v.witness, flat.variables, flat.original_count);
    } else if (v.pair) {
      j["reason"] = "disequality-entailed";
      j["pair"] = name_pair(v.pair->first, v.pair->second);
    }
    return j;
  }

  const Classification c = classify(s.group);
  j["classification"] = classification_json(s.group);
  j["method"] = c.tractable ? "tractable" : "search-based";
  const AbelianInstance ai = linearize_group(flat);
  const Verdict v = c.tractable ? solve_tractable(c, ai) : solve_general(s.group, ai, budget);
  j["status"] = to_string(v.status);
  if (v.sat()) {
    j["witness"] = group_witness_json(*v.witness, flat.variables, flat.original_count);
  } else if (v.reason) {
    j["reason"] = to_string(*v.reason);
    if (v.pair) j["pair"] = name_pair(v.pair->first, v.pair->second);
  }
  if (v.search_based) j["steps"] = v.steps;
  return j;
}

/// Entailment of lhs = rhs from the equations of an optional instance file;
/// identity checking when there is none.
inline json cmd_check(std::string_view command, const std::string& structure, const std::string& lhs_text,
                      const std::string& rhs_text, const std::optional<std::string>& assume_path,
                      std::optional<std::uint64_t> budget_flag = std::nullopt) {
  const Structure s = Structure::parse(structure);
  const std::uint64_t budget = resolve_budget(budget_flag);
  const TermPtr lhs = parse_term(lhs_text, s.kind());
  const TermPtr rhs = parse_term(rhs_text, s.kind());
  std::vector<std::pair<TermPtr, TermPtr>> equations;
  json j = header(command);
  j["structure"] = s.text();
  j["lhs"] = to_string(*lhs);
  j["rhs"] = to_string(*rhs);
  if (assume_path) {
    const Instance a = parse_instance(read_file(*assume_path));
    if (a.kind != s.kind()) throw InputError("assumption signature does not match structure " + s.text());
    json listed = json::array();
    for (const auto& c : a.constraints) {
      if (c.relation != Constraint::Relation::eq) throw InputError("assumptions must be equations");
      equations.emplace_back(c.lhs, c.rhs);
      listed.push_back(to_string(*c.lhs) + " = " + to_string(*c.rhs));
    }
    j["assumptions"] = listed;
  }
  try {
    bool holds;
    if (s.is_U) {
      holds = check_entailment_U(equations, lhs, rhs);
    } else {
      j["classification"] = classification_json(s.group);
      holds = check_entailment(equations, {lhs, rhs}, s.group, budget);
    }
    j["status"] = holds ? "valid" : "invalid";
  } catch (const BudgetExhausted&) {
    j["status"] = "budget-exhausted";
  }
  return j;
}

inline json report_json(const ps::Report& r) {
  json j;
  j["n"] = r.n;
  j["truncation"] = r.truncation;
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["identity"] = {{"checks", r.identity_checks}, {"passed", r.identity_passed}};
  j["distinct"] = {{"checks", r.distinct_checks}, {"passed", r.distinct_passed}};
  j["homomorphism"] = {{"checks", r.homomorphism_checks}, {"passed", r.homomorphism_passed}};
  j["alpha"] = {{"checks", r.alpha_checks}, {"passed", r.alpha_passed}};
  j["max_output_level"] = r.max_output_level;
  j["failures"] = r.failures;
  return j;
}

inline json cmd_verify_ps(std::uint64_t n, std::size_t truncation, std::size_t samples, std::uint64_t seed) {
  const ps::Report r = ps::verify_pseudo_siggers(n, truncation, samples, seed);
  json j = header("verify-ps");
  j["status"] = r.passed() ? "pass" : "fail";
  j["report"] = report_json(r);
  return j;
}

/// Maximum counts for random fuzz instances; actual counts are drawn per seed.
struct FuzzParams {
  std::size_t variables = 5;
  std::size_t equations = 6;
  std::size_t disequalities = 4;
  unsigned depth = 2;

  /// "vars=5,eqs=6,neqs=4,depth=2", any subset.
  static FuzzParams parse(std::string_view text) {
    FuzzParams p;
    std::string item;
    std::istringstream in{std::string(text)};
    while (std::getline(in, item, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw InputError("bad fuzz parameter: " + item);
      const std::string key = item.substr(0, eq);
      std::uint64_t value = 0;
      try {
        std::size_t used = 0;
        value = std::stoull(item.substr(eq + 1), &used);
        if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw InputError("bad fuzz parameter value: " + item);
      }
      if (value > 64) throw InputError("fuzz parameter too large: " + item);
      if (key == "vars")
        p.variables = value;
      else if (key == "eqs")
        p.equations = value;
      else if (key == "neqs")
        p.disequalities = value;
      else if (key == "depth")
        p.depth = static_cast<unsigned>(value);
      else
        throw InputError("unknown fuzz parameter: " + key);
    }
    return p;
  }

  oracle::GenParams draw(std::uint64_t seed) const {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    oracle::GenParams g;
    g.variables = 1 + rng() % std::max<std::size_t>(variables, 1);
    if (variables == 0) g.variables = 0;
    g.equations = rng() % (equations + 1);
    g.disequalities = rng() % (disequalities + 1);
    g.seed = seed;
    g.max_depth = depth;
    return g;
  }
};

/// The finite group whose satisfiability matches the target on instances
/// with k disequalities: Z_2m + Z_m^k or Z_m^k when tractable, Z_n^k + H in
/// general.
inline oracle::FiniteAbelianGroup witness_group(const GroupDescriptor& d, std::size_t k) {
  const Classification c = classify(d);
  std::vector<Residue> moduli;
  if (c.tractable) {
    if (c.with_double) moduli.push_back(2 * c.m);
    for (std::size_t i = 0; i < k; ++i) moduli.push_back(c.m);
  } else {
    const BiEmbedClass cls = biembed_normal_form(d);
    for (std::size_t i = 0; i < k; ++i) moduli.push_back(cls.omega_modulus());
    for (Residue q : cls.finite_moduli()) moduli.push_back(q);
  }
  return oracle::FiniteAbelianGroup(std::move(moduli));
}

inline json cmd_fuzz(const std::string& structure, std::size_t count, std::uint64_t seed,
                     const std::string& params_text = "", const std::optional<std::string>& records_path = std::nullopt,
                     std::optional<std::uint64_t> budget_flag = std::nullopt) {
  const Structure s = Structure::parse(structure);
  const std::uint64_t budget = resolve_budget(budget_flag);
  const FuzzParams params = FuzzParams::parse(params_text);
  std::optional<std::ofstream> records;
  if (records_path) {
    records.emplace(*records_path);
    if (!*records) throw InputError("cannot write file: " + *records_path);
  }

  json j = header("fuzz");
  j["structure"] = s.text();
  j["count"] = count;
  j["seed"] = seed;
  j["params"] = {{"vars", params.variables}, {"eqs", params.equations}, {"neqs", params.disequalities},
                 {"depth", params.depth}};
  std::size_t agreed = 0, skipped = 0;
  json disagreements = json::array();

  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t sd = seed + i;
    const Instance inst = oracle::random_instance(params.draw(sd), s.kind());
    const FlatInstance flat = flatten(inst);
    std::string solver, truth;
    bool agree = true, skip = false;
    if (s.is_U) {
      solver = to_string(solve_U(flat).status);
      const std::size_t v = inst.variables.size();
      const bool exact = v <= 3;
      const FiniteSemilattice target = FiniteSemilattice::subsets(exact ? (std::size_t{1} << v) - 1 : 4);
      truth = to_string(solve_finite(target, flat, budget).status);
      if (truth == "budget-exhausted")
        skip = true;
      else if (exact)
        agree = solver == truth;
      else
        agree = !(truth == "sat" && solver == "unsat");
    } else {
      const AbelianInstance ai = linearize_group(flat);
      const Verdict v = solve_group(s.group, ai, budget);
      solver = to_string(v.status);
      const Verdict o = oracle::brute_solve_group(witness_group(s.group, ai.disequalities.size()), ai, budget);
      truth = to_string(o.status);
      if (v.status == Status::budget_exhausted || o.status == Status::budget_exhausted)
        skip = true;
      else
        agree = solver == truth;
    }
    if (skip)
      ++skipped;
    else if (agree)
      ++agreed;
    else
      disagreements.push_back({{"seed", sd}, {"instance", print_instance(inst)}, {"verdict_solver", solver},
                               {"verdict_oracle", truth}});
    if (records) {
      json rec;
      rec["seed"] = sd;
      rec["descriptor"] = s.text();
      rec["verdict_solver"] = solver;
      rec["verdict_oracle"] = truth;
      rec["agree"] = agree;
      *records << rec.dump() << '\n';
    }
  }
  j["status"] = disagreements.empty() ? "pass" : "fail";
  j["agreed"] = agreed;
  j["skipped"] = skipped;
  j["disagreements"] = disagreements;
  return j;
}

inline json error_record(std::string_view command, const std::string& message) {
  json j = header(command);
  j["status"] = "error";
  j["message"] = message;
  return j;
}

}  // namespace eqcsp::cli
