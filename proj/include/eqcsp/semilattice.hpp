#pragma once

// Solving over the universal homogeneous semilattice U.  A conjunction psi of
// meet equations together with one disequality x != y has a model in U iff
// psi & x=1 & y=0 or psi & x=0 & y=1 has a model in the two-element
// semilattice, which is Horn satisfiability.  Several disequalities are
// handled one at a time and the Boolean models combined coordinatewise into
// a model inside the subset semilattice S_m.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "eqcsp/error.hpp"
#include "eqcsp/term.hpp"
#include "eqcsp/verdict.hpp"

namespace eqcsp {

// -- Horn problems over ({0,1}; meet, 0, 1) ----------------------------------

struct HornProblem {
  struct Meet {
    std::size_t result;
    std::size_t lhs;
    std::size_t rhs;
  };

  std::size_t variables = 0;
  std::vector<Meet> meets;                       // result = lhs & rhs
  std::vector<std::pair<std::size_t, bool>> fixed;
  std::vector<std::pair<std::size_t, std::size_t>> links;  // equal variables

  void validate() const {
    auto check = [&](std::size_t v) {
      if (v >= variables) throw InputError("horn problem references undeclared variable " + std::to_string(v));
    };
    for (const auto& m : meets) {
      check(m.result);
      check(m.lhs);
      check(m.rhs);
    }
    for (const auto& [v, b] : fixed) check(v);
    for (const auto& [a, b] : links) {
      check(a);
      check(b);
    }
  }

  bool satisfied_by(const std::vector<bool>& x) const {
    if (x.size() != variables) return false;
    for (const auto& m : meets)
      if (x[m.result] != (x[m.lhs] && x[m.rhs])) return false;
    for (const auto& [v, b] : fixed)
      if (x[v] != b) return false;
    for (const auto& [a, b] : links)
      if (x[a] != x[b]) return false;
    return true;
  }
};

/// Least model by forward chaining over z->x, z->y, x&y->z, links and the
/// facts v=1; nullopt if some variable fixed to 0 gets derived.
inline std::optional<std::vector<bool>> horn_solve(const HornProblem& p) {
  p.validate();
  const std::size_t n = p.variables;
  std::vector<std::vector<std::size_t>> implies(n);
  struct Binary {
    std::size_t a, b, head;
    int missing;
  };
  std::vector<Binary> binaries;
  std::vector<std::vector<std::size_t>> watching(n);
  for (const auto& m : p.meets) {
    implies[m.result].push_back(m.lhs);
    implies[m.result].push_back(m.rhs);
    if (m.lhs == m.rhs) {
      implies[m.lhs].push_back(m.result);
    } else {
      watching[m.lhs].push_back(binaries.size());
      watching[m.rhs].push_back(binaries.size());
      binaries.push_back({m.lhs, m.rhs, m.result, 2});
    }
  }
  for (const auto& [a, b] : p.links) {
    implies[a].push_back(b);
    implies[b].push_back(a);
  }

  std::vector<bool> value(n, false);
  std::vector<std::size_t> queue;
  auto make_true = [&](std::size_t v) {
    if (!value[v]) {
      value[v] = true;
      queue.push_back(v);
    }
  };
  for (const auto& [v, b] : p.fixed)
    if (b) make_true(v);
  while (!queue.empty()) {
    const std::size_t v = queue.back();
    queue.pop_back();
    for (std::size_t w : implies[v]) make_true(w);
    for (std::size_t c : watching[v])
      if (--binaries[c].missing == 0) make_true(binaries[c].head);
  }
  for (const auto& [v, b] : p.fixed)
    if (!b && value[v]) return std::nullopt;
  if (!p.satisfied_by(value)) throw Error("internal: horn model fails verification");
  return value;
}

// -- U solver ----------------------------------------------------------------

/// Each variable maps to a subset of {1..m}; meet is intersection.
struct SemilatticeWitness {
  std::size_t m = 0;
  std::vector<std::vector<std::size_t>> sets;  // sorted

  /// All atoms hold under intersection and coordinate i+1 separates the i-th
  /// disequality.
  bool verify(const FlatInstance& inst) const {
    if (sets.size() != inst.variables.size()) return false;
    for (const auto& s : sets) {
      if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end()) return false;
      if (!s.empty() && (s.front() < 1 || s.back() > m)) return false;
    }
    auto has = [&](std::size_t v, std::size_t i) { return std::binary_search(sets[v].begin(), sets[v].end(), i); };
    std::size_t coord = 0;
    for (const auto& atom : inst.atoms) {
      if (const auto* g = std::get_if<GraphAtom>(&atom)) {
        if (g->op != Operation::meet) return false;
        std::vector<std::size_t> both;
        std::set_intersection(sets[g->args[0]].begin(), sets[g->args[0]].end(), sets[g->args[1]].begin(),
                              sets[g->args[1]].end(), std::back_inserter(both));
        if (both != sets[g->result]) return false;
      } else if (const auto* e = std::get_if<VarEq>(&atom)) {
        if (sets[e->lhs] != sets[e->rhs]) return false;
      } else {
        const auto& d = std::get<VarNeq>(atom);
        ++coord;
        if (has(d.lhs, coord) == has(d.rhs, coord)) return false;
      }
    }
    return coord == m;
  }
};

struct SemilatticeVerdict {
  Status status = Status::unsat;
  std::optional<SemilatticeWitness> witness;
  std::optional<std::pair<VarIndex, VarIndex>> pair;  // a disequality with neither branch satisfiable

  bool sat() const noexcept { return status == Status::sat; }
};

/// The equation part of a flat semilattice instance as a Horn problem.
inline HornProblem horn_core(const FlatInstance& inst) {
  if (inst.kind != SignatureKind::semilattice) throw InputError("instance is not over the semilattice signature");
  HornProblem p;
  p.variables = inst.variables.size();
  for (const auto& atom : inst.atoms) {
    if (const auto* g = std::get_if<GraphAtom>(&atom)) {
      if (g->op != Operation::meet) throw InputError("operation not in signature semilattice");
      p.meets.push_back({g->result, g->args[0], g->args[1]});
    } else if (const auto* e = std::get_if<VarEq>(&atom)) {
      p.links.emplace_back(e->lhs, e->rhs);
    }
  }
  return p;
}

inline SemilatticeVerdict solve_U(const FlatInstance& inst) {
  const HornProblem core = horn_core(inst);
  std::vector<std::pair<VarIndex, VarIndex>> neqs;
  for (const auto& atom : inst.atoms)
    if (const auto* d = std::get_if<VarNeq>(&atom)) neqs.emplace_back(d->lhs, d->rhs);

  std::vector<std::vector<bool>> branches;
  for (const auto& [x, y] : neqs) {
    std::optional<std::vector<bool>> model;
    for (bool x_high : {true, false}) {
      HornProblem p = core;
      p.fixed.emplace_back(x, x_high);
      p.fixed.emplace_back(y, !x_high);
      model = horn_solve(p);
      if (model) break;
    }
    if (!model) {
      SemilatticeVerdict v;
      v.status = Status::unsat;
      v.pair = std::make_pair(x, y);
      return v;
    }
    branches.push_back(std::move(*model));
  }

  SemilatticeWitness w;
  w.m = neqs.size();
  w.sets.assign(inst.variables.size(), {});
  for (std::size_t v = 0; v < inst.variables.size(); ++v)
    for (std::size_t i = 0; i < branches.size(); ++i)
      if (branches[i][v]) w.sets[v].push_back(i + 1);
  if (!w.verify(inst)) throw Error("internal: semilattice witness fails verification");
  SemilatticeVerdict v;
  v.status = Status::sat;
  v.witness = std::move(w);
  return v;
}

inline bool check_identity_U(const TermPtr& s, const TermPtr& t) {
  return !solve_U(flatten(entailment_instance(SignatureKind::semilattice, {}, s, t))).sat();
}

inline bool check_entailment_U(const std::vector<std::pair<TermPtr, TermPtr>>& equations, const TermPtr& lhs,
                               const TermPtr& rhs) {
  return !solve_U(flatten(entailment_instance(SignatureKind::semilattice, equations, lhs, rhs))).sat();
}

// -- finite semilattices -----------------------------------------------------

class FiniteSemilattice {
 public:
  /// Validates closure, commutativity, idempotence and associativity.
  FiniteSemilattice(std::vector<std::string> names, std::vector<std::vector<std::size_t>> table)
      : names_(std::move(names)), table_(std::move(table)) {
    const std::size_t n = names_.size();
    if (n == 0) throw InputError("semilattice must have at least one element");
    if (table_.size() != n) throw InputError("meet table must be square");
    for (const auto& row : table_) {
      if (row.size() != n) throw InputError("meet table must be square");
      for (std::size_t v : row)
        if (v >= n) throw InputError("meet table entry out of range");
    }
    for (std::size_t a = 0; a < n; ++a) {
      if (table_[a][a] != a) throw InputError("meet is not idempotent at " + names_[a]);
      for (std::size_t b = 0; b < n; ++b) {
        if (table_[a][b] != table_[b][a]) throw InputError("meet is not commutative at " + names_[a] + ", " + names_[b]);
        for (std::size_t c = 0; c < n; ++c)
          if (table_[table_[a][b]][c] != table_[a][table_[b][c]])
            throw InputError("meet is not associative at " + names_[a] + ", " + names_[b] + ", " + names_[c]);
      }
    }
  }

  /// S_n: subsets of {1..n} under intersection; element i is the bitmask i.
  static FiniteSemilattice subsets(std::size_t n) {
    if (n > 12) throw InputError("subset semilattice too large");
    const std::size_t size = std::size_t{1} << n;
    std::vector<std::string> names;
    std::vector<std::vector<std::size_t>> table(size, std::vector<std::size_t>(size));
    for (std::size_t a = 0; a < size; ++a) {
      std::string s = "{";
      for (std::size_t i = 0; i < n; ++i)
        if (a >> i & 1) s += (s.size() > 1 ? "," : "") + std::to_string(i + 1);
      names.push_back(s + "}");
      for (std::size_t b = 0; b < size; ++b) table[a][b] = a & b;
    }
    return FiniteSemilattice(std::move(names), std::move(table), unchecked{});
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t meet(std::size_t a, std::size_t b) const { return table_[a][b]; }
  bool leq(std::size_t a, std::size_t b) const { return table_[a][b] == a; }

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return i;
    throw InputError("unknown element: " + std::string(name));
  }

 private:
  struct unchecked {};
  FiniteSemilattice(std::vector<std::string> names, std::vector<std::vector<std::size_t>> table, unchecked)
      : names_(std::move(names)), table_(std::move(table)) {}

  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> table_;
};

/// Format: `elements e1 e2 ...` then `meet a b c` (a & b = c) for every pair of
/// distinct elements; `#` starts a comment.
inline FiniteSemilattice parse_semilattice(std::string_view text) {
  std::vector<std::string> names;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> table;
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::vector<std::string> w;
    for (std::string s; words >> s;) w.push_back(s);
    if (w.empty()) continue;
    if (w[0] == "elements") {
      if (!names.empty()) throw ParseError("duplicate elements line", line_no, 1);
      if (w.size() < 2) throw ParseError("elements line needs at least one element", line_no, 1);
      for (std::size_t i = 1; i < w.size(); ++i) {
        if (!index.emplace(w[i], names.size()).second) throw ParseError("duplicate element: " + w[i], line_no, 1);
        names.push_back(w[i]);
      }
      table.assign(names.size(), std::vector<std::size_t>(names.size(), unset));
      for (std::size_t i = 0; i < names.size(); ++i) table[i][i] = i;
    } else if (w[0] == "meet") {
      if (names.empty()) throw ParseError("meet line before elements line", line_no, 1);
      if (w.size() != 4) throw ParseError("meet line needs three elements", line_no, 1);
      std::size_t v[3];
      for (int i = 0; i < 3; ++i) {
        auto it = index.find(w[i + 1]);
        if (it == index.end()) throw ParseError("unknown element: " + w[i + 1], line_no, 1);
        v[i] = it->second;
      }
      for (auto [a, b] : {std::pair{v[0], v[1]}, std::pair{v[1], v[0]}}) {
        if (table[a][b] != unset && table[a][b] != v[2])
          throw ParseError("conflicting meet for " + w[1] + " " + w[2], line_no, 1);
        table[a][b] = v[2];
      }
    } else {
      throw ParseError("unknown directive: " + w[0], line_no, 1);
    }
  }
  if (names.empty()) throw InputError("missing elements line");
  for (std::size_t a = 0; a < names.size(); ++a)
    for (std::size_t b = 0; b < names.size(); ++b)
      if (table[a][b] == unset) throw InputError("meet table incomplete: " + names[a] + " " + names[b]);
  return FiniteSemilattice(std::move(names), std::move(table));
}

/// e(x) = { b(y) : y <= x } with b(y) = index of y plus one.
inline std::vector<std::vector<std::size_t>> embed_into_Sn(const FiniteSemilattice& s) {
  std::vector<std::vector<std::size_t>> e(s.size());
  for (std::size_t x = 0; x < s.size(); ++x)
    for (std::size_t y = 0; y < s.size(); ++y)
      if (s.leq(y, x)) e[x].push_back(y + 1);
  return e;
}

/// Injective and meet-preserving into subsets of {1..|s|}.
inline bool verify_embedding(const FiniteSemilattice& s, const std::vector<std::vector<std::size_t>>& e) {
  if (e.size() != s.size()) return false;
  for (std::size_t x = 0; x < s.size(); ++x) {
    for (std::size_t y = 0; y < s.size(); ++y) {
      if (x != y && e[x] == e[y]) return false;
      std::vector<std::size_t> both;
      std::set_intersection(e[x].begin(), e[x].end(), e[y].begin(), e[y].end(), std::back_inserter(both));
      if (both != e[s.meet(x, y)]) return false;
    }
  }
  return true;
}

struct FiniteVerdict {
  Status status = Status::unsat;
  std::vector<std::size_t> assignment;  // element index per variable, when sat
  std::uint64_t steps = 0;

  bool sat() const noexcept { return status == Status::sat; }
};

/// Backtracking in declared variable order, values ascending.  Each atom is
/// checked once its last variable is assigned; meet results and equalities
/// whose other side is already assigned are forced rather than enumerated.
inline FiniteVerdict solve_finite(const FiniteSemilattice& s, const FlatInstance& inst,
                                  std::uint64_t budget = default_budget) {
  const HornProblem core = horn_core(inst);  // validates the signature
  (void)core;
  const std::size_t n = inst.variables.size();
  std::vector<std::vector<const FlatAtom*>> at(n);
  std::vector<bool> used(n, false);
  auto last_of = [](const FlatAtom& a) -> std::size_t {
    if (const auto* g = std::get_if<GraphAtom>(&a)) return std::max({g->result, g->args[0], g->args[1]});
    if (const auto* e = std::get_if<VarEq>(&a)) return std::max(e->lhs, e->rhs);
    const auto& d = std::get<VarNeq>(a);
    return std::max(d.lhs, d.rhs);
  };
  for (const auto& a : inst.atoms) {
    at[last_of(a)].push_back(&a);
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, GraphAtom>) {
            used[x.result] = used[x.args[0]] = used[x.args[1]] = true;
          } else {
            used[x.lhs] = used[x.rhs] = true;
          }
        },
        a);
  }

  FiniteVerdict out;
  std::vector<std::size_t> value(n, 0);
  auto holds = [&](const FlatAtom& a) {
    if (const auto* g = std::get_if<GraphAtom>(&a)) return value[g->result] == s.meet(value[g->args[0]], value[g->args[1]]);
    if (const auto* e = std::get_if<VarEq>(&a)) return value[e->lhs] == value[e->rhs];
    const auto& d = std::get<VarNeq>(a);
    return value[d.lhs] != value[d.rhs];
  };
  auto forced = [&](std::size_t v) -> std::optional<std::size_t> {
    for (const FlatAtom* a : at[v]) {
      if (const auto* g = std::get_if<GraphAtom>(a)) {
        if (g->result == v && g->args[0] < v && g->args[1] < v) return s.meet(value[g->args[0]], value[g->args[1]]);
      } else if (const auto* e = std::get_if<VarEq>(a)) {
        if (e->lhs != e->rhs) return value[e->lhs == v ? e->rhs : e->lhs];
      }
    }
    return std::nullopt;
  };

  auto tick = [&] {
    if (++out.steps > budget) throw BudgetExhausted("finite semilattice search exceeded budget");
  };
  auto consistent = [&](std::size_t v) {
    for (const FlatAtom* a : at[v])
      if (!holds(*a)) return false;
    return true;
  };

  std::function<bool(std::size_t)> search = [&](std::size_t v) -> bool {
    if (v == n) return true;
    if (!used[v]) {
      value[v] = 0;
      return search(v + 1);
    }
    if (auto f = forced(v)) {
      tick();
      value[v] = *f;
      return consistent(v) && search(v + 1);
    }
    for (std::size_t e = 0; e < s.size(); ++e) {
      tick();
      value[v] = e;
      if (consistent(v) && search(v + 1)) return true;
    }
    return false;
  };

  try {
    if (search(0)) {
      out.status = Status::sat;
      out.assignment = value;
      for (const auto& a : inst.atoms)
        if (!holds(a)) throw Error("internal: finite semilattice model fails verification");
    } else {
      out.status = Status::unsat;
    }
  } catch (const BudgetExhausted&) {
    out.status = Status::budget_exhausted;
  }
  return out;
}

}  // namespace eqcsp
