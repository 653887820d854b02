#pragma once

// Ground truth by exhaustive search over finite groups and Boolean models,
// plus seeded generators of random and structured instances.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "eqcsp/error.hpp"
#include "eqcsp/group_universe.hpp"
#include "eqcsp/modlinalg.hpp"
#include "eqcsp/semilattice.hpp"
#include "eqcsp/term.hpp"
#include "eqcsp/verdict.hpp"

namespace eqcsp::oracle {

using modlin::Residue;
using Element = std::vector<Residue>;

class FiniteAbelianGroup {
 public:
  FiniteAbelianGroup() = default;
  explicit FiniteAbelianGroup(std::vector<Residue> moduli) : moduli_(std::move(moduli)) {
    for (Residue m : moduli_)
      if (m == 0) throw InputError("cyclic modulus must be at least 1");
  }

  const std::vector<Residue>& moduli() const noexcept { return moduli_; }
  std::size_t rank() const noexcept { return moduli_.size(); }

  std::uint64_t order() const {
    std::uint64_t n = 1;
    for (Residue m : moduli_) n = checked_mul(n, m);
    return n;
  }

  Element zero() const { return Element(moduli_.size(), 0); }

  /// Mixed-radix decoding, last component varying fastest.
  Element element(std::uint64_t index) const {
    Element e(moduli_.size(), 0);
    for (std::size_t c = moduli_.size(); c-- > 0;) {
      e[c] = index % moduli_[c];
      index /= moduli_[c];
    }
    return e;
  }

  /// Steps to the next element in lexicographic order; false after the last.
  bool next(Element& e) const {
    for (std::size_t c = moduli_.size(); c-- > 0;) {
      if (++e[c] < moduli_[c]) return true;
      e[c] = 0;
    }
    return false;
  }

  Element add(const Element& a, const Element& b) const {
    Element r(a.size());
    for (std::size_t c = 0; c < a.size(); ++c) r[c] = modlin::add_mod(a[c], b[c], moduli_[c]);
    return r;
  }

  Element times(const Element& a, std::int64_t k) const {
    Element r(a.size());
    for (std::size_t c = 0; c < a.size(); ++c) r[c] = modlin::mul_mod(modlin::reduce(k, moduli_[c]), a[c], moduli_[c]);
    return r;
  }

  std::uint64_t element_order(const Element& a) const {
    std::uint64_t o = 1;
    for (std::size_t c = 0; c < a.size(); ++c) {
      const std::uint64_t oc = moduli_[c] / std::gcd(moduli_[c], a[c]);
      o = o / std::gcd(o, oc) * oc;
    }
    return o;
  }

 private:
  std::vector<Residue> moduli_;
};

namespace detail {

/// Depth-first search for assignments of an abelian instance in a finite
/// group.  Variables are taken in declared order and values ascending; rows
/// are checked once their last variable is set, and a variable that is the
/// last one of a row with coefficient +-1 is computed instead of enumerated.
class GroupSearch {
 public:
  GroupSearch(const FiniteAbelianGroup& g, const AbelianInstance& inst, bool check_disequalities,
              std::uint64_t& steps, std::uint64_t budget)
      : g_(g), inst_(inst), check_neq_(check_disequalities), steps_(steps), budget_(budget) {
    const std::size_t n = inst.variable_count();
    rows_at_.resize(n);
    neqs_at_.resize(n);
    force_.assign(n, npos);
    used_.assign(n, false);
    for (std::size_t r = 0; r < inst.rows.size(); ++r) {
      const auto& row = inst.rows[r];
      if (row.empty()) continue;
      for (const auto& c : row) used_[c.var] = true;
      const std::size_t last = row.back().var;
      rows_at_[last].push_back(r);
      if ((row.back().value == 1 || row.back().value == -1) && force_[last] == npos) force_[last] = r;
    }
    for (std::size_t i = 0; i < inst.disequalities.size(); ++i) {
      const auto [x, y] = inst.disequalities[i];
      used_[x] = used_[y] = true;
      if (check_neq_) neqs_at_[std::max(x, y)].push_back(i);
    }
    values_.assign(n, g.zero());
  }

  /// Calls visit on each solution until it returns true; returns whether it did.
  bool run(const std::function<bool(const std::vector<Element>&)>& visit) {
    visit_ = &visit;
    return descend(0);
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  void tick() {
    if (++steps_ > budget_) throw BudgetExhausted("group search exceeded budget");
  }

  bool row_holds(std::size_t r) const {
    const auto& mod = g_.moduli();
    for (std::size_t c = 0; c < mod.size(); ++c) {
      Residue s = 0;
      for (const auto& co : inst_.rows[r])
        s = modlin::add_mod(s, modlin::mul_mod(modlin::reduce(co.value, mod[c]), values_[co.var][c], mod[c]), mod[c]);
      if (s != 0) return false;
    }
    return true;
  }

  bool consistent(std::size_t v) const {
    for (std::size_t r : rows_at_[v])
      if (!row_holds(r)) return false;
    for (std::size_t i : neqs_at_[v])
      if (values_[inst_.disequalities[i].first] == values_[inst_.disequalities[i].second]) return false;
    return true;
  }

  bool descend(std::size_t v) {
    if (v == values_.size()) return (*visit_)(values_);
    if (!used_[v]) return descend(v + 1);
    if (force_[v] != npos) {
      tick();
      const auto& row = inst_.rows[force_[v]];
      Element sum = g_.zero();
      for (std::size_t i = 0; i + 1 < row.size(); ++i) sum = g_.add(sum, g_.times(values_[row[i].var], row[i].value));
      // c*v + sum = 0 with c = +-1
      values_[v] = g_.times(sum, row.back().value == 1 ? -1 : 1);
      return consistent(v) && descend(v + 1);
    }
    Element e = g_.zero();
    do {
      tick();
      values_[v] = e;
      if (consistent(v) && descend(v + 1)) return true;
    } while (g_.next(e));
    values_[v] = g_.zero();
    return false;
  }

  const FiniteAbelianGroup& g_;
  const AbelianInstance& inst_;
  bool check_neq_;
  std::uint64_t& steps_;
  std::uint64_t budget_;
  std::vector<std::vector<std::size_t>> rows_at_;
  std::vector<std::vector<std::size_t>> neqs_at_;
  std::vector<std::size_t> force_;
  std::vector<bool> used_;
  std::vector<Element> values_;
  const std::function<bool(const std::vector<Element>&)>* visit_ = nullptr;
};

inline Verdict finish_sat(const FiniteAbelianGroup& g, const AbelianInstance& inst, std::vector<Element> values,
                          std::uint64_t steps) {
  GroupWitness w;
  w.moduli = g.moduli();
  w.values = std::move(values);
  if (!w.verify(inst)) throw Error("internal: oracle assignment fails verification");
  Verdict v = Verdict::make_sat(std::move(w));
  v.steps = steps;
  return v;
}

}  // namespace detail

/// Exact satisfiability in a finite abelian group.  Solutions decompose into
/// independent cyclic coordinates, so with few disequalities each distinct
/// modulus is searched once for the sets of disequalities a single coordinate
/// can separate, followed by a union over the coordinates; otherwise whole
/// group elements are searched directly.
inline Verdict brute_solve_group(const FiniteAbelianGroup& g, const AbelianInstance& inst,
                                 std::uint64_t budget = default_budget) {
  std::uint64_t steps = 0;
  const std::size_t d = inst.disequalities.size();
  for (const auto& [x, y] : inst.disequalities)
    if (x == y) return Verdict::make_unsat(UnsatReason::finite_part_exhausted, std::make_pair(x, y));
  try {
    if (d <= 16) {
      using Mask = std::uint32_t;
      const Mask full = d == 0 ? 0 : static_cast<Mask>((std::uint64_t{1} << d) - 1);
      // For each distinct modulus: mask -> one coordinate solution realizing it.
      std::map<Residue, std::map<Mask, std::vector<Residue>>> options;
      for (Residue q : g.moduli()) {
        if (options.count(q)) continue;
        auto& found = options[q];
        FiniteAbelianGroup cyclic({q});
        detail::GroupSearch search(cyclic, inst, false, steps, budget);
        search.run([&](const std::vector<Element>& vals) {
          Mask m = 0;
          for (std::size_t i = 0; i < d; ++i)
            if (vals[inst.disequalities[i].first] != vals[inst.disequalities[i].second]) m |= Mask{1} << i;
          if (!found.count(m)) {
            std::vector<Residue> coord(vals.size());
            for (std::size_t v = 0; v < vals.size(); ++v) coord[v] = vals[v][0];
            found.emplace(m, std::move(coord));
          }
          return found.size() == (std::size_t{1} << d);
        });
        if (found.empty()) {
          Verdict v = Verdict::make_unsat(UnsatReason::equations_unsolvable);
          v.steps = steps;
          return v;
        }
      }
      // reachable union -> chosen mask per coordinate
      std::map<Mask, std::vector<Mask>> reach{{0, {}}};
      for (Residue q : g.moduli()) {
        std::map<Mask, std::vector<Mask>> next;
        for (const auto& [acc, choice] : reach)
          for (const auto& [m, sol] : options[q]) {
            if (next.count(acc | m)) continue;
            auto c = choice;
            c.push_back(m);
            next.emplace(acc | m, std::move(c));
          }
        reach = std::move(next);
      }
      auto it = reach.find(full);
      if (it == reach.end()) {
        Verdict v = Verdict::make_unsat(UnsatReason::finite_part_exhausted);
        v.steps = steps;
        return v;
      }
      std::vector<Element> values(inst.variable_count(), Element(g.rank(), 0));
      for (std::size_t c = 0; c < g.rank(); ++c) {
        const auto& sol = options[g.moduli()[c]].at(it->second[c]);
        for (std::size_t v = 0; v < values.size(); ++v) values[v][c] = sol[v];
      }
      return detail::finish_sat(g, inst, std::move(values), steps);
    }
    std::optional<std::vector<Element>> found;
    detail::GroupSearch search(g, inst, true, steps, budget);
    search.run([&](const std::vector<Element>& vals) {
      found = vals;
      return true;
    });
    if (found) return detail::finish_sat(g, inst, std::move(*found), steps);
    Verdict v = Verdict::make_unsat(UnsatReason::finite_part_exhausted);
    v.steps = steps;
    return v;
  } catch (const BudgetExhausted&) {
    Verdict v = Verdict::make_exhausted();
    v.steps = steps;
    return v;
  }
}

/// Every assignment in lexicographic order, no propagation.
inline Verdict naive_solve_group(const FiniteAbelianGroup& g, const AbelianInstance& inst,
                                 std::uint64_t budget = default_budget) {
  const std::size_t n = inst.variable_count();
  std::vector<Element> values(n, g.zero());
  GroupWitness probe;
  probe.moduli = g.moduli();
  std::uint64_t steps = 0;
  while (true) {
    if (++steps > budget) {
      Verdict v = Verdict::make_exhausted();
      v.steps = steps;
      return v;
    }
    probe.values = values;
    if (probe.verify(inst)) return detail::finish_sat(g, inst, values, steps);
    std::size_t v = n;
    while (v-- > 0) {
      if (g.next(values[v])) break;
    }
    if (v == static_cast<std::size_t>(-1)) break;
  }
  Verdict v = Verdict::make_unsat(UnsatReason::finite_part_exhausted);
  v.steps = steps;
  return v;
}

// -- embeddability -----------------------------------------------------------

/// prime -> exponents of the cyclic p-power factors of the group.
inline std::map<std::uint64_t, std::vector<unsigned>> invariant_partitions(const FiniteAbelianGroup& g) {
  std::map<std::uint64_t, std::vector<unsigned>> out;
  for (Residue q : g.moduli()) {
    for (std::uint64_t p = 2; q > 1; ++p) {
      if (p * p > q) p = q;
      unsigned e = 0;
      while (q % p == 0) {
        q /= p;
        ++e;
      }
      if (e) out[p].push_back(e);
    }
  }
  for (auto& [p, parts] : out) std::sort(parts.rbegin(), parts.rend());
  return out;
}

/// g embeds in h iff, prime by prime, the sorted exponent lists of g are
/// dominated termwise by those of h.
inline bool brute_embeddable(const FiniteAbelianGroup& g, const FiniteAbelianGroup& h) {
  const auto pg = invariant_partitions(g);
  const auto ph = invariant_partitions(h);
  for (const auto& [p, lam] : pg) {
    auto it = ph.find(p);
    if (it == ph.end()) return false;
    const auto& mu = it->second;
    if (lam.size() > mu.size()) return false;
    for (std::size_t i = 0; i < lam.size(); ++i)
      if (lam[i] > mu[i]) return false;
  }
  return true;
}

/// Searches all homomorphisms given by generator images for an injective one.
inline bool embeddable_exhaustive(const FiniteAbelianGroup& g, const FiniteAbelianGroup& h) {
  const std::uint64_t gorder = g.order();
  const std::uint64_t horder = h.order();
  if (gorder > 256 || horder > 256) throw InputError("groups too large for exhaustive embedding search");
  std::vector<std::vector<Element>> candidates(g.rank());
  std::uint64_t combos = 1;
  for (std::size_t i = 0; i < g.rank(); ++i) {
    Element e = h.zero();
    do {
      if (g.moduli()[i] % h.element_order(e) == 0) candidates[i].push_back(e);
    } while (h.next(e));
    combos = checked_mul(combos, candidates[i].size());
  }
  if (combos > 10'000'000) throw InputError("exhaustive embedding search too large");
  std::vector<Element> gens(g.rank());
  std::function<bool(std::size_t)> pick = [&](std::size_t i) -> bool {
    if (i == g.rank()) {
      std::set<Element> image;
      Element x = g.zero();
      do {
        Element y = h.zero();
        for (std::size_t c = 0; c < g.rank(); ++c) y = h.add(y, h.times(gens[c], static_cast<std::int64_t>(x[c])));
        if (!image.insert(y).second) return false;
      } while (g.next(x));
      return true;
    }
    for (const auto& e : candidates[i]) {
      gens[i] = e;
      if (pick(i + 1)) return true;
    }
    return false;
  };
  return pick(0);
}

// -- generators --------------------------------------------------------------

struct GenParams {
  std::size_t variables = 0;
  std::size_t equations = 0;
  std::size_t disequalities = 0;
  std::uint64_t seed = 0;
  unsigned max_depth = 2;
};

namespace detail {

inline std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return n == 0 ? 0 : rng() % n; }

inline TermPtr random_term(std::mt19937_64& rng, const std::vector<std::string>& vars, unsigned depth,
                           SignatureKind kind) {
  const bool leaf = depth == 0 || below(rng, 3) == 0;
  if (kind == SignatureKind::group) {
    if (leaf || vars.empty()) {
      if (vars.empty() || below(rng, 6) == 0) return Term::zero();
      return Term::variable(vars[below(rng, vars.size())]);
    }
    if (below(rng, 3) == 2) return Term::negation(random_term(rng, vars, depth - 1, kind));
    auto a = random_term(rng, vars, depth - 1, kind);
    return Term::sum(std::move(a), random_term(rng, vars, depth - 1, kind));
  }
  if (leaf) return Term::variable(vars[below(rng, vars.size())]);
  auto a = random_term(rng, vars, depth - 1, kind);
  return Term::meet(std::move(a), random_term(rng, vars, depth - 1, kind));
}

inline std::vector<std::string> numbered(std::size_t n, const std::string& prefix = "x") {
  std::vector<std::string> v;
  for (std::size_t i = 1; i <= n; ++i) v.push_back(prefix + std::to_string(i));
  return v;
}

}  // namespace detail

/// Equations first, then disequalities, each between two random terms of
/// depth at most max_depth.  Semilattice instances without variables get no
/// constraints (there are no closed semilattice terms).
inline Instance random_instance(const GenParams& p, SignatureKind kind) {
  std::mt19937_64 rng(p.seed);
  Instance inst;
  inst.kind = kind;
  inst.variables = detail::numbered(p.variables);
  if (kind == SignatureKind::semilattice && p.variables == 0) return inst;
  auto add = [&](Constraint::Relation rel) {
    auto lhs = detail::random_term(rng, inst.variables, p.max_depth, kind);
    auto rhs = detail::random_term(rng, inst.variables, p.max_depth, kind);
    inst.constraints.push_back({rel, std::move(lhs), std::move(rhs)});
  };
  for (std::size_t i = 0; i < p.equations; ++i) add(Constraint::Relation::eq);
  for (std::size_t i = 0; i < p.disequalities; ++i) add(Constraint::Relation::neq);
  return inst;
}

/// One disequality per edge: satisfiable in a structure with at least c
/// elements and no further constraint iff the graph is c-colorable.
inline Instance coloring_instance(std::size_t vertices, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                  SignatureKind kind = SignatureKind::group) {
  Instance inst;
  inst.kind = kind;
  inst.variables = detail::numbered(vertices, "v");
  for (const auto& [a, b] : edges) {
    if (a >= vertices || b >= vertices) throw InputError("edge endpoint out of range");
    inst.constraints.push_back(
        {Constraint::Relation::neq, Term::variable(inst.variables[a]), Term::variable(inst.variables[b])});
  }
  return inst;
}

inline Instance clique_instance(std::size_t k, SignatureKind kind = SignatureKind::group) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) edges.emplace_back(a, b);
  return coloring_instance(k, edges, kind);
}

/// Large flat instance satisfied by a hidden assignment into Z_modulus that
/// separates every disequality.  Equations are u = x + y, u = -x and u = x,
/// with u drawn among the variables carrying the right hidden value.
inline AbelianInstance planted_group_instance(std::size_t variables, std::size_t equations,
                                              std::size_t disequalities, Residue modulus, std::uint64_t seed) {
  if (variables < 2 || modulus < 2) throw InputError("planted instance needs two variables and modulus >= 2");
  std::mt19937_64 rng(seed);
  AbelianInstance inst;
  inst.variables = detail::numbered(variables);
  inst.original_count = variables;
  std::vector<Residue> hidden(variables);
  std::vector<std::vector<VarIndex>> by_value(modulus);
  for (std::size_t v = 0; v < variables; ++v) {
    hidden[v] = v < modulus ? v : detail::below(rng, modulus);
    by_value[hidden[v]].push_back(v);
  }
  auto pick = [&](Residue value) { return by_value[value][detail::below(rng, by_value[value].size())]; };
  const auto q = static_cast<std::int64_t>(modulus);
  while (inst.rows.size() < equations) {
    const VarIndex x = detail::below(rng, variables);
    const VarIndex y = detail::below(rng, variables);
    const auto kind = detail::below(rng, 10);
    LinearRow row;
    if (kind < 7) {
      const VarIndex u = pick((hidden[x] + hidden[y]) % modulus);
      row = eqcsp::detail::make_row({{x, 1}, {y, 1}, {u, -1}});
    } else if (kind < 9) {
      const VarIndex u = pick((modulus - hidden[x]) % modulus);
      row = eqcsp::detail::make_row({{x, -1}, {u, -1}});
    } else {
      const VarIndex u = pick(hidden[x]);
      row = eqcsp::detail::make_row({{x, 1}, {u, -1}});
    }
    for (auto& c : row) c.value %= q;
    row.erase(std::remove_if(row.begin(), row.end(), [](const Coefficient& c) { return c.value == 0; }), row.end());
    if (!row.empty()) inst.rows.push_back(std::move(row));
  }
  while (inst.disequalities.size() < disequalities) {
    const VarIndex x = detail::below(rng, variables);
    const VarIndex y = detail::below(rng, variables);
    if (hidden[x] != hidden[y]) inst.disequalities.emplace_back(x, y);
  }
  return inst;
}

/// Flat semilattice instance over `variables` variables with `atoms` atoms
/// drawn from meets, equalities and disequalities.
inline FlatInstance random_flat_semilattice(std::size_t variables, std::size_t atoms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FlatInstance f;
  f.kind = SignatureKind::semilattice;
  f.variables = detail::numbered(variables);
  f.original_count = variables;
  if (variables == 0) return f;
  auto var = [&] { return static_cast<VarIndex>(detail::below(rng, variables)); };
  for (std::size_t i = 0; i < atoms; ++i) {
    const auto k = detail::below(rng, 10);
    if (k < 5) {
      GraphAtom g{};
      g.op = Operation::meet;
      g.result = var();
      g.args = {var(), var()};
      f.atoms.emplace_back(g);
    } else if (k < 7) {
      f.atoms.emplace_back(VarEq{var(), var()});
    } else {
      f.atoms.emplace_back(VarNeq{var(), var()});
    }
  }
  return f;
}

inline HornProblem random_horn(std::size_t variables, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  HornProblem p;
  p.variables = variables;
  if (variables == 0) return p;
  auto var = [&] { return static_cast<std::size_t>(detail::below(rng, variables)); };
  const std::size_t meets = detail::below(rng, variables + 1);
  for (std::size_t i = 0; i < meets; ++i) p.meets.push_back({var(), var(), var()});
  const std::size_t fixed = detail::below(rng, 4);
  for (std::size_t i = 0; i < fixed; ++i) p.fixed.emplace_back(var(), detail::below(rng, 2) == 1);
  const std::size_t links = detail::below(rng, 3);
  for (std::size_t i = 0; i < links; ++i) p.links.emplace_back(var(), var());
  return p;
}

/// All models of a Horn problem by enumeration (at most 20 variables).
inline std::vector<std::vector<bool>> horn_models(const HornProblem& p) {
  if (p.variables > 20) throw InputError("too many variables to enumerate");
  std::vector<std::vector<bool>> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << p.variables); ++mask) {
    std::vector<bool> x(p.variables);
    for (std::size_t v = 0; v < p.variables; ++v) x[v] = mask >> v & 1;
    if (p.satisfied_by(x)) out.push_back(std::move(x));
  }
  return out;
}

}  // namespace eqcsp::oracle
