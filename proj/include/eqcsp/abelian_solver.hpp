#pragma once

// Satisfiability of flattened group instances.
//
// For a tractable target Z_m^(w) (+ Z_2m), equalities are linear over Z_m.  A
// disequality not entailed over Z_m is separated by its own Z_m layer.  The
// entailed ones must be separated in the Z_2m summand, where two elements
// that agree mod m differ exactly when their difference is m; that makes the
// second stage the linear system Phi_e & (x - y = m) over Z_2m.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eqcsp/error.hpp"
#include "eqcsp/group_universe.hpp"
#include "eqcsp/modlinalg.hpp"
#include "eqcsp/oracle.hpp"
#include "eqcsp/term.hpp"
#include "eqcsp/verdict.hpp"

namespace eqcsp {

namespace detail {

inline std::vector<modlin::SparseRow> rows_mod(const AbelianInstance& inst, Residue k) {
  std::vector<modlin::SparseRow> out;
  out.reserve(inst.rows.size());
  for (const auto& row : inst.rows) {
    modlin::SparseRow r;
    for (const auto& c : row)
      if (Residue v = modlin::reduce(c.value, k)) r.push_back({c.var, v});
    out.push_back(std::move(r));
  }
  return out;
}

/// Z_k layers: one solution of the equations per non-entailed disequality,
/// separating it.  Returns the indices of entailed disequalities.
inline std::vector<std::size_t> separate(const AbelianInstance& inst, Residue k,
                                         std::vector<std::vector<Residue>>& layers) {
  modlin::LinearSystem sys(k, inst.variable_count(), rows_mod(inst, k), std::vector<Residue>(inst.rows.size(), 0));
  std::vector<std::size_t> entailed;
  for (std::size_t i = 0; i < inst.disequalities.size(); ++i) {
    const auto [x, y] = inst.disequalities[i];
    if (sys.entails_equal(x, y)) {
      entailed.push_back(i);
      continue;
    }
    auto t = sys.separating_solution(x, y);
    if (!t) throw Error("internal: non-entailed disequality has no separating solution");
    layers.push_back(std::move(*t));
  }
  return entailed;
}

inline void append_layers(GroupWitness& w, Residue k, const std::vector<std::vector<Residue>>& layers) {
  for (const auto& t : layers) {
    w.moduli.push_back(k);
    for (std::size_t v = 0; v < w.values.size(); ++v) w.values[v].push_back(t[v]);
  }
}

}  // namespace detail

/// Polynomial-time decision for a tractable classification.
inline Verdict solve_tractable(const Classification& c, const AbelianInstance& inst) {
  if (!c.tractable) throw InputError("solve_tractable needs a tractable classification");
  const Residue m = c.m;
  const std::size_t n = inst.variable_count();

  std::vector<std::vector<Residue>> layers;
  const std::vector<std::size_t> entailed = detail::separate(inst, m, layers);

  GroupWitness w;
  w.values.assign(n, {});
  if (!c.with_double) {
    if (!entailed.empty()) return Verdict::make_unsat(UnsatReason::disequality_entailed, inst.disequalities[entailed[0]]);
  } else {
    const Residue q = modlin::checked_double(m);
    std::vector<modlin::SparseRow> rows = detail::rows_mod(inst, q);
    std::vector<Residue> rhs(rows.size(), 0);
    for (std::size_t i : entailed) {
      const auto [x, y] = inst.disequalities[i];
      modlin::SparseRow r;
      if (x < y)
        r = {{x, 1}, {y, q - 1}};
      else if (y < x)
        r = {{y, q - 1}, {x, 1}};
      rows.push_back(std::move(r));
      rhs.push_back(m);
    }
    modlin::LinearSystem sys(q, n, rows, rhs);
    if (!sys.solvable()) return Verdict::make_unsat(UnsatReason::double_layer_unsolvable);
    w.moduli.push_back(q);
    const auto& r = sys.particular();
    for (std::size_t v = 0; v < n; ++v) w.values[v].push_back(r[v]);
  }
  detail::append_layers(w, m, layers);
  w.shape = GroupWitness::Shape{m, layers.size(), c.with_double};
  if (!w.verify(inst)) throw Error("internal: witness fails verification");
  return Verdict::make_sat(std::move(w));
}

/// Any target, via Z_n^(w) + H with n = prod p^{m_p} and H finite: disequalities
/// entailed over Z_n must all be separated in H, which is searched.
inline Verdict solve_general(const GroupDescriptor& d, const AbelianInstance& inst,
                             std::uint64_t budget = default_budget) {
  const BiEmbedClass cls = biembed_normal_form(d);
  const Residue n = cls.omega_modulus();
  std::vector<std::vector<Residue>> layers;
  const std::vector<std::size_t> entailed = detail::separate(inst, n, layers);

  AbelianInstance rest;
  rest.variables = inst.variables;
  rest.original_count = inst.original_count;
  rest.rows = inst.rows;
  for (std::size_t i : entailed) rest.disequalities.push_back(inst.disequalities[i]);

  const oracle::FiniteAbelianGroup h(cls.finite_moduli());
  Verdict found = oracle::brute_solve_group(h, rest, budget);
  found.search_based = true;
  if (found.status == Status::budget_exhausted) return found;
  if (!found.sat()) {
    Verdict v = Verdict::make_unsat(UnsatReason::finite_part_exhausted);
    if (!entailed.empty() && h.rank() == 0) {
      v = Verdict::make_unsat(UnsatReason::disequality_entailed, inst.disequalities[entailed[0]]);
    }
    v.search_based = true;
    v.steps = found.steps;
    return v;
  }
  GroupWitness w;
  w.values.assign(inst.variable_count(), {});
  detail::append_layers(w, n, layers);
  for (std::size_t c = 0; c < h.rank(); ++c) {
    w.moduli.push_back(h.moduli()[c]);
    for (std::size_t v = 0; v < w.values.size(); ++v) w.values[v].push_back(found.witness->values[v][c]);
  }
  if (!w.verify(inst)) throw Error("internal: witness fails verification");
  Verdict v = Verdict::make_sat(std::move(w));
  v.search_based = true;
  v.steps = found.steps;
  return v;
}

/// Classifies, then dispatches to the polynomial or the search-based solver.
inline Verdict solve_group(const GroupDescriptor& d, const AbelianInstance& inst, std::uint64_t budget = default_budget) {
  const Classification c = classify(d);
  return c.tractable ? solve_tractable(c, inst) : solve_general(d, inst, budget);
}

inline Verdict solve_group(const GroupDescriptor& d, const Instance& inst, std::uint64_t budget = default_budget) {
  if (inst.kind != SignatureKind::group) throw InputError("instance is not over the group signature");
  return solve_group(d, linearize_group(flatten(inst)), budget);
}

namespace detail {

inline bool unsat_or_throw(const Verdict& v) {
  if (v.status == Status::budget_exhausted) throw BudgetExhausted("search exceeded budget");
  return !v.sat();
}

}  // namespace detail

/// Whether s = t holds for every assignment.
inline bool check_identity(const TermPtr& s, const TermPtr& t, const GroupDescriptor& d,
                           std::uint64_t budget = default_budget) {
  return detail::unsat_or_throw(solve_group(d, entailment_instance(SignatureKind::group, {}, s, t), budget));
}

/// Whether the equations imply lhs = rhs.
inline bool check_entailment(const std::vector<std::pair<TermPtr, TermPtr>>& equations,
                             const std::pair<TermPtr, TermPtr>& goal, const GroupDescriptor& d,
                             std::uint64_t budget = default_budget) {
  return detail::unsat_or_throw(
      solve_group(d, entailment_instance(SignatureKind::group, equations, goal.first, goal.second), budget));
}

}  // namespace eqcsp
