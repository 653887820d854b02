#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eqcsp/modlinalg.hpp"
#include "eqcsp/term.hpp"

namespace eqcsp {

using modlin::Residue;

enum class Status { sat, unsat, budget_exhausted };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::sat:
      return "sat";
    case Status::unsat:
      return "unsat";
    case Status::budget_exhausted:
      return "budget-exhausted";
  }
  return "?";
}

enum class UnsatReason { equations_unsolvable, disequality_entailed, double_layer_unsolvable, finite_part_exhausted };

inline std::string_view to_string(UnsatReason r) {
  switch (r) {
    case UnsatReason::equations_unsolvable:
      return "equations-unsolvable";
    case UnsatReason::disequality_entailed:
      return "disequality-entailed";
    case UnsatReason::double_layer_unsolvable:
      return "double-layer-unsolvable";
    case UnsatReason::finite_part_exhausted:
      return "finite-part-exhausted";
  }
  return "?";
}

/// Assignment into the finite group Z_{moduli[0]} + ... + Z_{moduli[d-1]}.
/// For the polynomial solver the moduli are [2m, m, ..., m] (or [m, ..., m]
/// without the double layer) and `shape` records m and the layer count k.
struct GroupWitness {
  struct Shape {
    Residue m = 1;
    std::size_t k = 0;
    bool with_double = false;
  };
  std::vector<Residue> moduli;
  std::optional<Shape> shape;
  std::vector<std::vector<Residue>> values;  // values[var][component]

  /// Evaluates every row and disequality of the instance.
  bool verify(const AbelianInstance& inst) const {
    if (values.size() != inst.variable_count()) return false;
    for (const auto& v : values) {
      if (v.size() != moduli.size()) return false;
      for (std::size_t c = 0; c < moduli.size(); ++c)
        if (v[c] >= moduli[c]) return false;
    }
    for (const auto& row : inst.rows) {
      for (std::size_t c = 0; c < moduli.size(); ++c) {
        const Residue q = moduli[c];
        Residue s = 0;
        for (const auto& co : row) s = modlin::add_mod(s, modlin::mul_mod(modlin::reduce(co.value, q), values[co.var][c], q), q);
        if (s != 0) return false;
      }
    }
    for (const auto& [x, y] : inst.disequalities)
      if (values[x] == values[y]) return false;
    return true;
  }
};

struct Verdict {
  Status status = Status::unsat;
  std::optional<GroupWitness> witness;
  std::optional<UnsatReason> reason;
  std::optional<std::pair<VarIndex, VarIndex>> pair;  // the entailed disequality, when reported
  bool search_based = false;
  std::uint64_t steps = 0;

  bool sat() const noexcept { return status == Status::sat; }

  static Verdict make_sat(GroupWitness w) {
    Verdict v;
    v.status = Status::sat;
    v.witness = std::move(w);
    return v;
  }
  static Verdict make_unsat(UnsatReason r, std::optional<std::pair<VarIndex, VarIndex>> p = std::nullopt) {
    Verdict v;
    v.status = Status::unsat;
    v.reason = r;
    v.pair = p;
    return v;
  }
  static Verdict make_exhausted() {
    Verdict v;
    v.status = Status::budget_exhausted;
    return v;
  }
};

/// Default step budget for search procedures; the EQCSP_BUDGET environment
/// variable overrides it in the command-line tool.
inline constexpr std::uint64_t default_budget = 10'000'000;

}  // namespace eqcsp
