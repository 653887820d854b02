#pragma once

// Exact linear algebra over Z_k for any k >= 1.
//
// Row spans are kept in Howell form: an echelon basis whose leading entries
// divide k and in which every vector of the span that vanishes on the first j
// columns is a combination of the rows leading after column j.  That property
// is what makes membership testing by plain reduction, and back substitution
// with arbitrary free values, correct in the presence of zero divisors.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eqcsp/error.hpp"

namespace eqcsp::modlin {

using Residue = std::uint64_t;

struct Entry {
  std::size_t col;
  Residue value;
  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sorted by column, no zero values, all values reduced.
using SparseRow = std::vector<Entry>;

// -- scalar arithmetic -------------------------------------------------------

inline Residue mul_mod(Residue a, Residue b, Residue k) {
  return static_cast<Residue>(static_cast<unsigned __int128>(a) * b % k);
}

inline Residue add_mod(Residue a, Residue b, Residue k) { return a >= k - b ? a - (k - b) : a + b; }

inline Residue sub_mod(Residue a, Residue b, Residue k) { return a >= b ? a - b : a + (k - b); }

inline Residue neg_mod(Residue a, Residue k) { return a == 0 ? 0 : k - a; }

inline Residue reduce(std::int64_t v, Residue k) {
  auto r = static_cast<__int128>(v) % static_cast<__int128>(k);
  if (r < 0) r += k;
  return static_cast<Residue>(r);
}

struct Bezout {
  Residue gcd;
  __int128 s;  // gcd = s*a + t*b over the integers
  __int128 t;
};

inline Bezout bezout(Residue a, Residue b) {
  __int128 old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    __int128 q = old_r / r;
    std::swap(old_r -= q * r, r);
    std::swap(old_s -= q * s, s);
    std::swap(old_t -= q * t, t);
  }
  return {static_cast<Residue>(old_r), old_s, old_t};
}

inline Residue reduce128(__int128 v, Residue k) {
  __int128 r = v % static_cast<__int128>(k);
  if (r < 0) r += k;
  return static_cast<Residue>(r);
}

/// A unit u of Z_k with u*a = gcd(a, k) (mod k).
inline Residue normalizing_unit(Residue a, Residue k) {
  if (k == 1) return 0;
  const Residue g = std::gcd(a, k);
  const Residue kg = k / g;
  Residue w = 1;
  if (kg > 1) w = reduce128(bezout((a / g) % kg, kg).s, kg);
  // Lift w to a unit modulo k without changing it modulo k/g.
  Residue u = w;
  while (std::gcd(u, k) != 1) u += kg;
  return u % k;
}

inline Residue checked_double(Residue m) {
  if (m > (Residue{1} << 62)) throw InputError("modulus exceeds 64-bit range");
  return 2 * m;
}

inline bool is_unit(Residue a, Residue k) { return std::gcd(a, k) == 1; }

// -- sparse rows -------------------------------------------------------------

/// ca*a + cb*b over Z_k.
inline SparseRow combine(const SparseRow& a, Residue ca, const SparseRow& b, Residue cb, Residue k) {
  SparseRow out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  auto push = [&](std::size_t col, Residue v) {
    if (v != 0) out.push_back({col, v});
  };
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].col < b[j].col)) {
      push(a[i].col, mul_mod(a[i].value, ca, k));
      ++i;
    } else if (i == a.size() || b[j].col < a[i].col) {
      push(b[j].col, mul_mod(b[j].value, cb, k));
      ++j;
    } else {
      push(a[i].col, add_mod(mul_mod(a[i].value, ca, k), mul_mod(b[j].value, cb, k), k));
      ++i;
      ++j;
    }
  }
  return out;
}

inline SparseRow scale(const SparseRow& a, Residue c, Residue k) {
  SparseRow out;
  out.reserve(a.size());
  for (const auto& e : a)
    if (Residue v = mul_mod(e.value, c, k)) out.push_back({e.col, v});
  return out;
}

inline Residue value_at(const SparseRow& row, std::size_t col) {
  auto it = std::lower_bound(row.begin(), row.end(), col, [](const Entry& e, std::size_t c) { return e.col < c; });
  return it != row.end() && it->col == col ? it->value : 0;
}

inline SparseRow to_sparse(const std::vector<Residue>& dense, Residue k) {
  SparseRow row;
  for (std::size_t c = 0; c < dense.size(); ++c)
    if (Residue v = dense[c] % k) row.push_back({c, v});
  return row;
}

inline std::vector<Residue> to_dense(const SparseRow& row, std::size_t cols) {
  std::vector<Residue> dense(cols, 0);
  for (const auto& e : row) dense[e.col] = e.value;
  return dense;
}

// -- matrices ----------------------------------------------------------------

class ModMatrix {
 public:
  ModMatrix(Residue modulus, std::size_t cols) : modulus_(modulus), cols_(cols) {
    if (modulus == 0) throw InputError("modulus must be at least 1");
  }

  static ModMatrix from_dense(Residue modulus, std::size_t cols, const std::vector<std::vector<std::int64_t>>& rows) {
    ModMatrix m(modulus, cols);
    for (const auto& r : rows) {
      if (r.size() != cols) throw InputError("row length does not match column count");
      std::vector<Residue> reduced(cols);
      for (std::size_t c = 0; c < cols; ++c) reduced[c] = reduce(r[c], modulus);
      m.rows_.push_back(to_sparse(reduced, modulus));
    }
    return m;
  }

  /// Unsorted or unreduced entries are normalized; duplicate columns are summed.
  void add_row(std::vector<std::pair<std::size_t, std::int64_t>> entries) {
    std::sort(entries.begin(), entries.end());
    SparseRow row;
    for (const auto& [col, v] : entries) {
      if (col >= cols_) throw InputError("column index out of range");
      Residue r = reduce(v, modulus_);
      if (!row.empty() && row.back().col == col)
        row.back().value = add_mod(row.back().value, r, modulus_);
      else
        row.push_back({col, r});
    }
    row.erase(std::remove_if(row.begin(), row.end(), [](const Entry& e) { return e.value == 0; }), row.end());
    rows_.push_back(std::move(row));
  }

  void add_sparse_row(SparseRow row) { rows_.push_back(std::move(row)); }

  Residue modulus() const noexcept { return modulus_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t row_count() const noexcept { return rows_.size(); }
  const std::vector<SparseRow>& rows() const noexcept { return rows_; }
  Residue at(std::size_t r, std::size_t c) const { return value_at(rows_.at(r), c); }

 private:
  Residue modulus_;
  std::size_t cols_;
  std::vector<SparseRow> rows_;
};

struct HowellForm {
  Residue modulus = 1;
  std::size_t cols = 0;
  std::vector<SparseRow> rows;       // top to bottom, leading columns strictly increasing
  std::vector<std::size_t> pivots;   // leading column of each row

  std::vector<std::vector<Residue>> dense() const {
    std::vector<std::vector<Residue>> out;
    for (const auto& r : rows) out.push_back(to_dense(r, cols));
    return out;
  }

  friend bool operator==(const HowellForm&, const HowellForm&) = default;
};

/// Incrementally maintained Howell basis.  Rows are kept fully eliminated in
/// columns whose pivot is a unit, so reducing a sparse incoming row costs one
/// row operation per unit-pivot entry it touches.
class HowellBuilder {
 public:
  HowellBuilder(Residue modulus, std::size_t cols)
      : k_(modulus), cols_(cols), rows_(cols), lead_(cols, 0) {
    if (modulus == 0) throw InputError("modulus must be at least 1");
  }

  void add_row(SparseRow row) {
    if (k_ == 1) return;
    std::vector<SparseRow> pending{std::move(row)};
    while (!pending.empty()) {
      SparseRow r = std::move(pending.back());
      pending.pop_back();
      insert(std::move(r), pending);
    }
  }

  void add_rows(const ModMatrix& m) {
    for (const auto& r : m.rows()) add_row(r);
  }

  Residue modulus() const noexcept { return k_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t rank() const noexcept { return pivot_cols_.size(); }
  bool has_pivot(std::size_t col) const { return lead_[col] != 0; }

  /// Membership in the row span, by reduction.
  bool contains(SparseRow v) const { return reduce_within(std::move(v), cols_).empty(); }

  /// Reduces v against the basis until its leading column is >= limit or
  /// cannot be cleared; returns the remainder.
  SparseRow reduce_within(SparseRow v, std::size_t limit) const {
    while (!v.empty() && v.front().col < limit) {
      const std::size_t j = v.front().col;
      const Residue p = lead_[j];
      if (p == 0 || v.front().value % p != 0) break;
      v = combine(v, 1, rows_[j], neg_mod(v.front().value / p, k_), k_);
    }
    return v;
  }

  /// The canonical (fully reduced) Howell form.
  HowellForm form() const {
    HowellForm h;
    h.modulus = k_;
    h.cols = cols_;
    std::vector<std::size_t> cols = pivot_cols_;
    std::sort(cols.begin(), cols.end());
    std::vector<SparseRow> reduced(cols_);
    for (auto it = cols.rbegin(); it != cols.rend(); ++it) {
      SparseRow row = rows_[*it];
      std::size_t pos = 1;
      while (pos < row.size()) {
        const std::size_t c = row[pos].col;
        const Residue p = lead_[c];
        if (p != 0 && row[pos].value >= p) {
          row = combine(row, 1, reduced[c], neg_mod(row[pos].value / p, k_), k_);
          pos = static_cast<std::size_t>(
              std::upper_bound(row.begin(), row.end(), c, [](std::size_t x, const Entry& e) { return x < e.col; }) -
              row.begin());
        } else {
          ++pos;
        }
      }
      reduced[*it] = std::move(row);
    }
    for (std::size_t c : cols) {
      h.rows.push_back(std::move(reduced[c]));
      h.pivots.push_back(c);
    }
    return h;
  }

 private:
  void insert(SparseRow r, std::vector<SparseRow>& pending) {
    while (!r.empty()) {
      const std::size_t j = r.front().col;
      const Residue a = r.front().value;
      const Residue p = lead_[j];
      if (p == 0) break;
      if (a % p == 0) {
        r = combine(r, 1, rows_[j], neg_mod(a / p, k_), k_);
        continue;
      }
      // Unimodular 2x2 transform putting gcd(p, a) on the pivot and 0 in r.
      const Bezout bz = bezout(p, a);
      const Residue u = p / bz.gcd;
      const Residue v = a / bz.gcd;
      SparseRow pivot_row = combine(rows_[j], reduce128(bz.s, k_), r, reduce128(bz.t, k_), k_);
      r = combine(r, u, rows_[j], neg_mod(v % k_, k_), k_);
      store(j, std::move(pivot_row), pending);
    }
    if (!r.empty()) {
      const std::size_t lead = r.front().col;
      store(lead, std::move(r), pending);
    }
  }

  void store(std::size_t j, SparseRow r, std::vector<SparseRow>& pending) {
    const Residue unit = normalizing_unit(r.front().value, k_);
    if (unit != 1) r = scale(r, unit, k_);
    // Clear entries in unit-pivot columns; pivot rows there have no other
    // unit-column entries, so one pass suffices.
    std::vector<Entry> to_clear;
    for (std::size_t i = 1; i < r.size(); ++i)
      if (lead_[r[i].col] == 1) to_clear.push_back(r[i]);
    for (const auto& e : to_clear) r = combine(r, 1, rows_[e.col], neg_mod(e.value, k_), k_);

    if (lead_[j] == 0) pivot_cols_.push_back(j);
    lead_[j] = r.front().value;
    rows_[j] = std::move(r);
    if (lead_[j] == 1) {
      for (std::size_t c : pivot_cols_) {
        if (c >= j) continue;
        if (Residue w = value_at(rows_[c], j)) rows_[c] = combine(rows_[c], 1, rows_[j], neg_mod(w, k_), k_);
      }
    } else {
      SparseRow saturation = scale(rows_[j], k_ / lead_[j], k_);
      if (!saturation.empty()) pending.push_back(std::move(saturation));
    }
  }

  Residue k_;
  std::size_t cols_;
  std::vector<SparseRow> rows_;   // rows_[c]: basis row leading in column c
  std::vector<Residue> lead_;     // leading value per column, 0 if no pivot
  std::vector<std::size_t> pivot_cols_;
};

inline HowellForm howell(const ModMatrix& m) {
  HowellBuilder b(m.modulus(), m.cols());
  b.add_rows(m);
  return b.form();
}

// -- systems -----------------------------------------------------------------

struct AffineSystem {
  ModMatrix matrix;
  std::vector<Residue> rhs;
  std::vector<std::string> names;  // one per column; may be empty

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw InputError("unknown variable: " + std::string(name));
  }
};

/// particular + Z_k-span(generators) is the full solution set.
struct SolutionDescription {
  std::vector<Residue> particular;
  std::vector<std::vector<Residue>> generators;
};

struct Solution {
  std::vector<Residue> values;
  SolutionDescription description;
};

/// Analysis of A x = b through the Howell form of [A | b].  The system is
/// solvable iff no basis row leads in the b column.
class LinearSystem {
 public:
  explicit LinearSystem(const AffineSystem& sys)
      : k_(sys.matrix.modulus()), n_(sys.matrix.cols()), basis_(sys.matrix.modulus(), sys.matrix.cols() + 1) {
    if (sys.rhs.size() != sys.matrix.row_count()) throw InputError("right-hand side length must equal row count");
    build(sys.matrix.rows(), [&](std::size_t i) { return sys.rhs[i] % k_; });
  }

  /// Homogeneous or inhomogeneous rows given directly as sparse rows over n
  /// columns with per-row right-hand sides.
  LinearSystem(Residue modulus, std::size_t cols, const std::vector<SparseRow>& rows, const std::vector<Residue>& rhs)
      : k_(modulus), n_(cols), basis_(modulus, cols + 1) {
    if (rhs.size() != rows.size()) throw InputError("right-hand side length must equal row count");
    build(rows, [&](std::size_t i) { return rhs[i] % k_; });
  }

  Residue modulus() const noexcept { return k_; }
  std::size_t cols() const noexcept { return n_; }
  bool solvable() const noexcept { return solvable_; }
  const HowellForm& howell_form() const noexcept { return form_; }

  const std::vector<Residue>& particular() const {
    if (!solvable_) throw Error("system has no solution");
    return particular_;
  }

  const std::vector<std::vector<Residue>>& generators() const {
    if (!solvable_) throw Error("system has no solution");
    if (!generators_) generators_ = compute_generators();
    return *generators_;
  }

  SolutionDescription description() const { return {particular(), generators()}; }

  /// True iff every solution has x_i = x_j (vacuously true when unsolvable).
  /// A functional is constant on the solution set iff it lies in the row span
  /// of A, which holds over Z_k because every submodule of Z_k^n equals its
  /// double annihilator.
  bool entails_equal(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) throw InputError("variable index out of range");
    if (!solvable_ || i == j || k_ == 1) return true;
    if (particular_[i] != particular_[j]) return false;
    SparseRow v;
    if (i < j)
      v = {{i, 1}, {j, k_ - 1}};
    else
      v = {{j, k_ - 1}, {i, 1}};
    const SparseRow rest = basis_.reduce_within(std::move(v), n_);
    return rest.empty() || rest.front().col == n_;
  }

  /// A solution with x_i != x_j, if one exists.
  std::optional<std::vector<Residue>> separating_solution(std::size_t i, std::size_t j) const {
    if (!solvable_) return std::nullopt;
    if (particular_[i] != particular_[j]) return particular_;
    for (const auto& g : generators()) {
      if (g[i] != g[j]) {
        std::vector<Residue> x = particular_;
        for (std::size_t c = 0; c < n_; ++c) x[c] = add_mod(x[c], g[c], k_);
        return x;
      }
    }
    return std::nullopt;
  }

  bool satisfies(const std::vector<Residue>& x) const {
    for (const auto& row : form_.rows) {
      Residue s = 0;
      for (const auto& e : row) s = add_mod(s, mul_mod(e.value, e.col == n_ ? k_ - 1 : x[e.col], k_), k_);
      if (s != 0) return false;
    }
    return true;
  }

 private:
  template <typename Rhs>
  void build(const std::vector<SparseRow>& rows, Rhs rhs) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      SparseRow r;
      r.reserve(rows[i].size() + 1);
      for (const auto& e : rows[i]) {
        if (e.col >= n_) throw InputError("column index out of range");
        if (Residue v = e.value % k_) r.push_back({e.col, v});
      }
      if (Residue b = rhs(i)) r.push_back({n_, b});
      basis_.add_row(std::move(r));
    }
    form_ = basis_.form();
    solvable_ = !basis_.has_pivot(n_);
    if (solvable_) {
      particular_.assign(n_ + 1, 0);
      particular_[n_] = k_ == 1 ? 0 : k_ - 1;
      back_substitute(particular_, n_ + 1);
      particular_.pop_back();
    }
  }

  /// Fills pivot columns bottom-up so that every row except the one leading
  /// in `skip` is satisfied; non-pivot entries of x are left as given.
  void back_substitute(std::vector<Residue>& x, std::size_t skip) const {
    for (std::size_t r = form_.rows.size(); r-- > 0;) {
      const auto& row = form_.rows[r];
      const std::size_t j = form_.pivots[r];
      if (j == skip) continue;
      Residue sum = 0;
      for (std::size_t e = 1; e < row.size(); ++e) sum = add_mod(sum, mul_mod(row[e].value, x[row[e].col], k_), k_);
      const Residue target = neg_mod(sum, k_);
      const Residue p = row.front().value;
      if (target % p != 0) throw Error("internal: Howell back substitution failed");
      x[j] = target / p;
    }
  }

  std::vector<std::vector<Residue>> compute_generators() const {
    std::vector<std::vector<Residue>> gens;
    if (k_ == 1) return gens;
    std::vector<bool> pivot(n_ + 1, false);
    std::vector<Residue> lead(n_ + 1, 0);
    for (std::size_t r = 0; r < form_.rows.size(); ++r) {
      pivot[form_.pivots[r]] = true;
      lead[form_.pivots[r]] = form_.rows[r].front().value;
    }
    for (std::size_t c = 0; c < n_; ++c) {
      std::vector<Residue> x(n_ + 1, 0);
      std::size_t skip = n_ + 1;
      if (!pivot[c]) {
        x[c] = 1;
      } else if (lead[c] != 1) {
        x[c] = k_ / lead[c];
        skip = c;
      } else {
        continue;
      }
      back_substitute(x, skip);
      x.pop_back();
      gens.push_back(std::move(x));
    }
    return gens;
  }

  Residue k_;
  std::size_t n_;
  HowellBuilder basis_;
  HowellForm form_;
  bool solvable_ = false;
  std::vector<Residue> particular_;
  mutable std::optional<std::vector<std::vector<Residue>>> generators_;
};

inline std::optional<Solution> solve(const AffineSystem& sys) {
  LinearSystem ls(sys);
  if (!ls.solvable()) return std::nullopt;
  return Solution{ls.particular(), ls.description()};
}

inline bool entails_equal(const AffineSystem& sys, std::string_view x, std::string_view y) {
  const std::size_t i = sys.index_of(x);
  const std::size_t j = sys.index_of(y);
  return LinearSystem(sys).entails_equal(i, j);
}

}  // namespace eqcsp::modlin
