#pragma once

// A 6-ary polymorphism f and an automorphism alpha of Z_n^(w) + Z_2n with
// alpha f(x,y,x,z,y,z) = f(y,x,z,x,z,y), evaluated on finitely supported
// elements.  Generators: a_1, a_2, ... of order n and b of order 2n.
//
// f sends the a-part of argument i at level j to level idx(i, j) and the
// b-part r of argument k to r * (a_k + c_k b), with c = (1,2,2,1,1,2).

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "eqcsp/error.hpp"
#include "eqcsp/modlinalg.hpp"

namespace eqcsp::ps {

using modlin::Residue;

/// b * b_coefficient + sum over levels l of a[l] * a_l.
struct TruncElement {
  Residue n = 1;
  Residue b = 0;                     // in Z_2n
  std::map<std::size_t, Residue> a;  // level >= 1 -> nonzero coefficient in Z_n

  TruncElement() = default;
  explicit TruncElement(Residue modulus) : n(modulus) {
    if (modulus == 0) throw InputError("modulus must be at least 1");
  }

  static TruncElement generator_b(Residue modulus, Residue coefficient = 1) {
    TruncElement x(modulus);
    x.b = coefficient % (2 * modulus);
    return x;
  }
  static TruncElement generator_a(Residue modulus, std::size_t level, Residue coefficient = 1) {
    TruncElement x(modulus);
    x.add_a(level, coefficient);
    return x;
  }

  void add_a(std::size_t level, Residue coefficient) {
    if (level == 0) throw InputError("levels start at 1");
    const Residue c = coefficient % n;
    if (c == 0) return;
    auto [it, inserted] = a.emplace(level, c);
    if (!inserted) {
      it->second = modlin::add_mod(it->second, c, n);
      if (it->second == 0) a.erase(it);
    }
  }

  bool is_zero() const { return b == 0 && a.empty(); }
  std::size_t max_level() const { return a.empty() ? 0 : a.rbegin()->first; }

  friend TruncElement operator+(const TruncElement& x, const TruncElement& y) {
    if (x.n != y.n) throw InputError("modulus mismatch");
    TruncElement r = x;
    r.b = modlin::add_mod(x.b, y.b, 2 * x.n);
    for (const auto& [l, c] : y.a) r.add_a(l, c);
    return r;
  }

  friend bool operator==(const TruncElement&, const TruncElement&) = default;

  std::string to_string() const {
    std::string s;
    for (const auto& [l, c] : a) s += (s.empty() ? "" : " + ") + std::to_string(c) + "*a" + std::to_string(l);
    if (b != 0) s += (s.empty() ? "" : " + ") + std::to_string(b) + "*b";
    return s.empty() ? "0" : s;
  }
};

/// Output level of input level j >= 1 in argument slot i in 1..6.
constexpr std::size_t idx(std::size_t i, std::size_t j) { return 6 * (j - 1) + i + 6; }

constexpr std::array<Residue, 6> b_weight{1, 2, 2, 1, 1, 2};

/// sigma = (12)(34)(56) on slots 1..6.
constexpr std::size_t sigma(std::size_t i) { return i % 2 == 1 ? i + 1 : i - 1; }

inline TruncElement eval_f(Residue n, const std::array<TruncElement, 6>& args) {
  TruncElement out(n);
  for (std::size_t k = 0; k < 6; ++k) {
    const TruncElement& x = args[k];
    if (x.n != n) throw InputError("modulus mismatch");
    const std::size_t slot = k + 1;
    for (const auto& [j, c] : x.a) out.add_a(idx(slot, j), c);
    out.add_a(slot, x.b % n);
    out.b = modlin::add_mod(out.b, modlin::mul_mod(x.b, b_weight[k], 2 * n), 2 * n);
  }
  return out;
}

inline TruncElement eval_alpha(Residue n, const TruncElement& x) {
  if (x.n != n) throw InputError("modulus mismatch");
  TruncElement out(n);
  out.b = x.b;
  for (const auto& [l, c] : x.a) {
    if (l <= 6) {
      out.add_a(sigma(l), c);
    } else {
      const std::size_t i = (l - 7) % 6 + 1;
      const std::size_t j = (l - 7) / 6 + 1;
      out.add_a(idx(sigma(i), j), c);
    }
  }
  return out;
}

struct Report {
  Residue n = 1;
  std::size_t truncation = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t identity_checks = 0;
  std::size_t identity_passed = 0;
  std::size_t distinct_checks = 0;
  std::size_t distinct_passed = 0;
  std::size_t homomorphism_checks = 0;
  std::size_t homomorphism_passed = 0;
  std::size_t alpha_checks = 0;
  std::size_t alpha_passed = 0;
  std::size_t max_output_level = 0;
  std::vector<std::string> failures;  // first few, described

  bool passed() const {
    return identity_passed == identity_checks && distinct_passed == distinct_checks &&
           homomorphism_passed == homomorphism_checks && alpha_passed == alpha_checks &&
           max_output_level <= 6 + 6 * truncation;
  }
};

namespace detail {

inline Residue below(std::mt19937_64& rng, Residue n) { return n == 0 ? 0 : rng() % n; }

inline TruncElement random_element(std::mt19937_64& rng, Residue n, std::size_t levels) {
  TruncElement x(n);
  x.b = below(rng, 2 * n);
  for (std::size_t l = 1; l <= levels; ++l)
    if (below(rng, 2) == 0) x.add_a(l, below(rng, n));
  return x;
}

inline TruncElement random_nonzero(std::mt19937_64& rng, Residue n, std::size_t levels) {
  while (true) {
    TruncElement x = random_element(rng, n, levels);
    if (!x.is_zero()) return x;
  }
}

}  // namespace detail

/// Randomized check of the identity, of f(u) != f(v) for componentwise
/// distinct 6-tuples, of additivity of f, and of alpha being an additive
/// involution.  Samples have support in levels 1..truncation.
inline Report verify_pseudo_siggers(Residue n, std::size_t truncation, std::size_t samples, std::uint64_t seed) {
  if (n == 0) throw InputError("modulus must be at least 1");
  Report rep;
  rep.n = n;
  rep.truncation = truncation;
  rep.samples = samples;
  rep.seed = seed;
  std::mt19937_64 rng(seed);
  auto note = [&](const std::string& what) {
    if (rep.failures.size() < 20) rep.failures.push_back(what);
  };
  auto track = [&](const TruncElement& v) { rep.max_output_level = std::max(rep.max_output_level, v.max_level()); };
  auto tuple = [&] {
    std::array<TruncElement, 6> t;
    for (auto& x : t) x = detail::random_element(rng, n, truncation);
    return t;
  };

  for (std::size_t s = 0; s < samples; ++s) {
    const TruncElement x = detail::random_element(rng, n, truncation);
    const TruncElement y = detail::random_element(rng, n, truncation);
    const TruncElement z = detail::random_element(rng, n, truncation);
    const TruncElement lhs = eval_alpha(n, eval_f(n, {x, y, x, z, y, z}));
    const TruncElement rhs = eval_f(n, {y, x, z, x, z, y});
    track(lhs);
    track(rhs);
    ++rep.identity_checks;
    if (lhs == rhs)
      ++rep.identity_passed;
    else
      note("identity fails on sample " + std::to_string(s) + ": " + lhs.to_string() + " vs " + rhs.to_string());
  }

  // Differences are biased towards n*b, the element of order two, which is
  // where a collision would have to come from.
  const TruncElement half = TruncElement::generator_b(n, n);
  for (std::size_t s = 0; s < samples; ++s) {
    std::array<TruncElement, 6> u = tuple();
    std::array<TruncElement, 6> v;
    for (std::size_t i = 0; i < 6; ++i)
      v[i] = u[i] + (detail::below(rng, 2) == 0 ? half : detail::random_nonzero(rng, n, truncation));
    ++rep.distinct_checks;
    const TruncElement fu = eval_f(n, u);
    const TruncElement fv = eval_f(n, v);
    track(fu);
    track(fv);
    if (fu != fv)
      ++rep.distinct_passed;
    else
      note("collision on sample " + std::to_string(s) + ": " + fu.to_string());
  }

  const std::size_t spot = std::min<std::size_t>(samples, 1000);
  for (std::size_t s = 0; s < spot; ++s) {
    const auto u = tuple();
    const auto w = tuple();
    std::array<TruncElement, 6> sum;
    for (std::size_t i = 0; i < 6; ++i) sum[i] = u[i] + w[i];
    ++rep.homomorphism_checks;
    if (eval_f(n, sum) == eval_f(n, u) + eval_f(n, w))
      ++rep.homomorphism_passed;
    else
      note("f not additive on sample " + std::to_string(s));

    const TruncElement x = detail::random_element(rng, n, 6 + 6 * truncation);
    const TruncElement y = detail::random_element(rng, n, 6 + 6 * truncation);
    ++rep.alpha_checks;
    if (eval_alpha(n, x + y) == eval_alpha(n, x) + eval_alpha(n, y) && eval_alpha(n, eval_alpha(n, x)) == x)
      ++rep.alpha_passed;
    else
      note("alpha not an additive involution on sample " + std::to_string(s));
  }
  return rep;
}

}  // namespace eqcsp::ps
