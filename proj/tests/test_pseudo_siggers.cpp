#include <gtest/gtest.h>

#include <random>
#include <set>

#include "eqcsp/pseudo_siggers.hpp"

using namespace eqcsp;
using namespace eqcsp::ps;

namespace {

TruncElement B(Residue n, Residue c = 1) { return TruncElement::generator_b(n, c); }
TruncElement A(Residue n, std::size_t l, Residue c = 1) { return TruncElement::generator_a(n, l, c); }

// Dense model: coordinate 0 is b in Z_2n, coordinate l >= 1 is a_l in Z_n.
using Dense = std::vector<std::uint64_t>;

Dense dense(const TruncElement& x, std::size_t levels) {
  Dense d(levels + 1, 0);
  d[0] = x.b;
  for (const auto& [l, c] : x.a) d.at(l) = c;
  return d;
}

// f written directly from the images of the generators of each argument slot.
Dense reference_f(std::uint64_t n, const std::array<TruncElement, 6>& args, std::size_t levels) {
  const std::uint64_t weight[] = {1, 2, 2, 1, 1, 2};
  Dense out(6 + 6 * levels + 1, 0);
  for (std::size_t slot = 0; slot < 6; ++slot) {
    const Dense x = dense(args[slot], levels);
    // b in slot k goes to a_k + weight_k * b
    out[slot + 1] = (out[slot + 1] + x[0]) % n;
    out[0] = (out[0] + weight[slot] * x[0]) % (2 * n);
    for (std::size_t j = 1; j <= levels; ++j) {
      const std::size_t target = 7 + slot + 6 * (j - 1);
      out[target] = (out[target] + x[j]) % n;
    }
  }
  return out;
}

}  // namespace

TEST(Index, InjectiveOntoLevelsFromSeven) {
  std::set<std::size_t> seen;
  for (std::size_t j = 1; j <= 10; ++j)
    for (std::size_t i = 1; i <= 6; ++i) EXPECT_TRUE(seen.insert(idx(i, j)).second);
  EXPECT_EQ(*seen.begin(), 7u);
  EXPECT_EQ(*seen.rbegin(), 66u);
  EXPECT_EQ(seen.size(), 60u);
}

TEST(Sigma, SwapsPairs) {
  EXPECT_EQ(sigma(1), 2u);
  EXPECT_EQ(sigma(2), 1u);
  EXPECT_EQ(sigma(5), 6u);
  for (std::size_t i = 1; i <= 6; ++i) EXPECT_EQ(sigma(sigma(i)), i);
}

TEST(EvalF, OddSlotsWithB) {
  const TruncElement z(2);
  EXPECT_EQ(eval_f(2, {B(2), z, B(2), z, z, z}), A(2, 1) + A(2, 3) + B(2, 3));
}

TEST(EvalF, EvenSlotsWithB) {
  const TruncElement z(2);
  EXPECT_EQ(eval_f(2, {z, B(2), z, B(2), z, z}), A(2, 2) + A(2, 4) + B(2, 3));
}

TEST(EvalF, ZeroToZero) {
  for (Residue n : {1u, 2u, 5u}) {
    const TruncElement z(n);
    EXPECT_TRUE(eval_f(n, {z, z, z, z, z, z}).is_zero());
  }
}

TEST(EvalF, LevelsMoveToIndexedOutputs) {
  const TruncElement z(3);
  EXPECT_EQ(eval_f(3, {z, z, z, A(3, 2, 2), z, z}), A(3, idx(4, 2), 2));
}

TEST(EvalF, ModulusMismatch) {
  const TruncElement z(2), w(3);
  EXPECT_THROW(eval_f(2, {z, z, w, z, z, z}), InputError);
  EXPECT_THROW(z + w, InputError);
  EXPECT_THROW(eval_alpha(2, w), InputError);
}

TEST(EvalF, MatchesDenseReference) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const Residue n = 1 + rng() % 5;
    const std::size_t K = 1 + rng() % 4;
    std::array<TruncElement, 6> args;
    for (auto& x : args) x = detail::random_element(rng, n, K);
    EXPECT_EQ(dense(eval_f(n, args), 6 + 6 * K), reference_f(n, args, K));
  }
}

TEST(EvalF, AdditiveInEachArgument) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    const Residue n = 1 + rng() % 4;
    std::array<TruncElement, 6> u, w, s;
    for (std::size_t i = 0; i < 6; ++i) {
      u[i] = detail::random_element(rng, n, 5);
      w[i] = detail::random_element(rng, n, 5);
      s[i] = u[i] + w[i];
    }
    EXPECT_EQ(eval_f(n, s), eval_f(n, u) + eval_f(n, w));
  }
}

TEST(Alpha, Examples) {
  EXPECT_EQ(eval_alpha(2, B(2)), B(2));
  EXPECT_EQ(eval_alpha(2, A(2, 1)), A(2, 2));
  EXPECT_EQ(eval_alpha(2, A(2, 6)), A(2, 5));
  EXPECT_EQ(eval_alpha(2, A(2, idx(1, 1))), A(2, idx(2, 1)));
  EXPECT_EQ(eval_alpha(3, A(3, idx(3, 4), 2)), A(3, idx(4, 4), 2));
}

TEST(Alpha, AdditiveInvolution) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 1000; ++trial) {
    const Residue n = 1 + rng() % 4;
    const TruncElement x = detail::random_element(rng, n, 30), y = detail::random_element(rng, n, 30);
    EXPECT_EQ(eval_alpha(n, eval_alpha(n, x)), x);
    EXPECT_EQ(eval_alpha(n, x + y), eval_alpha(n, x) + eval_alpha(n, y));
  }
}

TEST(Identity, ZeroSample) {
  const TruncElement z(4);
  EXPECT_TRUE(eval_alpha(4, eval_f(4, {z, z, z, z, z, z})).is_zero());
}

TEST(Identity, HoldsOnGenerators) {
  // the identity is linear in (x, y, z), so generators of each variable suffice
  for (Residue n : {1u, 2u, 3u, 4u}) {
    const TruncElement z(n);
    std::vector<TruncElement> gens{B(n)};
    for (std::size_t l = 1; l <= 4; ++l) gens.push_back(A(n, l));
    for (const auto& g : gens)
      for (int which = 0; which < 3; ++which) {
        std::array<TruncElement, 3> v{z, z, z};
        v[which] = g;
        const auto& [x, y, w] = v;
        EXPECT_EQ(eval_alpha(n, eval_f(n, {x, y, x, w, y, w})), eval_f(n, {y, x, w, x, w, y}));
      }
  }
}

TEST(Distinct, OrderTwoDifferenceInEverySlot) {
  // f(n*b, ..., n*b) has b-coefficient 9n = n mod 2n, so never zero
  for (Residue n : {1u, 2u, 3u, 6u}) {
    const TruncElement h = B(n, n);
    EXPECT_FALSE(eval_f(n, {h, h, h, h, h, h}).is_zero());
    EXPECT_EQ(eval_f(n, {h, h, h, h, h, h}), B(n, n));
  }
}

TEST(Distinct, CollisionsNeedAnEqualSlot) {
  // f is not injective: tuples agreeing in some slots can collide
  const TruncElement z(2);
  EXPECT_EQ(eval_f(2, {B(2, 2), z, z, z, z, z}), eval_f(2, {z, z, z, B(2, 2), z, z}));
}

TEST(Verify, PassesForSmallModuli) {
  for (Residue n : {1u, 2u, 3u}) {
    const Report r = verify_pseudo_siggers(n, 8, 10000, 7);
    EXPECT_TRUE(r.passed()) << "n=" << n << (r.failures.empty() ? "" : " " + r.failures.front());
    EXPECT_EQ(r.identity_checks, 10000u);
    EXPECT_EQ(r.identity_passed, 10000u);
    EXPECT_EQ(r.distinct_passed, 10000u);
    EXPECT_EQ(r.homomorphism_checks, 1000u);
    EXPECT_EQ(r.alpha_passed, 1000u);
    EXPECT_LE(r.max_output_level, 54u);
    EXPECT_TRUE(r.failures.empty());
  }
}

TEST(Verify, EmptyReport) {
  const Report r = verify_pseudo_siggers(2, 8, 0, 1);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.identity_checks, 0u);
  EXPECT_EQ(r.distinct_checks, 0u);
  EXPECT_EQ(r.alpha_checks, 0u);
}

TEST(Verify, Deterministic) {
  const Report a = verify_pseudo_siggers(3, 4, 500, 11), b = verify_pseudo_siggers(3, 4, 500, 11);
  EXPECT_EQ(a.max_output_level, b.max_output_level);
  EXPECT_THROW(verify_pseudo_siggers(0, 4, 1, 1), InputError);
}
