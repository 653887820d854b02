#include <gtest/gtest.h>

#include "eqcsp/abelian_solver.hpp"
#include "eqcsp/cli.hpp"
#include "eqcsp/oracle.hpp"

using namespace eqcsp;

namespace {

AbelianInstance lin(const std::string& text) { return linearize_group(flatten(parse_instance(text))); }

GroupDescriptor D(const char* s) { return parse_descriptor(s); }

TermPtr T(const char* s) { return parse_term(s, SignatureKind::group); }

const char* const tractable_targets[] = {"1", "2^1:1", "2^1:w", "2^2:1 + 2^1:w", "3^1:w", "3^1:w + 2^1:1"};

}  // namespace

TEST(Tractable, DoubleLayerSeparatesEntailedPair) {
  const AbelianInstance inst = lin("structure group\nvar x z w\neq z (+ x x)\neq w 0\nneq z w\n");
  const Verdict v = solve_tractable(classify(D("2^2:1 + 2^1:w")), inst);
  ASSERT_TRUE(v.sat());
  const GroupWitness& w = *v.witness;
  ASSERT_EQ(w.moduli, (std::vector<Residue>{4}));
  ASSERT_TRUE(w.shape.has_value());
  EXPECT_EQ(w.shape->m, 2u);
  EXPECT_EQ(w.shape->k, 0u);
  EXPECT_EQ(w.values[1][0], (w.values[0][0] * 2) % 4);
  EXPECT_EQ(w.values[1][0], 2u);
  EXPECT_EQ(w.values[2][0], 0u);
  EXPECT_TRUE(w.verify(inst));
}

TEST(Tractable, EntailedOverExponentTwo) {
  const AbelianInstance inst = lin("structure group\nvar x y u\neq y (+ x x)\nneq y u\neq u 0\n");
  const Verdict v = solve_tractable(classify(D("2^1:w")), inst);
  EXPECT_FALSE(v.sat());
  EXPECT_EQ(v.reason, UnsatReason::disequality_entailed);
}

TEST(Tractable, SelfDisequality) {
  for (const char* t : tractable_targets)
    EXPECT_FALSE(solve_tractable(classify(D(t)), lin("structure group\nvar x\nneq x x\n")).sat()) << t;
}

TEST(Tractable, TwoDistinctElements) {
  const Verdict v = solve_tractable(classify(D("3^1:w")), lin("structure group\nvar x y\nneq x y\n"));
  ASSERT_TRUE(v.sat());
  EXPECT_EQ(v.witness->moduli, (std::vector<Residue>{3}));
  EXPECT_NE(v.witness->values[0], v.witness->values[1]);
}

TEST(Tractable, RejectsHardClassification) {
  EXPECT_THROW(solve_tractable(classify(D("3^2:1 + 3^1:w")), lin("structure group\nvar x\n")), InputError);
}

TEST(Tractable, AgreesWithFiniteWitnessGroup) {
  for (const char* t : tractable_targets) {
    const GroupDescriptor d = D(t);
    const Classification c = classify(d);
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      const Instance inst =
          oracle::random_instance({1 + seed % 5, seed % 7, (seed / 7) % 5, seed, 2}, SignatureKind::group);
      const AbelianInstance a = linearize_group(flatten(inst));
      const Verdict v = solve_tractable(c, a);
      const Verdict o = oracle::brute_solve_group(cli::witness_group(d, a.disequalities.size()), a);
      ASSERT_NE(o.status, Status::budget_exhausted);
      EXPECT_EQ(v.sat(), o.sat()) << t << "\n" << print_instance(inst);
      if (v.sat()) { EXPECT_TRUE(v.witness->verify(a)); }
    }
  }
}

TEST(Tractable, Monotone) {
  const Classification c = classify(D("2^2:1 + 2^1:w"));
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const AbelianInstance a =
        linearize_group(flatten(oracle::random_instance({3, 2, 3, seed, 2}, SignatureKind::group)));
    if (solve_tractable(c, a).sat()) continue;
    AbelianInstance more = a;
    more.rows.push_back({{0, 1}, {1, 1}});
    more.disequalities.emplace_back(0, 2);
    EXPECT_FALSE(solve_tractable(c, more).sat());
  }
}

TEST(Tractable, ConvexWithoutDoubleLayer) {
  for (const char* t : {"2^1:w", "3^1:w", "1", "2^2:w"}) {
    const Classification c = classify(D(t));
    ASSERT_FALSE(c.with_double);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const AbelianInstance a =
          linearize_group(flatten(oracle::random_instance({4, 3, 2 + seed % 3, seed, 2}, SignatureKind::group)));
      bool each = true;
      for (const auto& d : a.disequalities) {
        AbelianInstance single = a;
        single.disequalities = {d};
        each = each && solve_tractable(c, single).sat();
      }
      EXPECT_EQ(solve_tractable(c, a).sat(), each);
    }
  }
}

TEST(General, HardTargetTriangle) {
  const Verdict v = solve_general(D("3^2:1 + 3^1:w"), lin("structure group\nvar x y z\nneq x y\nneq y z\nneq x z\n"));
  ASSERT_TRUE(v.sat());
  EXPECT_TRUE(v.search_based);
}

TEST(General, TriangleInFiniteNineElementGroup) {
  const Verdict v = solve_general(D("3^2:1"), lin("structure group\nvar x y z\nneq x y\nneq y z\nneq x z\n"));
  ASSERT_TRUE(v.sat());
  EXPECT_EQ(v.witness->moduli, (std::vector<Residue>{9}));
}

TEST(General, TrivialGroup) {
  EXPECT_FALSE(solve_general(D("1"), lin("structure group\nvar x y\nneq x y\n")).sat());
}

TEST(General, MatchesTractableSolver) {
  for (const char* t : tractable_targets) {
    const GroupDescriptor d = D(t);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const AbelianInstance a = linearize_group(
          flatten(oracle::random_instance({1 + seed % 5, seed % 7, seed % 5, seed + 1000, 2}, SignatureKind::group)));
      EXPECT_EQ(solve_general(d, a).sat(), solve_tractable(classify(d), a).sat()) << t << " seed " << seed;
    }
  }
}

TEST(General, HardTargetsAgreeWithFiniteWitnessGroup) {
  for (const char* t : {"3^2:1 + 3^1:w", "2^3:1 + 2^1:w", "2^2:2 + 2^1:w", "3^2:1", "2^2:1 + 3^2:1 + 3^1:w"}) {
    const GroupDescriptor d = D(t);
    ASSERT_FALSE(classify(d).tractable);
    for (std::uint64_t seed = 0; seed < 150; ++seed) {
      const AbelianInstance a =
          linearize_group(flatten(oracle::random_instance({1 + seed % 4, seed % 4, seed % 4, seed, 2}, SignatureKind::group)));
      const Verdict v = solve_general(d, a);
      const Verdict o = oracle::brute_solve_group(cli::witness_group(d, a.disequalities.size()), a);
      ASSERT_NE(v.status, Status::budget_exhausted);
      ASSERT_NE(o.status, Status::budget_exhausted);
      EXPECT_EQ(v.sat(), o.sat()) << t << " seed " << seed;
      if (v.sat()) { EXPECT_TRUE(v.witness->verify(a)); }
    }
  }
}

TEST(General, CliqueColoringByFiniteGroupSize) {
  const AbelianInstance k4 = linearize_group(flatten(oracle::clique_instance(4)));
  EXPECT_FALSE(solve_general(D("3^1:1"), k4).sat());
  EXPECT_TRUE(solve_general(D("2^2:1"), k4).sat());
  EXPECT_EQ(solve_general(D("3^2:1"), linearize_group(flatten(oracle::clique_instance(8))), 10).status,
            Status::budget_exhausted);
}

TEST(Identity, Examples) {
  EXPECT_TRUE(check_identity(T("(+ x x)"), T("0"), D("2^1:w")));
  EXPECT_FALSE(check_identity(T("(+ x x)"), T("0"), D("2^2:1 + 2^1:w")));
  for (const char* t : {"1", "2^1:1", "3^2:1 + 3^1:w", "2^2:1 + 2^1:w", "5^1:w"})
    EXPECT_TRUE(check_identity(T("(+ x y)"), T("(+ y x)"), D(t))) << t;
  EXPECT_TRUE(check_identity(T("(- (- x))"), T("x"), D("3^1:w")));
  EXPECT_TRUE(check_identity(T("(+ x (+ x x))"), T("0"), D("3^1:w")));
  EXPECT_FALSE(check_identity(T("(+ x (+ x x))"), T("0"), D("3^2:1 + 3^1:w")));
}

TEST(Entailment, Examples) {
  EXPECT_TRUE(check_entailment({{T("x"), T("y")}}, {T("y"), T("x")}, D("2^1:w")));
  EXPECT_TRUE(check_entailment({{T("y"), T("(+ x x)")}}, {T("y"), T("0")}, D("2^1:w")));
  EXPECT_FALSE(check_entailment({{T("y"), T("(+ x x)")}}, {T("y"), T("0")}, D("2^2:1 + 2^1:w")));
  EXPECT_TRUE(check_entailment({{T("(+ x x)"), T("0")}}, {T("x"), T("(- x)")}, D("2^2:1 + 2^1:w")));
}

TEST(Scale, PlantedInstance) {
  const AbelianInstance inst = oracle::planted_group_instance(1000, 5000, 100, 4, 1);
  const Verdict v = solve_tractable(classify(D("2^2:1 + 2^1:w")), inst);
  ASSERT_TRUE(v.sat());
  EXPECT_TRUE(v.witness->verify(inst));
}
