#include <gtest/gtest.h>

#include <random>

#include "eqcsp/modlinalg.hpp"
#include "linalg_oracle.hpp"

using namespace eqcsp;
using namespace eqcsp::modlin;
using linalg_oracle::Dense;
using linalg_oracle::Vec;

namespace {

AffineSystem make_system(Residue k, std::size_t n, const Dense& a, const Vec& b, std::vector<std::string> names = {}) {
  AffineSystem s{linalg_oracle::to_matrix(k, n, a), b, std::move(names)};
  return s;
}

Dense random_dense(std::mt19937_64& rng, Residue k, std::size_t rows, std::size_t cols) {
  Dense a(rows, Vec(cols));
  for (auto& r : a)
    for (auto& v : r) v = rng() % k;
  return a;
}

void check_against_enumeration(Residue k, std::size_t n, const Dense& a, const Vec& b) {
  const auto truth = linalg_oracle::solutions(k, n, a, b);
  const AffineSystem sys = make_system(k, n, a, b);
  const auto got = solve(sys);
  ASSERT_EQ(got.has_value(), !truth.empty());
  LinearSystem ls(sys);
  if (got) {
    EXPECT_TRUE(truth.count(got->values));
    for (const auto& g : got->description.generators)
      EXPECT_TRUE(linalg_oracle::solutions(k, n, a, Vec(a.size(), 0)).count(g));
    EXPECT_EQ(linalg_oracle::affine_span(k, got->description.particular, got->description.generators), truth);
  }
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      bool always = true;
      for (const auto& s : truth) always = always && s[x] == s[y];
      EXPECT_EQ(ls.entails_equal(x, y), always) << "k=" << k << " x=" << x << " y=" << y;
      if (!always) {
        auto sep = ls.separating_solution(x, y);
        ASSERT_TRUE(sep.has_value());
        EXPECT_TRUE(truth.count(*sep));
        EXPECT_NE((*sep)[x], (*sep)[y]);
      }
    }
}

}  // namespace

TEST(Howell, AlreadyCanonical) {
  const HowellForm h = howell(linalg_oracle::to_matrix(4, 1, {{2}}));
  EXPECT_EQ(h.dense(), (Dense{{2}}));
  EXPECT_EQ(h.pivots, (std::vector<std::size_t>{0}));
}

TEST(Howell, DuplicateRowRemoved) {
  EXPECT_EQ(howell(linalg_oracle::to_matrix(4, 1, {{2}, {2}})).dense(), (Dense{{2}}));
}

TEST(Howell, GcdOfGenerators) {
  // 2 and 3 generate all of Z_6
  EXPECT_EQ(linalg_oracle::span(6, 1, {{2}, {3}}).size(), 6u);
  EXPECT_EQ(howell(linalg_oracle::to_matrix(6, 1, {{2}, {3}})).dense(), (Dense{{1}}));
}

TEST(Howell, SaturationRowAppears) {
  // span of (2,1) over Z_4 contains 2*(2,1) = (0,2)
  const HowellForm h = howell(linalg_oracle::to_matrix(4, 2, {{2, 1}}));
  EXPECT_EQ(h.dense(), (Dense{{2, 1}, {0, 2}}));
}

TEST(Howell, ModulusOne) {
  const HowellForm h = howell(linalg_oracle::to_matrix(1, 3, {{0, 0, 0}}));
  EXPECT_TRUE(h.rows.empty());
}

TEST(Howell, CanonicalUnderRowOperations) {
  std::mt19937_64 rng(11);
  const Residue moduli[] = {2, 3, 4, 6, 8};
  for (int trial = 0; trial < 500; ++trial) {
    const Residue k = moduli[trial % 5];
    const std::size_t rows = 1 + rng() % 4, cols = 1 + rng() % 4;
    Dense a = random_dense(rng, k, rows, cols);
    const HowellForm h = howell(linalg_oracle::to_matrix(k, cols, a));

    Dense shuffled = a;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(howell(linalg_oracle::to_matrix(k, cols, shuffled)), h);

    Dense added = a;
    const std::size_t i = rng() % rows, j = rng() % rows;
    const Residue c = rng() % k;
    for (std::size_t col = 0; col < cols; ++col) added[i][col] = (added[i][col] + c * a[j][col]) % k;
    if (i != j) { EXPECT_EQ(howell(linalg_oracle::to_matrix(k, cols, added)), h); }

    // same span, same form; and idempotent
    EXPECT_EQ(linalg_oracle::span(k, cols, h.dense()), linalg_oracle::span(k, cols, a));
    EXPECT_EQ(howell(linalg_oracle::to_matrix(k, cols, h.dense())), h);
  }
}

TEST(Howell, NormalFormShape) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 400; ++trial) {
    const Residue k = 2 + rng() % 11;
    const std::size_t rows = 1 + rng() % 4, cols = 1 + rng() % 3;
    const Dense a = random_dense(rng, k, rows, cols);
    const HowellForm h = howell(linalg_oracle::to_matrix(k, cols, a));
    const Dense d = h.dense();
    for (std::size_t r = 0; r < d.size(); ++r) {
      const std::size_t p = h.pivots[r];
      if (r > 0) {
        EXPECT_LT(h.pivots[r - 1], p);
      }
      for (std::size_t c = 0; c < p; ++c) EXPECT_EQ(d[r][c], 0u);
      EXPECT_EQ(k % d[r][p], 0u);
      for (std::size_t q = 0; q < r; ++q) EXPECT_LT(d[q][p], d[r][p]);
    }
    // Howell property: span vectors vanishing on columns < j lie in the span
    // of rows leading at or after j.
    const auto full = linalg_oracle::span(k, cols, a);
    for (std::size_t j = 0; j <= cols; ++j) {
      Dense tail;
      for (std::size_t r = 0; r < d.size(); ++r)
        if (h.pivots[r] >= j) tail.push_back(d[r]);
      const auto tail_span = linalg_oracle::span(k, cols, tail);
      for (const auto& v : full) {
        bool vanishes = true;
        for (std::size_t c = 0; c < j; ++c) vanishes = vanishes && v[c] == 0;
        if (vanishes) { EXPECT_TRUE(tail_span.count(v)); }
      }
    }
  }
}

TEST(Howell, LargeModulusArithmetic) {
  const Residue k = (Residue{1} << 61) - 1;  // prime
  const HowellForm h = howell(linalg_oracle::to_matrix(k, 2, {{k - 2, 5}, {3, k - 1}}));
  ASSERT_FALSE(h.rows.empty());
  EXPECT_EQ(h.rows.front().front().value, 1u);
  const Residue big = Residue{1} << 62;
  const HowellForm h2 = howell(linalg_oracle::to_matrix(big, 1, {{big - 6}}));
  EXPECT_EQ(h2.dense(), (Dense{{2}}));
}

TEST(Solve, TwoXEqualsTwo) {
  const auto s = solve(make_system(4, 1, {{2}}, {2}));
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(linalg_oracle::affine_span(4, s->description.particular, s->description.generators),
            (std::set<Vec>{{1}, {3}}));
}

TEST(Solve, TwoXEqualsOne) { EXPECT_FALSE(solve(make_system(4, 1, {{2}}, {1})).has_value()); }

TEST(Solve, SumZeroModTwo) {
  const auto s = solve(make_system(2, 2, {{1, 1}}, {0}));
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(linalg_oracle::span(2, 2, s->description.generators), (std::set<Vec>{{0, 0}, {1, 1}}));
}

TEST(Solve, EmptySystem) {
  const auto s = solve(make_system(5, 2, {}, {}));
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(linalg_oracle::affine_span(5, s->description.particular, s->description.generators).size(), 25u);
}

TEST(Solve, RhsLengthChecked) { EXPECT_THROW(LinearSystem(make_system(3, 1, {{1}}, {})), InputError); }

TEST(Entails, Examples) {
  EXPECT_TRUE(entails_equal(make_system(2, 2, {{1, 1}}, {0}, {"x", "y"}), "x", "y"));
  EXPECT_FALSE(entails_equal(make_system(4, 2, {{2, 0}, {0, 1}}, {0, 0}, {"x", "y"}), "x", "y"));
  EXPECT_TRUE(entails_equal(make_system(1, 2, {{0, 0}}, {0}, {"x", "y"}), "x", "y"));
  EXPECT_TRUE(entails_equal(make_system(1, 2, {}, {}, {"x", "y"}), "x", "y"));
  EXPECT_THROW(entails_equal(make_system(2, 1, {}, {}, {"x"}), "x", "q"), InputError);
}

TEST(Entails, VacuousWhenUnsolvable) {
  EXPECT_TRUE(entails_equal(make_system(4, 2, {{2, 0}}, {1}, {"x", "y"}), "x", "y"));
}

TEST(Solve, ExhaustiveSmallSystems) {
  // every system with at most 2 rows and 2 variables for k <= 4, and every
  // single row over 3 variables for k <= 6
  for (Residue k = 1; k <= 4; ++k)
    for (std::size_t n = 1; n <= 2; ++n)
      for (std::size_t rows = 0; rows <= 2; ++rows) {
        Vec flat(rows * (n + 1), 0);
        do {
          Dense a(rows, Vec(n));
          Vec b(rows);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < n; ++c) a[r][c] = flat[r * (n + 1) + c];
            b[r] = flat[r * (n + 1) + n];
          }
          check_against_enumeration(k, n, a, b);
        } while (linalg_oracle::next_vector(flat, k));
      }
  for (Residue k = 5; k <= 6; ++k) {
    Vec flat(4, 0);
    do {
      check_against_enumeration(k, 3, {{flat[0], flat[1], flat[2]}}, {flat[3]});
    } while (linalg_oracle::next_vector(flat, k));
  }
}

TEST(Solve, RandomSmallSystems) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 3000; ++trial) {
    const Residue k = 1 + rng() % 6;
    const std::size_t n = 1 + rng() % 3, rows = rng() % 4;
    const Dense a = random_dense(rng, k, rows, n);
    Vec b(rows);
    for (auto& v : b) v = rng() % k;
    check_against_enumeration(k, n, a, b);
  }
}

TEST(Solve, SparseIncrementalMatchesOnLargerSystems) {
  // Planted solution must satisfy; solutions reported must satisfy.
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Residue k = 2 + rng() % 30;
    const std::size_t n = 40, rows = 60;
    Vec hidden(n);
    for (auto& v : hidden) v = rng() % k;
    std::vector<SparseRow> a;
    std::vector<Residue> b;
    for (std::size_t r = 0; r < rows; ++r) {
      Vec dense(n, 0);
      for (int t = 0; t < 3; ++t) dense[rng() % n] = rng() % k;
      Residue s = 0;
      for (std::size_t c = 0; c < n; ++c) s = (s + dense[c] * hidden[c]) % k;
      a.push_back(to_sparse(dense, k));
      b.push_back(s);
    }
    LinearSystem ls(k, n, a, b);
    ASSERT_TRUE(ls.solvable());
    EXPECT_TRUE(ls.satisfies(hidden));
    EXPECT_TRUE(ls.satisfies(ls.particular()));
    for (const auto& g : ls.generators()) {
      Vec x = ls.particular();
      for (std::size_t c = 0; c < n; ++c) x[c] = (x[c] + g[c]) % k;
      EXPECT_TRUE(ls.satisfies(x));
    }
  }
}
