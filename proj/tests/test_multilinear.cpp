#include "hotm/multilinear.hpp"
#include "hotm/reference_kernels.hpp"

#include <doctest.h>

#include <random>

using namespace hotm;

namespace {

SymTensor3 random_tensor(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SymTensor3 t(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) t.canonical(i, j, k) = normal(rng);
  return t;
}

Vec random_vec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("SymMatrix stores one triangle and applies symmetrically") {
  std::mt19937_64 rng(1);
  Mat d = Mat::Random(6, 6);
  d = (d + d.transpose()).eval();
  const SymMatrix s = SymMatrix::from_dense(d);
  CHECK(s(2, 5) == s(5, 2));
  const Vec v = random_vec(6, rng);
  CHECK((s.apply(v) - d * v).norm() < 1e-12 * d.norm() * v.norm());
  CHECK(s.quadratic_form(v) == doctest::Approx(v.dot(d * v)));
  CHECK(s.frobenius_norm() == doctest::Approx(d.norm()));

  SymMatrix r(4);
  const Vec w = random_vec(4, rng);
  r.add_rank1(2.0, w);
  r.add_identity(0.5);
  const Mat expect = 2.0 * w * w.transpose() + 0.5 * Mat::Identity(4, 4);
  CHECK((r.dense() - expect).norm() < 1e-13);
}

TEST_CASE("SymTensor3 canonical storage reads the same under permutations") {
  std::mt19937_64 rng(2);
  SymTensor3 t = random_tensor(5, rng);
  CHECK(t(1, 3, 4) == t(4, 1, 3));
  CHECK(t(2, 2, 0) == t(0, 2, 2));
  CHECK(t(3, 3, 3) == t(3, 3, 3));
}

TEST_CASE("contract3_to_matrix") {
  SUBCASE("zero tensor gives the zero matrix") {
    SymTensor3 t(3);
    const SymMatrix m = contract3_to_matrix(t, Vec::Ones(3));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(m(i, j) == 0.0);
  }
  SUBCASE("scalar contraction: T[0,0,0]=2, z=[3] -> [[6]]") {
    SymTensor3 t(1);
    t.canonical(0, 0, 0) = 2.0;
    Vec z(1);
    z << 3.0;
    CHECK(contract3_to_matrix(t, z)(0, 0) == doctest::Approx(6.0));
  }
  SUBCASE("matches the naive triple-loop reference") {
    std::mt19937_64 rng(3);
    const SymTensor3 t = random_tensor(4, rng);
    const Vec z = random_vec(4, rng);
    const Mat want = ref::contract3_to_matrix(t, z);
    const SymMatrix got = contract3_to_matrix(t, z);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(got(i, j) == doctest::Approx(want(i, j)).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch throws") {
    SymTensor3 t(3);
    CHECK_THROWS_AS(contract3_to_matrix(t, Vec::Ones(4)), std::invalid_argument);
  }
}

TEST_CASE("contract3_full") {
  SUBCASE("zero tensor contracts to zero") {
    SymTensor3 t(2);
    CHECK(contract3_full(t, Vec::Ones(2), Vec::Ones(2), Vec::Ones(2)) == 0.0);
  }
  SUBCASE("n=1, T=2, z=[2] -> 2*2^3 = 16") {
    SymTensor3 t(1);
    t.canonical(0, 0, 0) = 2.0;
    Vec z(1);
    z << 2.0;
    CHECK(contract3_full(t, z, z, z) == doctest::Approx(16.0));
  }
  SUBCASE("symmetric in its arguments") {
    std::mt19937_64 rng(4);
    const SymTensor3 t = random_tensor(5, rng);
    const Vec a = random_vec(5, rng), b = random_vec(5, rng), c = random_vec(5, rng);
    const double abc = contract3_full(t, a, b, c);
    CHECK(contract3_full(t, c, a, b) == doctest::Approx(abc).epsilon(1e-14));
    CHECK(contract3_full(t, b, c, a) == doctest::Approx(abc).epsilon(1e-14));
  }
  SUBCASE("matches the naive triple-loop reference") {
    std::mt19937_64 rng(5);
    const SymTensor3 t = random_tensor(6, rng);
    const Vec a = random_vec(6, rng), b = random_vec(6, rng), c = random_vec(6, rng);
    CHECK(contract3_full(t, a, b, c) ==
          doctest::Approx(ref::contract3_full(t, a, b, c)).epsilon(1e-13));
  }
}

TEST_CASE("operator_norm_upper") {
  SUBCASE("zero tensor") { CHECK(operator_norm_upper(SymTensor3(4)) == 0.0); }
  SUBCASE("n=1 tensor equals its entry") {
    SymTensor3 t(1);
    t.canonical(0, 0, 0) = 5.0;
    CHECK(operator_norm_upper(t) == doctest::Approx(5.0));
  }
  SUBCASE("upper-bounds random unit-vector contractions") {
    std::mt19937_64 rng(6);
    const SymTensor3 t = random_tensor(3, rng);
    const double bound = operator_norm_upper(t);
    double best = 0.0;
    for (int s = 0; s < 1000; ++s) {
      Vec u = random_vec(3, rng), v = random_vec(3, rng), w = random_vec(3, rng);
      u.normalize();
      v.normalize();
      w.normalize();
      best = std::max(best, std::abs(contract3_full(t, u, v, w)));
    }
    CHECK(bound >= best);
  }
  SUBCASE("matches the reference Frobenius norm") {
    std::mt19937_64 rng(7);
    const SymTensor3 t = random_tensor(5, rng);
    CHECK(operator_norm_upper(t) == doctest::Approx(ref::frobenius_norm(t)).epsilon(1e-13));
  }
}

TEST_CASE("contraction identities") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + int(rng() % 6);
    const SymTensor3 t = random_tensor(n, rng);
    const Vec a = random_vec(n, rng), b = random_vec(n, rng), c = random_vec(n, rng);

    // matrix contraction followed by a quadratic form equals the full contraction
    const double via_matrix = a.dot(contract3_to_matrix(t, c).apply(b));
    const double full = contract3_full(t, a, b, c);
    CHECK(via_matrix == doctest::Approx(full).epsilon(1e-13));

    // |T[u,v,w]| <= operator_norm_upper(T) ||u|| ||v|| ||w||
    CHECK(std::abs(full) <= operator_norm_upper(t) * a.norm() * b.norm() * c.norm() * (1 + 1e-13));
  }
}

TEST_CASE("accumulation helpers match dense formulas") {
  std::mt19937_64 rng(9);
  const int n = 5, m = 7;
  Mat rows(m, n);
  Vec coeff(m);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < m; ++i) {
    coeff[i] = normal(rng);
    for (int j = 0; j < n; ++j) rows(i, j) = normal(rng);
  }

  SymMatrix g(n);
  g.add_weighted_gram(coeff, rows);
  const Mat g_want = rows.transpose() * coeff.asDiagonal() * rows;
  CHECK((g.dense() - g_want).norm() < 1e-12);

  SymTensor3 t(n);
  t.add_weighted_rank1_rows(coeff, rows);
  SymTensor3 want(n);
  for (int i = 0; i < m; ++i) want.add_sym_rank1(coeff[i], rows.row(i).transpose());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k)
        CHECK(t(i, j, k) == doctest::Approx(want(i, j, k)).epsilon(1e-12));

  // add_sym_matvec against the explicit symmetrization
  const Vec s = random_vec(n, rng);
  SymTensor3 tw(n);
  tw.add_sym_matvec(1.5, g, s);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        const double want_e = 1.5 * (g(i, j) * s[k] + g(i, k) * s[j] + g(j, k) * s[i]);
        CHECK(tw(i, j, k) == doctest::Approx(want_e).epsilon(1e-12));
      }
}
