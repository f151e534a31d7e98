#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "error.hpp"
#include "points.hpp"
#include "rng.hpp"
#include "tensor.hpp"

using namespace palatini;
using tensor::antisymmetrize_pair;
using tensor::contract;
using tensor::metric_aux;
using tensor::symmetrize_pair;
using tensor::Tensor;

namespace {

Tensor random_tensor(int rank, rng::Stream& s) {
  Tensor t(rank);
  for (double& x : t.data()) x = s.symmetric();
  return t;
}

}  // namespace

TEST_CASE("contract: eta is an involution") {
  Tensor eta = tensor::minkowski();
  Tensor r = contract("ab,bc->ac", {eta, eta});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(r({i, j}) == doctest::Approx(i == j ? 1.0 : 0.0));
}

TEST_CASE("contract: trace of identity is 4") {
  Tensor d = tensor::identity2();
  CHECK(contract("ab,ab->", {d, d}).scalar() == doctest::Approx(4.0));
}

TEST_CASE("contract: matches triple-loop oracle") {
  rng::Stream s(7);
  Tensor t = random_tensor(3, s);
  Tensor m = random_tensor(2, s);
  Tensor r = contract("abc,bc->a", {t, m});
  for (int a = 0; a < 4; ++a) {
    double want = 0.0;
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) want += t({a, b, c}) * m({b, c});
    CHECK(std::abs(r({a}) - want) < 1e-14);
  }
}

TEST_CASE("contract: multilinearity under operand scaling") {
  rng::Stream s(11);
  Tensor t = random_tensor(2, s);
  Tensor m = random_tensor(2, s);
  Tensor base = contract("ab,bc->ac", {t, m});
  Tensor t2 = t;
  for (double& x : t2.data()) x *= 3.5;
  Tensor scaled = contract("ab,bc->ac", {t2, m});
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(scaled.data()[i] == doctest::Approx(3.5 * base.data()[i]).epsilon(1e-13));
}

TEST_CASE("contract: descriptive failures") {
  Tensor t(2), m(3);
  CHECK_THROWS_AS(contract("ab,bc->ac", {t, t, t}), Error);
  CHECK_THROWS_AS(contract("abc,bc->a", {t, m}), Error);   // arity mismatch
  CHECK_THROWS_AS(contract("ab,ab->a", {t, t}), Error);    // summed label in output
  CHECK_THROWS_AS(contract("aa,ab->b", {t, t}), Error);    // label thrice
}

TEST_CASE("antisymmetrize_pair: symmetric input dies") {
  rng::Stream s(3);
  Tensor t(2);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) t({i, j}) = t({j, i}) = s.symmetric();
  Tensor a = antisymmetrize_pair(t, 0, 1);
  CHECK(a.max_abs() == 0.0);
}

TEST_CASE("antisymmetrize_pair: Gamma on lower axes gives the torsion") {
  rng::Stream s(5);
  Tensor gam = random_tensor(3, s);
  Tensor tor = antisymmetrize_pair(gam, 1, 2);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        CHECK(tor({a, b, c}) == doctest::Approx(gam({a, b, c}) - gam({a, c, b})));
}

TEST_CASE("antisymmetrize_pair: applying twice doubles") {
  rng::Stream s(9);
  Tensor t = random_tensor(4, s);
  Tensor once = antisymmetrize_pair(t, 1, 3);
  Tensor twice = antisymmetrize_pair(once, 1, 3);
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(twice.data()[i] == doctest::Approx(2.0 * once.data()[i]));
}

TEST_CASE("antisymmetrize after symmetrize annihilates exactly") {
  rng::Stream s(13);
  Tensor t = random_tensor(3, s);
  Tensor sym = symmetrize_pair(t, 0, 2);
  Tensor anti = antisymmetrize_pair(sym, 0, 2);
  CHECK(anti.max_abs() == 0.0);
}

TEST_CASE("metric_aux: Minkowski is self-inverse with rho=1") {
  auto [inv, rho] = metric_aux(tensor::minkowski());
  CHECK(rho == doctest::Approx(1.0));
  Tensor eta = tensor::minkowski();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(inv({i, j}) == doctest::Approx(eta({i, j})));
}

TEST_CASE("metric_aux: diagonal example") {
  Tensor g(2);
  g({0, 0}) = -4.0;
  g({1, 1}) = g({2, 2}) = g({3, 3}) = 1.0;
  auto [inv, rho] = metric_aux(g);
  CHECK(rho == doctest::Approx(2.0));
  CHECK(inv({0, 0}) == doctest::Approx(-0.25));
  CHECK(inv({1, 1}) == doctest::Approx(1.0));
}

TEST_CASE("metric_aux: random Lorentzian inverse vs Gaussian elimination") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = palatini::jet::sample_jet_point(seed);
    Tensor g(2);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) g({a, b}) = p.v[palatini::jet::g_id(a, b)];
    auto [inv, rho] = metric_aux(g);

    // Gaussian elimination oracle: solve g * col_j = e_j
    double m[4][8];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        m[i][j] = g({i, j});
        m[i][4 + j] = (i == j) ? 1.0 : 0.0;
      }
    for (int col = 0; col < 4; ++col) {
      int piv = col;
      for (int r = col + 1; r < 4; ++r)
        if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
      for (int c = 0; c < 8; ++c) std::swap(m[piv][c], m[col][c]);
      double d = m[col][col];
      for (int c = 0; c < 8; ++c) m[col][c] /= d;
      for (int r = 0; r < 4; ++r) {
        if (r == col) continue;
        double f = m[r][col];
        for (int c = 0; c < 8; ++c) m[r][c] -= f * m[col][c];
      }
    }
    double maxdiff = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) maxdiff = std::max(maxdiff, std::abs(inv({i, j}) - m[i][4 + j]));
    CHECK(maxdiff < 1e-10);

    // round trip: g_inv * g = identity
    Tensor prod = contract("ab,bc->ac", {inv, g});
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(std::abs(prod({i, j}) - (i == j ? 1.0 : 0.0)) < 1e-12);
    CHECK(rho > 0.0);
  }
}

TEST_CASE("metric_aux: singular metric rejected") {
  Tensor g(2);  // rank-deficient
  g({0, 0}) = 1.0;
  CHECK_THROWS_AS(metric_aux(g), Error);
}

TEST_CASE("declared symmetry validation") {
  Tensor t(2);
  t({0, 1}) = 2.0;
  t({1, 0}) = 2.0;
  CHECK_NOTHROW(t.declare_symmetry(0, 1, Tensor::SymKind::Symmetric));
  Tensor u(2);
  u({0, 1}) = 2.0;
  u({1, 0}) = -1.0;
  CHECK_THROWS_AS(u.declare_symmetry(0, 1, Tensor::SymKind::Symmetric), Error);
}
