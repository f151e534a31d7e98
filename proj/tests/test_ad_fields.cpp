#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fields.hpp"
#include "helpers.hpp"
#include "physics.hpp"
#include "points.hpp"

using namespace palatini;
using ext::ScalarField;
using jet::PointValues;
using testutil::central_diff;

namespace {

ScalarField rho_field() {
  return ScalarField::make("rho", [](const auto& q) { return phys::metric(q).rho; });
}

ScalarField h_field() {
  return ScalarField::make("H", [](const auto& q) { return phys::aux_h(q); });
}

}  // namespace

TEST_CASE("jet_gradient: coordinate function has a single unit entry") {
  auto p = jet::sample_jet_point(1);
  ScalarField f = ScalarField::coordinate(jet::g_id(0, 0));
  auto g = ext::jet_gradient(f, p.v);
  REQUIRE(g.size() == 1);
  CHECK(g.entries()[0].first == jet::g_id(0, 0));
  CHECK(g.entries()[0].second == 1.0);
}

TEST_CASE("jet_gradient of rho matches finite differences (all metric coords)") {
  auto p = jet::sample_jet_point(2);
  ScalarField f = rho_field();
  auto g = ext::jet_gradient(f, p.v);
  for (int pr = 0; pr < jet::kNPairs; ++pr) {
    int id = jet::kG + pr;
    double fd = central_diff(f, p.v, id);
    CHECK(std::abs(g.get(id) - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("jet_gradient of H matches finite differences at random points") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto p = jet::sample_jet_point(seed);
    ScalarField f = h_field();
    auto g = ext::jet_gradient(f, p.v);
    for (const auto& [id, d] : g.entries()) {
      double fd = central_diff(f, p.v, id);
      CHECK(std::abs(d - fd) < 1e-6 * std::max(1.0, std::abs(d)));
    }
  }
}

TEST_CASE("Leibniz rule for products at random points") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto p = jet::sample_jet_point(seed);
    ScalarField f = rho_field();
    ScalarField g = h_field();
    ScalarField prod = ScalarField::make(
        "rho*H", [](const auto& q) { return phys::metric(q).rho * phys::aux_h(q); });
    auto df = ext::jet_gradient(f, p.v);
    auto dg = ext::jet_gradient(g, p.v);
    auto dp = ext::jet_gradient(prod, p.v);
    double fv = f.value(p.v), gv = g.value(p.v);
    for (const auto& [id, d] : dp.entries()) {
      double want = fv * dg.get(id) + gv * df.get(id);
      CHECK(std::abs(d - want) <= 1e-9 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("total_derivative: coordinate function picks its velocity") {
  auto p = jet::sample_jet_point(3);
  ScalarField f = ScalarField::coordinate(jet::g_id(0, 1));
  for (int tau = 0; tau < 4; ++tau)
    CHECK(ext::total_derivative(f, tau, p.v) == p.v[jet::dg_id(0, 1, tau)]);
}

TEST_CASE("total_derivative: constants vanish") {
  auto p = jet::sample_jet_point(4);
  CHECK(ext::total_derivative(ScalarField::constant(3.25), 2, p.v) == 0.0);
}

TEST_CASE("total_derivative of H matches hand-assembled chain rule") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = jet::sample_jet_point(seed);
    jet::Chart<double> q(p.v);
    auto dHdg = phys::dh_dg(q);
    auto dHdG = phys::dh_dgamma(q);
    for (int tau = 0; tau < 4; ++tau) {
      double want = 0.0;
      for (int pr = 0; pr < jet::kNPairs; ++pr) {
        auto [a, b] = std::pair{jet::kPairs[pr][0], jet::kPairs[pr][1]};
        want += dHdg[a][b] * p.v[jet::dg_id(a, b, tau)];
      }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          for (int c = 0; c < 4; ++c)
            want += dHdG[a][b][c] * p.v[jet::dgamma_id(a, b, c, tau)];
      double got = ext::total_derivative(h_field(), tau, p.v);
      CHECK(std::abs(got - want) < 1e-10 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("total_derivative rejects second-order dependence") {
  auto p = jet::sample_jet_point(5);
  ScalarField f = ScalarField::coordinate(jet::ddg_id(0, 0, 1, 1));
  CHECK_THROWS_AS(ext::total_derivative(f, 0, p.v), Error);
}

TEST_CASE("total_derivative is a derivation") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto p = jet::sample_jet_point(seed);
    ScalarField f = rho_field();
    ScalarField g = h_field();
    ScalarField prod = ScalarField::make(
        "rho*H", [](const auto& q) { return phys::metric(q).rho * phys::aux_h(q); });
    for (int tau = 0; tau < 4; ++tau) {
      double lhs = ext::total_derivative(prod, tau, p.v);
      double rhs = ext::total_derivative(f, tau, p.v) * g.value(p.v) +
                   f.value(p.v) * ext::total_derivative(g, tau, p.v);
      CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("dual-number closed forms agree with gradients: dH blocks") {
  auto p = jet::sample_jet_point(6);
  jet::Chart<double> q(p.v);
  auto grad = ext::jet_gradient(h_field(), p.v);
  auto dHdg = phys::dh_dg(q);
  auto dHdG = phys::dh_dgamma(q);
  for (int pr = 0; pr < jet::kNPairs; ++pr) {
    auto [a, b] = std::pair{jet::kPairs[pr][0], jet::kPairs[pr][1]};
    CHECK(std::abs(grad.get(jet::g_id(a, b)) - dHdg[a][b]) < 1e-11 * std::max(1.0, std::abs(dHdg[a][b])));
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        CHECK(std::abs(grad.get(jet::gamma_id(a, b, c)) - dHdG[a][b][c]) <
              1e-11 * std::max(1.0, std::abs(dHdG[a][b][c])));
}

TEST_CASE("sampler: determinism and signature") {
  auto a = jet::sample_jet_point(42);
  auto b = jet::sample_jet_point(42);
  CHECK(a.v.v == b.v.v);  // bit-identical
  auto c = jet::sample_jet_point(43);
  CHECK(a.v.v != c.v.v);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto p = jet::sample_jet_point(seed);
    CHECK(jet::is_lorentzian(p.v));
    jet::Chart<double> q(p.v);
    phys::M2<double> g{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) g[i][j] = q.g(i, j);
    CHECK(std::abs(phys::det4(g)) > 1e-6);
  }
}

TEST_CASE("JSON round trip is bit-exact") {
  auto p = jet::sample_jet_point(77);
  auto q = jet::jet_point_from_json(jet::jet_point_to_json(p));
  CHECK(p.v.v == q.v.v);
}
