#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hamiltonian.hpp"
#include "physics.hpp"
#include "rng.hpp"
#include "samplers.hpp"

using namespace palatini;
using namespace palatini::ham;

TEST_CASE("Legendre map: image, fibers, momentum coordinates") {
  // Minkowski, Gamma = 0: p_0^{11,0} = 1, all metric momenta vanish, p = 0
  jet::JetPoint2 flat;
  flat.v[jet::g_id(0, 0)] = -1.0;
  flat.v[jet::g_id(1, 1)] = flat.v[jet::g_id(2, 2)] = flat.v[jet::g_id(3, 3)] = 1.0;
  auto m = extended_legendre(flat);
  CHECK(m.v[jet::pconn_id(0, 1, 1, 0)] == doctest::Approx(1.0));
  for (int i = 0; i < 40; ++i) CHECK(m.v[jet::kPMetric + i] == 0.0);
  CHECK(m.v[jet::pscalar_id()] == 0.0);

  for (std::uint64_t s = 0; s < 10; ++s) {
    auto p = jet::sample_jet_point(s);
    CHECK(legendre_image_constraint_residual(legendre(p)) < 1e-12);
    // two points differing only in the velocities have identical images
    auto p2 = p;
    rng::Stream st(s + 1000);
    for (int i = jet::kDG; i < jet::kDDG; ++i) p2.v[i] = st.symmetric();
    auto m1 = legendre(p), m2 = legendre(p2);
    CHECK(m1.v.v == m2.v.v);
  }
}

TEST_CASE("Legendre rank 78, kernel 296 containing the velocity block") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto p = jet::sample_jet_point(s);
    CHECK(legendre_rank(p.v) == 78);
    CHECK(legendre_kernel_dim(p.v) == 296);
    CHECK(legendre_kernel_velocity_residual(p.v) == 0.0);
  }
}

TEST_CASE("Poincare-Cartan forms are Legendre-projectable") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto p = jet::sample_jet_point(s);
    auto r = fl_projectability(p.v, s);
    CHECK(r.theta_dev < 1e-9);
    CHECK(r.omega_dev < 1e-9);
  }
}

TEST_CASE("constraint projectability signature") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto p = jet::sample_jet_point(s);
    auto r = constraint_projectability(p.v);
    CHECK(r.t_kernel_max < 1e-12);
    CHECK(r.c_witness > 1e-3);
    CHECK(r.m_witness > 1e-3);
    CHECK(r.r_witness > 1e-3);
    CHECK(r.i_witness > 1e-3);
  }
}

TEST_CASE("Hamiltonian residuals coincide with the Lagrangian ones") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto p = jet::sample_jet_point(s);
    auto q = legendre(p);
    rng::Stream st(s);
    lag::MVCoeffs c;
    for (int pr = 0; pr < 10; ++pr)
      for (int nu = 0; nu < 4; ++nu) c.f_g[pr][nu] = st.symmetric();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int cc = 0; cc < 4; ++cc)
          for (int nu = 0; nu < 4; ++nu) c.f_gamma[a][b][cc][nu] = st.symmetric();
    auto r_lag = lag::field_eq_residuals(c, p.v);
    auto r_ham = lag::field_eq_residuals(c, q.v);
    for (int i = 0; i < 10; ++i)
      CHECK(std::abs(r_lag.fun4[i] - r_ham.fun4[i]) < 1e-12);
    for (int i = 0; i < 64; ++i)
      CHECK(std::abs(r_lag.fun5[i] - r_ham.fun5[i]) < 1e-12);
  }
}

TEST_CASE("Hamiltonian solution family on P_f") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto q = jet::sample_pf(s);
    for (std::uint64_t draw = 0; draw < 3; ++draw) {
      auto hp = sample_ham_params(q.v, s * 17 + draw);
      CHECK(ham_params_admissibility(hp, q.v) < 1e-10);
      auto res = ham_solution_residuals(hp, q.v);
      CHECK(res.max4 < 1e-9);
      CHECK(res.max5 < 1e-9);
      CHECK(ham_t_tangency(hp, q.v) < 1e-8);
    }
    // K violating the bracket condition fails the t-tangency
    auto bad = sample_ham_params(q.v, s);
    bad.k[7] += 0.2;
    CHECK(ham_t_tangency(bad, q.v) > 1e-3);
  }
}

TEST_CASE("zero-parameter family solves the equations at flat points") {
  jet::JetPoint2 flat;
  flat.v[jet::g_id(0, 0)] = -1.0;
  flat.v[jet::g_id(1, 1)] = flat.v[jet::g_id(2, 2)] = flat.v[jet::g_id(3, 3)] = 1.0;
  auto m = legendre(flat);
  HamParams zero;
  auto res = ham_solution_residuals(zero, m.v);
  CHECK(res.max4 == 0.0);
  CHECK(res.max5 == 0.0);
}

TEST_CASE("integrability restriction kills the g-block brackets") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    auto q = jet::sample_pf(s);
    auto restricted = sample_ham_params(q.v, s + 3, true);
    CHECK(ham_bracket_gblock(restricted, q.v) < 1e-8);
    auto unrestricted = sample_ham_params(q.v, s + 3, false);
    CHECK(ham_bracket_gblock(unrestricted, q.v) > 1e-3);
  }
}

TEST_CASE("pure-connection chart: Lemma T = 9 rho and the chart change") {
  // Minkowski: p^{ab} = -3 eta^{ab}, T = 9
  jet::PointValues flat{};
  flat[jet::g_id(0, 0)] = -1.0;
  flat[jet::g_id(1, 1)] = flat[jet::g_id(2, 2)] = flat[jet::g_id(3, 3)] = 1.0;
  auto r = to_pure(flat);
  CHECK(r.v[jet::psym_id(0, 0)] == doctest::Approx(3.0));
  CHECK(r.v[jet::psym_id(1, 1)] == doctest::Approx(-3.0));
  auto mc = lemma_mc_check(flat);
  CHECK(mc.t_vs_9rho < 1e-12);

  for (std::uint64_t s = 0; s < 20; ++s) {
    auto q = jet::sample_pf(s);
    auto check = lemma_mc_check(q.v);
    CHECK(check.t_vs_9rho < 1e-10);
    CHECK(check.g_route_dev < 1e-10);
    CHECK(check.pconn_reconstruction_dev < 1e-10);
    CHECK(check.roundtrip_dev < 1e-10);
    CHECK(h_chart_consistency(q.v) < 1e-11 * std::max(1.0, std::abs(lag::aux_h(q.v))));
  }
}

TEST_CASE("pure-chart field equations and solutions") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto q = jet::sample_pf(s);
    auto r = to_pure(q.v);
    auto hp = sample_ham_params(q.v, s + 11);
    auto pc = pure_solution_coeffs(hp, r.v);
    auto res = ham_residuals_pure(pc, r.v);
    CHECK(res.max1 < 1e-9);
    CHECK(res.max2 < 1e-9);
    CHECK(pure_solution_form_residual(hp, r.v) < 1e-9);
  }
  // flat point, zero coefficients: H vanishes and so do the residuals
  jet::PointValues flat{};
  flat[jet::g_id(0, 0)] = -1.0;
  flat[jet::g_id(1, 1)] = flat[jet::g_id(2, 2)] = flat[jet::g_id(3, 3)] = 1.0;
  auto rp = to_pure(flat);
  CHECK(std::abs(phys::h_pure(jet::Chart<double>(rp.v))) == 0.0);
  PureCoeffs zero;
  auto res = ham_residuals_pure(zero, rp.v);
  CHECK(res.max1 == 0.0);
  CHECK(res.max2 == 0.0);
}

TEST_CASE("gauge fields in both charts; torsion candidates break tangency") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    auto q = jet::sample_pf(s);
    auto g = ham_gauge_checks(q.v, s);
    CHECK(g.nonmomenta_tangent_max < 1e-8);
    CHECK(g.pure_tangent_max < 1e-8);
    CHECK(g.trace_t_tangency < 1e-12);
    CHECK(g.torsion_t_tangency > 1e-3);
  }
}

TEST_CASE("zeta equivalence with the pure-connection momentum bundle") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto q = jet::sample_pf(s);
    auto z = zeta_equivalence_check(q.v, s, 50);
    CHECK(z.form_dev < 1e-9);
    CHECK(z.roundtrip_dev < 1e-10);
    CHECK(z.image_constraint_dev < 1e-12);
  }
}
