#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "physics.hpp"
#include "samplers.hpp"

using namespace palatini;
using jet::sample_on_surface;
using jet::Surface;

namespace {

template <class T3>
double max3(const T3& t) {
  double m = 0;
  for (const auto& a : t)
    for (const auto& b : a)
      for (double x : b) m = std::max(m, std::abs(x));
  return m;
}

template <class T4>
double max4(const T4& t) {
  double m = 0;
  for (const auto& a : t) m = std::max(m, max3(a));
  return m;
}

struct FamilyMax {
  double A, t, c, m, r, i;
};

FamilyMax family_maxima(const jet::PointValues& v) {
  jet::Chart<double> q(v);
  FamilyMax f{};
  f.A = max3(phys::a_tensor(q));
  f.t = max3(phys::t_tensor(q));
  f.m = max3(phys::m_tensor(q));
  f.r = max4(phys::r_tensor(q));
  f.i = max4(phys::i_tensor(q));
  auto c = phys::c_tensor(q);
  for (const auto& row : c)
    for (double x : row) f.c = std::max(f.c, std::abs(x));
  return f;
}

}  // namespace

TEST_CASE("S_T samples satisfy the torsion constraints exactly") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto p = sample_on_surface(Surface::ST, s);
    auto f = family_maxima(p.v);
    CHECK(f.t < 1e-12);
    CHECK(f.A < 1e-12);
    // generically off the deeper surfaces
    if (s < 5) {
      CHECK(f.c > 1e-3);
      CHECK(f.m > 1e-3);
    }
  }
}

TEST_CASE("S_sh samples satisfy {c,m,t,r} and generically violate i") {
  int i_violations = 0;
  for (std::uint64_t s = 0; s < 25; ++s) {
    jet::SampleDiag diag;
    auto p = sample_on_surface(Surface::SSH, s, {}, &diag);
    auto f = family_maxima(p.v);
    CHECK(f.t < 1e-9);
    CHECK(f.m < 1e-9);
    CHECK(f.c < 1e-9);
    CHECK(f.r < 1e-9);
    CHECK(diag.lsq_residual < 1e-7);
    if (f.i > 1e-3) ++i_violations;
  }
  CHECK(i_violations >= 24);  // the i-family genuinely cuts the surface down
}

TEST_CASE("S_f samples satisfy all five families") {
  for (std::uint64_t s = 0; s < 25; ++s) {
    jet::SampleDiag diag;
    auto p = sample_on_surface(Surface::SF, s, {}, &diag);
    auto f = family_maxima(p.v);
    CHECK(f.t < 1e-9);
    CHECK(f.m < 1e-9);
    CHECK(f.c < 1e-9);
    CHECK(f.r < 1e-9);
    CHECK(f.i < 1e-9);
  }
}

TEST_CASE("random points are generically far from every surface") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto p = jet::sample_jet_point(s);
    auto f = family_maxima(p.v);
    CHECK(f.t > 1e-3);
    CHECK(f.m > 1e-3);
    CHECK(f.c > 1e-3);
  }
}

TEST_CASE("surface sampling is deterministic per seed") {
  auto a = sample_on_surface(Surface::SF, 7);
  auto b = sample_on_surface(Surface::SF, 7);
  CHECK(a.v.v == b.v.v);
}

TEST_CASE("trace override controls the torsion trace") {
  jet::SampleOptions opt;
  opt.trace = {{0.0, 0.0, 0.0, 0.0}};
  auto p = sample_on_surface(Surface::SSH, 3, opt);
  jet::Chart<double> q(p.v);
  auto u = phys::trace_torsion(q);
  for (double x : u) CHECK(std::abs(x) < 1e-14);
  auto T = phys::torsion(q);
  CHECK(max3(T) < 1e-14);  // zero trace on S_T kills the whole torsion
}

TEST_CASE("P_f samples satisfy the momentum constraints") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto m = jet::sample_pf(s, /*extended=*/true);
    jet::Chart<double> q(m.v);
    auto L = phys::aux_l(q);
    double worst = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int mu = 0; mu < 4; ++mu)
            worst = std::max(worst, std::abs(m.v[jet::pconn_id(a, b, c, mu)] - L[a][b][c][mu]));
    CHECK(worst < 1e-12);
    for (int i = 0; i < 40; ++i) CHECK(m.v[jet::kPMetric + i] == 0.0);
    CHECK(std::abs(m.v[jet::pscalar_id()] + phys::aux_h(q)) < 1e-12);
    // the image point keeps the torsion-constraint (P_f) property
    auto t = phys::t_tensor(q);
    CHECK(max3(t) < 1e-12);
  }
}
