#pragma once

// Global coordinate atlas. Every bundle chart the engine uses (J^1 pi with
// second-order jets, the multimomentum bundles, the pure-connection chart,
// J^1 pi_Sigma) draws its coordinates from one interned id table, so forms,
// vector fields and gradients can move between bundles without translation.
//
// Storage holds independent coordinates only: symmetric pairs (a<=b) are
// enumerated in the order 00,01,02,03,11,12,13,22,23,33.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ad.hpp"

namespace palatini::jet {

inline constexpr int kDim = 4;
inline constexpr int kNPairs = 10;

constexpr std::array<std::array<int, 2>, kNPairs> kPairs = {{
    {0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3},
}};

constexpr int pair_index(int a, int b) {
  int lo = a < b ? a : b;
  int hi = a < b ? b : a;
  // row offsets for lo = 0..3 in the a<=b enumeration
  constexpr int off[4] = {0, 4, 7, 9};
  return off[lo] + (hi - lo);
}

// combinatorial factor n(ab): 1 on the diagonal, 2 off it
constexpr double pair_mult(int a, int b) { return a == b ? 1.0 : 2.0; }

// ---- block offsets -------------------------------------------------------
inline constexpr int kX = 0;          // x^mu                      (4)
inline constexpr int kG = 4;          // g_{ab}, a<=b              (10)
inline constexpr int kGamma = 14;     // Gamma^a_{bc}              (64)
inline constexpr int kDG = 78;        // g_{ab,mu}                 (40)
inline constexpr int kDGamma = 118;   // Gamma^a_{bc,mu}           (256)
inline constexpr int kDDG = 374;      // g_{ab,mu nu}, mu<=nu      (100)
inline constexpr int kDDGamma = 474;  // Gamma^a_{bc,mu nu}        (640)
inline constexpr int kPMetric = 1114; // p^{ab,mu}                 (40)
inline constexpr int kPConn = 1154;   // p_a^{bc,mu}               (256)
inline constexpr int kPScalar = 1410; // p                         (1)
inline constexpr int kPSym = 1411;    // p^{ab}, a<=b              (10)
inline constexpr int kTotal = 1421;

constexpr int x_id(int mu) { return kX + mu; }
constexpr int g_id(int a, int b) { return kG + pair_index(a, b); }
constexpr int gamma_id(int a, int b, int c) { return kGamma + (a * 4 + b) * 4 + c; }
constexpr int dg_id(int a, int b, int mu) { return kDG + pair_index(a, b) * 4 + mu; }
constexpr int dgamma_id(int a, int b, int c, int mu) {
  return kDGamma + ((a * 4 + b) * 4 + c) * 4 + mu;
}
constexpr int ddg_id(int a, int b, int mu, int nu) {
  return kDDG + pair_index(a, b) * 10 + pair_index(mu, nu);
}
constexpr int ddgamma_id(int a, int b, int c, int mu, int nu) {
  return kDDGamma + ((a * 4 + b) * 4 + c) * 10 + pair_index(mu, nu);
}
constexpr int pmetric_id(int a, int b, int mu) { return kPMetric + pair_index(a, b) * 4 + mu; }
constexpr int pconn_id(int a, int b, int c, int mu) {
  return kPConn + ((a * 4 + b) * 4 + c) * 4 + mu;
}
constexpr int pscalar_id() { return kPScalar; }
constexpr int psym_id(int a, int b) { return kPSym + pair_index(a, b); }

std::string coord_name(int id);

// ---- bundles -------------------------------------------------------------
enum class Bundle {
  E,            // x, g, Gamma                      (78)
  J1,           // E + dg, dGamma                   (374)
  J2,           // J1 + ddg, ddGamma                (1114)
  MPi,          // E + p_metric, p_conn, p          (375)
  J1Star,       // E + p_metric, p_conn             (374)
  PNonMomenta,  // x, g, Gamma                      (78)
  PPure,        // x, Gamma, p_sym                  (78)
  PGamma,       // x, Gamma, p_conn                 (324)
  SigmaJ1,      // x, g, dg                         (54)
};

const std::vector<int>& bundle_ids(Bundle b);

struct DimRecord {
  int E = 0, J1 = 0, M = 0, J1star = 0, P = 0, Sigma_J1 = 0;
};
DimRecord dims();

// ---- point storage -------------------------------------------------------
struct PointValues {
  std::array<double, kTotal> v{};
  double operator[](int id) const { return v[id]; }
  double& operator[](int id) { return v[id]; }
};

// lift a stored value into the requested scalar type, seeding derivatives
template <class S>
struct Lift;

template <>
struct Lift<double> {
  static double at(double value, int) { return value; }
};
template <>
struct Lift<ad::Dual> {
  static ad::Dual at(double value, int id) { return ad::Dual::seeded(value, id); }
};

// Typed accessor over a point. Physics formulas are templated on an accessor
// type Q exposing Scalar and the coordinate readers below.
template <class S>
class Chart {
 public:
  using Scalar = S;
  explicit Chart(const PointValues& p) : p_(&p) {}

  S read(int id) const { return Lift<S>::at((*p_)[id], id); }

  S x(int mu) const { return read(x_id(mu)); }
  S g(int a, int b) const { return read(g_id(a, b)); }
  S Gamma(int a, int b, int c) const { return read(gamma_id(a, b, c)); }
  S dg(int a, int b, int mu) const { return read(dg_id(a, b, mu)); }
  S dGamma(int a, int b, int c, int mu) const { return read(dgamma_id(a, b, c, mu)); }
  S ddg(int a, int b, int mu, int nu) const { return read(ddg_id(a, b, mu, nu)); }
  S ddGamma(int a, int b, int c, int mu, int nu) const {
    return read(ddgamma_id(a, b, c, mu, nu));
  }
  S p_metric(int a, int b, int mu) const { return read(pmetric_id(a, b, mu)); }
  S p_conn(int a, int b, int c, int mu) const { return read(pconn_id(a, b, c, mu)); }
  S p_scalar() const { return read(pscalar_id()); }
  S p_sym(int a, int b) const { return read(psym_id(a, b)); }

  const PointValues& point() const { return *p_; }

 private:
  const PointValues* p_;
};

// Chart computing Hessian columns: second level seeds only the given id.
class Dual2Chart {
 public:
  using Scalar = ad::Dual2;
  Dual2Chart(const PointValues& p, int inner_id) : p_(&p), inner_(inner_id) {}

  ad::Dual2 read(int id) const {
    double value = (*p_)[id];
    ad::Dual inner_part = (id == inner_) ? ad::Dual::seeded(value, id) : ad::Dual(value);
    return ad::Dual2(inner_part, ad::SparseVec<ad::Dual>::unit(id, ad::Dual(1.0)));
  }

  ad::Dual2 x(int mu) const { return read(x_id(mu)); }
  ad::Dual2 g(int a, int b) const { return read(g_id(a, b)); }
  ad::Dual2 Gamma(int a, int b, int c) const { return read(gamma_id(a, b, c)); }
  ad::Dual2 dg(int a, int b, int mu) const { return read(dg_id(a, b, mu)); }
  ad::Dual2 dGamma(int a, int b, int c, int mu) const { return read(dgamma_id(a, b, c, mu)); }
  ad::Dual2 ddg(int a, int b, int mu, int nu) const { return read(ddg_id(a, b, mu, nu)); }
  ad::Dual2 ddGamma(int a, int b, int c, int mu, int nu) const {
    return read(ddgamma_id(a, b, c, mu, nu));
  }
  ad::Dual2 p_metric(int a, int b, int mu) const { return read(pmetric_id(a, b, mu)); }
  ad::Dual2 p_conn(int a, int b, int c, int mu) const { return read(pconn_id(a, b, c, mu)); }
  ad::Dual2 p_scalar() const { return read(pscalar_id()); }
  ad::Dual2 p_sym(int a, int b) const { return read(psym_id(a, b)); }

 private:
  const PointValues* p_;
  int inner_;
};

}  // namespace palatini::jet
