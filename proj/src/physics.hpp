#pragma once

// Coordinate formulas of the Einstein-Palatini analysis, templated over the
// accessor scalar so every quantity can be evaluated as a plain number or
// with derivative seeds. Index conventions: L[a][b][c][m] holds L^{bc,m}_a,
// T[a][b][c] holds T^a_{bc}, mixed-symmetry factors n(ab) are written out.

#include <array>

#include "ad.hpp"
#include "coords.hpp"
#include "error.hpp"

namespace palatini::phys {

using jet::kDim;
using jet::pair_mult;

template <class S> using M2 = std::array<std::array<S, 4>, 4>;
template <class S> using M3 = std::array<std::array<std::array<S, 4>, 4>, 4>;
template <class S> using M4 = std::array<M3<S>, 4>;
template <class S> using M5 = std::array<M4<S>, 4>;

template <class Q> using Sc = typename Q::Scalar;

template <class S>
S det4(const M2<S>& m) {
  S det{};
  for (int j = 0; j < 4; ++j) {
    int c[3], ci = 0;
    for (int k = 0; k < 4; ++k)
      if (k != j) c[ci++] = k;
    S cof = m[1][c[0]] * (m[2][c[1]] * m[3][c[2]] - m[2][c[2]] * m[3][c[1]]) -
            m[1][c[1]] * (m[2][c[0]] * m[3][c[2]] - m[2][c[2]] * m[3][c[0]]) +
            m[1][c[2]] * (m[2][c[0]] * m[3][c[1]] - m[2][c[1]] * m[3][c[0]]);
    if (j % 2 == 0)
      det += m[0][j] * cof;
    else
      det -= m[0][j] * cof;
  }
  return det;
}

template <class S>
M2<S> inverse4(const M2<S>& m, const S& det) {
  M2<S> inv{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      int r[3], c[3], ri = 0, ci = 0;
      for (int k = 0; k < 4; ++k) {
        if (k != i) r[ri++] = k;
        if (k != j) c[ci++] = k;
      }
      S cof = m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]]) -
              m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]]) +
              m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]]);
      S val = cof / det;
      inv[j][i] = ((i + j) % 2 == 0) ? val : -val;
    }
  }
  return inv;
}

// metric block: g_{ab}, g^{ab}, rho = sqrt(|det g|)
template <class Q>
struct MetricData {
  M2<Sc<Q>> lo, up;
  Sc<Q> rho;
};

template <class Q>
MetricData<Q> metric(const Q& q) {
  using ad::abs;
  using ad::sqrt;
  using std::abs;
  using std::sqrt;
  MetricData<Q> m;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m.lo[a][b] = q.g(a, b);
  Sc<Q> det = det4(m.lo);
  m.up = inverse4(m.lo, det);
  m.rho = sqrt(abs(det));
  return m;
}

template <class Q>
M3<Sc<Q>> torsion(const Q& q) {
  M3<Sc<Q>> t{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) t[a][b][c] = q.Gamma(a, b, c) - q.Gamma(a, c, b);
  return t;
}

template <class Q>
std::array<Sc<Q>, 4> trace_torsion(const Q& q) {
  std::array<Sc<Q>, 4> u{};
  for (int c = 0; c < 4; ++c)
    for (int l = 0; l < 4; ++l) u[c] += q.Gamma(l, l, c) - q.Gamma(l, c, l);
  return u;
}

// R_{ab} = Gamma^c_{ba,c} - Gamma^c_{ca,b} + Gamma^c_{ba} Gamma^s_{sc}
//        - Gamma^c_{bs} Gamma^s_{ca}
template <class Q>
M2<Sc<Q>> ricci(const Q& q) {
  M2<Sc<Q>> r{};
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      Sc<Q> v{};
      for (int c = 0; c < 4; ++c) {
        v += q.dGamma(c, b, a, c) - q.dGamma(c, c, a, b);
        for (int s = 0; s < 4; ++s)
          v += q.Gamma(c, b, a) * q.Gamma(s, s, c) - q.Gamma(c, b, s) * q.Gamma(s, c, a);
      }
      r[a][b] = v;
    }
  }
  return r;
}

template <class Q>
Sc<Q> lagrangian_ep(const Q& q) {
  auto m = metric(q);
  auto r = ricci(q);
  Sc<Q> v{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) v += m.up[a][b] * r[a][b];
  return m.rho * v;
}

// L^{bc,m}_a = rho (delta^m_a g^{bc} - delta^b_a g^{mc})
template <class Q>
M4<Sc<Q>> aux_l(const Q& q) {
  auto met = metric(q);
  M4<Sc<Q>> L{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int m = 0; m < 4; ++m) {
          Sc<Q> v{};
          if (m == a) v += met.up[b][c];
          if (b == a) v -= met.up[m][c];
          L[a][b][c][m] = met.rho * v;
        }
  return L;
}

// H = rho g^{ab}(Gamma^c_{bs}Gamma^s_{ca} - Gamma^c_{ba}Gamma^s_{sc})
template <class Q>
Sc<Q> aux_h(const Q& q) {
  auto m = metric(q);
  Sc<Q> v{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Sc<Q> w{};
      for (int c = 0; c < 4; ++c)
        for (int s = 0; s < 4; ++s)
          w += q.Gamma(c, b, s) * q.Gamma(s, c, a) - q.Gamma(c, b, a) * q.Gamma(s, s, c);
      v += m.up[a][b] * w;
    }
  return m.rho * v;
}

// second route: H = L^{bc,m}_a Gamma^a_{bc,m} - L_EP
template <class Q>
Sc<Q> aux_h_from_legendre(const Q& q) {
  auto L = aux_l(q);
  Sc<Q> v = -lagrangian_ep(q);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int m = 0; m < 4; ++m) v += L[a][b][c][m] * q.dGamma(a, b, c, m);
  return v;
}

// closed-form dH/dGamma^a_{bc} (cross-checked against dual gradients)
template <class Q>
M3<Sc<Q>> dh_dgamma(const Q& q) {
  auto m = metric(q);
  std::array<Sc<Q>, 4> gtrace{};  // Gamma^s_{sa}
  for (int a = 0; a < 4; ++a)
    for (int s = 0; s < 4; ++s) gtrace[a] += q.Gamma(s, s, a);
  std::array<Sc<Q>, 4> gup_gamma{};  // g^{kl} Gamma^c_{lk}
  for (int c = 0; c < 4; ++c) {
    Sc<Q> v{};
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) v += m.up[k][l] * q.Gamma(c, l, k);
    gup_gamma[c] = v;
  }
  M3<Sc<Q>> d{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        Sc<Q> v{};
        for (int k = 0; k < 4; ++k)
          v += m.up[k][b] * q.Gamma(c, a, k) + m.up[c][k] * q.Gamma(b, k, a);
        v -= m.up[c][b] * gtrace[a];
        if (a == b) v -= gup_gamma[c];
        d[a][b][c] = m.rho * v;
      }
  return d;
}

// closed-form dH/dg_{rs} with respect to the stored coordinate (n(rs) folded in)
template <class Q>
M2<Sc<Q>> dh_dg(const Q& q) {
  auto m = metric(q);
  M2<Sc<Q>> w{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int s = 0; s < 4; ++s)
          w[a][b] += q.Gamma(c, b, s) * q.Gamma(s, c, a) - q.Gamma(c, b, a) * q.Gamma(s, s, c);
  Sc<Q> scal{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) scal += m.up[a][b] * w[a][b];
  M2<Sc<Q>> d{};
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s) {
      Sc<Q> v = 0.5 * m.up[r][s] * scal;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          v -= 0.5 * (m.up[a][r] * m.up[s][b] + m.up[a][s] * m.up[r][b]) * w[a][b];
      d[r][s] = pair_mult(r, s) * m.rho * v;
    }
  return d;
}

// dL^{bc,m}_a / dg_{rs} with respect to the stored coordinate g_{rs} (r<=s);
// includes the combinatorial factor n(rs).
template <class Q>
Sc<Q> dl_dg(const MetricData<Q>& met, int a, int b, int c, int m, int r, int s) {
  Sc<Q> v{};
  if (m == a) {
    v += met.up[r][s] * met.up[b][c];
    v -= met.up[b][r] * met.up[s][c] + met.up[b][s] * met.up[r][c];
  }
  if (b == a) {
    v -= met.up[r][s] * met.up[m][c];
    v += met.up[m][r] * met.up[s][c] + met.up[m][s] * met.up[r][c];
  }
  return v * (met.rho * (pair_mult(r, s) * 0.5));
}

// beth^a_{bc,lzn} of the torsion-constraint proof
template <class Q>
Sc<Q> beth(const MetricData<Q>& met, int a, int b, int c, int l, int z, int n) {
  Sc<Q> v{};
  if (n == a) v += met.lo[z][c] * met.lo[l][b] - 0.5 * met.lo[b][c] * met.lo[l][z];
  if (b == a) v += met.lo[l][z] * met.lo[n][c] / 6.0 - met.lo[l][n] * met.lo[z][c] / 3.0;
  return v / met.rho;
}

// torsion constraints A_{abc} (compatibility of the metric equations)
template <class Q>
M3<Sc<Q>> a_tensor(const Q& q) {
  auto met = metric(q);
  auto T = torsion(q);
  auto u = trace_torsion(q);
  M3<Sc<Q>> A{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        Sc<Q> v{};
        for (int n = 0; n < 4; ++n) v += met.lo[b][n] * T[n][a][c] - met.lo[a][n] * T[n][b][c];
        v += (met.lo[b][c] * u[a] - met.lo[a][c] * u[b]) / 3.0;
        A[a][b][c] = v;
      }
  return A;
}

// equivalent form t^a_{bc} = T^a_{bc} - (1/3) delta^a_b tr_c + (1/3) delta^a_c tr_b
template <class Q>
M3<Sc<Q>> t_tensor(const Q& q) {
  auto T = torsion(q);
  auto u = trace_torsion(q);
  M3<Sc<Q>> t{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        Sc<Q> v = T[a][b][c];
        if (a == b) v -= u[c] / 3.0;
        if (a == c) v += u[b] / 3.0;
        t[a][b][c] = v;
      }
  return t;
}

// first-derivative torsion constraints r^a_{bc,n} (tangency of t)
template <class Q>
M4<Sc<Q>> r_tensor(const Q& q) {
  M4<Sc<Q>> r{};
  std::array<std::array<Sc<Q>, 4>, 4> ut{};  // T^l_{lc,n}
  for (int c = 0; c < 4; ++c)
    for (int n = 0; n < 4; ++n)
      for (int l = 0; l < 4; ++l) ut[c][n] += q.dGamma(l, l, c, n) - q.dGamma(l, c, l, n);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int n = 0; n < 4; ++n) {
          Sc<Q> v = q.dGamma(a, b, c, n) - q.dGamma(a, c, b, n);
          if (a == b) v -= ut[c][n] / 3.0;
          if (a == c) v += ut[b][n] / 3.0;
          r[a][b][c][n] = v;
        }
  return r;
}

// right-hand side of the pre-metricity relation (also the dg-image of xi)
template <class Q>
M3<Sc<Q>> premetric_rhs(const Q& q) {
  auto met = metric(q);
  auto u = trace_torsion(q);
  M3<Sc<Q>> f{};
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s)
      for (int m = 0; m < 4; ++m) {
        Sc<Q> v{};
        for (int l = 0; l < 4; ++l)
          v += met.lo[s][l] * q.Gamma(l, m, r) + met.lo[r][l] * q.Gamma(l, m, s);
        v += (2.0 / 3.0) * met.lo[r][s] * u[m];
        f[r][s][m] = v;
      }
  return f;
}

// pre-metricity constraints m_{rs,m} = g_{rs,m} - (rhs)
template <class Q>
M3<Sc<Q>> m_tensor(const Q& q) {
  auto rhs = premetric_rhs(q);
  M3<Sc<Q>> m{};
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s)
      for (int mu = 0; mu < 4; ++mu) m[r][s][mu] = q.dg(r, s, mu) - rhs[r][s][mu];
  return m;
}

// covariant derivative of the metric (nabla g)_{rs,m}
template <class Q>
M3<Sc<Q>> nabla_g(const Q& q) {
  auto met = metric(q);
  M3<Sc<Q>> n{};
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s)
      for (int m = 0; m < 4; ++m) {
        Sc<Q> v = q.dg(r, s, m);
        for (int l = 0; l < 4; ++l)
          v -= met.lo[s][l] * q.Gamma(l, m, r) + met.lo[r][l] * q.Gamma(l, m, s);
        n[r][s][m] = v;
      }
  return n;
}

// Euler-Lagrange ("connection") constraints c^{mn} as derivatives with
// respect to the stored metric coordinates; closed form
// c^{mn} = n(mn) rho [ (Rup^{mn}+Rup^{nm})/2 - g^{mn} R / 2 ].
template <class Q>
M2<Sc<Q>> c_tensor(const Q& q) {
  auto met = metric(q);
  auto R = ricci(q);
  M2<Sc<Q>> up{};
  Sc<Q> scal{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) up[a][b] += met.up[a][m] * R[m][n] * met.up[n][b];
      scal += met.up[a][b] * R[a][b];
    }
  M2<Sc<Q>> c{};
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      c[m][n] = pair_mult(m, n) * met.rho *
                (0.5 * (up[m][n] + up[n][m]) - 0.5 * met.up[m][n] * scal);
  return c;
}

// integrability constraints i_{rs,mn} (first, pure-coordinate line)
template <class Q>
M4<Sc<Q>> i_tensor(const Q& q) {
  auto met = metric(q);
  M4<Sc<Q>> out{};
  std::array<std::array<Sc<Q>, 4>, 4> ut{};  // T^l_{lm,n}
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      for (int l = 0; l < 4; ++l) ut[m][n] += q.dGamma(l, l, m, n) - q.dGamma(l, m, l, n);
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s)
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
          Sc<Q> v{};
          for (int c = 0; c < 4; ++c)
            for (int l = 0; l < 4; ++l) {
              v += met.lo[r][c] * (q.Gamma(c, n, l) * q.Gamma(l, m, s) -
                                   q.Gamma(c, m, l) * q.Gamma(l, n, s));
              v += met.lo[s][c] * (q.Gamma(c, n, l) * q.Gamma(l, m, r) -
                                   q.Gamma(c, m, l) * q.Gamma(l, n, r));
            }
          for (int l = 0; l < 4; ++l) {
            v += met.lo[r][l] * (q.dGamma(l, m, s, n) - q.dGamma(l, n, s, m));
            v += met.lo[s][l] * (q.dGamma(l, m, r, n) - q.dGamma(l, n, r, m));
          }
          v += (2.0 / 3.0) * met.lo[r][s] * (ut[m][n] - ut[n][m]);
          out[r][s][m][n] = v;
        }
  return out;
}

// total derivative of the pre-metricity right-hand side: the g-velocity
// second-order coefficients of the semiholonomic solution family
template <class Q>
M4<Sc<Q>> d_premetric_rhs(const Q& q) {
  auto met = metric(q);
  auto u = trace_torsion(q);
  std::array<std::array<Sc<Q>, 4>, 4> du{};  // D_n of trace torsion
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      for (int l = 0; l < 4; ++l) du[m][n] += q.dGamma(l, l, m, n) - q.dGamma(l, m, l, n);
  M4<Sc<Q>> f{};
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s)
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
          Sc<Q> v{};
          for (int l = 0; l < 4; ++l) {
            v += q.dg(s, l, n) * q.Gamma(l, m, r) + met.lo[s][l] * q.dGamma(l, m, r, n);
            v += q.dg(r, l, n) * q.Gamma(l, m, s) + met.lo[r][l] * q.dGamma(l, m, s, n);
          }
          v += (2.0 / 3.0) * (q.dg(r, s, n) * u[m] + met.lo[r][s] * du[m][n]);
          f[r][s][m][n] = v;
        }
  return f;
}

// Christoffel symbols of the Levi-Civita connection of (g, dg)
template <class Q>
M3<Sc<Q>> levi_civita(const Q& q) {
  auto met = metric(q);
  M3<Sc<Q>> c{};
  for (int m = 0; m < 4; ++m)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        Sc<Q> v{};
        for (int n = 0; n < 4; ++n)
          v += met.up[m][n] * (q.dg(n, a, b) + q.dg(n, b, a) - q.dg(a, b, n));
        c[m][a][b] = 0.5 * v;
      }
  return c;
}

// L^{ab,mn} of the first-order Einstein-Hilbert Lagrangian
template <class Q>
Sc<Q> l_big(const MetricData<Q>& met, int a, int b, int m, int n) {
  return (pair_mult(a, b) * 0.5) * met.rho *
         (met.up[a][m] * met.up[b][n] + met.up[a][n] * met.up[b][m] -
          2.0 * met.up[a][b] * met.up[m][n]);
}

// closed-form dL^{ab,mn}/dg_{ls} (stored-coordinate derivative, n(ls) folded in)
template <class Q>
Sc<Q> dl_big_dg(const MetricData<Q>& met, int a, int b, int m, int n, int l, int s) {
  const double nls = pair_mult(l, s) * 0.5;
  auto dup = [&](int i, int j) {  // d g^{ij} / d g_{ls} without the n factor
    return -(met.up[i][l] * met.up[s][j] + met.up[i][s] * met.up[l][j]);
  };
  Sc<Q> core = met.up[a][m] * met.up[b][n] + met.up[a][n] * met.up[b][m] -
               2.0 * met.up[a][b] * met.up[m][n];
  Sc<Q> dcore = dup(a, m) * met.up[b][n] + met.up[a][m] * dup(b, n) + dup(a, n) * met.up[b][m] +
                met.up[a][n] * dup(b, m) - 2.0 * (dup(a, b) * met.up[m][n] + met.up[a][b] * dup(m, n));
  Sc<Q> drho = met.rho * met.up[l][s];  // times n(ls)/2 applied below
  return (pair_mult(a, b) * 0.5) * nls * (drho * core + met.rho * dcore);
}

// L_0 piece of the first-order Einstein-Hilbert Lagrangian
template <class Q>
Sc<Q> l_zero(const Q& q) {
  auto met = metric(q);
  auto chr = levi_civita(q);
  Sc<Q> total{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Sc<Q> w{};
      for (int c = 0; c < 4; ++c) {
        for (int d = 0; d < 4; ++d) {
          for (int m = 0; m < 4; ++m)
            w += met.up[c][d] * (q.dg(d, m, b) * chr[m][a][c] - q.dg(d, m, c) * chr[m][a][b]);
          w += chr[d][a][b] * chr[c][c][d] - chr[d][a][c] * chr[c][b][d];
        }
      }
      total += met.up[a][b] * w;
    }
  return met.rho * total;
}

// first-order Einstein-Hilbert Lagrangian, closed-form assembly
template <class Q>
Sc<Q> lagrangian_bar_cf(const Q& q) {
  auto met = metric(q);
  Sc<Q> v = l_zero(q);
  for (int pa = 0; pa < jet::kNPairs; ++pa)
    for (int pl = 0; pl < jet::kNPairs; ++pl) {
      int a = jet::kPairs[pa][0], b = jet::kPairs[pa][1];
      int l = jet::kPairs[pl][0], s = jet::kPairs[pl][1];
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n)
          v -= q.dg(a, b, m) * q.dg(l, s, n) * dl_big_dg(met, a, b, m, n, l, s);
    }
  return v;
}

// Hamiltonian in pure-connection coordinates
template <class Q>
Sc<Q> h_pure(const Q& q) {
  Sc<Q> v{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Sc<Q> w{};
      for (int c = 0; c < 4; ++c)
        for (int s = 0; s < 4; ++s)
          w += q.Gamma(c, b, s) * q.Gamma(s, c, a) - q.Gamma(c, b, a) * q.Gamma(s, s, c);
      v += q.p_sym(a, b) * w;
    }
  return v * (-1.0 / 3.0);
}

// Hamiltonian on the pure-connection momentum bundle (trace of p_conn)
template <class Q>
Sc<Q> h_gamma(const Q& q) {
  Sc<Q> v{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Sc<Q> p{};
      for (int r = 0; r < 4; ++r) p += q.p_conn(r, r, a, b);
      Sc<Q> w{};
      for (int c = 0; c < 4; ++c)
        for (int s = 0; s < 4; ++s)
          w += q.Gamma(c, b, s) * q.Gamma(s, c, a) - q.Gamma(c, b, a) * q.Gamma(s, s, c);
      v += p * w;
    }
  return v * (-1.0 / 3.0);
}

}  // namespace palatini::phys
