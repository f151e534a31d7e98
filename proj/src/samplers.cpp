#include "samplers.hpp"

#include <cmath>
#include <vector>

#include "linalg.hpp"
#include "physics.hpp"
#include "rng.hpp"

namespace palatini::jet {

namespace {

double gaussian(rng::Stream& s) {
  // Box-Muller; unit variance
  double u1 = s.uniform();
  while (u1 == 0.0) u1 = s.uniform();
  double u2 = s.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// set Gamma so the torsion has pure trace form: T = (1/3)(delta u - delta u)
void impose_trace_torsion(PointValues& v, const std::array<double, 4>& u, rng::Stream& s) {
  double sym[4][4][4];
  for (auto& m : sym)
    for (auto& row : m)
      for (double& x : row) x = s.symmetric();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        double t = ((a == b ? u[c] : 0.0) - (a == c ? u[b] : 0.0)) / 3.0;
        v[gamma_id(a, b, c)] = 0.5 * (sym[a][b][c] + sym[a][c][b]) + 0.5 * t;
      }
}

// rows of an affine-in-dGamma constraint component: value = c0 + row . dGamma
struct AffineRow {
  double c0 = 0.0;
  Eigen::RowVectorXd row;
};

template <class F>
void append_rows(std::vector<AffineRow>& rows, const PointValues& base, F&& eval_components) {
  // evaluate with dual seeds at dGamma = 0; gradients give the linear part
  PointValues w = base;
  for (int i = 0; i < 256; ++i) w[kDGamma + i] = 0.0;
  Chart<ad::Dual> q(w);
  for (const ad::Dual& comp : eval_components(q)) {
    AffineRow r;
    r.c0 = comp.v;
    r.row = Eigen::RowVectorXd::Zero(256);
    for (const auto& [id, d] : comp.d.entries()) {
      if (id >= kDGamma && id < kDDG) r.row(id - kDGamma) = d;
      // other derivative entries are irrelevant here: the base point is fixed
    }
    rows.push_back(std::move(r));
  }
}

std::vector<ad::Dual> c_components(const Chart<ad::Dual>& q) {
  auto met = phys::metric(q);
  auto dh = phys::dh_dg(q);
  std::vector<ad::Dual> out;
  for (int pr = 0; pr < kNPairs; ++pr) {
    int mu = kPairs[pr][0], nu = kPairs[pr][1];
    ad::Dual v = dh[mu][nu];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int m = 0; m < 4; ++m)
            v -= phys::dl_dg(met, a, b, c, m, mu, nu) * q.dGamma(a, b, c, m);
    out.push_back(v);
  }
  return out;
}

std::vector<ad::Dual> r_components(const Chart<ad::Dual>& q) {
  auto r = phys::r_tensor(q);
  std::vector<ad::Dual> out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = b + 1; c < 4; ++c)
        for (int n = 0; n < 4; ++n) out.push_back(r[a][b][c][n]);
  return out;
}

std::vector<ad::Dual> i_components(const Chart<ad::Dual>& q) {
  auto i = phys::i_tensor(q);
  std::vector<ad::Dual> out;
  for (int pr = 0; pr < kNPairs; ++pr)
    for (int m = 0; m < 4; ++m)
      for (int n = m + 1; n < 4; ++n)
        out.push_back(i[kPairs[pr][0]][kPairs[pr][1]][m][n]);
  return out;
}

}  // namespace

JetPoint2 sample_on_surface(Surface surf, std::uint64_t seed, const SampleOptions& opt,
                            SampleDiag* diag) {
  if (surf == Surface::PF)
    fail(Errc::InvalidArgument, "sample_on_surface: use sample_pf for the momentum surface");

  JetPoint2 p = sample_jet_point(seed);
  rng::Stream s = rng::Stream::derive(seed, 0x73757266, static_cast<std::uint64_t>(surf));

  std::array<double, 4> u;
  if (opt.trace)
    u = *opt.trace;
  else
    for (double& x : u) x = s.symmetric();
  impose_trace_torsion(p.v, u, s);

  if (surf == Surface::ST) return p;

  // pre-metricity: dg is determined by (g, Gamma)
  {
    Chart<double> q(p.v);
    auto rhs = phys::premetric_rhs(q);
    for (int pr = 0; pr < kNPairs; ++pr)
      for (int mu = 0; mu < 4; ++mu)
        p.v[dg_id(kPairs[pr][0], kPairs[pr][1], mu)] = rhs[kPairs[pr][0]][kPairs[pr][1]][mu];
  }

  // remaining families are affine in dGamma; build and solve the system
  std::vector<AffineRow> rows;
  append_rows(rows, p.v, c_components);
  append_rows(rows, p.v, r_components);
  if (surf == Surface::SF) append_rows(rows, p.v, i_components);

  const int nrows = static_cast<int>(rows.size());
  Eigen::MatrixXd A(nrows, 256);
  Eigen::VectorXd b(nrows);
  for (int i = 0; i < nrows; ++i) {
    A.row(i) = rows[static_cast<std::size_t>(i)].row;
    b(i) = -rows[static_cast<std::size_t>(i)].c0;
  }

  Eigen::VectorXd particular = la::lstsq(A, b);
  double residual = (A * particular - b).norm();
  if (residual > 1e-7)
    fail(Errc::Numeric,
         "sample_on_surface: inconsistent constraint system, least-squares residual " +
             std::to_string(residual) + " at seed " + std::to_string(seed));

  Eigen::MatrixXd kernel = la::nullspace(A);
  Eigen::VectorXd coeffs(kernel.cols());
  for (int i = 0; i < coeffs.size(); ++i) coeffs(i) = gaussian(s);
  Eigen::VectorXd dgamma = particular + kernel * coeffs;
  for (int i = 0; i < 256; ++i) p.v[kDGamma + i] = dgamma(i);

  if (diag) {
    diag->lsq_residual = residual;
    diag->kernel_dim = static_cast<int>(kernel.cols());
  }
  return p;
}

MomentumPoint sample_pf(std::uint64_t seed, bool extended) {
  JetPoint2 p = sample_on_surface(Surface::ST, seed);
  MomentumPoint m;
  m.v = p.v;
  // wipe jet velocities; the image lives in momentum coordinates
  for (int i = kDG; i < kPMetric; ++i) m.v[i] = 0.0;
  Chart<double> q(p.v);
  auto L = phys::aux_l(q);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int mu = 0; mu < 4; ++mu) m.v[pconn_id(a, b, c, mu)] = L[a][b][c][mu];
  // p^{ab,mu} = dL/dg_{ab,mu} = 0 already
  if (extended) {
    m.v[pscalar_id()] = -phys::aux_h(q);
    m.has_p = true;
  }
  return m;
}

Surface surface_from_string(const std::string& name) {
  if (name == "st") return Surface::ST;
  if (name == "ssh") return Surface::SSH;
  if (name == "sf") return Surface::SF;
  if (name == "pf") return Surface::PF;
  fail(Errc::Config, "unknown surface '" + name + "' (expected st|ssh|sf|pf)");
}

}  // namespace palatini::jet
