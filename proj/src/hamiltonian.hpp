#pragma once

// Multimomentum Hamiltonian side: Legendre maps and their rank/kernel
// structure, field equations in the non-momenta and pure-connection charts,
// first-order solution families, gauge fields, and the pure-connection
// equivalence.

#include <Eigen/Dense>
#include <array>
#include <cstdint>

#include "fields.hpp"
#include "forms.hpp"
#include "lagrangian.hpp"
#include "points.hpp"

namespace palatini::ham {

using ext::VectorFieldExpr;
using jet::PointValues;

// ---- Legendre maps ---------------------------------------------------------

jet::MomentumPoint legendre(const jet::JetPoint2& p);
jet::MomentumPoint extended_legendre(const jet::JetPoint2& p);
ext::CoordMap legendre_map();  // J1 coords -> J1* coords

// numeric rank of the 374 -> 374 Jacobian (78 for every point)
int legendre_rank(const PointValues& p);
int legendre_kernel_dim(const PointValues& p);
// max |pushforward| over the velocity directions (exactly zero)
double legendre_kernel_velocity_residual(const PointValues& p);
// image satisfies the momentum constraints
double legendre_image_constraint_residual(const jet::MomentumPoint& m);

struct FLProjectability {
  double theta_dev = 0, omega_dev = 0;
};
FLProjectability fl_projectability(const PointValues& p, std::uint64_t seed, int trials = 10);

struct ConstraintProjectability {
  double t_kernel_max;  // < 1e-12: t is projectable
  double c_witness, m_witness, r_witness, i_witness;  // > 1e-3: the rest are not
};
ConstraintProjectability constraint_projectability(const PointValues& p);

// ---- non-momenta chart -------------------------------------------------------

struct HamParams {
  std::array<double, 16> c{};   // C_{b,nu} at b*4 + nu
  std::array<double, 256> k{};  // K^a_{bc,nu} at ((a*4+b)*4+c)*4 + nu
};

double ham_params_admissibility(const HamParams& hp, const PointValues& q);
HamParams sample_ham_params(const PointValues& q, std::uint64_t seed, bool restricted = false);

// the displayed solution multivector on P in non-momenta coordinates
lag::MultiVector4 ham_solution(const HamParams& hp);
// residuals of (ha1)/(ha2) for the solution family coefficients
lag::FieldEqResiduals ham_solution_residuals(const HamParams& hp, const PointValues& q);
double ham_t_tangency(const HamParams& hp, const PointValues& q);
// g-block bracket maximum of the solution multivector
double ham_bracket_gblock(const HamParams& hp, const PointValues& q);

// ---- pure-connection chart ------------------------------------------------------

jet::PureConnectionPoint to_pure(const PointValues& q);
PointValues from_pure(const jet::PureConnectionPoint& r);

struct McLemma {
  double t_vs_9rho;       // |T - 9 rho|
  double g_route_dev;     // both displayed inversion routes agree
  double pconn_reconstruction_dev;
  double roundtrip_dev;
};
McLemma lemma_mc_check(const PointValues& q);

double h_chart_consistency(const PointValues& q);  // H_pure(Psi(q)) vs H(q)

ext::Form omega_h_pure();

struct PureCoeffs {
  double f_gamma[4][4][4][4] = {};  // d/dGamma^a_{bc} per nu
  double g_p[10][4] = {};           // d/dp^{pair} per nu
};
struct PureResiduals {
  double max1 = 0, max2 = 0;
};
PureResiduals ham_residuals_pure(const PureCoeffs& c, const PointValues& r);
PureCoeffs pure_solution_coeffs(const HamParams& hp, const PointValues& r);
// residual 1-form of i(X)Omega_H in the pure chart
double pure_solution_form_residual(const HamParams& hp, const PointValues& r);

// ---- gauge fields -----------------------------------------------------------------

struct HamGauge {
  double nonmomenta_tangent_max;  // i(X)Omega_H against P_f-tangent quadruples
  double pure_tangent_max;
  double trace_t_tangency;   // trace solutions: tangent (0)
  double torsion_t_tangency; // torsion candidates: 2 max|k|
};
HamGauge ham_gauge_checks(const PointValues& q_on_pf, std::uint64_t seed);

// ---- pure-connection equivalence (zeta) ----------------------------------------------

struct ZetaCheck {
  double form_dev;             // Omega0_HGamma vs zeta^* Omega_H
  double roundtrip_dev;        // zeta o zeta^{-1} on constrained momenta
  double image_constraint_dev; // zeta^{-1} image satisfies the P_Gamma display
};
ZetaCheck zeta_equivalence_check(const PointValues& q, std::uint64_t seed, int trials = 50);

}  // namespace palatini::ham
