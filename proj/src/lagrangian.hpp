#pragma once

// The Lagrangian analysis: Poincare-Cartan forms, field-equation residuals,
// the constraint families and their solvers, semiholonomic solution families,
// gauge vector fields, natural lifts and Noether currents.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>

#include "fields.hpp"
#include "forms.hpp"
#include "points.hpp"
#include "smallpoly.hpp"
#include "tensor.hpp"

namespace palatini::lag {

using ext::ScalarField;
using ext::VectorFieldExpr;
using jet::PointValues;

// ---- constraint families ---------------------------------------------------

enum class Family { A, t, c, m, r, i };
Family family_from_string(const std::string& s);
std::string family_name(Family f);

// evaluates the family as a tensor with its symmetries declared
tensor::Tensor constraints(const PointValues& p, Family f);
double constraint_max(const PointValues& p, Family f);

// flattened components with jet gradients (one dual pass per family)
std::vector<ad::Dual> family_components_dual(Family f, const PointValues& p);

// stacked Jacobian of the given families and an orthonormal tangent basis
Eigen::MatrixXd constraint_jacobian(const PointValues& p, const std::vector<Family>& fams);
Eigen::MatrixXd surface_tangent_basis(const PointValues& p, const std::vector<Family>& fams);

// ---- basic quantities -------------------------------------------------------

tensor::Tensor ricci(const PointValues& p);
double lagrangian_ep(const PointValues& p);
tensor::Tensor aux_l(const PointValues& p);  // [a][b][c][m] = L^{bc,m}_a
double aux_h(const PointValues& p);
double h_route_deviation(const PointValues& p);  // legendre route vs closed form

tensor::Tensor beth_tensor(const PointValues& p);  // [a][b][c][l][z][n]
// contraction identity (sign as numerically forced; see ledger)
double beth_identity_residual(const PointValues& p);
// antisymmetrized beth . dH/dGamma reproduces the A tensor
double beth_a_reproduction_residual(const PointValues& p);

// ---- Poincare-Cartan forms --------------------------------------------------

ext::Form omega_lep();  // 5-form; also serves the non-momenta chart of P
ext::Form theta_lep();  // 4-form

// true if the expanded coefficients are unchanged under resampling of the
// velocity coordinates and no velocity differential appears as a factor
bool omega_projectability_witness(const PointValues& p, std::uint64_t reseed);

// ---- field equations ---------------------------------------------------------

// coefficient block of a transverse locally decomposable multivector (f = 1)
struct MVCoeffs {
  double f_g[10][4] = {};            // d/dg_{pair}, per nu
  double f_dg[10][4][4] = {};        // d/dg_{pair,mu}, per nu
  double f_gamma[4][4][4][4] = {};   // d/dGamma^a_{bc}, per nu
  double f_dgamma[4][4][4][4][4] = {};  // d/dGamma^a_{bc,mu}, per nu
};

struct FieldEqResiduals {
  std::array<double, 4> fun3{};
  std::array<double, 10> fun4{};
  std::array<double, 64> fun5{};
  double max3 = 0, max4 = 0, max5 = 0;
};
FieldEqResiduals field_eq_residuals(const MVCoeffs& c, const PointValues& p);

struct MultiVector4 {
  std::array<VectorFieldExpr, 4> x;
};

MVCoeffs coeffs_at(const MultiVector4& mv, const PointValues& p);

// max |entry| of the residual 1-form i(X)Omega_LEP at p
double fieldeq_residual_via_form(const MultiVector4& mv, const PointValues& p);
std::map<int, double> fieldeq_covector(const MultiVector4& mv, const PointValues& p);

// ---- solution families --------------------------------------------------------

struct SolutionParams {
  std::array<double, 64> c{};     // C_{b,mu,nu} at b*16 + mu*4 + nu
  std::array<double, 1024> k{};   // K^a_{bc,mu nu} at ((a*4+b)*4+c)*16 + mu*4 + nu
};

// max violation of the K-conditions at p (trace, lambda-contraction, bracket)
double params_admissibility_residual(const SolutionParams& sp, const PointValues& p);
// draws admissible params (minimum-norm + kernel draw); integrable = true also
// imposes the bracket restrictions on C and K
SolutionParams sample_params(const PointValues& p, std::uint64_t seed, bool integrable);

MultiVector4 semiholonomic_solution(const SolutionParams& sp);

// max over nu and components of |L(X_nu) family|
double tangency_residual(const MultiVector4& mv, const PointValues& p, Family f);

struct BracketBlocks {
  double x = 0, g = 0, dg = 0, gamma = 0, dgamma = 0;
};
BracketBlocks integrability_residuals(const MultiVector4& mv, const PointValues& p);

// ---- solvers -------------------------------------------------------------------

struct MetricSolve {
  tensor::Tensor closed_form;  // f_{rs,m}
  double eq_residual;          // metric equations with the closed form
  double lstsq_max_diff;       // closed form vs least squares (uniqueness)
  double lstsq_residual;       // left-over residual (incompatibility witness)
};
MetricSolve solve_metric_equation(const PointValues& p);

struct ConnectionSolve {
  double particular_residual;  // connection equations with Gamma Gamma
  int kernel_dim;              // null space of h . dL/dg
  int trace_rank, torsion_rank, stacked_rank;
};
ConnectionSolve solve_connection_equation(const PointValues& p);

struct PremetricityReport {
  double relation_residual;  // (nabla g) - (2/3) g tr T
  double nabla_max;          // max |(nabla g)|
};
PremetricityReport premetricity_check(const PointValues& p);

struct TorsionEquivalence {
  double forward_residual;     // A on trace-built torsion
  int nullspace_dim;           // of the A linear map on torsion space
  double trace_form_residual;  // null vectors obey the trace formula
};
TorsionEquivalence torsion_equivalence_check(std::uint64_t seed);

// ---- gauge fields ---------------------------------------------------------------

// X = C_b delta^a_c d/dGamma^a_{bc} + (D_mu C_b) delta^a_c d/dGamma^a_{bc,mu}
VectorFieldExpr gauge_field(const std::array<ScalarField, 4>& c_fns);
VectorFieldExpr gauge_field_constant(const std::array<double, 4>& c);

// torsion-type vertical candidate K^a_{bc} (antisymmetric, lambda-traceless)
VectorFieldExpr torsion_candidate_field(const std::array<double, 64>& k);
std::array<double, 64> random_torsion_candidate(std::uint64_t seed);

struct GaugeChecks {
  double omega_tangent_max;  // i(X)Omega against S_f-tangent quadruples
  double tangency_max;       // all five families
};
GaugeChecks gauge_checks(const VectorFieldExpr& x, const PointValues& p_on_sf,
                         std::uint64_t seed, int n_quadruples = 20);

// t-tangency value of a vertical field (2 max|K| for torsion candidates)
double t_tangency_max(const VectorFieldExpr& x, const PointValues& p);

// ---- natural lifts and Noether currents ------------------------------------------

struct PolyVec {
  std::array<poly::Poly4, 4> f;
};

VectorFieldExpr natural_lift(const PolyVec& z);  // j^1 Y_Z
// Lie derivative of the Lagrangian density coefficient: X(L) + L div f
double lift_invariance_residual(const PolyVec& z, const PointValues& p);
// per-family tangency maxima {c, m, t, r, i}
std::array<double, 5> lift_tangency_residuals(const PolyVec& z, const PointValues& p);
// engine current i(j1Y)Theta vs the displayed expression
double noether_display_residual(const PolyVec& z, const PointValues& p);
ext::NumForm noether_current(const PolyVec& z, const PointValues& p);
// pulled-back current along the holonomic jet at p (coefficients of d3x_mu)
std::array<double, 4> noether_current_pulled(const PolyVec& z, const PointValues& p);

}  // namespace palatini::lag
