#pragma once

// Relation with the first-order Einstein-Hilbert model: the regular
// Lagrangian on J^1 pi_Sigma, the xi map, connection reconstruction, the
// kernel/rank certificates of the local diffeomorphism, the form
// equivalence, and section-germ integrability witnesses.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "fields.hpp"
#include "forms.hpp"
#include "physics.hpp"
#include "points.hpp"

namespace palatini::bridge {

using jet::PointValues;

// Christoffel symbols of (g, dg) and the metricity / torsion certificates
phys::M3<double> levi_civita(const PointValues& s);
double lc_metricity_residual(const PointValues& s);

// first-order Einstein-Hilbert Lagrangian; the primary route differentiates
// L^{ab,mn} with the jet gradient, the oracle assembles the closed form
double lagrangian_bar(const PointValues& s);
double lagrangian_bar_oracle(const PointValues& s);
double l_big_value(const PointValues& s, int a, int b, int m, int n);

// ---- the xi map -------------------------------------------------------------

ext::CoordMap xi_map();
jet::SigmaJetPoint xi_apply(const PointValues& q);
// finite trace-gauge shifts leave the image unchanged
double xi_gauge_invariance_residual(const PointValues& q, std::uint64_t seed);

// ---- connection reconstruction ------------------------------------------------

struct Reconstruction {
  std::vector<double> gamma;  // dim^3, [a][b][c] row-major
  double premetricity_residual = 0;
  double torsion_residual = 0;
  double gauge_residual = 0;
};
// dimension-generic; g is dim x dim row-major, dg is [a][b][mu], c has dim entries
Reconstruction reconstruct_connection(const std::vector<double>& g,
                                      const std::vector<double>& dg,
                                      const std::vector<double>& c, int dim);

// spacetime fast path on a Sigma point
phys::M3<double> reconstruct4(const PointValues& s, const std::array<double, 4>& c);

// ---- kernel and rank certificates ----------------------------------------------

struct KernelRankChecks {
  int t_jacobian_rank;   // 20
  int tangent_dim;       // 58
  int xi_restricted_rank;  // 54
  int xi_kernel_dim;       // 4
  double gauge_span_gap;   // sin of the largest principal angle vs trace directions
};
KernelRankChecks kernel_and_rank_checks(const PointValues& q_on_pf);

// ---- form equivalence ------------------------------------------------------------

// numeric expansion of Omega_Lbar at a Sigma point (uses the L_bar Hessian)
ext::NumForm omega_lbar_at(const PointValues& s);
double form_equivalence_residual(const PointValues& q_on_pf, std::uint64_t seed, int trials = 10);

// comparison table: K-conditions against the second-derivative coefficients of
// the related Einstein-Hilbert solution
struct ComparisonTable {
  double row_contraction;  // g^{ab}(F^h_{ht;a,b}+F^h_{ab;h,t}-F^h_{ah;t,b}-F^h_{at;h,b})
  double row_curl;         // F^h_{ab,[mn]} under the integrability restriction
  double row_pair_sym;     // F^h_{[ab],mn} (identically zero in pair storage)
};
ComparisonTable comparison_table_check(const PointValues& q_on_pf, std::uint64_t seed);

// ---- integrability witnesses --------------------------------------------------------

struct GermReport {
  double center_gamma_reproduction = 0;  // lifted connection vs q at the center
  double stage_residual = 0;             // worst least-squares stage residual
  double max_constraint_on_ball = 0;     // all five families, all probes
  std::array<double, 5> family_max{};    // per family {c, m, t, r, i}
  double el_center_residual = 0;
  int order = 0;
};
GermReport integrability_witness(const PointValues& q_on_pf, std::uint64_t seed, int germ_order = 5,
                                 int n_probes = 20, double radius = 0.01);

}  // namespace palatini::bridge
