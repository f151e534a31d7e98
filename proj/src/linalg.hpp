#pragma once

// Thin wrappers over Eigen for the rank/null-space/least-squares work the
// samplers and solvers need.

#include <Eigen/Dense>

#include "error.hpp"

namespace palatini::la {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline int rank_svd(const MatrixXd& a, double rel_tol = 1e-8) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  double cutoff = rel_tol * s(0);
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++r;
  return r;
}

// columns form an orthonormal basis of ker(a)
inline MatrixXd nullspace(const MatrixXd& a, double rel_tol = 1e-8) {
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double cutoff = (s.size() > 0 && s(0) > 0) ? rel_tol * s(0) : 0.0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++r;
  return svd.matrixV().rightCols(a.cols() - r);
}

// minimum-norm least-squares solution (SVD with a relative rank cutoff)
inline VectorXd lstsq(const MatrixXd& a, const VectorXd& b, double rel_tol = 1e-10) {
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rel_tol);
  return svd.solve(b);
}

// sin of the largest principal angle between the column spans of a and b
inline double subspace_gap_sin(const MatrixXd& a, const MatrixXd& b) {
  if (a.cols() != b.cols()) fail(Errc::InvalidArgument, "subspace_gap_sin: dimension mismatch");
  Eigen::HouseholderQR<MatrixXd> qa(a), qb(b);
  MatrixXd ua = qa.householderQ() * MatrixXd::Identity(a.rows(), a.cols());
  MatrixXd ub = qb.householderQ() * MatrixXd::Identity(b.rows(), b.cols());
  Eigen::JacobiSVD<MatrixXd> svd(ua.transpose() * ub);
  double smin = svd.singularValues().minCoeff();
  smin = std::min(1.0, std::max(-1.0, smin));
  return std::sqrt(std::max(0.0, 1.0 - smin * smin));
}

}  // namespace palatini::la
