#pragma once

// Dense small-tensor arithmetic over spacetime dimension 4: einsum-style
// contraction, pair antisymmetrization (convention X_{[ab]} = X_ab - X_ba,
// no 1/2), metric inverse and volume factor.

#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace palatini::tensor {

class Tensor {
 public:
  enum class SymKind { Symmetric, Antisymmetric };
  struct Symmetry {
    int i = 0, j = 0;
    SymKind kind = SymKind::Symmetric;
  };

  Tensor() : rank_(0), data_(1, 0.0) {}
  explicit Tensor(int rank);

  int rank() const { return rank_; }
  std::size_t size() const { return data_.size(); }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double operator()(std::initializer_list<int> idx) const { return data_[flat(idx)]; }
  double& operator()(std::initializer_list<int> idx) { return data_[flat(idx)]; }
  double scalar() const;

  void declare_symmetry(int i, int j, SymKind kind);
  const std::vector<Symmetry>& symmetries() const { return syms_; }

  double max_abs() const;

 private:
  std::size_t flat(std::initializer_list<int> idx) const;
  void check_symmetries() const;

  int rank_;
  std::vector<double> data_;  // row-major, length 4^rank
  std::vector<Symmetry> syms_;
};

// einsum-style contraction, e.g. contract("ab,bc->ac", {x, y}).
// Repeated labels must appear exactly twice and are summed over 0..3.
Tensor contract(const std::string& spec, const std::vector<Tensor>& operands);

// out[.. i .. j ..] = t[.. i .. j ..] - t[.. j .. i ..]
Tensor antisymmetrize_pair(const Tensor& t, int axis_i, int axis_j);
Tensor symmetrize_pair(const Tensor& t, int axis_i, int axis_j);

inline constexpr double kDegenerateDet = 1e-10;

// (g_inv, rho = sqrt(|det g|)); throws Errc::SingularMetric below threshold.
std::pair<Tensor, double> metric_aux(const Tensor& g);

Tensor minkowski();
Tensor identity2();

}  // namespace palatini::tensor
