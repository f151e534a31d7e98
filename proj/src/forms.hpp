#pragma once

// Sparse exterior forms over the coordinate atlas. A Form is a wedge-sum of
// terms whose factors are either coordinate differentials or differentials of
// named functions; the latter expand into coordinate differentials at
// evaluation time through the jet gradient. A NumForm is the numeric
// expansion at a point (canonically ordered factor ids, merged terms).

#include <array>
#include <map>
#include <vector>

#include "fields.hpp"

namespace palatini::ext {

struct FormFactor {
  int coord = -1;    // >= 0: coordinate differential
  ScalarField func;  // coord < 0: differential of this function

  static FormFactor d(int id) {
    FormFactor f;
    f.coord = id;
    return f;
  }
  static FormFactor d(ScalarField field) {
    FormFactor f;
    f.func = std::move(field);
    return f;
  }
};

struct FormTerm {
  ScalarField coeff;
  std::vector<FormFactor> factors;
};

struct Form {
  int degree = 0;
  std::vector<FormTerm> terms;

  void add(ScalarField coeff, std::vector<FormFactor> factors) {
    terms.push_back({std::move(coeff), std::move(factors)});
  }
};

struct NumTerm {
  double c = 0.0;
  std::array<int, 6> ids{};  // strictly ascending, first `k` valid
  int k = 0;
};

class NumForm {
 public:
  explicit NumForm(int degree) : degree_(degree) {}

  int degree() const { return degree_; }
  const std::vector<NumTerm>& terms() const { return terms_; }

  // inserts c * d(ids[0]) ^ ... ^ d(ids[k-1]), sorting factors with sign
  void add_term(double c, const int* ids, int k);
  void canonicalize();

  NumForm interior(const NumVec& v) const;
  double scalar() const;
  std::map<int, double> covector() const;
  double eval(const std::vector<NumVec>& vecs) const;
  double max_abs_coeff() const;

  static NumForm expand(const Form& form, const PointValues& p);

 private:
  int degree_;
  std::vector<NumTerm> terms_;
};

// i(X_0) i(X_1) i(X_2) i(X_3) omega with X_3 applied first
NumForm contract_multivector(const std::array<NumVec, 4>& x, const NumForm& omega);

// convenience factor lists: dx^0 ^ .. ^ dx^3 and the d^3x_mu block
// (sign of d^3x_mu = i(d/dx^mu) d^4x is (-1)^mu, returned separately)
std::vector<FormFactor> wedge_dx_all();
std::vector<FormFactor> wedge_dx_except(int mu);
inline double d3x_sign(int mu) { return (mu % 2 == 0) ? 1.0 : -1.0; }

}  // namespace palatini::ext
