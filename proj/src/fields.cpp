#include "fields.hpp"

#include <set>

namespace palatini::ext {

NumVec bracket(const VectorFieldExpr& X, const VectorFieldExpr& Y, const PointValues& p) {
  NumVec xv = X.evaluate(p);
  NumVec yv = Y.evaluate(p);
  std::set<int> ids;
  for (const auto& [id, f] : X.components()) ids.insert(id);
  for (const auto& [id, f] : Y.components()) ids.insert(id);

  auto component = [&](const VectorFieldExpr& v, int id) -> const ScalarField* {
    for (const auto& [cid, cf] : v.components())
      if (cid == id) return &cf;
    return nullptr;
  };

  NumVec out;
  for (int id : ids) {
    double val = 0.0;
    if (const ScalarField* yc = component(Y, id)) val += dot(xv, jet_gradient(*yc, p));
    if (const ScalarField* xc = component(X, id)) val -= dot(yv, jet_gradient(*xc, p));
    out.add(id, val);
  }
  return out;
}

double total_derivative(const ScalarField& f, int tau, const PointValues& p) {
  using namespace jet;
  Grad grad = jet_gradient(f, p);
  double out = 0.0;
  for (const auto& [id, d] : grad.entries()) {
    if (id >= kX && id < kG) {
      if (id - kX == tau) out += d;
    } else if (id >= kG && id < kGamma) {
      int pr = id - kG;
      out += p[kDG + pr * 4 + tau] * d;
    } else if (id >= kGamma && id < kDG) {
      int fl = id - kGamma;
      out += p[kDGamma + fl * 4 + tau] * d;
    } else if (id >= kDG && id < kDGamma) {
      int fl = id - kDG;
      int pr = fl / 4, mu = fl % 4;
      out += p[kDDG + pr * 10 + pair_index(mu, tau)] * d;
    } else if (id >= kDGamma && id < kDDG) {
      int fl = id - kDGamma;
      int gfl = fl / 4, mu = fl % 4;
      out += p[kDDGamma + gfl * 10 + pair_index(mu, tau)] * d;
    } else {
      fail(Errc::InvalidArgument,
           "total_derivative: function depends on non-first-order coordinate " + coord_name(id));
    }
  }
  return out;
}

}  // namespace palatini::ext
