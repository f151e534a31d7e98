#pragma once

// Evaluatable scalar fields over the coordinate atlas (value + sparse jet
// gradient), sparse vector-field expressions, coordinate maps between
// bundles, brackets, Lie derivatives and the coordinate total derivative.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ad.hpp"
#include "coords.hpp"
#include "error.hpp"

namespace palatini::ext {

using ad::Dual;
using ad::Grad;
using jet::PointValues;

class ScalarField {
 public:
  ScalarField() = default;

  template <class F>
  static ScalarField make(std::string name, F f) {
    ScalarField s;
    s.name_ = std::move(name);
    s.f0_ = [f](const PointValues& p) { return f(jet::Chart<double>(p)); };
    s.f1_ = [f](const PointValues& p) { return f(jet::Chart<Dual>(p)); };
    return s;
  }

  static ScalarField constant(double c) {
    ScalarField s;
    s.name_ = "const";
    s.f0_ = [c](const PointValues&) { return c; };
    s.f1_ = [c](const PointValues&) { return Dual(c); };
    return s;
  }

  static ScalarField coordinate(int id) {
    ScalarField s;
    s.name_ = jet::coord_name(id);
    s.f0_ = [id](const PointValues& p) { return p[id]; };
    s.f1_ = [id](const PointValues& p) { return Dual::seeded(p[id], id); };
    return s;
  }

  // evaluatable but not differentiable (components that are only ever read)
  static ScalarField value_only(std::string name, std::function<double(const PointValues&)> f) {
    ScalarField s;
    s.name_ = std::move(name);
    s.f0_ = std::move(f);
    s.f1_ = [n = s.name_](const PointValues&) -> Dual {
      fail(Errc::InvalidArgument, "ScalarField '" + n + "' supports value evaluation only");
    };
    return s;
  }

  bool valid() const { return static_cast<bool>(f0_); }
  double value(const PointValues& p) const { return f0_(p); }
  Dual dual(const PointValues& p) const { return f1_(p); }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::function<double(const PointValues&)> f0_;
  std::function<Dual(const PointValues&)> f1_;
};

inline Grad jet_gradient(const ScalarField& f, const PointValues& p) { return f.dual(p).d; }

// sparse numeric tangent vector / covector
struct NumVec {
  std::vector<std::pair<int, double>> e;  // sorted by id

  double get(int id) const {
    auto it = std::lower_bound(e.begin(), e.end(), id,
                               [](const auto& a, int b) { return a.first < b; });
    return (it != e.end() && it->first == id) ? it->second : 0.0;
  }
  void set(int id, double v) {
    auto it = std::lower_bound(e.begin(), e.end(), id,
                               [](const auto& a, int b) { return a.first < b; });
    if (it != e.end() && it->first == id)
      it->second = v;
    else
      e.insert(it, {id, v});
  }
  void add(int id, double v) {
    auto it = std::lower_bound(e.begin(), e.end(), id,
                               [](const auto& a, int b) { return a.first < b; });
    if (it != e.end() && it->first == id)
      it->second += v;
    else
      e.insert(it, {id, v});
  }
  static NumVec from_grad(const Grad& g) {
    NumVec v;
    v.e.assign(g.entries().begin(), g.entries().end());
    return v;
  }
  double max_abs() const {
    double m = 0.0;
    for (auto& [id, v] : e) m = std::max(m, std::abs(v));
    return m;
  }
};

inline double dot(const NumVec& v, const Grad& g) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  const auto& a = v.e;
  const auto& b = g.entries();
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first)
      ++i;
    else if (b[j].first < a[i].first)
      ++j;
    else {
      s += a[i].second * b[j].second;
      ++i;
      ++j;
    }
  }
  return s;
}

class VectorFieldExpr {
 public:
  void set(int id, ScalarField f) {
    for (auto& [cid, cf] : comps_)
      if (cid == id) {
        cf = std::move(f);
        return;
      }
    comps_.emplace_back(id, std::move(f));
  }
  void set_constant(int id, double v) { set(id, ScalarField::constant(v)); }
  const std::vector<std::pair<int, ScalarField>>& components() const { return comps_; }

  NumVec evaluate(const PointValues& p) const {
    NumVec v;
    for (const auto& [id, f] : comps_) v.add(id, f.value(p));
    return v;
  }

  // directional derivative X(f) at p
  double apply(const ScalarField& f, const PointValues& p) const {
    return dot(evaluate(p), jet_gradient(f, p));
  }

 private:
  std::vector<std::pair<int, ScalarField>> comps_;
};

inline double lie_derivative_fn(const VectorFieldExpr& X, const ScalarField& f,
                                const PointValues& p) {
  return X.apply(f, p);
}

// [X,Y]^i = X(Y^i) - Y(X^i), evaluated at p
NumVec bracket(const VectorFieldExpr& X, const VectorFieldExpr& Y, const PointValues& p);

// coordinate map between bundles: each target coordinate as a field of the source
class CoordMap {
 public:
  void set(int target_id, ScalarField f) { targets_.emplace_back(target_id, std::move(f)); }
  const std::vector<std::pair<int, ScalarField>>& targets() const { return targets_; }

  PointValues apply(const PointValues& p) const {
    PointValues out;
    for (const auto& [id, f] : targets_) out[id] = f.value(p);
    return out;
  }

  // Jacobian-vector product: tangent vector at p -> tangent vector at apply(p)
  NumVec pushforward(const PointValues& p, const NumVec& v) const {
    NumVec out;
    for (const auto& [id, f] : targets_) {
      double c = dot(v, jet_gradient(f, p));
      if (c != 0.0) out.add(id, c);
    }
    return out;
  }

 private:
  std::vector<std::pair<int, ScalarField>> targets_;
};

// coordinate total derivative D_tau; f may depend on first-order jet
// coordinates only
double total_derivative(const ScalarField& f, int tau, const PointValues& p);

}  // namespace palatini::ext
