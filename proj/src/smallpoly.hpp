#pragma once

// Multivariate polynomials in the four base coordinates x^0..x^3 with exact
// differentiation; used for spacetime vector fields, gauge functions and
// section germs.

#include <array>
#include <vector>

namespace palatini::poly {

struct Mono {
  std::array<int, 4> e{};  // exponents
  double c = 0.0;
};

class Poly4 {
 public:
  Poly4() = default;

  static Poly4 constant(double c) {
    Poly4 p;
    if (c != 0.0) p.terms_.push_back({{0, 0, 0, 0}, c});
    return p;
  }
  static Poly4 var(int mu) {
    Poly4 p;
    Mono m;
    m.e[mu] = 1;
    m.c = 1.0;
    p.terms_.push_back(m);
    return p;
  }

  const std::vector<Mono>& terms() const { return terms_; }
  bool zero() const { return terms_.empty(); }

  Poly4 operator+(const Poly4& o) const {
    Poly4 r = *this;
    for (const auto& m : o.terms_) r.add(m);
    return r;
  }
  Poly4 operator-(const Poly4& o) const {
    Poly4 r = *this;
    for (auto m : o.terms_) {
      m.c = -m.c;
      r.add(m);
    }
    return r;
  }
  Poly4 operator*(const Poly4& o) const {
    Poly4 r;
    for (const auto& a : terms_)
      for (const auto& b : o.terms_) {
        Mono m;
        for (int i = 0; i < 4; ++i) m.e[i] = a.e[i] + b.e[i];
        m.c = a.c * b.c;
        r.add(m);
      }
    return r;
  }
  Poly4 scaled(double s) const {
    Poly4 r = *this;
    for (auto& m : r.terms_) m.c *= s;
    return r;
  }

  Poly4 derivative(int mu) const {
    Poly4 r;
    for (const auto& m : terms_) {
      if (m.e[mu] == 0) continue;
      Mono d = m;
      d.c *= m.e[mu];
      d.e[mu] -= 1;
      r.add(d);
    }
    return r;
  }

  template <class S>
  S eval(const std::array<S, 4>& x) const {
    S out{};
    for (const auto& m : terms_) {
      S t{};
      t = t + m.c;
      for (int i = 0; i < 4; ++i)
        for (int k = 0; k < m.e[i]; ++k) t = t * x[i];
      out = out + t;
    }
    return out;
  }

  double eval_d(const std::array<double, 4>& x) const { return eval<double>(x); }

  Poly4& add_monomial(const std::array<int, 4>& e, double c) {
    Mono m;
    m.e = e;
    m.c = c;
    add(m);
    return *this;
  }

 private:
  void add(const Mono& m) {
    if (m.c == 0.0) return;
    for (auto& t : terms_)
      if (t.e == m.e) {
        t.c += m.c;
        if (t.c == 0.0) terms_.erase(terms_.begin() + (&t - terms_.data()));
        return;
      }
    terms_.push_back(m);
  }

  std::vector<Mono> terms_;
};

}  // namespace palatini::poly
