#pragma once

// Sparse forward-mode differentiation scalars. A DualT carries a value and a
// sparse map coordinate-id -> partial derivative; nesting DualT<DualT<..>>
// yields second-order information. Only coordinates a function actually reads
// ever appear in the derivative map.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <utility>
#include <vector>

namespace palatini::ad {

template <class T>
class SparseVec {
 public:
  using Entry = std::pair<int, T>;

  SparseVec() = default;
  explicit SparseVec(std::vector<Entry> entries) : e_(std::move(entries)) {}

  static SparseVec unit(int id, T one) {
    SparseVec s;
    s.e_.emplace_back(id, std::move(one));
    return s;
  }

  bool empty() const { return e_.empty(); }
  std::size_t size() const { return e_.size(); }
  const std::vector<Entry>& entries() const { return e_; }
  std::vector<Entry>& entries() { return e_; }

  T get(int id, T zero = T{}) const {
    auto it = std::lower_bound(e_.begin(), e_.end(), id,
                               [](const Entry& a, int b) { return a.first < b; });
    if (it != e_.end() && it->first == id) return it->second;
    return zero;
  }

  // this = a*this + b*other, merging sorted supports.
  template <class S>
  static SparseVec combine(const S& a, const SparseVec& x, const S& b, const SparseVec& y) {
    SparseVec out;
    out.e_.reserve(x.e_.size() + y.e_.size());
    std::size_t i = 0, j = 0;
    while (i < x.e_.size() && j < y.e_.size()) {
      if (x.e_[i].first < y.e_[j].first) {
        out.e_.emplace_back(x.e_[i].first, a * x.e_[i].second);
        ++i;
      } else if (y.e_[j].first < x.e_[i].first) {
        out.e_.emplace_back(y.e_[j].first, b * y.e_[j].second);
        ++j;
      } else {
        out.e_.emplace_back(x.e_[i].first, a * x.e_[i].second + b * y.e_[j].second);
        ++i;
        ++j;
      }
    }
    for (; i < x.e_.size(); ++i) out.e_.emplace_back(x.e_[i].first, a * x.e_[i].second);
    for (; j < y.e_.size(); ++j) out.e_.emplace_back(y.e_[j].first, b * y.e_[j].second);
    return out;
  }

  template <class S>
  SparseVec scaled(const S& a) const {
    SparseVec out;
    out.e_.reserve(e_.size());
    for (const auto& [id, val] : e_) out.e_.emplace_back(id, a * val);
    return out;
  }

 private:
  std::vector<Entry> e_;  // sorted by id, unique
};

template <class T>
struct DualT {
  using inner_type = T;
  T v{};
  SparseVec<T> d;

  DualT() = default;
  DualT(double value) : v(value) {}  // NOLINT: implicit by design, constants promote
  DualT(T value, SparseVec<T> deriv) : v(std::move(value)), d(std::move(deriv)) {}

  static DualT seeded(T value, int id) {
    return DualT(std::move(value), SparseVec<T>::unit(id, T{1.0}));
  }
};

inline double real(double x) { return x; }
template <class T>
double real(const DualT<T>& x) { return real(x.v); }

template <class T>
DualT<T> operator-(const DualT<T>& x) {
  return DualT<T>(-x.v, x.d.template scaled<T>(T{-1.0}));
}

template <class T>
DualT<T> operator+(const DualT<T>& a, const DualT<T>& b) {
  return DualT<T>(a.v + b.v, SparseVec<T>::combine(T{1.0}, a.d, T{1.0}, b.d));
}
template <class T>
DualT<T> operator-(const DualT<T>& a, const DualT<T>& b) {
  return DualT<T>(a.v - b.v, SparseVec<T>::combine(T{1.0}, a.d, T{-1.0}, b.d));
}
template <class T>
DualT<T> operator*(const DualT<T>& a, const DualT<T>& b) {
  return DualT<T>(a.v * b.v, SparseVec<T>::combine(b.v, a.d, a.v, b.d));
}
template <class T>
DualT<T> operator/(const DualT<T>& a, const DualT<T>& b) {
  T q = a.v / b.v;
  return DualT<T>(q, SparseVec<T>::combine(T{1.0} / b.v, a.d, -q / b.v, b.d));
}

template <class T> DualT<T> operator+(const DualT<T>& a, double b) { return DualT<T>(a.v + b, a.d); }
template <class T> DualT<T> operator+(double a, const DualT<T>& b) { return b + a; }
template <class T> DualT<T> operator-(const DualT<T>& a, double b) { return DualT<T>(a.v - b, a.d); }
template <class T> DualT<T> operator-(double a, const DualT<T>& b) { return -(b - a); }
template <class T> DualT<T> operator*(const DualT<T>& a, double b) {
  return DualT<T>(a.v * b, a.d.template scaled<T>(T{b}));
}
template <class T> DualT<T> operator*(double a, const DualT<T>& b) { return b * a; }
template <class T> DualT<T> operator/(const DualT<T>& a, double b) { return a * (1.0 / b); }
template <class T> DualT<T> operator/(double a, const DualT<T>& b) { return DualT<T>(a) / b; }

template <class T> DualT<T>& operator+=(DualT<T>& a, const DualT<T>& b) { a = a + b; return a; }
template <class T> DualT<T>& operator-=(DualT<T>& a, const DualT<T>& b) { a = a - b; return a; }
template <class T> DualT<T>& operator*=(DualT<T>& a, const DualT<T>& b) { a = a * b; return a; }
template <class T> DualT<T>& operator/=(DualT<T>& a, const DualT<T>& b) { a = a / b; return a; }
template <class T> DualT<T>& operator+=(DualT<T>& a, double b) { a = a + b; return a; }
template <class T> DualT<T>& operator-=(DualT<T>& a, double b) { a = a - b; return a; }
template <class T> DualT<T>& operator*=(DualT<T>& a, double b) { a = a * b; return a; }

using std::abs;
using std::sqrt;

template <class T>
DualT<T> sqrt(const DualT<T>& x) {
  T s = sqrt(x.v);
  return DualT<T>(s, x.d.template scaled<T>(T{0.5} / s));
}

template <class T>
DualT<T> abs(const DualT<T>& x) {
  double sign = real(x.v) < 0.0 ? -1.0 : 1.0;
  return DualT<T>(sign < 0 ? -x.v : x.v, x.d.template scaled<T>(T{sign}));
}

template <class T> bool operator<(const DualT<T>& a, double b) { return real(a) < b; }
template <class T> bool operator>(const DualT<T>& a, double b) { return real(a) > b; }

using Dual = DualT<double>;
using Dual2 = DualT<Dual>;
using Grad = SparseVec<double>;

}  // namespace palatini::ad
