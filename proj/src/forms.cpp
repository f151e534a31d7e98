#include "forms.hpp"

#include <algorithm>
#include <cmath>

namespace palatini::ext {

void NumForm::add_term(double c, const int* ids, int k) {
  if (k != degree_) fail(Errc::InvalidArgument, "NumForm::add_term: degree mismatch");
  NumTerm t;
  t.k = k;
  double sign = 1.0;
  for (int i = 0; i < k; ++i) {
    int id = ids[i];
    int j = i;
    while (j > 0 && t.ids[j - 1] > id) {
      t.ids[j] = t.ids[j - 1];
      sign = -sign;
      --j;
    }
    t.ids[j] = id;
  }
  for (int i = 0; i + 1 < k; ++i)
    if (t.ids[i] == t.ids[i + 1]) return;  // repeated differential
  t.c = c * sign;
  terms_.push_back(t);
}

void NumForm::canonicalize() {
  std::sort(terms_.begin(), terms_.end(), [](const NumTerm& a, const NumTerm& b) {
    return std::lexicographical_compare(a.ids.begin(), a.ids.begin() + a.k, b.ids.begin(),
                                        b.ids.begin() + b.k);
  });
  std::vector<NumTerm> merged;
  for (const auto& t : terms_) {
    if (!merged.empty() && merged.back().k == t.k &&
        std::equal(t.ids.begin(), t.ids.begin() + t.k, merged.back().ids.begin()))
      merged.back().c += t.c;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const NumTerm& t) { return t.c == 0.0; });
  terms_ = std::move(merged);
}

NumForm NumForm::interior(const NumVec& v) const {
  if (degree_ == 0) fail(Errc::InvalidArgument, "NumForm::interior on a 0-form");
  NumForm out(degree_ - 1);
  for (const auto& t : terms_) {
    for (int j = 0; j < t.k; ++j) {
      double comp = v.get(t.ids[j]);
      if (comp == 0.0) continue;
      NumTerm nt;
      nt.k = t.k - 1;
      int w = 0;
      for (int i = 0; i < t.k; ++i)
        if (i != j) nt.ids[w++] = t.ids[i];
      nt.c = t.c * comp * ((j % 2 == 0) ? 1.0 : -1.0);
      out.terms_.push_back(nt);
    }
  }
  out.canonicalize();
  return out;
}

double NumForm::scalar() const {
  if (degree_ != 0) fail(Errc::InvalidArgument, "NumForm::scalar on degree > 0");
  double s = 0.0;
  for (const auto& t : terms_) s += t.c;
  return s;
}

std::map<int, double> NumForm::covector() const {
  if (degree_ != 1) fail(Errc::InvalidArgument, "NumForm::covector on degree != 1");
  std::map<int, double> out;
  for (const auto& t : terms_) out[t.ids[0]] += t.c;
  return out;
}

double NumForm::eval(const std::vector<NumVec>& vecs) const {
  if (static_cast<int>(vecs.size()) != degree_)
    fail(Errc::InvalidArgument, "NumForm::eval: wrong number of vectors");
  const int k = degree_;
  double total = 0.0;
  double m[6][6];
  for (const auto& t : terms_) {
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) m[a][b] = vecs[a].get(t.ids[b]);
    // small in-place Gaussian elimination with partial pivoting
    double det = 1.0;
    for (int col = 0; col < k; ++col) {
      int piv = col;
      for (int r = col + 1; r < k; ++r)
        if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
      if (m[piv][col] == 0.0) {
        det = 0.0;
        break;
      }
      if (piv != col) {
        for (int c2 = 0; c2 < k; ++c2) std::swap(m[piv][c2], m[col][c2]);
        det = -det;
      }
      det *= m[col][col];
      for (int r = col + 1; r < k; ++r) {
        double f = m[r][col] / m[col][col];
        for (int c2 = col; c2 < k; ++c2) m[r][c2] -= f * m[col][c2];
      }
    }
    total += t.c * det;
  }
  return total;
}

double NumForm::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.c));
  return m;
}

NumForm NumForm::expand(const Form& form, const PointValues& p) {
  NumForm out(form.degree);
  std::vector<int> ids(static_cast<std::size_t>(form.degree));
  for (const auto& term : form.terms) {
    double c0 = term.coeff.value(p);
    if (c0 == 0.0) continue;
    if (static_cast<int>(term.factors.size()) != form.degree)
      fail(Errc::InvalidArgument, "Form: factor count does not match degree");

    // positions of function differentials and their gradient expansions
    std::vector<int> fpos;
    std::vector<Grad> grads;
    for (std::size_t i = 0; i < term.factors.size(); ++i) {
      if (term.factors[i].coord >= 0) {
        ids[i] = term.factors[i].coord;
      } else {
        fpos.push_back(static_cast<int>(i));
        grads.push_back(jet_gradient(term.factors[i].func, p));
      }
    }
    // cartesian product over the gradient supports
    std::vector<std::size_t> cursor(fpos.size(), 0);
    while (true) {
      double c = c0;
      bool dead = false;
      for (std::size_t k = 0; k < fpos.size(); ++k) {
        const auto& ent = grads[k].entries();
        if (ent.empty()) {
          dead = true;
          break;
        }
        ids[static_cast<std::size_t>(fpos[k])] = ent[cursor[k]].first;
        c *= ent[cursor[k]].second;
      }
      if (dead) break;
      out.add_term(c, ids.data(), form.degree);
      // advance
      std::size_t k = 0;
      for (; k < fpos.size(); ++k) {
        if (++cursor[k] < grads[k].entries().size()) break;
        cursor[k] = 0;
      }
      if (k == fpos.size()) break;
    }
  }
  out.canonicalize();
  return out;
}

NumForm contract_multivector(const std::array<NumVec, 4>& x, const NumForm& omega) {
  if (omega.degree() < 4) {
    NumForm zero(std::max(0, omega.degree() - 4));
    return zero;  // contraction with a 4-multivector of a lower-degree form
  }
  NumForm cur = omega.interior(x[3]);
  cur = cur.interior(x[2]);
  cur = cur.interior(x[1]);
  cur = cur.interior(x[0]);
  return cur;
}

std::vector<FormFactor> wedge_dx_all() {
  std::vector<FormFactor> f;
  for (int mu = 0; mu < 4; ++mu) f.push_back(FormFactor::d(jet::x_id(mu)));
  return f;
}

std::vector<FormFactor> wedge_dx_except(int mu) {
  std::vector<FormFactor> f;
  for (int nu = 0; nu < 4; ++nu)
    if (nu != mu) f.push_back(FormFactor::d(jet::x_id(nu)));
  return f;
}

}  // namespace palatini::ext
