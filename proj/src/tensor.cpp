#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

namespace palatini::tensor {

namespace {

std::size_t pow4(int r) { return std::size_t{1} << (2 * r); }

}  // namespace

Tensor::Tensor(int rank) : rank_(rank), data_(pow4(rank), 0.0) {
  if (rank < 0 || rank > 8) fail(Errc::InvalidArgument, "Tensor: rank out of range");
}

double Tensor::scalar() const {
  if (rank_ != 0) fail(Errc::InvalidArgument, "Tensor::scalar on rank>0");
  return data_[0];
}

std::size_t Tensor::flat(std::initializer_list<int> idx) const {
  if (static_cast<int>(idx.size()) != rank_)
    fail(Errc::InvalidArgument, "Tensor: index arity mismatch");
  std::size_t f = 0;
  for (int i : idx) {
    if (i < 0 || i > 3) fail(Errc::InvalidArgument, "Tensor: index out of range");
    f = f * 4 + static_cast<std::size_t>(i);
  }
  return f;
}

void Tensor::declare_symmetry(int i, int j, SymKind kind) {
  if (i == j || i < 0 || j < 0 || i >= rank_ || j >= rank_)
    fail(Errc::InvalidArgument, "Tensor: bad symmetry axes");
  syms_.push_back({i, j, kind});
  check_symmetries();
}

void Tensor::check_symmetries() const {
  std::vector<int> idx(rank_, 0);
  const std::size_t n = data_.size();
  for (std::size_t f = 0; f < n; ++f) {
    std::size_t r = f;
    for (int k = rank_ - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(r & 3);
      r >>= 2;
    }
    for (const auto& s : syms_) {
      std::vector<int> sw = idx;
      std::swap(sw[s.i], sw[s.j]);
      std::size_t g = 0;
      for (int i : sw) g = g * 4 + static_cast<std::size_t>(i);
      double want = s.kind == SymKind::Symmetric ? data_[g] : -data_[g];
      if (std::memcmp(&data_[f], &want, sizeof(double)) != 0 && data_[f] != want)
        fail(Errc::InvalidArgument, "Tensor: declared symmetry violated");
    }
  }
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

Tensor contract(const std::string& spec, const std::vector<Tensor>& operands) {
  auto arrow = spec.find("->");
  if (arrow == std::string::npos) fail(Errc::InvalidArgument, "contract: missing '->'");
  std::string lhs = spec.substr(0, arrow);
  std::string out_labels = spec.substr(arrow + 2);

  std::vector<std::string> op_labels;
  std::size_t start = 0;
  while (true) {
    auto comma = lhs.find(',', start);
    op_labels.push_back(lhs.substr(start, comma == std::string::npos ? comma : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (op_labels.size() != operands.size())
    fail(Errc::InvalidArgument, "contract: operand count does not match spec");

  std::map<char, int> counts;
  for (std::size_t k = 0; k < op_labels.size(); ++k) {
    if (static_cast<int>(op_labels[k].size()) != operands[k].rank())
      fail(Errc::InvalidArgument, "contract: axis arity mismatch for operand " +
                                      std::to_string(k) + " ('" + op_labels[k] + "' vs rank " +
                                      std::to_string(operands[k].rank()) + ")");
    for (char c : op_labels[k]) counts[c]++;
  }
  std::vector<char> summed;
  for (auto [c, n] : counts) {
    if (n > 2) fail(Errc::InvalidArgument, std::string("contract: label '") + c + "' repeated more than twice");
    if (n == 2) {
      if (out_labels.find(c) != std::string::npos)
        fail(Errc::InvalidArgument, std::string("contract: summed label '") + c + "' in output");
      summed.push_back(c);
    }
  }
  for (char c : out_labels)
    if (counts.find(c) == counts.end() || counts[c] != 1)
      fail(Errc::InvalidArgument, std::string("contract: bad output label '") + c + "'");
  for (auto [c, n] : counts)
    if (n == 1 && out_labels.find(c) == std::string::npos)
      fail(Errc::InvalidArgument, std::string("contract: free label '") + c + "' missing from output");

  Tensor out(static_cast<int>(out_labels.size()));
  std::map<char, int> assign;

  const std::size_t n_out = out.size();
  const std::size_t n_sum = pow4(static_cast<int>(summed.size()));
  std::vector<int> oidx(out_labels.size()), sidx(summed.size());
  for (std::size_t fo = 0; fo < n_out; ++fo) {
    std::size_t r = fo;
    for (int k = static_cast<int>(out_labels.size()) - 1; k >= 0; --k) {
      oidx[k] = static_cast<int>(r & 3);
      r >>= 2;
    }
    for (std::size_t k = 0; k < out_labels.size(); ++k) assign[out_labels[k]] = oidx[k];
    double total = 0.0;
    for (std::size_t fs = 0; fs < n_sum; ++fs) {
      std::size_t q = fs;
      for (int k = static_cast<int>(summed.size()) - 1; k >= 0; --k) {
        sidx[k] = static_cast<int>(q & 3);
        q >>= 2;
      }
      for (std::size_t k = 0; k < summed.size(); ++k) assign[summed[k]] = sidx[k];
      double prod = 1.0;
      for (std::size_t k = 0; k < operands.size(); ++k) {
        std::size_t f = 0;
        for (char c : op_labels[k]) f = f * 4 + static_cast<std::size_t>(assign[c]);
        prod *= operands[k].data()[f];
      }
      total += prod;
    }
    out.data()[fo] = total;
  }
  return out;
}

namespace {

Tensor swap_axes(const Tensor& t, int i, int j) {
  Tensor out(t.rank());
  std::vector<int> idx(t.rank());
  for (std::size_t f = 0; f < t.size(); ++f) {
    std::size_t r = f;
    for (int k = t.rank() - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(r & 3);
      r >>= 2;
    }
    std::swap(idx[i], idx[j]);
    std::size_t g = 0;
    for (int v : idx) g = g * 4 + static_cast<std::size_t>(v);
    out.data()[g] = t.data()[f];
  }
  return out;
}

}  // namespace

Tensor antisymmetrize_pair(const Tensor& t, int axis_i, int axis_j) {
  if (axis_i == axis_j || axis_i < 0 || axis_j < 0 || axis_i >= t.rank() || axis_j >= t.rank())
    fail(Errc::InvalidArgument, "antisymmetrize_pair: invalid axes");
  Tensor s = swap_axes(t, axis_i, axis_j);
  Tensor out(t.rank());
  for (std::size_t f = 0; f < t.size(); ++f) out.data()[f] = t.data()[f] - s.data()[f];
  return out;
}

Tensor symmetrize_pair(const Tensor& t, int axis_i, int axis_j) {
  if (axis_i == axis_j || axis_i < 0 || axis_j < 0 || axis_i >= t.rank() || axis_j >= t.rank())
    fail(Errc::InvalidArgument, "symmetrize_pair: invalid axes");
  Tensor s = swap_axes(t, axis_i, axis_j);
  Tensor out(t.rank());
  for (std::size_t f = 0; f < t.size(); ++f) out.data()[f] = t.data()[f] + s.data()[f];
  return out;
}

std::pair<Tensor, double> metric_aux(const Tensor& g) {
  if (g.rank() != 2) fail(Errc::InvalidArgument, "metric_aux: rank-2 tensor required");
  const auto& a = g.data();
  auto m = [&](int i, int j) { return a[static_cast<std::size_t>(i) * 4 + j]; };
  auto det3 = [&](int r0, int r1, int r2, int c0, int c1, int c2) {
    return m(r0, c0) * (m(r1, c1) * m(r2, c2) - m(r1, c2) * m(r2, c1)) -
           m(r0, c1) * (m(r1, c0) * m(r2, c2) - m(r1, c2) * m(r2, c0)) +
           m(r0, c2) * (m(r1, c0) * m(r2, c1) - m(r1, c1) * m(r2, c0));
  };
  double det = 0.0;
  const int rows[3][3] = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
  (void)rows;
  for (int j = 0; j < 4; ++j) {
    int cols[3], c = 0;
    for (int k = 0; k < 4; ++k)
      if (k != j) cols[c++] = k;
    double cof = det3(1, 2, 3, cols[0], cols[1], cols[2]);
    det += ((j % 2 == 0) ? 1.0 : -1.0) * m(0, j) * cof;
  }
  if (std::abs(det) < kDegenerateDet)
    fail(Errc::SingularMetric, "metric_aux: |det g| below degeneracy threshold");

  Tensor inv(2);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      int r[3], c[3], ri = 0, ci = 0;
      for (int k = 0; k < 4; ++k) {
        if (k != i) r[ri++] = k;
        if (k != j) c[ci++] = k;
      }
      double cof = det3(r[0], r[1], r[2], c[0], c[1], c[2]);
      // adjugate transpose: inv[j][i] = cofactor(i,j)/det
      inv.data()[static_cast<std::size_t>(j) * 4 + i] = (((i + j) % 2 == 0) ? 1.0 : -1.0) * cof / det;
    }
  }
  return {inv, std::sqrt(std::abs(det))};
}

Tensor minkowski() {
  Tensor t(2);
  t({0, 0}) = -1.0;
  t({1, 1}) = t({2, 2}) = t({3, 3}) = 1.0;
  return t;
}

Tensor identity2() {
  Tensor t(2);
  for (int i = 0; i < 4; ++i) t({i, i}) = 1.0;
  return t;
}

}  // namespace palatini::tensor
