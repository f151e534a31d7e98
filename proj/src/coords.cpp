#include "coords.hpp"

#include <stdexcept>

namespace palatini::jet {

namespace {

std::string pair_str(int p) {
  return std::to_string(kPairs[p][0]) + std::to_string(kPairs[p][1]);
}

std::vector<int> make_ids(std::initializer_list<std::pair<int, int>> ranges) {
  std::vector<int> ids;
  for (auto [lo, n] : ranges)
    for (int i = 0; i < n; ++i) ids.push_back(lo + i);
  return ids;
}

}  // namespace

std::string coord_name(int id) {
  if (id < kG) return "x_" + std::to_string(id - kX);
  if (id < kGamma) return "g_" + pair_str(id - kG);
  if (id < kDG) {
    int f = id - kGamma;
    return "Gamma_" + std::to_string(f / 16) + "_" + std::to_string((f / 4) % 4) + "_" +
           std::to_string(f % 4);
  }
  if (id < kDGamma) {
    int f = id - kDG;
    return "dg_" + pair_str(f / 4) + "_" + std::to_string(f % 4);
  }
  if (id < kDDG) {
    int f = id - kDGamma;
    return "dGamma_" + std::to_string(f / 64) + "_" + std::to_string((f / 16) % 4) + "_" +
           std::to_string((f / 4) % 4) + "_" + std::to_string(f % 4);
  }
  if (id < kDDGamma) {
    int f = id - kDDG;
    return "ddg_" + pair_str(f / 10) + "_" + pair_str(f % 10);
  }
  if (id < kPMetric) {
    int f = id - kDDGamma;
    int gf = f / 10;
    return "ddGamma_" + std::to_string(gf / 16) + "_" + std::to_string((gf / 4) % 4) + "_" +
           std::to_string(gf % 4) + "_" + pair_str(f % 10);
  }
  if (id < kPConn) {
    int f = id - kPMetric;
    return "p_metric_" + pair_str(f / 4) + "_" + std::to_string(f % 4);
  }
  if (id < kPScalar) {
    int f = id - kPConn;
    return "p_conn_" + std::to_string(f / 64) + "_" + std::to_string((f / 16) % 4) + "_" +
           std::to_string((f / 4) % 4) + "_" + std::to_string(f % 4);
  }
  if (id == kPScalar) return "p";
  if (id < kTotal) return "p_sym_" + pair_str(id - kPSym);
  throw std::out_of_range("coord_name: bad id");
}

const std::vector<int>& bundle_ids(Bundle b) {
  static const std::vector<int> e = make_ids({{kX, 4}, {kG, 10}, {kGamma, 64}});
  static const std::vector<int> j1 =
      make_ids({{kX, 4}, {kG, 10}, {kGamma, 64}, {kDG, 40}, {kDGamma, 256}});
  static const std::vector<int> j2 = make_ids(
      {{kX, 4}, {kG, 10}, {kGamma, 64}, {kDG, 40}, {kDGamma, 256}, {kDDG, 100}, {kDDGamma, 640}});
  static const std::vector<int> mpi = make_ids(
      {{kX, 4}, {kG, 10}, {kGamma, 64}, {kPMetric, 40}, {kPConn, 256}, {kPScalar, 1}});
  static const std::vector<int> j1star =
      make_ids({{kX, 4}, {kG, 10}, {kGamma, 64}, {kPMetric, 40}, {kPConn, 256}});
  static const std::vector<int> pnm = make_ids({{kX, 4}, {kG, 10}, {kGamma, 64}});
  static const std::vector<int> ppure = make_ids({{kX, 4}, {kGamma, 64}, {kPSym, 10}});
  static const std::vector<int> pgamma = make_ids({{kX, 4}, {kGamma, 64}, {kPConn, 256}});
  static const std::vector<int> sigma = make_ids({{kX, 4}, {kG, 10}, {kDG, 40}});
  switch (b) {
    case Bundle::E: return e;
    case Bundle::J1: return j1;
    case Bundle::J2: return j2;
    case Bundle::MPi: return mpi;
    case Bundle::J1Star: return j1star;
    case Bundle::PNonMomenta: return pnm;
    case Bundle::PPure: return ppure;
    case Bundle::PGamma: return pgamma;
    case Bundle::SigmaJ1: return sigma;
  }
  throw std::logic_error("bundle_ids: bad bundle");
}

DimRecord dims() {
  DimRecord d;
  d.E = static_cast<int>(bundle_ids(Bundle::E).size());
  d.J1 = static_cast<int>(bundle_ids(Bundle::J1).size());
  d.M = static_cast<int>(bundle_ids(Bundle::MPi).size());
  d.J1star = static_cast<int>(bundle_ids(Bundle::J1Star).size());
  d.P = static_cast<int>(bundle_ids(Bundle::PNonMomenta).size());
  d.Sigma_J1 = static_cast<int>(bundle_ids(Bundle::SigmaJ1).size());
  return d;
}

static_assert(kTotal == 1421);
static_assert(kDGamma + 256 == kDDG);
static_assert(kDDGamma + 640 == kPMetric);
static_assert(pair_index(3, 3) == 9 && pair_index(1, 0) == 1 && pair_index(2, 3) == 8);

}  // namespace palatini::jet
