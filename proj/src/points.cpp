#include "points.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include "rng.hpp"
#include "tensor.hpp"

namespace palatini::jet {

using nlohmann::json;

JetPoint2 sample_jet_point(std::uint64_t seed) {
  rng::Stream s = rng::Stream::derive(seed, 0x6a657470);  // "jetp"
  JetPoint2 p;

  // Lorentzian metric: g = Lambda^T eta Lambda, Lambda resampled until
  // |det Lambda| > 0.1
  double lam[4][4];
  while (true) {
    for (auto& row : lam)
      for (double& x : row) x = s.symmetric();
    Eigen::Matrix4d L;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) L(i, j) = lam[i][j];
    if (std::abs(L.determinant()) > 0.1) break;
  }
  const double eta[4] = {-1.0, 1.0, 1.0, 1.0};
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      double g = 0.0;
      for (int k = 0; k < 4; ++k) g += lam[k][a] * eta[k] * lam[k][b];
      p.v[g_id(a, b)] = g;
    }

  for (int mu = 0; mu < 4; ++mu) p.v[x_id(mu)] = s.symmetric();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) p.v[gamma_id(a, b, c)] = s.symmetric();
  for (int pr = 0; pr < kNPairs; ++pr)
    for (int mu = 0; mu < 4; ++mu) p.v[kDG + pr * 4 + mu] = s.symmetric();
  for (int fl = 0; fl < 64; ++fl)
    for (int mu = 0; mu < 4; ++mu) p.v[kDGamma + fl * 4 + mu] = s.symmetric();
  for (int pr = 0; pr < kNPairs; ++pr)
    for (int qr = 0; qr < kNPairs; ++qr) p.v[kDDG + pr * 10 + qr] = s.symmetric();
  for (int fl = 0; fl < 64; ++fl)
    for (int qr = 0; qr < kNPairs; ++qr) p.v[kDDGamma + fl * 10 + qr] = s.symmetric();
  return p;
}

bool is_lorentzian(const PointValues& p) {
  Eigen::Matrix4d g;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) g(a, b) = p[g_id(a, b)];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(g);
  int neg = 0, pos = 0;
  for (int i = 0; i < 4; ++i) {
    if (es.eigenvalues()(i) < 0) ++neg;
    if (es.eigenvalues()(i) > 0) ++pos;
  }
  return neg == 1 && pos == 3;
}

void validate_jet_point(const JetPoint2& p) {
  Eigen::Matrix4d g;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) g(a, b) = p.v[g_id(a, b)];
  if (std::abs(g.determinant()) < tensor::kDegenerateDet)
    fail(Errc::SingularMetric, "jet point: |det g| below degeneracy threshold");
  if (!is_lorentzian(p.v)) fail(Errc::InvalidArgument, "jet point: signature is not (-+++)");
}

namespace {

json block_to_array(const PointValues& v, int lo, int n) {
  json a = json::array();
  for (int i = 0; i < n; ++i) a.push_back(v[lo + i]);
  return a;
}

void array_to_block(const json& a, PointValues& v, int lo, int n, const char* name) {
  if (!a.is_array() || static_cast<int>(a.size()) != n)
    fail(Errc::Io, std::string("point json: field '") + name + "' must be an array of " +
                       std::to_string(n) + " numbers");
  for (int i = 0; i < n; ++i) v[lo + i] = a[i].get<double>();
}

}  // namespace

std::string jet_point_to_json(const JetPoint2& p) {
  json j;
  j["x"] = block_to_array(p.v, kX, 4);
  j["g"] = block_to_array(p.v, kG, 10);
  j["Gamma"] = block_to_array(p.v, kGamma, 64);
  j["dg"] = block_to_array(p.v, kDG, 40);
  j["dGamma"] = block_to_array(p.v, kDGamma, 256);
  j["ddg"] = block_to_array(p.v, kDDG, 100);
  j["ddGamma"] = block_to_array(p.v, kDDGamma, 640);
  return j.dump();
}

JetPoint2 jet_point_from_json(const std::string& text) {
  json j = json::parse(text);
  JetPoint2 p;
  array_to_block(j.at("x"), p.v, kX, 4, "x");
  array_to_block(j.at("g"), p.v, kG, 10, "g");
  array_to_block(j.at("Gamma"), p.v, kGamma, 64, "Gamma");
  array_to_block(j.at("dg"), p.v, kDG, 40, "dg");
  array_to_block(j.at("dGamma"), p.v, kDGamma, 256, "dGamma");
  array_to_block(j.at("ddg"), p.v, kDDG, 100, "ddg");
  array_to_block(j.at("ddGamma"), p.v, kDDGamma, 640, "ddGamma");
  return p;
}

std::string momentum_point_to_json(const MomentumPoint& p) {
  json j;
  j["x"] = block_to_array(p.v, kX, 4);
  j["g"] = block_to_array(p.v, kG, 10);
  j["Gamma"] = block_to_array(p.v, kGamma, 64);
  j["p_metric"] = block_to_array(p.v, kPMetric, 40);
  j["p_conn"] = block_to_array(p.v, kPConn, 256);
  if (p.has_p) j["p"] = p.v[kPScalar];
  return j.dump();
}

MomentumPoint momentum_point_from_json(const std::string& text) {
  json j = json::parse(text);
  MomentumPoint p;
  array_to_block(j.at("x"), p.v, kX, 4, "x");
  array_to_block(j.at("g"), p.v, kG, 10, "g");
  array_to_block(j.at("Gamma"), p.v, kGamma, 64, "Gamma");
  array_to_block(j.at("p_metric"), p.v, kPMetric, 40, "p_metric");
  array_to_block(j.at("p_conn"), p.v, kPConn, 256, "p_conn");
  if (j.contains("p")) {
    p.v[kPScalar] = j["p"].get<double>();
    p.has_p = true;
  }
  return p;
}

std::string pure_point_to_json(const PureConnectionPoint& p) {
  json j;
  j["x"] = block_to_array(p.v, kX, 4);
  j["Gamma"] = block_to_array(p.v, kGamma, 64);
  j["p_sym"] = block_to_array(p.v, kPSym, 10);
  return j.dump();
}

PureConnectionPoint pure_point_from_json(const std::string& text) {
  json j = json::parse(text);
  PureConnectionPoint p;
  array_to_block(j.at("x"), p.v, kX, 4, "x");
  array_to_block(j.at("Gamma"), p.v, kGamma, 64, "Gamma");
  array_to_block(j.at("p_sym"), p.v, kPSym, 10, "p_sym");
  return p;
}

std::string sigma_point_to_json(const SigmaJetPoint& p) {
  json j;
  j["x"] = block_to_array(p.v, kX, 4);
  j["g"] = block_to_array(p.v, kG, 10);
  j["dg"] = block_to_array(p.v, kDG, 40);
  return j.dump();
}

SigmaJetPoint sigma_point_from_json(const std::string& text) {
  json j = json::parse(text);
  SigmaJetPoint p;
  array_to_block(j.at("x"), p.v, kX, 4, "x");
  array_to_block(j.at("g"), p.v, kG, 10, "g");
  array_to_block(j.at("dg"), p.v, kDG, 40, "dg");
  return p;
}

}  // namespace palatini::jet
