#pragma once

// Typed evaluation points over the coordinate atlas, their invariants, JSON
// round-trip, and the base random sampler (Lorentzian metric by congruence
// with the Minkowski matrix, everything else i.i.d. uniform in [-1,1]).

#include <cstdint>
#include <string>

#include "coords.hpp"
#include "error.hpp"

namespace palatini::jet {

struct JetPoint2 {
  PointValues v;
};

struct MomentumPoint {
  PointValues v;
  bool has_p = false;  // extended bundle carries the p scalar
};

struct PureConnectionPoint {
  PointValues v;
};

struct SigmaJetPoint {
  PointValues v;
};

// g = Lambda^T eta Lambda with |det Lambda| > 0.1 (resampled), all other
// coordinates uniform in [-1,1]; bit-deterministic per seed.
JetPoint2 sample_jet_point(std::uint64_t seed);

// signature check: one negative and three positive eigenvalues of g
bool is_lorentzian(const PointValues& p);
void validate_jet_point(const JetPoint2& p);

std::string jet_point_to_json(const JetPoint2& p);
JetPoint2 jet_point_from_json(const std::string& text);
std::string momentum_point_to_json(const MomentumPoint& p);
MomentumPoint momentum_point_from_json(const std::string& text);
std::string pure_point_to_json(const PureConnectionPoint& p);
PureConnectionPoint pure_point_from_json(const std::string& text);
std::string sigma_point_to_json(const SigmaJetPoint& p);
SigmaJetPoint sigma_point_from_json(const std::string& text);

}  // namespace palatini::jet
