#pragma once

// Exact samplers for the constraint submanifolds. The torsion surface is
// parametrized directly (trace vector + symmetric part); the deeper surfaces
// solve the affine-in-dGamma constraint systems by a minimum-norm particular
// solution plus a random combination of null-space directions.

#include <array>
#include <cstdint>
#include <optional>

#include "points.hpp"

namespace palatini::jet {

enum class Surface { ST, SSH, SF, PF };

struct SampleOptions {
  // overrides the random trace vector (pre-metricity biconditional checks)
  std::optional<std::array<double, 4>> trace;
};

struct SampleDiag {
  double lsq_residual = 0.0;  // residual of the particular solution
  int kernel_dim = 0;
};

JetPoint2 sample_on_surface(Surface surf, std::uint64_t seed, const SampleOptions& opt = {},
                            SampleDiag* diag = nullptr);

// Legendre image of an S_T sample (point of P_f in momentum coordinates)
MomentumPoint sample_pf(std::uint64_t seed, bool extended = false);

Surface surface_from_string(const std::string& name);

}  // namespace palatini::jet
