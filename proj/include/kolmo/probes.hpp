#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kolmo/spectral.hpp"

namespace kolmo {

/// States with coefficients ~ xi_k k^-decay rescaled to |x'|_2 = radius * U, U uniform.
std::vector<SpectralVector> probe_ball(std::size_t n, std::size_t count, double radius,
                                       std::uint64_t seed, double decay = 1.0);

/// The fixed states 0, +-eta_1, +-2 eta_1, eta_1 + eta_2 (needs n >= 2 for the last).
std::vector<SpectralVector> fixed_probes(std::size_t n);

/// fixed_probes followed by Gaussian states a_k ~ N(0, s^2 k^-2), s cycling
/// through {0.5, 1, 2}. States with kappa |x|_2^2 > exp_cap are redrawn at a
/// smaller scale so that V stays finite. count includes the fixed states.
std::vector<SpectralVector> lyapunov_probes(std::size_t n, std::size_t count, std::uint64_t seed,
                                            double kappa = 0.0, double exp_cap = 700.0);

inline constexpr std::uint64_t kProbeSeed = 0x70be5eedULL;

}  // namespace kolmo
