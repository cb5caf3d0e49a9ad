#include "kolmo/probes.hpp"

#include <algorithm>
#include <cmath>

#include "kolmo/rng.hpp"

namespace kolmo {

std::vector<SpectralVector> probe_ball(std::size_t n, std::size_t count, double radius,
                                       std::uint64_t seed, double decay) {
    std::vector<SpectralVector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        RandomStream rs(seed, i);
        SpectralVector x(n);
        for (std::size_t k = 1; k <= n; ++k) x[k - 1] = rs.normal() * std::pow(static_cast<double>(k), -decay);
        const double h = h1_seminorm(x);
        if (h > 0.0) x *= radius * rs.uniform() / h;
        out.push_back(std::move(x));
    }
    return out;
}

std::vector<SpectralVector> fixed_probes(std::size_t n) {
    std::vector<SpectralVector> out;
    out.emplace_back(n);
    for (double amp : {1.0, -1.0, 2.0, -2.0}) out.push_back(SpectralVector::mode(n, 1, amp));
    if (n >= 2) out.push_back(SpectralVector::mode(n, 1) + SpectralVector::mode(n, 2));
    return out;
}

std::vector<SpectralVector> lyapunov_probes(std::size_t n, std::size_t count, std::uint64_t seed,
                                            double kappa, double exp_cap) {
    std::vector<SpectralVector> out = fixed_probes(n);
    if (out.size() > count) out.resize(count);
    constexpr double scales[] = {0.5, 1.0, 2.0};
    for (std::size_t i = 0; out.size() < count; ++i) {
        RandomStream rs(seed, i);
        const double s = scales[i % 3];
        SpectralVector x(n);
        for (std::size_t k = 1; k <= n; ++k) x[k - 1] = s * rs.normal() / static_cast<double>(k);
        const double e = kappa * dot(x, x);
        if (kappa > 0.0 && e > exp_cap) x *= std::sqrt(0.5 * exp_cap / e);
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace kolmo
