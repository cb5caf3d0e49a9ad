#include "kolmo/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kolmo/spectral.hpp"

namespace kolmo {

NoiseSpec::NoiseSpec(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    for (double a : alpha_) {
        if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError("noise eigenvalues must be finite and >= 0");
    }
}

NoiseSpec NoiseSpec::power_law(std::size_t n, double amplitude, double exponent) {
    if (!(exponent > 1.0)) throw ParameterError("trace class needs decay exponent > 1");
    if (!(amplitude >= 0.0)) throw ParameterError("noise amplitude must be >= 0");
    std::vector<double> a(n);
    for (std::size_t k = 1; k <= n; ++k) a[k - 1] = amplitude * std::pow(static_cast<double>(k), -exponent);
    NoiseSpec s(std::move(a));
    s.law_ = DecayLaw{amplitude, exponent};
    return s;
}

NoiseSpec NoiseSpec::zero(std::size_t n) { return NoiseSpec(std::vector<double>(n, 0.0)); }

double NoiseSpec::trace_truncated() const {
    double s = 0.0;
    for (double a : alpha_) s += a;
    return s;
}

double NoiseSpec::trace() const {
    if (!law_) return trace_truncated();
    return law_->amplitude * std::riemann_zeta(law_->exponent);
}

double NoiseSpec::a0() const {
    double best = 0.0;
    for (std::size_t k = 1; k <= alpha_.size(); ++k) {
        const double wk = std::numbers::pi * static_cast<double>(k);
        best = std::max(best, alpha_[k - 1] / (wk * wk));
    }
    return best;
}

double NoiseSpec::opnorm() const {
    double best = 0.0;
    for (double a : alpha_) best = std::max(best, a);
    return best;
}

bool NoiseSpec::invertible() const {
    return !alpha_.empty() && std::all_of(alpha_.begin(), alpha_.end(), [](double a) { return a > 0.0; });
}

NoiseSpec NoiseSpec::resized(std::size_t n) const {
    if (law_) return power_law(n, law_->amplitude, law_->exponent);
    std::vector<double> a(n, 0.0);
    for (std::size_t k = 0; k < std::min(n, alpha_.size()); ++k) a[k] = alpha_[k];
    return NoiseSpec(std::move(a));
}

}  // namespace kolmo
