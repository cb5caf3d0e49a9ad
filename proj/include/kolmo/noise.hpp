#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace kolmo {

/// Power decay alpha_k = amplitude * k^{-exponent}.
struct DecayLaw {
    double amplitude = 1.0;
    double exponent = 2.0;
};

/// Diagonal covariance A eta_k = alpha_k eta_k restricted to E_N.
class NoiseSpec {
public:
    NoiseSpec() = default;
    /// Explicit eigenvalues; no tail beyond the listed modes.
    explicit NoiseSpec(std::vector<double> alpha);
    /// alpha_k = a k^{-gamma} for k = 1..n, with the analytic tail counted in trace().
    static NoiseSpec power_law(std::size_t n, double amplitude, double exponent);
    static NoiseSpec zero(std::size_t n);

    std::size_t modes() const { return alpha_.size(); }
    double alpha(std::size_t k) const { return alpha_[k - 1]; }
    const std::vector<double>& eigenvalues() const { return alpha_; }
    const std::optional<DecayLaw>& law() const { return law_; }

    /// Tr A: the full series when a decay law is declared, else the listed sum.
    double trace() const;
    /// Tr A_N.
    double trace_truncated() const;
    /// sup (x, Ax)/|x'|^2 = max alpha_k / (pi k)^2.
    double a0() const;
    /// |A|_{X->X} = max alpha_k.
    double opnorm() const;
    /// All alpha_k > 0, i.e. A_N invertible.
    bool invertible() const;

    /// Same law on a different number of modes.
    NoiseSpec resized(std::size_t n) const;

private:
    std::vector<double> alpha_;
    std::optional<DecayLaw> law_;
};

}  // namespace kolmo
