#pragma once

// Finitely based test functions u = g o P_N, their derivatives, the
// Kolmogorov operator L and the carre du champ.

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "kolmo/drift.hpp"
#include "kolmo/noise.hpp"
#include "kolmo/polynomial.hpp"
#include "kolmo/spectral.hpp"

namespace kolmo {

enum class CylinderKind { Trig, Polynomial, Custom };

/// Callbacks of a custom g on the first base_n coordinates.
struct CylinderCallbacks {
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> gradient;
    /// d^2 g / dz_i dz_j, 0-based indices.
    std::function<double(std::span<const double>, std::size_t, std::size_t)> hessian;
};

/// Ridge functions h((l, x)) with analytic h, or a custom g.
class CylinderFunction {
public:
    /// h((l, x)) with h(s) = poly(s).
    static CylinderFunction ridge(SpectralVector l, Polynomial h);
    /// cos((l, x)) + 1 or sin((l, x)) + 1.
    static CylinderFunction trig(SpectralVector l, bool cosine);
    static CylinderFunction linear(SpectralVector l);
    static CylinderFunction constant(double c);
    static CylinderFunction custom(std::size_t base_n, CylinderCallbacks g, std::string label = "custom");

    std::size_t base_n() const { return base_n_; }
    CylinderKind kind() const { return kind_; }
    const std::string& label() const { return label_; }

    double eval(const SpectralVector& x) const;
    /// Du(x), an element of E_{base_n}.
    SpectralVector grad(const SpectralVector& x) const;
    /// d^2 u / dx_i dx_j with 1-based mode indices.
    double hess_pair(const SpectralVector& x, std::size_t i, std::size_t j) const;
    /// Tr(A D^2 u(x)) restricted to the first base_n modes.
    double trace_hess(const SpectralVector& x, const NoiseSpec& noise) const;

private:
    double ridge_arg(const SpectralVector& x) const { return dot(direction_, x); }
    double h(double s, int order) const;
    std::span<const double> head(const SpectralVector& x, std::vector<double>& buf) const;

    CylinderKind kind_ = CylinderKind::Polynomial;
    std::size_t base_n_ = 0;
    SpectralVector direction_;
    Polynomial poly_, dpoly_, ddpoly_;
    bool cosine_ = true;
    CylinderCallbacks g_;
    std::string label_;
};

/// {cos((eta_k, .)) + 1, sin((eta_k, .)) + 1}.
std::pair<CylinderFunction, CylinderFunction> trig_family(std::size_t k);

/// 1/2 sum alpha_k d_kk u + sum_{k <= base_n} (-(pi k)^2 x_k + f_k) d_k u with f = F(x).
double apply_L(const CylinderFunction& u, const SpectralVector& x, const SpectralVector& f, const NoiseSpec& noise);
double apply_L(const CylinderFunction& u, const SpectralVector& x, const DriftEvaluator* drift,
               const NoiseSpec& noise);

/// Gamma(u) = sum alpha_k (d_k u)^2.
double carre_du_champ(const CylinderFunction& u, const SpectralVector& x, const NoiseSpec& noise);

}  // namespace kolmo
