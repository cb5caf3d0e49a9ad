#include "kolmo/cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kolmo {

CylinderFunction CylinderFunction::ridge(SpectralVector l, Polynomial h) {
    CylinderFunction u;
    u.kind_ = CylinderKind::Polynomial;
    u.base_n_ = l.size();
    u.direction_ = std::move(l);
    u.poly_ = std::move(h);
    u.dpoly_ = u.poly_.derivative();
    u.ddpoly_ = u.dpoly_.derivative();
    u.label_ = "polynomial";
    return u;
}

CylinderFunction CylinderFunction::trig(SpectralVector l, bool cosine) {
    CylinderFunction u;
    u.kind_ = CylinderKind::Trig;
    u.base_n_ = l.size();
    u.direction_ = std::move(l);
    u.cosine_ = cosine;
    u.label_ = cosine ? "cos" : "sin";
    return u;
}

CylinderFunction CylinderFunction::linear(SpectralVector l) { return ridge(std::move(l), Polynomial{0.0, 1.0}); }

CylinderFunction CylinderFunction::constant(double c) { return ridge(SpectralVector(), Polynomial{c}); }

CylinderFunction CylinderFunction::custom(std::size_t base_n, CylinderCallbacks g, std::string label) {
    if (!g.value || !g.gradient || !g.hessian) throw ParameterError("custom cylinder function needs all callbacks");
    CylinderFunction u;
    u.kind_ = CylinderKind::Custom;
    u.base_n_ = base_n;
    u.g_ = std::move(g);
    u.label_ = std::move(label);
    return u;
}

double CylinderFunction::h(double s, int order) const {
    if (kind_ == CylinderKind::Trig) {
        if (cosine_) return order == 0 ? std::cos(s) + 1.0 : order == 1 ? -std::sin(s) : -std::cos(s);
        return order == 0 ? std::sin(s) + 1.0 : order == 1 ? std::cos(s) : -std::sin(s);
    }
    return order == 0 ? poly_(s) : order == 1 ? dpoly_(s) : ddpoly_(s);
}

std::span<const double> CylinderFunction::head(const SpectralVector& x, std::vector<double>& buf) const {
    if (x.size() >= base_n_) return x.span().first(base_n_);
    buf.assign(base_n_, 0.0);
    std::copy(x.values().begin(), x.values().end(), buf.begin());
    return buf;
}

double CylinderFunction::eval(const SpectralVector& x) const {
    if (kind_ != CylinderKind::Custom) return h(ridge_arg(x), 0);
    std::vector<double> buf;
    return g_.value(head(x, buf));
}

SpectralVector CylinderFunction::grad(const SpectralVector& x) const {
    if (kind_ != CylinderKind::Custom) {
        SpectralVector out = direction_;
        out *= h(ridge_arg(x), 1);
        return out;
    }
    std::vector<double> buf;
    SpectralVector out(base_n_);
    g_.gradient(head(x, buf), out.span());
    return out;
}

double CylinderFunction::hess_pair(const SpectralVector& x, std::size_t i, std::size_t j) const {
    if (i < 1 || j < 1 || i > base_n_ || j > base_n_) return 0.0;
    if (kind_ != CylinderKind::Custom) return h(ridge_arg(x), 2) * direction_[i - 1] * direction_[j - 1];
    std::vector<double> buf;
    return g_.hessian(head(x, buf), i - 1, j - 1);
}

double CylinderFunction::trace_hess(const SpectralVector& x, const NoiseSpec& noise) const {
    const std::size_t n = std::min(base_n_, noise.modes());
    double acc = 0.0;
    if (kind_ != CylinderKind::Custom) {
        for (std::size_t k = 1; k <= n; ++k) acc += noise.alpha(k) * direction_[k - 1] * direction_[k - 1];
        return acc * h(ridge_arg(x), 2);
    }
    std::vector<double> buf;
    const auto z = head(x, buf);
    for (std::size_t k = 1; k <= n; ++k) acc += noise.alpha(k) * g_.hessian(z, k - 1, k - 1);
    return acc;
}

std::pair<CylinderFunction, CylinderFunction> trig_family(std::size_t k) {
    if (k < 1) throw ParameterError("trig_family needs k >= 1");
    return {CylinderFunction::trig(SpectralVector::mode(k, k), true),
            CylinderFunction::trig(SpectralVector::mode(k, k), false)};
}

double apply_L(const CylinderFunction& u, const SpectralVector& x, const SpectralVector& f, const NoiseSpec& noise) {
    const SpectralVector g = u.grad(x);
    double acc = 0.5 * u.trace_hess(x, noise);
    for (std::size_t k = 1; k <= g.size(); ++k) {
        if (g[k - 1] == 0.0) continue;
        const double mu = std::numbers::pi * std::numbers::pi * static_cast<double>(k * k);
        acc += (-mu * x.coeff(k) + f.coeff(k)) * g[k - 1];
    }
    return acc;
}

double apply_L(const CylinderFunction& u, const SpectralVector& x, const DriftEvaluator* drift,
               const NoiseSpec& noise) {
    if (drift == nullptr) return apply_L(u, x, SpectralVector(), noise);
    const std::size_t nd = drift->modes();
    const SpectralVector f = (*drift)(project(x, nd), std::min(nd, std::max<std::size_t>(u.base_n(), 1)));
    return apply_L(u, x, f, noise);
}

double carre_du_champ(const CylinderFunction& u, const SpectralVector& x, const NoiseSpec& noise) {
    const SpectralVector g = u.grad(x);
    double acc = 0.0;
    for (std::size_t k = 1; k <= std::min(g.size(), noise.modes()); ++k) acc += noise.alpha(k) * g[k - 1] * g[k - 1];
    return acc;
}

}  // namespace kolmo
