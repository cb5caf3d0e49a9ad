#include "kolmo/oracle1d.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "kolmo/sde.hpp"

namespace kolmo {

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

}  // namespace

double truncation_radius(double alpha1) {
    if (!(alpha1 > 0.0)) throw ParameterError("alpha_1 must be positive");
    const double r = std::sqrt(37.0 * alpha1 * std::log(10.0) / kPi2);
    return std::ceil(2.0 * r) / 2.0;
}

std::vector<double> Mesh1D::sample(const ScalarMap& f) const {
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = f(x[i]);
    return v;
}

Mesh1D Mesh1D::build(double alpha1, std::size_t n, double R) {
    if (n < 2000) throw ParameterError("oracle mesh needs at least 2000 nodes");
    Mesh1D m;
    m.alpha = alpha1;
    m.R = R > 0.0 ? R : truncation_radius(alpha1);
    m.x.resize(n);
    m.rho.resize(n);
    const double h = 2.0 * m.R / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        m.x[i] = -m.R + h * static_cast<double>(i);
        m.rho[i] = std::exp(-kPi2 * m.x[i] * m.x[i] / alpha1);
    }
    m.x[n - 1] = m.R;
    return m;
}

double bernoulli_weight(double z) {
    if (std::abs(z) < 1e-6) return 1.0 - z / 2.0 + z * z / 12.0;
    return z / std::expm1(z);
}

DiscreteResolvent::DiscreteResolvent(Mesh1D mesh, ScalarMap F1) : mesh_(std::move(mesh)), F1_(std::move(F1)) {
    const std::size_t n = mesh_.size();
    const double h = mesh_.h();
    const double D = mesh_.alpha / 2.0;
    up_.assign(n, 0.0);
    down_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double z = drift(0.5 * (mesh_.x[i] + mesh_.x[i + 1])) * h / D;
        up_[i] = D / (h * h) * bernoulli_weight(-z);
        down_[i + 1] = D / (h * h) * bernoulli_weight(z);
    }
    if (!is_m_matrix()) throw std::logic_error("oracle generator is not an M-matrix");
}

double DiscreteResolvent::drift(double x) const { return -kPi2 * x + (F1_ ? F1_(x) : 0.0); }

bool DiscreteResolvent::is_m_matrix() const {
    for (std::size_t i = 0; i < up_.size(); ++i) {
        if (!(up_[i] >= 0.0) || !(down_[i] >= 0.0) || !std::isfinite(up_[i]) || !std::isfinite(down_[i])) return false;
    }
    return down_.front() == 0.0 && up_.back() == 0.0;
}

std::vector<double> DiscreteResolvent::apply_L(std::span<const double> u) const {
    const std::size_t n = mesh_.size();
    if (u.size() != n) throw DimensionError("mesh function has the wrong size");
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n) out[i] += up_[i] * (u[i + 1] - u[i]);
        if (i > 0) out[i] += down_[i] * (u[i - 1] - u[i]);
    }
    return out;
}

std::vector<double> DiscreteResolvent::solve(std::span<const double> f, double lambda) const {
    if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
    const std::size_t n = mesh_.size();
    if (f.size() != n) throw DimensionError("mesh function has the wrong size");
    // u = f/lambda + w with (lambda - L_h) w = L_h f / lambda, so constants are reproduced exactly
    std::vector<double> g = apply_L(f);
    for (double& v : g) v /= lambda;
    // Thomas sweep on diag lambda + up + down, super -up, sub -down
    std::vector<double> c(n), d(n);
    double beta = lambda + up_[0];
    c[0] = -up_[0] / beta;
    d[0] = g[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
        const double diag = lambda + up_[i] + down_[i];
        beta = diag + down_[i] * c[i - 1];
        c[i] = -up_[i] / beta;
        d[i] = (g[i] + down_[i] * d[i - 1]) / beta;
    }
    std::vector<double> u(n);
    u[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) u[i] = d[i] - c[i] * u[i + 1];
    for (std::size_t i = 0; i < n; ++i) u[i] += f[i] / lambda;
    return u;
}

std::vector<double> DiscreteResolvent::solve(const ScalarMap& f, double lambda) const {
    const auto v = mesh_.sample(f);
    return solve(v, lambda);
}

std::vector<double> DiscreteResolvent::stationary_masses() const {
    const std::size_t n = mesh_.size();
    std::vector<double> logp(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) logp[i + 1] = logp[i] + std::log(up_[i] / down_[i + 1]);
    const double top = *std::max_element(logp.begin(), logp.end());
    std::vector<double> p(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i] = std::exp(logp[i] - top);
    for (double& v : p) v /= s;
    return p;
}

double resolvent_identity_residual(const DiscreteResolvent& op, std::span<const double> f, double lambda, double mu) {
    const auto rl = op.solve(f, lambda);
    const auto rm = op.solve(f, mu);
    const auto rlrm = op.solve(rm, lambda);
    double err = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < rl.size(); ++i) {
        err = std::max(err, std::abs(rl[i] - rm[i] - (mu - lambda) * rlrm[i]));
        scale = std::max(scale, std::abs(rl[i]));
    }
    return err / scale;
}

double markov_residual(const DiscreteResolvent& op, double lambda) {
    const std::vector<double> one(op.mesh().size(), 1.0);
    const auto u = op.solve(one, lambda);
    double err = 0.0;
    for (double v : u) err = std::max(err, std::abs(lambda * v - 1.0));
    return err;
}

double stationary_expectation(const DiscreteResolvent& op, const ScalarMap& f) {
    const auto p = op.stationary_masses();
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * f(op.mesh().x[i]);
    return s;
}

double weight_rate(const DiscreteResolvent& op, const ScalarMap& V, const ScalarMap& dV, const ScalarMap& d2V) {
    const double D = op.mesh().alpha / 2.0;
    double sup = -std::numeric_limits<double>::infinity();
    for (double x : op.mesh().x) sup = std::max(sup, (D * d2V(x) + op.drift(x) * dV(x)) / V(x));
    return sup;
}

double gradient_weight_rate(const DiscreteResolvent& op, const ScalarMap& V1, const ScalarMap& dV1,
                            const ScalarMap& d2V1) {
    const double D = op.mesh().alpha / 2.0;
    const double e = 1e-5;
    double sup = -std::numeric_limits<double>::infinity();
    for (double x : op.mesh().x) {
        const double db = (op.drift(x + e) - op.drift(x - e)) / (2.0 * e);
        sup = std::max(sup, (D * d2V1(x) + op.drift(x) * dV1(x)) / V1(x) + db);
    }
    return sup;
}

WeightedBound weighted_bound_check(const DiscreteResolvent& op, const ScalarMap& f, double lambda,
                                   const ScalarMap& V, double lambda_v) {
    WeightedBound r;
    const Mesh1D& mesh = op.mesh();
    const auto v = mesh.sample(V);
    const auto lv = op.apply_L(v);
    r.condition_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 1.0)) {
            r.skipped = true;
            r.diagnostic = "weight below 1 at a node";
            return r;
        }
        r.condition_margin = std::min(r.condition_margin, (lambda_v * v[i] - lv[i]) / v[i]);
    }
    const double tol = 1e-4 * (1.0 + std::abs(lambda_v));
    if (r.condition_margin < -tol) {
        r.skipped = true;
        r.diagnostic = "weight condition fails on the mesh by " + std::to_string(-r.condition_margin);
        return r;
    }
    r.lambda_v = lambda_v + std::max(0.0, -r.condition_margin);
    if (!(lambda > r.lambda_v)) {
        r.skipped = true;
        r.diagnostic = "lambda does not exceed lambda_V";
        return r;
    }
    const auto fv = mesh.sample(f);
    const auto u = op.solve(fv, lambda);
    double fs = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        r.lhs = std::max(r.lhs, std::abs(u[i]) / v[i]);
        fs = std::max(fs, std::abs(fv[i]) / v[i]);
    }
    r.rhs = fs / (lambda - r.lambda_v);
    r.margin = r.rhs - r.lhs;
    return r;
}

std::vector<double> mesh_derivative(const Mesh1D& mesh, std::span<const double> u) {
    const std::size_t n = mesh.size();
    const double h = mesh.h();
    std::vector<double> d(n);
    d[0] = (u[1] - u[0]) / h;
    d[n - 1] = (u[n - 1] - u[n - 2]) / h;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    return d;
}

GradientBound gradient_bound_check(const DiscreteResolvent& op, const ScalarMap& f, double lambda,
                                   const ScalarMap& V1, double lambda_v1, double level) {
    if (!(lambda > lambda_v1)) throw ParameterError("lambda must exceed lambda_V1");
    const Mesh1D& mesh = op.mesh();
    const auto fv = mesh.sample(f);
    const auto v = mesh.sample(V1);
    const auto u = op.solve(fv, lambda);
    const auto du = mesh_derivative(mesh, u);
    const auto df = mesh_derivative(mesh, fv);
    GradientBound r;
    double fs = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        r.lhs = std::max(r.lhs, std::abs(du[i]) / v[i]);
        fs = std::max(fs, std::abs(df[i]) / v[i]);
    }
    r.rhs = fs / (lambda - lambda_v1);
    const double h = mesh.h();
    r.tolerance = 10.0 * h * h * (1.0 + r.rhs);
    r.margin = r.rhs + r.tolerance - r.lhs;

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (level <= 0.0 || v[i] <= level) idx.push_back(i);
    }
    for (std::size_t a = 0; a < idx.size(); ++a) {
        const std::size_t i = idx[a];
        r.gradient_sup = std::max(r.gradient_sup, std::abs(df[i]) / v[i]);
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            const std::size_t j = idx[b];
            const double q = std::abs(fv[i] - fv[j]) / (std::abs(mesh.x[i] - mesh.x[j]) * std::max(v[i], v[j]));
            r.quotient_sup = std::max(r.quotient_sup, q);
        }
    }
    r.quotient_gap = std::abs(r.quotient_sup - r.gradient_sup);
    const auto dv = mesh_derivative(mesh, v);
    double slope = 0.0;
    for (std::size_t i : idx) slope = std::max(slope, std::abs(dv[i]) / v[i]);
    r.quotient_tolerance = h * slope * r.gradient_sup + r.tolerance;
    return r;
}

ScalarMap scalar_drift(std::shared_ptr<const DriftEvaluator> drift) {
    if (!drift || drift->is_zero()) return {};
    if (drift->modes() != 1) throw DimensionError("scalar drift needs a one-mode evaluator");
    return [drift](double c) {
        double a = c, out = 0.0;
        drift->apply(std::span<const double>(&a, 1), std::span<double>(&out, 1));
        return out;
    };
}

double interpolate(const Mesh1D& mesh, std::span<const double> u, double x) {
    if (x < -mesh.R || x > mesh.R) throw ParameterError("point outside the oracle mesh");
    const double s = (x + mesh.R) / mesh.h();
    const auto i = std::min(static_cast<std::size_t>(s), mesh.size() - 2);
    const double t = s - static_cast<double>(i);
    return (1.0 - t) * u[i] + t * u[i + 1];
}

CrossValidation cross_validate(const ScalarMap& f, double x0, double lambda, const NoiseSpec& noise,
                               std::shared_ptr<const DriftEvaluator> drift, const McConfig& mc, std::size_t nodes,
                               double mesh_tolerance) {
    const NoiseSpec one = noise.modes() == 1 ? noise : noise.resized(1);
    const DiscreteResolvent op(Mesh1D::build(one.alpha(1), nodes), scalar_drift(drift));
    CrossValidation r;
    const auto u = op.solve(f, lambda);
    r.oracle = interpolate(op.mesh(), u, x0);
    const Integrator integ(1, one, mc.dt, drift);
    r.mc = resolvent_estimate(integ, [&](const SpectralVector& x) { return f(x[0]); },
                              SpectralVector::mode(1, 1, x0), lambda, mc);
    r.discrepancy = std::abs(r.oracle - r.mc.est.value);
    r.tolerance = 3.0 * r.mc.est.se + mesh_tolerance;
    r.pass = r.discrepancy <= r.tolerance;
    return r;
}

void write_csv(const Mesh1D& mesh, std::span<const double> u, std::ostream& out) {
    out << "x,u\n" << std::setprecision(17);
    for (std::size_t i = 0; i < mesh.size(); ++i) out << mesh.x[i] << ',' << u[i] << '\n';
}

}  // namespace kolmo
