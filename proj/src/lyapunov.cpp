#include "kolmo/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kolmo/probes.hpp"
#include "kolmo/rng.hpp"

namespace kolmo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Grid values of x, x', |x|^{q-2} and x|x|^{q-2} in thread-local storage.
struct GridState {
    std::span<double> v, d, pw, g;
};

GridState grid_state(const Basis& basis, const SpectralVector& x, double q, bool with_derivative) {
    const std::size_t m = basis.grid_size();
    thread_local std::vector<double> buf;
    if (buf.size() < 4 * m) buf.resize(4 * m);
    GridState s{{buf.data(), m}, {buf.data() + m, m}, {buf.data() + 2 * m, m}, {buf.data() + 3 * m, m}};
    basis.synthesize_into(x.span(), s.v);
    if (with_derivative) basis.derivative_into(x.span(), s.d);
    for (std::size_t j = 0; j < m; ++j) {
        const double a = std::abs(s.v[j]);
        s.pw[j] = q == 2.0 ? 1.0 : (q == 4.0 ? a * a : std::pow(a, q - 2.0));
        s.g[j] = s.v[j] * s.pw[j];
    }
    return s;
}

double lq_from_state(const Basis& basis, const GridState& s) {
    double acc = 0.0;
    for (std::size_t j = 0; j < s.v.size(); ++j) acc += s.g[j] * s.v[j];
    return acc * basis.weight();
}

void check_state(const Basis& basis, const SpectralVector& x) {
    if (x.size() > basis.modes()) throw DimensionError("state has more modes than the basis");
}

void check_q(double q) {
    if (!(q >= 2.0)) throw ParameterError("Lyapunov exponent p must be >= 2");
}

}  // namespace

double V(const Basis& basis, const SpectralVector& x, const LyapunovParams& params) {
    check_state(basis, x);
    check_q(params.p);
    const double e = params.kappa * dot(x, x);
    if (e > kExpCap) return kInf;
    if (params.p == 2.0) return std::exp(e);
    return std::exp(e) * (1.0 + basis.lq_power(x, params.p));
}

double Theta(const Basis& basis, const SpectralVector& x, const LyapunovParams& params) {
    check_state(basis, x);
    check_q(params.p);
    const double e = params.kappa * dot(x, x);
    if (e > kExpCap) return kInf;
    const double h1 = h1_seminorm(x);
    const double ve = std::exp(e);
    if (params.p == 2.0) return ve * (1.0 + h1 * h1);
    const GridState s = grid_state(basis, x, params.p, true);
    double j = 0.0;
    for (std::size_t i = 0; i < s.v.size(); ++i) j += s.pw[i] * s.d[i] * s.d[i];
    j *= basis.weight();
    const double vq = ve * (1.0 + lq_from_state(basis, s));
    return vq * (1.0 + h1 * h1) + ve * 0.25 * params.p * params.p * j;
}

SpectralVector grad_V(const Basis& basis, const SpectralVector& x, double q, double kappa) {
    check_state(basis, x);
    check_q(q);
    const std::size_t n = x.size();
    SpectralVector out(n);
    const double e = kappa * dot(x, x);
    if (e > kExpCap) {
        for (std::size_t k = 0; k < n; ++k) out[k] = x[k] == 0.0 ? 0.0 : std::copysign(kInf, x[k]);
        return out;
    }
    const double ve = std::exp(e);
    if (q == 2.0) {
        for (std::size_t k = 0; k < n; ++k) out[k] = 2.0 * kappa * ve * x[k];
        return out;
    }
    const GridState s = grid_state(basis, x, q, false);
    const double vq = ve * (1.0 + lq_from_state(basis, s));
    basis.analyze_into(s.g, out.span());
    for (std::size_t k = 0; k < n; ++k) out[k] = 2.0 * kappa * vq * x[k] + q * ve * out[k];
    return out;
}

double hess_V_form(const Basis& basis, const SpectralVector& x, const SpectralVector& xi,
                   const SpectralVector& eta, double q, double kappa) {
    check_state(basis, x);
    check_state(basis, xi);
    check_state(basis, eta);
    check_q(q);
    const double e = kappa * dot(x, x);
    if (e > kExpCap) return kInf;
    const double ve = std::exp(e);
    const double xix = dot(xi, x), etax = dot(eta, x), xieta = dot(xi, eta);
    if (q == 2.0) return ve * (4.0 * kappa * kappa * xix * etax + 2.0 * kappa * xieta);
    const GridState s = grid_state(basis, x, q, false);
    const GridFunction gx = basis.synthesize(xi);
    const GridFunction ge = basis.synthesize(eta);
    double xig = 0.0, etag = 0.0, w2 = 0.0;
    for (std::size_t j = 0; j < s.v.size(); ++j) {
        xig += gx[j] * s.g[j];
        etag += ge[j] * s.g[j];
        w2 += gx[j] * ge[j] * s.pw[j];
    }
    const double w = basis.weight();
    xig *= w;
    etag *= w;
    w2 *= w;
    const double W = 1.0 + lq_from_state(basis, s);
    const double a = 2.0 * kappa * xix + q * xig / W;
    const double b = 2.0 * kappa * etax + q * etag / W;
    return ve * W * (a * b + 2.0 * kappa * xieta + q * (q - 1.0) * w2 / W - q * q * xig * etag / (W * W));
}

// ---------------------------------------------------------------------------

double kappa0(double h1_L1, double a0) {
    if (!(h1_L1 >= 0.0 && h1_L1 < 2.0)) throw ParameterError("condition (Phi2) needs 0 <= |h1|_1 < 2");
    if (!(a0 > 0.0)) throw ParameterError("a0 must be positive");
    return (2.0 - h1_L1) / (8.0 * a0);
}

double lambda_kappa(double kappa, double traceA, double h0_L1, double h1_L1, double a0) {
    const double den = 4.0 - 2.0 * h1_L1 - 8.0 * kappa * a0;
    if (!(den > 0.0)) throw ParameterError("lambda_kappa: kappa must stay below kappa0");
    if (!(kappa > 0.0)) throw ParameterError("lambda_kappa: kappa must be positive");
    return 2.0 * kappa * traceA + h0_L1 * h0_L1 * kappa / den;
}

double m_kappa_lambda(double kappa, double lambda, double traceA, double h0_L1, double h1_L1, double a0) {
    const double lk = lambda_kappa(kappa, traceA, h0_L1, h1_L1, a0);
    if (!(lambda > 2.0 * lk)) throw ParameterError("m_kappa_lambda: needs lambda > 2 lambda_kappa");
    if (!(lambda > 4.0 * kappa * traceA)) throw ParameterError("m_kappa_lambda: needs lambda > 4 kappa Tr A");
    const double third = h0_L1 == 0.0 ? 0.0 : h0_L1 * h0_L1 * kappa * kappa / (lambda - 4.0 * kappa * traceA);
    const double second = 2.0 * kappa - h1_L1 * kappa - third - 4.0 * a0 * kappa * kappa;
    const double m = std::min(lambda / 2.0, second);
    if (!(m > 0.0)) throw ParameterError("m_kappa_lambda is not positive for these parameters");
    return m;
}

DriftConstants constants_q(double q, double kappa, const NoiseSpec& noise, const NonlinearityModel& model) {
    check_q(q);
    model.validate();
    const double h0 = model.constants.h0;
    const double h1 = model.constants.h1;
    const double a0 = noise.a0();
    const double tr = noise.trace();
    DriftConstants c;
    c.q = q;
    c.kappa = kappa;
    c.kappa0 = kappa0(h1, a0);
    if (!(kappa > 0.0 && kappa < c.kappa0)) throw ParameterError("kappa must lie in (0, kappa0)");
    c.lambda_kappa = lambda_kappa(kappa, tr, h0, h1, a0);
    c.lambda = 2.0 * c.lambda_kappa + 1.0;
    c.m_kappa_lambda = m_kappa_lambda(kappa, c.lambda, tr, h0, h1, a0);
    if (q == 2.0) {
        c.lambda_q_kappa = c.lambda;
        c.m_q_kappa = c.m_kappa_lambda;
        return c;
    }
    // The reaction, noise-cross and trace terms of L V_q are each split by
    // Young's inequality into eps |x'|x|^{q/2-1}|^2 plus a multiple of 1 + |x|_q^q.
    const double eps = (q - 1.0) / (2.0 * (4.0 * kappa + q));
    const double e1 = (q - 1.0) / (q + 1.0);
    const double e2 = (q - 2.0) / (q + 2.0);
    c.epsilon = eps;
    c.young_c1 = std::pow(q, 2.0 * e1) * std::pow(q / (q - 1.0), -e1) * (q + 1.0) / (2.0 * q);
    c.young_c2 = std::pow(q, 2.0 * e2) * std::pow(2.0 * q / (q - 2.0), -e2) * (q + 2.0) / (2.0 * q);
    const double A = noise.opnorm();
    const double cw = q * (q * q * h1 * h1 / (2.0 * eps) +
                           c.young_c1 * std::pow(h0, 2.0 * q / (q + 1.0)) * std::pow(eps, -e1)) +
                      kappa * q * q * q * A * A / eps +
                      q * (q - 1.0) * c.young_c2 * std::pow(tr, 2.0 * q / (q + 2.0)) * std::pow(eps, -e2);
    c.lambda_q_kappa = c.lambda + cw;
    // keeps the inequality strict against both m_{kappa,lambda} and q(q-1)
    c.m_q_kappa = 0.999 * std::min(c.m_kappa_lambda, 2.0 * (q - 1.0) / q);
    return c;
}

DriftConstants constants_for_fraction(double q, double fraction, const NoiseSpec& noise,
                                      const NonlinearityModel& model) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ParameterError("kappa fraction must lie in (0,1)");
    model.validate();
    return constants_q(q, fraction * kappa0(model.constants.h1, noise.a0()), noise, model);
}

double apply_L_to_V(const Basis& basis, const SpectralVector& x, double q, double kappa,
                    const SpectralVector& f, const NoiseSpec& noise) {
    check_state(basis, x);
    check_q(q);
    const std::size_t n = x.size();
    if (noise.modes() < n) throw DimensionError("noise has fewer modes than the state");
    if (f.size() != n) throw DimensionError("drift value and state sizes differ");
    const double e = kappa * dot(x, x);
    if (e > kExpCap) return kInf;
    const double ve = std::exp(e);
    double acc = 0.0;
    if (q == 2.0) {
        for (std::size_t k = 1; k <= n; ++k) {
            const double xk = x[k - 1];
            const double mu = std::numbers::pi * std::numbers::pi * static_cast<double>(k * k);
            acc += 0.5 * noise.alpha(k) * ve * (4.0 * kappa * kappa * xk * xk + 2.0 * kappa);
            acc += (-mu * xk + f[k - 1]) * 2.0 * kappa * ve * xk;
        }
        return acc;
    }
    const GridState s = grid_state(basis, x, q, false);
    const double W = 1.0 + lq_from_state(basis, s);
    const double vq = ve * W;
    thread_local std::vector<double> gk;
    gk.assign(n, 0.0);
    basis.analyze_into(s.g, gk);
    const double w = basis.weight();
    for (std::size_t k = 1; k <= n; ++k) {
        const double xk = x[k - 1];
        const double mu = std::numbers::pi * std::numbers::pi * static_cast<double>(k * k);
        const double grad = 2.0 * kappa * vq * xk + q * ve * gk[k - 1];
        acc += (-mu * xk + f[k - 1]) * grad;
        const double alpha = noise.alpha(k);
        if (alpha == 0.0) continue;
        double sk = 0.0;
        for (std::size_t j = 0; j < s.v.size(); ++j) {
            const double eta = basis.eta(j, k);
            sk += eta * eta * s.pw[j];
        }
        sk *= w;
        const double a = 2.0 * kappa * xk + q * gk[k - 1] / W;
        const double hkk = vq * (a * a + 2.0 * kappa + q * (q - 1.0) * sk / W - q * q * gk[k - 1] * gk[k - 1] / (W * W));
        acc += 0.5 * alpha * hkk;
    }
    return acc;
}

double apply_L_to_V(const Basis& basis, const SpectralVector& x, double q, double kappa,
                    const DriftEvaluator* drift, const NoiseSpec& noise) {
    const SpectralVector f = drift == nullptr ? SpectralVector(x.size()) : (*drift)(x, x.size());
    return apply_L_to_V(basis, x, q, kappa, f, noise);
}

double burgers_pairing(const Basis& basis, const SpectralVector& x, const PsiMap& psi, double q) {
    check_state(basis, x);
    const GridState s = grid_state(basis, x, q, true);
    double acc = 0.0;
    for (std::size_t j = 0; j < s.v.size(); ++j) acc += s.d[j] * psi.d1(s.v[j]) * s.g[j];
    return acc * basis.weight();
}

double drift_inequality_margin(const Basis& basis, const SpectralVector& x, double q, double kappa,
                               double lambda, double m, const DriftEvaluator* drift, const NoiseSpec& noise) {
    const LyapunovParams lp{q, kappa};
    const double th = Theta(basis, x, lp);
    if (!std::isfinite(th)) return kInf;
    const double lv = apply_L_to_V(basis, x, q, kappa, drift, noise);
    return (lambda * V(basis, x, lp) - m * th - lv) / th;
}

MarginSummary drift_inequality_batch(const Basis& basis, const std::vector<SpectralVector>& probes, double q,
                                     double kappa, double lambda, double m, const DriftEvaluator* drift,
                                     const NoiseSpec& noise) {
    MarginSummary s;
    s.min_margin = kInf;
    s.census = probes.size();
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double v = drift_inequality_margin(basis, probes[i], q, kappa, lambda, m, drift, noise);
        if (v < s.min_margin) {
            s.min_margin = v;
            s.argmin = i;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------

SampledSup weighted_norm(const StateFunction& f, const std::vector<SpectralVector>& probes,
                         const Basis& basis, const LyapunovParams& params) {
    SampledSup s;
    s.census = probes.size();
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double v = V(basis, probes[i], params);
        if (!std::isfinite(v)) continue;
        const double r = std::abs(f(probes[i])) / v;
        if (r > s.value) {
            s.value = r;
            s.argmax = i;
        }
    }
    return s;
}

SampledSup lipschitz_seminorm(const StateFunction& f,
                              const std::vector<std::pair<SpectralVector, SpectralVector>>& pairs, int l,
                              const Basis& basis, const LyapunovParams& params) {
    SampledSup s;
    s.census = pairs.size();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [y1, y2] = pairs[i];
        const double den = l2_norm(frac_laplacian_scale(y1 - y2, l));
        if (den == 0.0) continue;
        const double v = std::max(V(basis, y1, params), V(basis, y2, params));
        if (!std::isfinite(v)) continue;
        const double r = std::abs(f(y1) - f(y2)) / (v * den);
        if (r > s.value) {
            s.value = r;
            s.argmax = i;
        }
    }
    return s;
}

std::vector<std::pair<SpectralVector, SpectralVector>> lipschitz_pairs(std::size_t n, std::size_t count,
                                                                       std::uint64_t seed) {
    std::vector<std::pair<SpectralVector, SpectralVector>> out;
    for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
        out.emplace_back(SpectralVector::mode(n, 1, t), SpectralVector::mode(n, 1, -t));
    }
    const auto base = lyapunov_probes(n, count, seed);
    for (std::size_t i = 0; out.size() < count + 4 && i < base.size(); ++i) {
        RandomStream rs(seed ^ 0xa5a5a5a5ULL, i);
        SpectralVector d(n);
        const double scale = std::pow(10.0, -3.0 * rs.uniform());
        for (std::size_t k = 1; k <= n; ++k) d[k - 1] = scale * rs.normal() / static_cast<double>(k);
        out.emplace_back(base[i], base[i] + d);
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

double directional(const DriftMap& f, const SpectralVector& x, const SpectralVector& u, const SpectralVector& v) {
    const double h = 1e-5 * (1.0 + l2_norm(x));
    SpectralVector xp = x, xm = x;
    for (std::size_t k = 0; k < u.size(); ++k) {
        xp[k] += h * u[k];
        xm[k] -= h * u[k];
    }
    return dot(f(xp) - f(xm), v) / (2.0 * h);
}

double form_rhs(const SpectralVector& x, const SpectralVector& y, double epsilon) {
    const double hy = h1_seminorm(y);
    const double hx = h1_seminorm(x);
    return hy * hy + epsilon * hx * hx * dot(y, y);
}

}  // namespace

double form_bound_audit(const DriftMap& f, const SpectralVector& x, const SpectralVector& y, double epsilon) {
    const double yy = dot(y, y);
    if (yy == 0.0) throw ParameterError("form bound audit needs y != 0");
    return (directional(f, x, y, y) - form_rhs(x, y, epsilon)) / yy;
}

double form_bound_audit_e(const DriftMap& f, const SpectralVector& x, const SpectralVector& y, double epsilon) {
    const double yy = dot(y, y);
    if (yy == 0.0) throw ParameterError("form bound audit needs y != 0");
    return (directional(f, x, frac_laplacian_scale(y, -1), frac_laplacian_scale(y, 1)) - form_rhs(x, y, epsilon)) / yy;
}

FormAudit form_bound_batch(const DriftMap& f, const std::vector<std::pair<SpectralVector, SpectralVector>>& samples,
                           double epsilon, bool scaled) {
    FormAudit a;
    a.c_epsilon = -kInf;
    a.census = samples.size();
    for (const auto& [x, y] : samples) {
        const double v = scaled ? form_bound_audit_e(f, x, y, epsilon) : form_bound_audit(f, x, y, epsilon);
        a.c_epsilon = std::max(a.c_epsilon, v);
    }
    return a;
}

}  // namespace kolmo
