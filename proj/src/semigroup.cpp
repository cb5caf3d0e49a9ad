#include "kolmo/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kolmo {

namespace {

IntegratorConfig grid_for(const McConfig& mc, double t) {
    const double steps = std::round(t / mc.dt);
    if (std::abs(t - steps * mc.dt) > 1e-12) throw ParameterError("time is not on the step grid");
    auto total = static_cast<std::uint64_t>(steps);
    if (total % mc.every != 0) throw ParameterError("time is not on the checkpoint grid");
    return IntegratorConfig::uniform(mc.dt, t, mc.every);
}

std::size_t index_of(const std::vector<double>& times, double t) {
    for (std::size_t c = 0; c < times.size(); ++c) {
        if (std::abs(times[c] - t) <= 1e-12) return c;
    }
    throw ParameterError("time is not a checkpoint");
}

// Trapezoid of column j between checkpoints c0 and c1 on path p.
double trapezoid(const ObservedEnsemble& obs, std::size_t p, std::size_t j, std::size_t c0, std::size_t c1) {
    double acc = 0.0;
    for (std::size_t c = c0; c < c1; ++c) {
        acc += 0.5 * (obs.times[c + 1] - obs.times[c]) * (obs.at(p, c, j) + obs.at(p, c + 1, j));
    }
    return acc;
}

Estimate with_param(Estimate e, double param) {
    e.param = param;
    return e;
}

}  // namespace

ObservedEnsemble track(const Integrator& integrator, const std::vector<SpectralVector>& starts, double t,
                       const McConfig& mc, const std::vector<StateFunction>& fns) {
    const IntegratorConfig cfg = grid_for(mc, t);
    const std::size_t copies = starts.size();
    const std::size_t width = fns.size() * copies;
    return observe(
        integrator, starts, mc.paths, cfg, mc.seed, width,
        [&](std::size_t, std::size_t, std::span<const SpectralVector> states, std::span<double> out) {
            for (std::size_t c = 0; c < copies; ++c) {
                for (std::size_t j = 0; j < fns.size(); ++j) out[c * fns.size() + j] = fns[j](states[c]);
            }
        },
        mc.threads);
}

std::vector<double> laplace_weights(const std::vector<double>& times, double lambda) {
    if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
    std::vector<double> w(times.size(), 0.0);
    for (std::size_t c = 0; c + 1 < times.size(); ++c) {
        const double h = times[c + 1] - times[c];
        const double x = lambda * h;
        double i0 = 0.0, i1 = 0.0;
        if (x < 1e-2) {
            // series of int_0^h e^{-lambda s} ds and int_0^h s e^{-lambda s} ds
            i0 = h * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0 + x * x * x * x / 120.0);
            i1 = h * h * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0 + x * x * x * x / 144.0);
        } else {
            i0 = -std::expm1(-x) / lambda;
            i1 = (-std::expm1(-x) - x * std::exp(-x)) / (lambda * lambda);
        }
        const double e = std::exp(-lambda * times[c]);
        w[c] += e * (i0 - i1 / h);
        w[c + 1] += e * i1 / h;
    }
    return w;
}

std::vector<Estimate> pt_curve(const Integrator& integrator, const StateFunction& f, const SpectralVector& x,
                               double t, const McConfig& mc) {
    const auto obs = track(integrator, {x}, t, mc, {f});
    std::vector<Estimate> out;
    std::vector<double> col(obs.paths);
    for (std::size_t c = 0; c < obs.checkpoints; ++c) {
        for (std::size_t p = 0; p < obs.paths; ++p) col[p] = obs.at(p, c, 0);
        out.push_back(with_param(mean_estimate(col), obs.times[c]));
    }
    return out;
}

Estimate pt_estimate(const Integrator& integrator, const StateFunction& f, const SpectralVector& x, double t,
                     const McConfig& mc) {
    if (t == 0.0) {
        Estimate e;
        e.value = f(x);
        e.K = mc.paths;
        return e;
    }
    return pt_curve(integrator, f, x, t, mc).back();
}

ResolventEstimate resolvent_estimate(const Integrator& integrator, const StateFunction& f, const SpectralVector& x,
                                     double lambda, const McConfig& mc, double t_max, double tail_tolerance) {
    if (!(lambda > 0.0)) throw ParameterError("lambda must be positive");
    const double h = mc.dt * static_cast<double>(mc.every);
    if (t_max <= 0.0) t_max = 12.0 / lambda;
    if (t_max < 10.0 / lambda) throw ParameterError("T_max must be at least 10/lambda");
    t_max = std::ceil(t_max / h - 1e-9) * h;
    const auto obs = track(integrator, {x}, t_max, mc, {f});
    const auto w = laplace_weights(obs.times, lambda);
    std::vector<double> per_path(obs.paths, std::numeric_limits<double>::quiet_NaN());
    double sup = 0.0;
    for (std::size_t p = 0; p < obs.paths; ++p) {
        if (obs.diverged[p]) continue;
        double acc = 0.0;
        for (std::size_t c = 0; c < obs.checkpoints; ++c) {
            acc += w[c] * obs.at(p, c, 0);
            sup = std::max(sup, std::abs(obs.at(p, c, 0)));
        }
        per_path[p] = acc;
    }
    ResolventEstimate r;
    r.est = with_param(mean_estimate(per_path), lambda);
    r.t_max = obs.times.back();
    r.tail = std::exp(-lambda * r.t_max) * sup / lambda;
    r.error = 3.0 * r.est.se + r.tail;
    r.flagged = r.tail > tail_tolerance;
    return r;
}

IdentityResiduals identity_residuals(const Integrator& integrator, const std::vector<CylinderFunction>& us,
                                     const std::vector<StateFunction>& weights, const SpectralVector& x, double s,
                                     double t, const McConfig& mc) {
    if (!(s >= 0.0 && s <= t)) throw ParameterError("need 0 <= s <= t");
    const NoiseSpec& noise = integrator.noise();
    const DriftEvaluator* drift = integrator.drift();
    IdentityResiduals res;
    const std::size_t nu = us.size();
    if (t == 0.0) {
        Estimate zero;
        zero.K = mc.paths;
        res.kolmogorov.assign(nu, zero);
        res.qv.assign(nu, zero);
        res.martingale.assign(nu, std::vector<Estimate>(weights.size(), zero));
        return res;
    }
    const IntegratorConfig cfg = grid_for(mc, t);
    const std::size_t width = 3 * nu + weights.size();
    // F_N is evaluated once per visited state and shared by all u
    const auto obs = observe(
        integrator, {x}, mc.paths, cfg, mc.seed, width,
        [&](std::size_t, std::size_t, std::span<const SpectralVector> states, std::span<double> out) {
            const SpectralVector& y = states[0];
            const SpectralVector f = drift == nullptr ? SpectralVector() : (*drift)(y);
            for (std::size_t i = 0; i < nu; ++i) {
                out[3 * i] = us[i].eval(y);
                out[3 * i + 1] = apply_L(us[i], y, f, noise);
                out[3 * i + 2] = carre_du_champ(us[i], y, noise);
            }
            for (std::size_t k = 0; k < weights.size(); ++k) out[3 * nu + k] = weights[k](y);
        },
        mc.threads);
    const std::size_t cs = index_of(obs.times, s);
    const std::size_t ct = obs.checkpoints - 1;
    std::vector<double> col(obs.paths);
    for (std::size_t i = 0; i < nu; ++i) {
        const std::size_t ju = 3 * i, jl = 3 * i + 1, jg = 3 * i + 2;
        for (std::size_t p = 0; p < obs.paths; ++p) {
            col[p] = obs.at(p, ct, ju) - obs.at(p, 0, ju) - trapezoid(obs, p, jl, 0, ct);
        }
        res.kolmogorov.push_back(with_param(mean_estimate(col), t));
        for (std::size_t p = 0; p < obs.paths; ++p) col[p] = col[p] * col[p] - trapezoid(obs, p, jg, 0, ct);
        res.qv.push_back(with_param(mean_estimate(col), t));
        std::vector<Estimate> mart;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            for (std::size_t p = 0; p < obs.paths; ++p) {
                const double m = obs.at(p, ct, ju) - obs.at(p, cs, ju) - trapezoid(obs, p, jl, cs, ct);
                col[p] = m * obs.at(p, cs, 3 * nu + k);
            }
            mart.push_back(with_param(mean_estimate(col), t));
        }
        res.martingale.push_back(std::move(mart));
    }
    return res;
}

Estimate kolmogorov_residual(const Integrator& integrator, const CylinderFunction& u, const SpectralVector& x,
                             double t, const McConfig& mc) {
    return identity_residuals(integrator, {u}, {}, x, 0.0, t, mc).kolmogorov[0];
}

std::vector<Estimate> martingale_residual(const Integrator& integrator, const CylinderFunction& u,
                                          const SpectralVector& x, double s, double t,
                                          const std::vector<StateFunction>& weights, const McConfig& mc) {
    return identity_residuals(integrator, {u}, weights, x, s, t, mc).martingale[0];
}

Estimate qv_residual(const Integrator& integrator, const CylinderFunction& u, const SpectralVector& x, double t,
                     const McConfig& mc) {
    return identity_residuals(integrator, {u}, {}, x, 0.0, t, mc).qv[0];
}

Estimate growth_check(const Integrator& integrator, const SpectralVector& x, double t, const LyapunovParams& params,
                      double lambda, const McConfig& mc) {
    const Basis basis(integrator.modes());
    const double v0 = V(basis, x, params);
    Estimate e;
    if (t == 0.0) {
        e.value = 0.0;
        e.K = mc.paths;
        return e;
    }
    const auto obs = track(integrator, {x}, t, mc, {[&](const SpectralVector& y) { return V(basis, y, params); }});
    std::vector<double> col(obs.paths);
    for (std::size_t p = 0; p < obs.paths; ++p) col[p] = obs.at(p, obs.checkpoints - 1, 0);
    e = mean_estimate(col);
    e.value = std::exp(lambda * t) * v0 - e.value;
    e.param = t;
    return e;
}

ContractionReport contraction_check(const Integrator& integrator, const StateFunction& f,
                                    const std::vector<std::pair<SpectralVector, SpectralVector>>& pairs, double t,
                                    const LyapunovParams& params, double lambda_prime, const McConfig& mc) {
    const Basis basis(integrator.modes());
    ContractionReport rep;
    rep.seminorm = lipschitz_seminorm(f, pairs, 0, basis, params).value;
    rep.bound = std::exp(t * lambda_prime) * rep.seminorm;
    std::vector<double> col(mc.paths);
    for (const auto& [y1, y2] : pairs) {
        const double den = std::max(V(basis, y1, params), V(basis, y2, params)) * l2_norm(y1 - y2);
        double ratio = 0.0, se = 0.0;
        if (den > 0.0 && std::isfinite(den)) {
            const auto obs = track(integrator, {y1, y2}, t, mc, {f});
            for (std::size_t p = 0; p < obs.paths; ++p) {
                col[p] = obs.at(p, obs.checkpoints - 1, 0) - obs.at(p, obs.checkpoints - 1, 1);
            }
            const auto e = mean_estimate(col);
            ratio = std::abs(e.value) / den;
            se = e.se / den;
        }
        rep.ratios.push_back(ratio);
        if (ratio >= rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.max_ratio_se = se;
        }
    }
    rep.flagged = rep.max_ratio > rep.bound + 3.0 * rep.max_ratio_se;
    return rep;
}

double lambda_prime(const DriftConstants& c, const DriftMap& drift,
                    const std::vector<std::pair<SpectralVector, SpectralVector>>& samples) {
    const FormAudit a = form_bound_batch(drift, samples, c.m_q_kappa, false);
    return c.lambda_q_kappa + std::max(0.0, a.c_epsilon);
}

std::vector<double> dissipativity_check(const std::vector<CylinderFunction>& us, double lambda, double m,
                                        const LyapunovParams& params, const std::vector<SpectralVector>& probes,
                                        const DriftEvaluator* drift, const NoiseSpec& noise, const Basis& basis) {
    if (!(m > 0.0)) throw ParameterError("m must be positive");
    std::vector<double> out;
    for (const auto& u : us) {
        double lhs = 0.0, rhs = 0.0;
        for (const auto& x : probes) {
            const double th = Theta(basis, x, params);
            const double v = V(basis, x, params);
            if (!std::isfinite(th)) continue;
            lhs = std::max(lhs, std::abs(lambda * u.eval(x) - apply_L(u, x, drift, noise)) / th);
            rhs = std::max(rhs, std::abs(u.eval(x)) / v);
        }
        out.push_back(lhs / m - rhs);
    }
    return out;
}

std::vector<NConvergenceRow> resolvent_nconvergence(const NonlinearityModel& model, const NoiseSpec& noise,
                                                    const StateFunction& f, const SpectralVector& x, double lambda,
                                                    const std::vector<std::size_t>& levels, const McConfig& mc) {
    std::vector<NConvergenceRow> rows;
    std::vector<std::vector<double>> per_path;
    for (std::size_t n : levels) {
        const RegularizedDrift fn = build_FN(model, noise.resized(n), n);
        const Integrator integ(n, noise.resized(n), mc.dt, fn.eval);
        const double h = mc.dt * static_cast<double>(mc.every);
        const double t_max = std::ceil(12.0 / lambda / h - 1e-9) * h;
        const auto obs = track(integ, {project(x, n)}, t_max, mc, {f});
        const auto w = laplace_weights(obs.times, lambda);
        std::vector<double> v(obs.paths, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t p = 0; p < obs.paths; ++p) {
            if (obs.diverged[p]) continue;
            double acc = 0.0;
            for (std::size_t c = 0; c < obs.checkpoints; ++c) acc += w[c] * obs.at(p, c, 0);
            v[p] = lambda * acc;
        }
        NConvergenceRow row;
        row.n = n;
        row.lambda_g = with_param(mean_estimate(v), lambda);
        rows.push_back(row);
        per_path.push_back(std::move(v));
    }
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        std::vector<double> d(mc.paths);
        for (std::size_t p = 0; p < mc.paths; ++p) d[p] = per_path[i][p] - per_path[i + 1][p];
        const auto e = mean_estimate(d);
        rows[i].diff = std::abs(e.value);
        rows[i].diff_se = e.se;
    }
    return rows;
}

}  // namespace kolmo
