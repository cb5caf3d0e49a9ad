#include "kolmo/checks.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "kolmo/cylinder.hpp"
#include "kolmo/ergodic.hpp"
#include "kolmo/oracle1d.hpp"
#include "kolmo/probes.hpp"
#include "kolmo/rng.hpp"
#include "kolmo/sde.hpp"
#include "kolmo/semigroup.hpp"

namespace kolmo {

using json = nlohmann::ordered_json;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

std::shared_ptr<const Basis> make_basis(const RunConfig& c) { return std::make_shared<const Basis>(c.n, c.m); }

std::shared_ptr<const DriftEvaluator> model_drift(const RunConfig& c) {
    return build_FN(c.nonlinearity(), c.noise(), make_basis(c)).eval;
}

McConfig mc_config(const RunConfig& c, std::size_t paths = 0) {
    McConfig mc;
    mc.paths = paths ? paths : c.paths;
    mc.dt = c.dt;
    mc.every = c.every;
    mc.seed = c.seed;
    mc.threads = c.threads;
    return mc;
}

SpectralVector start_state(const RunConfig& c) {
    SpectralVector x(c.n);
    for (std::size_t k = 0; k < c.start.size(); ++k) x[k] = c.start[k];
    return x;
}

ErgodicConfig ergodic_config(const RunConfig& c) {
    ErgodicConfig e = c.ergodic;
    e.seed = c.seed;
    return e;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::vector<CylinderFunction> trig_members(std::size_t kmax) {
    std::vector<CylinderFunction> us;
    for (std::size_t k = 1; k <= kmax; ++k) {
        auto [a, b] = trig_family(k);
        us.push_back(std::move(a));
        us.push_back(std::move(b));
    }
    return us;
}

std::string member_name(std::size_t i) { return (i % 2 == 0 ? "cos" : "sin") + std::to_string(i / 2 + 1); }

// ---------------------------------------------------------------------------

std::vector<CheckRecord> heat_decay(const RunConfig& c) {
    const std::size_t n = std::max<std::size_t>(c.n, 2);
    const Integrator integ(n, NoiseSpec::zero(n), c.dt);
    const auto steps = std::llround(0.1 / c.dt);
    const double T = static_cast<double>(steps) * c.dt;
    const SpectralVector x0 = SpectralVector::mode(n, 1) + SpectralVector::mode(n, 2);
    IntegratorConfig ic;
    ic.dt = c.dt;
    ic.checkpoints = {T};
    const auto rec = simulate(integ, x0, ic, c.seed);
    double rel = 0.0, rest = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double a = rec.final_state[k - 1];
        if (k <= 2) {
            const double e = std::exp(-kPi2 * static_cast<double>(k * k) * T) * x0[k - 1];
            rel = std::max(rel, std::abs(a - e) / std::abs(e));
        } else {
            rest = std::max(rest, std::abs(a));
        }
    }
    // modes 3..N start at 0 and must stay exactly 0
    return {make_record("heat-decay", "relative-error", std::max(rel, rest), 0.0, 1e-12, Rule::Upper,
                        json{{"N", n}, {"T", T}, {"dt", c.dt}, {"inactive_modes_max", rest}})};
}

std::vector<CheckRecord> ou_statistics(const RunConfig& c) {
    std::vector<CheckRecord> out;
    const NoiseSpec noise = c.noise();
    const Integrator ou(c.n, noise, c.dt);
    const McConfig mc = mc_config(c);
    const SpectralVector x0 = SpectralVector::mode(c.n, 1, 1.0);
    const StateFunction mode1 = [](const SpectralVector& x) { return x[0]; };
    for (double t : {0.05, 0.2}) {
        const auto e = pt_estimate(ou, mode1, x0, t, mc);
        const double target = std::exp(-kPi2 * t);
        out.push_back(make_record("ou-statistics", "transient-mean t=" + fmt(t), e.value - target, e.se, 0.0,
                                  Rule::Residual, json{{"t", t}, {"K", e.K}, {"estimate", e.value}, {"target", target}}));
    }
    const auto path = stationary_path(ou, SpectralVector(c.n), ergodic_config(c));
    const std::size_t B = c.ergodic.batches;
    const auto v1 = ergodic_average([](const SpectralVector& x) { return x[0] * x[0]; }, path, B);
    const double v1_target = noise.alpha(1) / (2.0 * kPi2);
    out.push_back(make_record("ou-statistics", "stationary-variance mode 1", v1.value - v1_target, v1.se, 0.0,
                              Rule::Residual, json{{"estimate", v1.value}, {"target", v1_target}, {"batches", v1.K}}));
    const auto n2 = ergodic_average(
        [](const SpectralVector& x) {
            double s = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * x[k];
            return s;
        },
        path, B);
    double n2_target = 0.0;
    for (std::size_t k = 1; k <= c.n; ++k) n2_target += noise.alpha(k) / (2.0 * kPi2 * static_cast<double>(k * k));
    out.push_back(make_record("ou-statistics", "ergodic |x|^2", n2.value - n2_target, n2.se, 0.0, Rule::Residual,
                              json{{"estimate", n2.value}, {"target", n2_target}, {"batches", n2.K}}));
    return out;
}

std::vector<CheckRecord> constants_check(const RunConfig& c) {
    const auto t = constants_table(c);
    const json p{{"q", c.p}, {"kappa_fraction", c.kappa_fraction}, {"N", c.n}};
    std::vector<CheckRecord> out;
    const std::vector<std::pair<std::string, double>> rows{
        {"a0", t.a0},
        {"trace", t.trace},
        {"trace_truncated", t.trace_truncated},
        {"kappa0", t.c.kappa0},
        {"kappa", t.c.kappa},
        {"lambda_kappa", t.c.lambda_kappa},
        {"lambda", t.c.lambda},
        {"m_kappa_lambda", t.c.m_kappa_lambda},
        {"lambda_q_kappa", t.c.lambda_q_kappa},
        {"m_q_kappa", t.c.m_q_kappa},
    };
    for (const auto& [name, v] : rows) out.push_back(make_record("constants", name, v, 0.0, 0.0, Rule::Finite, p));
    return out;
}

std::vector<double> q_values(const RunConfig& c) {
    std::vector<double> qs{2.0};
    if (c.p != 2.0) qs.push_back(c.p);
    return qs;
}

std::vector<CheckRecord> drift_inequality(const RunConfig& c) {
    std::vector<CheckRecord> out;
    const auto basis = make_basis(c);
    const NoiseSpec noise = c.noise();
    const auto model = c.nonlinearity();
    const auto drift = build_FN(model, noise, basis);
    for (double q : q_values(c)) {
        const auto k = constants_for_fraction(q, c.kappa_fraction, noise, model);
        const double lambda = q == 2.0 ? k.lambda : k.lambda_q_kappa;
        const double m = q == 2.0 ? k.m_kappa_lambda : k.m_q_kappa;
        const auto probes = lyapunov_probes(c.n, 10000, kProbeSeed, k.kappa);
        const auto s = drift_inequality_batch(*basis, probes, q, k.kappa, lambda, m, drift.eval.get(), noise);
        out.push_back(make_record("drift-inequality", "min-margin q=" + fmt(q), s.min_margin, 0.0, 1e-8, Rule::Lower,
                                  json{{"model", model.name},
                                       {"q", q},
                                       {"kappa", k.kappa},
                                       {"lambda", lambda},
                                       {"m", m},
                                       {"census", s.census},
                                       {"argmin", s.argmin}}));
    }
    return out;
}

SpectralVector shifted(const SpectralVector& x, double h, const SpectralVector& u) {
    SpectralVector y = x;
    for (std::size_t k = 0; k < x.size(); ++k) y[k] += h * u[k];
    return y;
}

std::vector<CheckRecord> derivative_identities(const RunConfig& c) {
    std::vector<CheckRecord> out;
    const Basis b(c.n, c.m);
    const auto probes = lyapunov_probes(c.n, 100, kProbeSeed + 11);
    const double kappa = c.kappa();
    for (double q : q_values(c)) {
        const LyapunovParams lp{q, kappa};
        const auto Vx = [&](const SpectralVector& y) { return V(b, y, lp); };
        double worst_g = 0.0, worst_h = 0.0;
        for (std::size_t i = 0; i < probes.size(); ++i) {
            const auto& x = probes[i];
            RandomStream rs(c.seed, i);
            SpectralVector u(c.n), w(c.n);
            for (std::size_t k = 1; k <= c.n; ++k) u[k - 1] = rs.normal() / static_cast<double>(k);
            for (std::size_t k = 1; k <= c.n; ++k) w[k - 1] = rs.normal() / static_cast<double>(k);
            const double v = Vx(x);
            const double g = dot(grad_V(b, x, q, kappa), u);
            const double h1 = 1e-5;
            const double gfd = (Vx(shifted(x, h1, u)) - Vx(shifted(x, -h1, u))) / (2.0 * h1);
            worst_g = std::max(worst_g, std::abs(g - gfd) / std::max(std::abs(g), v * l2_norm(u)));
            const double h2 = 1e-4;
            const double hfd = (Vx(shifted(shifted(x, h2, u), h2, w)) - Vx(shifted(shifted(x, h2, u), -h2, w)) -
                                Vx(shifted(shifted(x, -h2, u), h2, w)) + Vx(shifted(shifted(x, -h2, u), -h2, w))) /
                               (4.0 * h2 * h2);
            const double hv = hess_V_form(b, x, u, w, q, kappa);
            worst_h = std::max(worst_h, std::abs(hv - hfd) / std::max(std::abs(hv), v * l2_norm(u) * l2_norm(w)));
        }
        const json p{{"q", q}, {"kappa", kappa}, {"states", probes.size()}};
        out.push_back(make_record("derivative-identities", "grad_V q=" + fmt(q), worst_g, 0.0, 1e-5, Rule::Upper, p));
        out.push_back(make_record("derivative-identities", "hess_V q=" + fmt(q), worst_h, 0.0, 1e-5, Rule::Upper, p));
    }
    const auto model = c.nonlinearity();
    const PsiMap psi(model.psi.is_zero() ? Polynomial{0.0, 0.0, 0.5} : model.psi);
    for (double q : q_values(c)) {
        double worst = 0.0;
        const double deg = static_cast<double>(psi.polynomial().degree());
        for (const auto& x : lyapunov_probes(c.n, 500, kProbeSeed + 29)) {
            const double scale = 1.0 + std::pow(b.norm_p(x, kNoLevel), q + deg - 1.0);
            worst = std::max(worst, std::abs(burgers_pairing(b, x, psi, q)) / scale);
        }
        out.push_back(make_record("derivative-identities", "transport-pairing q=" + fmt(q), worst, 0.0, 1e-8,
                                  Rule::Upper, json{{"q", q}, {"states", 500}}));
    }
    return out;
}

std::vector<CheckRecord> kolmogorov_check(const RunConfig& c) {
    std::vector<CheckRecord> out;
    const NoiseSpec noise = c.noise();
    const McConfig mc = mc_config(c);
    const SpectralVector x = start_state(c);
    const Integrator ou(c.n, noise, c.dt);
    const auto lin = CylinderFunction::linear(SpectralVector::mode(c.n, 1));
    for (double t : {0.1, 0.5}) {
        const auto e = kolmogorov_residual(ou, lin, x, t, mc);
        out.push_back(make_record("kolmogorov", "ou linear t=" + fmt(t), e.value, e.se, 0.01, Rule::Residual,
                                  json{{"t", t}, {"K", e.K}}));
    }
    const Integrator integ(c.n, noise, c.dt, model_drift(c));
    const auto us = trig_members(3);
    const auto r = identity_residuals(integ, us, {}, x, 0.0, c.t, mc);
    for (std::size_t i = 0; i < us.size(); ++i) {
        const auto& e = r.kolmogorov[i];
        out.push_back(make_record("kolmogorov", c.model + " " + member_name(i), e.value, e.se, 0.02, Rule::Residual,
                                  json{{"model", c.model}, {"t", c.t}, {"K", e.K}}));
    }
    return out;
}

std::vector<CheckRecord> martingale_check(const RunConfig& c) {
    std::vector<CheckRecord> out;
    const Integrator integ(c.n, c.noise(), c.dt, model_drift(c));
    const auto us = trig_members(1);
    const std::vector<StateFunction> ws{
        [](const SpectralVector&) { return 1.0; },
        [](const SpectralVector& x) { return std::cos(x[0]); },
        [](const SpectralVector& x) { return 1.0 / (1.0 + dot(x, x)); },
    };
    const std::vector<std::string> wname{"1", "cos(x1)", "1/(1+|x|^2)"};
    const double s = 0.1, t = 0.3;
    const auto r = identity_residuals(integ, us, ws, start_state(c), s, t, mc_config(c));
    const json p{{"model", c.model}, {"s", s}, {"t", t}, {"K", c.paths}};
    for (std::size_t i = 0; i < us.size(); ++i) {
        for (std::size_t j = 0; j < ws.size(); ++j) {
            const auto& e = r.martingale[i][j];
            out.push_back(make_record("martingale", member_name(i) + " w=" + wname[j], e.value, e.se, 0.02,
                                      Rule::Residual, p));
        }
        out.push_back(make_record("martingale", member_name(i) + " E[M_t]", r.kolmogorov[i].value, r.kolmogorov[i].se,
                                  0.02, Rule::Residual, p));
        out.push_back(make_record("martingale", member_name(i) + " quadratic-variation", r.qv[i].value, r.qv[i].se,
                                  0.02, Rule::Residual, p));
    }
    return out;
}

std::vector<CheckRecord> resolvent_check(const RunConfig& c) {
    std::vector<CheckRecord> out;
    const Integrator ou(c.n, c.noise(), c.dt);
    const McConfig mc = mc_config(c);
    const SpectralVector x = SpectralVector::mode(c.n, 1, c.x0);
    const double lambda = c.lambda;
    const auto one = resolvent_estimate(ou, [](const SpectralVector&) { return 1.0; }, x, lambda, mc);
    out.push_back(make_record("resolvent", "lambda g 1", lambda * one.est.value - 1.0, lambda * one.est.se, 1e-4,
                              Rule::Residual, json{{"lambda", lambda}, {"t_max", one.t_max}, {"tail", one.tail}}));
    const auto lin = resolvent_estimate(ou, [](const SpectralVector& y) { return y[0]; }, x, lambda, mc);
    const double target = c.x0 / (lambda + kPi2);
    out.push_back(make_record("resolvent", "ou linear", lin.est.value - target, lin.est.se, 1e-3, Rule::Residual,
                              json{{"lambda", lambda}, {"estimate", lin.est.value}, {"target", target},
                                   {"tail", lin.tail}, {"flagged", lin.flagged}}));

    const std::vector<std::size_t> levels{8, 16, 32};
    const auto [u, unused] = trig_family(1);
    const StateFunction f = [u = u](const SpectralVector& y) { return u.eval(y); };
    const auto rows = resolvent_nconvergence(c.nonlinearity(), c.noise(32), f, SpectralVector::mode(8, 1, c.x0),
                                             lambda, levels, mc_config(c, c.nconv_paths));
    json diffs = json::array();
    for (const auto& r : rows) diffs.push_back({{"N", r.n}, {"lambda_g", r.lambda_g.value}, {"diff", r.diff}, {"se", r.diff_se}});
    out.push_back(make_record("resolvent", "N-convergence decreasing", rows[1].diff - rows[0].diff,
                              std::hypot(rows[0].diff_se, rows[1].diff_se), 0.0, Rule::Upper,
                              json{{"model", c.model}, {"lambda", lambda}, {"K", c.nconv_paths}, {"rows", diffs}}));
    return out;
}

std::vector<CheckRecord> oracle_check(const RunConfig& c) {
    std::vector<CheckRecord> out;
    const NoiseSpec noise1 = c.noise(1);
    const auto model = c.nonlinearity();
    const auto drift = build_FN(model, noise1, 1).eval;
    const DiscreteResolvent op(Mesh1D::build(noise1.alpha(1), c.oracle_nodes), scalar_drift(drift));
    const Mesh1D& mesh = op.mesh();
    const double lambda = c.oracle_lambda;
    const json base{{"model", c.model}, {"nodes", mesh.size()}, {"R", mesh.R}, {"lambda", lambda}};

    out.push_back(make_record("oracle1d", "m-matrix", op.is_m_matrix() ? 0.0 : 1.0, 0.0, 0.0, Rule::Upper, base));
    const double markov = std::max(markov_residual(op, lambda), markov_residual(op, 0.1));
    out.push_back(make_record("oracle1d", "lambda R 1 = 1", markov, 0.0, 1e-12, Rule::Upper, base));
    const auto fcos = [](double y) { return std::cos(y) + 1.0; };
    const auto fv = mesh.sample(fcos);
    out.push_back(make_record("oracle1d", "resolvent identity", resolvent_identity_residual(op, fv, lambda, 3.0 * lambda),
                              0.0, 1e-10, Rule::Upper, base));

    double violations = 0.0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        RandomStream rs(c.seed, trial);
        std::vector<double> f(mesh.size());
        double sup = 0.0;
        for (double& v : f) sup = std::max(sup, v = rs.uniform() * rs.uniform());
        const double lam = 0.1 + 10.0 * rs.uniform();
        for (double v : op.solve(f, lam)) {
            if (v < 0.0 || lam * v > sup * (1.0 + 1e-12)) violations += 1.0;
        }
    }
    out.push_back(make_record("oracle1d", "positivity", violations, 0.0, 0.0, Rule::Upper, json{{"trials", 20}}));

    // weight V = exp(kappa x^2) with lambda_V from the exact generator at N = 1
    const double kappa = c.kappa_fraction * kappa0(model.constants.h1, noise1.a0());
    const Basis b1(1);
    double lambda_v = -std::numeric_limits<double>::infinity();
    for (double y : mesh.x) {
        const auto s = SpectralVector::mode(1, 1, y);
        lambda_v = std::max(lambda_v, apply_L_to_V(b1, s, 2.0, kappa, drift.get(), noise1) / V(b1, s, {2.0, kappa}));
    }
    const auto Vk = [kappa](double y) { return std::exp(kappa * y * y); };
    for (const auto& [name, f] : std::vector<std::pair<std::string, ScalarMap>>{{"f=cos+1", fcos}, {"f=V", Vk}}) {
        const auto r = weighted_bound_check(op, f, lambda_v + lambda, Vk, lambda_v);
        json p = base;
        p["kappa"] = kappa;
        p["lambda_V"] = r.lambda_v;
        p["condition_margin"] = r.condition_margin;
        if (r.skipped) p["diagnostic"] = r.diagnostic;
        out.push_back(make_record("oracle1d", "weighted bound " + name,
                                  r.skipped ? -std::numeric_limits<double>::infinity() : r.margin, 0.0, 1e-10,
                                  Rule::Lower, p));
    }

    const auto dV = [kappa](double y) { return 2.0 * kappa * y * std::exp(kappa * y * y); };
    const auto d2V = [kappa](double y) { return (2.0 * kappa + 4.0 * kappa * kappa * y * y) * std::exp(kappa * y * y); };
    const double rate = gradient_weight_rate(op, Vk, dV, d2V);
    const double glam = std::max(lambda, rate + 1.0);
    const auto g = gradient_bound_check(op, fcos, glam, Vk, rate, Vk(mesh.R / 2.0));
    json gp = base;
    gp["lambda"] = glam;
    gp["lambda_V1"] = rate;
    out.push_back(make_record("oracle1d", "gradient bound", g.rhs - g.lhs, 0.0, g.tolerance, Rule::Lower, gp));
    out.push_back(make_record("oracle1d", "difference quotients", g.quotient_gap, 0.0, g.quotient_tolerance,
                              Rule::Upper, json{{"quotient_sup", g.quotient_sup}, {"gradient_sup", g.gradient_sup}}));

    const auto ou_error = [&](std::size_t n) {
        const DiscreteResolvent o(Mesh1D::build(noise1.alpha(1), n));
        const auto u = o.solve([](double y) { return y; }, lambda);
        double e = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double y = o.mesh().x[i];
            if (std::abs(y) <= o.mesh().R / 2.0) e = std::max(e, std::abs(u[i] - y / (lambda + kPi2)));
        }
        return e;
    };
    const double e1 = ou_error(c.oracle_nodes), e2 = ou_error(2 * c.oracle_nodes - 1);
    out.push_back(make_record("oracle1d", "mesh order h^2", std::log(e1 / e2 / 4.0), 0.0, std::log(1.5),
                              Rule::Residual, json{{"error_h", e1}, {"error_h/2", e2}, {"ratio", e1 / e2}}));

    const auto cv = cross_validate(fcos, c.oracle_x0, lambda, noise1, drift, mc_config(c), c.oracle_nodes);
    out.push_back(make_record("oracle1d", "cross-validation", cv.discrepancy, cv.mc.est.se, 1e-3, Rule::Residual,
                              json{{"x0", c.oracle_x0},
                                   {"oracle", cv.oracle},
                                   {"mc", cv.mc.est.value},
                                   {"K", cv.mc.est.K},
                                   {"tail", cv.mc.tail}}));
    return out;
}

std::vector<CheckRecord> invariant_measure(const RunConfig& c) {
    std::vector<CheckRecord> out;
    const NoiseSpec noise = c.noise();
    const auto model = c.nonlinearity();
    const Integrator integ(c.n, noise, c.dt, model_drift(c));
    const auto path = stationary_path(integ, start_state(c), ergodic_config(c));
    const std::size_t B = c.ergodic.batches;
    const json p{{"model", c.model}, {"horizon", c.ergodic.horizon}, {"samples", path.samples.size()}};
    const auto us = trig_members(3);
    for (std::size_t i = 0; i < us.size(); ++i) {
        const auto e = stationarity_residual(us[i], path, integ, B);
        out.push_back(make_record("invariant-measure", "stationarity " + member_name(i), e.value, e.se, 0.01,
                                  Rule::Residual, p));
    }
    const StateFunction f = [u = us[0]](const SpectralVector& y) { return u.eval(y); };
    const auto inv = invariance_residual(f, 0.2, path, integ, 10, c.seed ^ 0x1a7a1a7aULL, c.threads);
    out.push_back(make_record("invariant-measure", "invariance cos1 t=0.2", inv.value, inv.se, 0.01, Rule::Residual,
                              json{{"t", 0.2}, {"starts", path.samples.size() / 10}}));
    const auto k = constants_for_fraction(2.0, c.kappa_fraction, noise, model);
    const auto th = theta_moment_check(path, LyapunovParams{2.0, k.kappa}, k.lambda, k.m_kappa_lambda, B);
    const json tp{{"kappa", k.kappa},
                  {"lambda", k.lambda},
                  {"m", k.m_kappa_lambda},
                  {"estimate", th.estimate.value},
                  {"bound", th.bound},
                  {"bound_estimated", th.bound_estimated}};
    out.push_back(make_record("invariant-measure", "Theta moment finite", th.estimate.value, th.estimate.se, 0.0,
                              Rule::Finite, tp));
    out.push_back(make_record("invariant-measure", "Theta moment bound", th.estimate.value / th.bound - 1.0,
                              th.estimate.se / th.bound, 0.0, Rule::Upper, tp));
    return out;
}

std::vector<CheckRecord> regularization(const RunConfig& c) {
    std::vector<CheckRecord> out;
    const double level = static_cast<double>(c.n);
    RandomStream rs(c.seed, 0);
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100000; ++i) {
        const double a = 20.0 * rs.normal(), b = 20.0 * rs.normal();
        const double d = std::abs(truncate_level(a, level) - truncate_level(b, level)) - std::abs(a - b);
        worst = std::max(worst, d / std::max(1.0, std::abs(a - b)));
    }
    out.push_back(make_record("regularization", "truncation contraction", worst, 0.0, 1e-15, Rule::Upper,
                              json{{"pairs", 100000}, {"level", level}}));

    double moll = 0.0;
    for (double cst : {-3.0, 1.0, 2.5}) {
        const ReactionMap m = mollify_phi(ReactionMap(Polynomial{cst}), 0.5);
        for (double r = 0.05; r < 1.0; r += 0.1) {
            for (double x = -5.0; x <= 5.0; x += 0.5) moll = std::max(moll, std::abs(m.value(r, x) - cst) / std::abs(cst));
        }
    }
    out.push_back(make_record("regularization", "mollifier constants", moll, 0.0, 1e-15, Rule::Upper,
                              json{{"beta", 0.5}}));

    const std::vector<std::size_t> levels{4, 8, 16, 32};
    const auto rep = convergence_report(c.nonlinearity(), c.noise(32), levels, probe_ball(48, 40, 10.0, 5, 2.0));
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        out.push_back(make_record("regularization", "convergence N=" + std::to_string(rep.rows[i].n),
                                  rep.rows[i].sup - 1.1 * rep.rows[i - 1].sup, 0.0, 0.0, Rule::Upper,
                                  json{{"model", c.model}, {"sup", rep.rows[i].sup}, {"previous", rep.rows[i - 1].sup}}));
    }
    return out;
}

const std::vector<std::pair<std::string, CheckFn>>& registry() {
    static const std::vector<std::pair<std::string, CheckFn>> r{
        {"heat-decay", heat_decay},
        {"ou-statistics", ou_statistics},
        {"constants", constants_check},
        {"drift-inequality", drift_inequality},
        {"derivative-identities", derivative_identities},
        {"kolmogorov", kolmogorov_check},
        {"martingale", martingale_check},
        {"resolvent", resolvent_check},
        {"oracle1d", oracle_check},
        {"invariant-measure", invariant_measure},
        {"regularization", regularization},
    };
    return r;
}

std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string csv_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string rule_name(Rule r) {
    switch (r) {
        case Rule::Residual: return "residual";
        case Rule::Upper: return "upper";
        case Rule::Lower: return "lower";
        case Rule::Finite: return "finite";
    }
    return "?";
}

bool record_passes(Rule rule, double value, double se, double tolerance) {
    const double slack = 3.0 * se + tolerance;
    switch (rule) {
        case Rule::Residual: return std::abs(value) <= slack;
        case Rule::Upper: return value <= slack;
        case Rule::Lower: return value >= -slack;
        case Rule::Finite: return std::isfinite(value);
    }
    return false;
}

CheckRecord make_record(std::string check, std::string item, double value, double se, double tolerance, Rule rule,
                        json params) {
    CheckRecord r;
    r.check = std::move(check);
    r.item = std::move(item);
    r.params = std::move(params);
    r.value = value;
    r.se = se;
    r.tolerance = tolerance;
    r.rule = rule;
    r.pass = record_passes(rule, value, se, tolerance);
    return r;
}

std::vector<std::string> check_names() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : registry()) names.push_back(name);
    return names;
}

bool is_check(const std::string& name) {
    const auto names = check_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<CheckRecord> run_check(const std::string& name, const RunConfig& config) {
    for (const auto& [n, fn] : registry()) {
        if (n == name) return fn(config);
    }
    throw ConfigError("unknown check '" + name + "'");
}

bool Report::all_pass() const {
    return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; });
}

Report run_checks(const RunConfig& config) {
    config.validate();
    const auto names = config.checks.empty() ? check_names() : config.checks;
    for (const auto& n : names) {
        if (!is_check(n)) throw ConfigError("field 'checks': unknown check '" + n + "'");
    }
    Report rep;
    for (const auto& n : names) {
        auto recs = run_check(n, config);
        rep.records.insert(rep.records.end(), recs.begin(), recs.end());
    }
    return rep;
}

json report_json(const Report& report, const RunConfig& config) {
    json arr = json::array();
    for (const auto& r : report.records) {
        json params = r.params;
        params["seed"] = config.seed;
        params["seed_source"] = config.seed_from_env ? "KOLMO_SEED" : "config";
        arr.push_back({{"check", r.check},
                       {"item", r.item},
                       {"params", params},
                       {"value", number_or_null(r.value)},
                       {"se", number_or_null(r.se)},
                       {"tolerance", r.tolerance},
                       {"rule", rule_name(r.rule)},
                       {"pass", r.pass}});
    }
    return arr;
}

void write_check_csv(const std::vector<CheckRecord>& records, std::ostream& out) {
    out << "check,item,value,se,tolerance,rule,pass\n";
    for (const auto& r : records) {
        out << csv_text(r.check) << ',' << csv_text(r.item) << ',' << csv_number(r.value) << ',' << csv_number(r.se)
            << ',' << csv_number(r.tolerance) << ',' << rule_name(r.rule) << ',' << (r.pass ? "true" : "false") << '\n';
    }
}

std::string write_report(const Report& report, const RunConfig& config) {
    namespace fs = std::filesystem;
    const fs::path dir(config.output);
    fs::create_directories(dir);
    const fs::path file = dir / "report.json";
    {
        std::ofstream out(file);
        out << report_json(report, config).dump(2) << '\n';
        if (!out) throw std::runtime_error("cannot write " + file.string());
    }
    std::map<std::string, std::vector<CheckRecord>> by_check;
    std::vector<std::string> order;
    for (const auto& r : report.records) {
        if (!by_check.count(r.check)) order.push_back(r.check);
        by_check[r.check].push_back(r);
    }
    for (const auto& name : order) {
        std::ofstream out(dir / (name + ".csv"));
        write_check_csv(by_check[name], out);
    }
    return file.string();
}

ConstantsTable constants_table(const RunConfig& config) {
    ConstantsTable t;
    const NoiseSpec noise = config.noise();
    t.a0 = noise.a0();
    t.trace = noise.trace();
    t.trace_truncated = noise.trace_truncated();
    t.c = constants_for_fraction(config.p, config.kappa_fraction, noise, config.nonlinearity());
    return t;
}

void print_constants(const ConstantsTable& t, const RunConfig& config, std::ostream& out) {
    out << std::setprecision(12);
    out << "model            " << config.model << "\n";
    out << "N                " << config.n << "\n";
    out << "q                " << t.c.q << "\n";
    out << "kappa/kappa0     " << config.kappa_fraction << "\n";
    out << "a0               " << t.a0 << "\n";
    out << "TrA              " << t.trace << "\n";
    out << "TrA_N            " << t.trace_truncated << "\n";
    out << "kappa0           " << t.c.kappa0 << "\n";
    out << "kappa            " << t.c.kappa << "\n";
    out << "lambda_kappa     " << t.c.lambda_kappa << "\n";
    out << "lambda           " << t.c.lambda << "\n";
    out << "m_kappa_lambda   " << t.c.m_kappa_lambda << "\n";
    out << "lambda_q_kappa   " << t.c.lambda_q_kappa << "\n";
    out << "m_q_kappa        " << t.c.m_q_kappa << "\n";
}

}  // namespace kolmo
