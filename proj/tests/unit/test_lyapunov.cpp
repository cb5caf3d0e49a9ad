#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kolmo/drift.hpp"
#include "kolmo/lyapunov.hpp"
#include "kolmo/probes.hpp"
#include "kolmo/rng.hpp"

using namespace kolmo;
using std::numbers::pi;

namespace {

SpectralVector random_direction(std::size_t n, std::uint64_t seed, std::uint64_t i) {
    RandomStream rs(seed, i);
    SpectralVector d(n);
    for (std::size_t k = 1; k <= n; ++k) d[k - 1] = rs.normal() / static_cast<double>(k);
    return d;
}

SpectralVector shifted(const SpectralVector& x, double h, const SpectralVector& u) {
    SpectralVector y = x;
    for (std::size_t k = 0; k < x.size(); ++k) y[k] += h * u[k];
    return y;
}

double fd_first(const Basis& b, const SpectralVector& x, const SpectralVector& u, const LyapunovParams& lp,
                double h) {
    return (V(b, shifted(x, h, u), lp) - V(b, shifted(x, -h, u), lp)) / (2.0 * h);
}

double fd_second(const Basis& b, const SpectralVector& x, const SpectralVector& u, const SpectralVector& v,
                 const LyapunovParams& lp, double h) {
    const auto pp = shifted(shifted(x, h, u), h, v);
    const auto pm = shifted(shifted(x, h, u), -h, v);
    const auto mp = shifted(shifted(x, -h, u), h, v);
    const auto mm = shifted(shifted(x, -h, u), -h, v);
    return (V(b, pp, lp) - V(b, pm, lp) - V(b, mp, lp) + V(b, mm, lp)) / (4.0 * h * h);
}

// Richardson-extrapolated second difference along a single direction.
double fd_diag(const Basis& b, const SpectralVector& x, const SpectralVector& u, const LyapunovParams& lp,
               double h) {
    auto d2 = [&](double s) {
        return (V(b, shifted(x, s, u), lp) - 2.0 * V(b, x, lp) + V(b, shifted(x, -s, u), lp)) / (s * s);
    };
    return (4.0 * d2(h / 2.0) - d2(h)) / 3.0;
}

}  // namespace

TEST_CASE("weights V and Theta") {
    const Basis b(8);
    const SpectralVector zero(8);
    const SpectralVector e1 = SpectralVector::mode(8, 1);
    CHECK(V(b, zero, {2.0, 0.3}) == 1.0);
    CHECK(V(b, zero, {4.0, 0.3}) == 1.0);
    CHECK(Theta(b, zero, {2.0, 0.3}) == 1.0);
    CHECK(Theta(b, zero, {4.0, 0.3}) == 1.0);
    CHECK(V(b, e1, {2.0, 0.5}) == doctest::Approx(std::exp(0.5)).epsilon(1e-14));

    // |eta_1|_4^4 = 4 int sin^4 = 3/2, checked by midpoint quadrature first
    double q4 = 0.0;
    const int nq = 100000;
    for (int i = 0; i < nq; ++i) q4 += 4.0 * std::pow(std::sin(pi * (i + 0.5) / nq), 4);
    q4 /= nq;
    CHECK(q4 == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(V(b, e1, {4.0, 0.1}) == doctest::Approx(std::exp(0.1) * (1.0 + q4)).epsilon(1e-12));

    CHECK(Theta(b, e1, {2.0, 0.1}) == doctest::Approx(std::exp(0.1) * (1.0 + pi * pi)).epsilon(1e-12));
    CHECK(Theta(b, e1, {2.0, 0.1}) == doctest::Approx(12.0129).epsilon(1e-5));

    // p = 4, x = eta_1: int |x|^2 x'^2 = 4 pi^2 int sin^2 cos^2 = pi^2/2
    const double theta4 = std::exp(0.1) * (2.5 * (1.0 + pi * pi) + 4.0 * pi * pi / 2.0);
    CHECK(Theta(b, e1, {4.0, 0.1}) == doctest::Approx(theta4).epsilon(1e-10));

    SUBCASE("Theta >= V >= 1") {
        const auto probes = lyapunov_probes(8, 1000, 3);
        for (double p : {2.0, 3.0, 4.0}) {
            for (const auto& x : probes) {
                const LyapunovParams lp{p, 0.2};
                const double v = V(b, x, lp);
                CHECK(v >= 1.0);
                CHECK(Theta(b, x, lp) >= v);
            }
        }
    }
    SUBCASE("overflow sentinel") {
        const SpectralVector big = SpectralVector::mode(8, 1, 100.0);
        CHECK(std::isinf(V(b, big, {2.0, 0.1})));
        CHECK(std::isinf(Theta(b, big, {4.0, 0.1})));
    }
    CHECK_THROWS_AS(V(b, e1, {1.5, 0.1}), ParameterError);
}

TEST_CASE("derivatives of V") {
    const std::size_t n = 8;
    const Basis b(n);
    const NoiseSpec noise = NoiseSpec::power_law(n, 1.0, 2.0);
    const double k0 = kappa0(0.0, noise.a0());
    const auto probes = lyapunov_probes(n, 100, 11);

    CHECK(l2_norm(grad_V(b, SpectralVector(n), 2.0, 0.1)) == 0.0);
    CHECK(l2_norm(grad_V(b, SpectralVector(n), 4.0, 0.1)) == 0.0);
    const SpectralVector e1 = SpectralVector::mode(n, 1);
    CHECK(hess_V_form(b, SpectralVector(n), e1, e1, 2.0, 0.3) == doctest::Approx(0.6).epsilon(1e-14));

    for (double q : {2.0, 4.0}) {
        for (double kappa : {0.1, 0.5 * k0}) {
            CAPTURE(q);
            CAPTURE(kappa);
            const LyapunovParams lp{q, kappa};
            double worst_g = 0.0, worst_h = 0.0, worst_sym = 0.0;
            for (std::size_t i = 0; i < probes.size(); ++i) {
                const auto& x = probes[i];
                const auto u = random_direction(n, 21, i);
                const auto w = random_direction(n, 22, i);
                const double v = V(b, x, lp);
                const double scale = l2_norm(u) * l2_norm(w);

                const double g = dot(grad_V(b, x, q, kappa), u);
                const double gfd = fd_first(b, x, u, lp, 1e-5);
                worst_g = std::max(worst_g, std::abs(g - gfd) / std::max(std::abs(g), v * l2_norm(u)));

                const double h = hess_V_form(b, x, u, w, q, kappa);
                const double hfd = fd_second(b, x, u, w, lp, 1e-4);
                worst_h = std::max(worst_h, std::abs(h - hfd) / std::max(std::abs(h), v * scale));
                worst_sym = std::max(worst_sym, std::abs(h - hess_V_form(b, x, w, u, q, kappa)) / (v * scale));
            }
            CHECK(worst_g < 1e-6);
            CHECK(worst_h < 1e-5);
            CHECK(worst_sym < 1e-13);
        }
    }

    // q = 4, x = eta_1: pairing with eta_1
    const LyapunovParams lp4{4.0, 0.1};
    CHECK(dot(grad_V(b, e1, 4.0, 0.1), e1) == doctest::Approx(fd_first(b, e1, e1, lp4, 1e-5)).epsilon(1e-6));
}

TEST_CASE("closed-form constants") {
    // a0 for alpha_k = 1 is the sup over modes of 1/(pi k)^2
    double a0 = 0.0;
    for (int k = 1; k <= 1000; ++k) a0 = std::max(a0, 1.0 / (pi * pi * k * k));
    CHECK(kappa0(0.0, a0) == doctest::Approx(pi * pi / 4.0).epsilon(1e-14));
    CHECK(kappa0(0.0, a0) == doctest::Approx(2.467401).epsilon(1e-6));
    CHECK(kappa0(1.0, 1.0) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(kappa0(2.0 - 1e-12, 1.0) < 1e-12);
    CHECK(kappa0(2.0 - 1e-12, 1.0) > 0.0);
    CHECK_THROWS_AS(kappa0(2.0, 1.0), ParameterError);

    const double tr = pi * pi / 6.0;
    CHECK(lambda_kappa(1.0, tr, 0.0, 0.0, 1.0 / (pi * pi)) == doctest::Approx(pi * pi / 3.0).epsilon(1e-14));
    CHECK(lambda_kappa(1.0, tr, 1.0, 0.0, 1.0 / (pi * pi)) == doctest::Approx(3.603404).epsilon(1e-6));
    CHECK(lambda_kappa(1.0, tr, 1.0, 0.0, 1.0 / (pi * pi)) ==
          doctest::Approx(pi * pi / 3.0 + 1.0 / (4.0 - 8.0 / (pi * pi))).epsilon(1e-14));
    CHECK(lambda_kappa(1e-12, tr, 1.0, 0.0, 1.0) > 0.0);
    CHECK(lambda_kappa(1e-12, tr, 1.0, 0.0, 1.0) < 1e-11);
    CHECK_THROWS_AS(lambda_kappa(1.0, tr, 0.0, 0.0, 0.5), ParameterError);

    CHECK(m_kappa_lambda(1.0, 8.0, tr, 0.0, 0.0, 1.0 / (pi * pi)) == doctest::Approx(1.594715).epsilon(1e-6));
    CHECK(m_kappa_lambda(1.0, 8.0, tr, 0.0, 0.0, 1.0 / (pi * pi)) ==
          doctest::Approx(2.0 - 4.0 / (pi * pi)).epsilon(1e-14));
    CHECK(m_kappa_lambda(0.5, 1e12, tr, 1.0, 0.5, 0.1) == doctest::Approx(1.0 - 0.25 - 0.1).epsilon(1e-9));
    CHECK_THROWS_AS(m_kappa_lambda(1.0, 5.0, tr, 0.0, 0.0, 1.0 / (pi * pi)), ParameterError);

    const NoiseSpec noise = NoiseSpec::power_law(16, 1.0, 2.0);
    for (const auto& name : preset_names()) {
        const auto model = NonlinearityModel::preset(name);
        for (double q : {2.0, 3.0, 4.0, 6.0}) {
            CAPTURE(name);
            CAPTURE(q);
            const auto c = constants_for_fraction(q, 0.5, noise, model);
            CHECK(c.kappa == doctest::Approx(0.5 * c.kappa0));
            CHECK(c.lambda == doctest::Approx(2.0 * c.lambda_kappa + 1.0));
            CHECK(c.m_kappa_lambda > 0.0);
            CHECK(c.lambda_q_kappa > 2.0 * c.lambda_kappa);
            CHECK(c.m_q_kappa > 0.0);
            CHECK(c.m_q_kappa <= c.m_kappa_lambda);
            if (q > 2.0) {
                CHECK(c.m_q_kappa < q * (q - 1.0));
                CHECK(c.m_q_kappa < c.m_kappa_lambda);
                CHECK(c.epsilon == doctest::Approx((q - 1.0) / (2.0 * (4.0 * c.kappa + q))));
            }
        }
    }
    CHECK_THROWS_AS(constants_for_fraction(2.0, 1.0, noise, NonlinearityModel::preset("burgers")), ParameterError);
}

TEST_CASE("exact generator on V") {
    const std::size_t n = 8;
    const Basis b(n);
    const NoiseSpec noise = NoiseSpec::power_law(n, 1.0, 2.0);
    const SpectralVector zero(n);

    CHECK(apply_L_to_V(b, zero, 2.0, 0.3, nullptr, noise) ==
          doctest::Approx(0.3 * noise.trace_truncated()).epsilon(1e-14));
    CHECK(apply_L_to_V(b, zero, 4.0, 0.3, nullptr, noise) ==
          doctest::Approx(0.3 * noise.trace_truncated()).epsilon(1e-14));

    const NoiseSpec silent = NoiseSpec::zero(n);
    for (const auto& x : lyapunov_probes(n, 50, 5)) {
        const double h = h1_seminorm(x);
        CHECK(apply_L_to_V(b, x, 2.0, 0.2, nullptr, silent) ==
              doctest::Approx(-2.0 * 0.2 * h * h * V(b, x, {2.0, 0.2})).epsilon(1e-12));
    }

    const auto drift = build_FN(NonlinearityModel::preset("mixed"), noise, std::make_shared<const Basis>(n));
    const auto probes = lyapunov_probes(n, 100, 17);
    for (double q : {2.0, 4.0}) {
        for (double kappa : {0.1, 1.0}) {
            CAPTURE(q);
            CAPTURE(kappa);
            const LyapunovParams lp{q, kappa};
            double worst = 0.0;
            for (const auto& x : probes) {
                const SpectralVector f = (*drift.eval)(x);
                double fd = 0.0, scale = 0.0;
                for (std::size_t k = 1; k <= n; ++k) {
                    const auto e = SpectralVector::mode(n, k);
                    const double mu = pi * pi * static_cast<double>(k * k);
                    const double d1 = fd_first(b, x, e, lp, 1e-5);
                    const double d2 = fd_diag(b, x, e, lp, 1e-3);
                    const double t1 = 0.5 * noise.alpha(k) * d2;
                    const double t2 = (-mu * x[k - 1] + f[k - 1]) * d1;
                    fd += t1 + t2;
                    scale += std::abs(t1) + std::abs(t2);
                }
                const double exact = apply_L_to_V(b, x, q, kappa, drift.eval.get(), noise);
                worst = std::max(worst, std::abs(exact - fd) / scale);
            }
            CHECK(worst < 1e-5);
        }
    }
}

TEST_CASE("transport pairing vanishes") {
    const std::size_t n = 16;
    const Basis b(n);
    const PsiMap burgers(Polynomial{0.0, 0.0, 0.5});
    const PsiMap cubic(Polynomial{0.0, 0.0, 0.0, 0.0, 1.0});
    for (double q : {2.0, 4.0}) {
        double worst = 0.0;
        for (const auto& x : lyapunov_probes(n, 500, 29)) {
            const double bound = 1.0 + std::pow(b.norm_p(x, kNoLevel), q);
            worst = std::max(worst, std::abs(burgers_pairing(b, x, burgers, q)) / bound);
            worst = std::max(worst, std::abs(burgers_pairing(b, x, cubic, q)) /
                                        (1.0 + std::pow(b.norm_p(x, kNoLevel), q + 3.0)));
        }
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("drift inequalities") {
    const std::size_t n = 16;
    const NoiseSpec noise = NoiseSpec::power_law(n, 1.0, 2.0);
    const auto basis = std::make_shared<const Basis>(n);
    const Basis& b = *basis;

    SUBCASE("Burgers with coercivity, q = 2") {
        const auto model = NonlinearityModel::preset("burgers");
        const auto c = constants_for_fraction(2.0, 0.5, noise, model);
        const auto drift = build_FN(model, noise, basis);
        const auto probes = lyapunov_probes(n, 10000, kProbeSeed, c.kappa);
        const auto s = drift_inequality_batch(b, probes, 2.0, c.kappa, c.lambda, c.m_kappa_lambda,
                                              drift.eval.get(), noise);
        CHECK(s.census == 10000);
        CHECK(s.min_margin >= -1e-8);
        // at x = 0 only the trace term of L V survives
        const double m0 = drift_inequality_margin(b, SpectralVector(n), 2.0, c.kappa, c.lambda, c.m_kappa_lambda,
                                                  drift.eval.get(), noise);
        CHECK(m0 == doctest::Approx(c.lambda - c.m_kappa_lambda - c.kappa * noise.trace_truncated()));
        CHECK(m0 >= 0.0);
    }
    SUBCASE("q = 4 for every preset") {
        for (const auto& name : preset_names()) {
            CAPTURE(name);
            const auto model = NonlinearityModel::preset(name);
            const auto c = constants_for_fraction(4.0, 0.5, noise, model);
            const auto drift = build_FN(model, noise, basis);
            const auto probes = lyapunov_probes(n, 2000, kProbeSeed, c.kappa);
            const auto s = drift_inequality_batch(b, probes, 4.0, c.kappa, c.lambda_q_kappa, c.m_q_kappa,
                                                  drift.eval.get(), noise);
            CHECK(s.min_margin >= -1e-8);
        }
    }
    SUBCASE("L V_kappa <= lambda_kappa V_kappa for every preset") {
        for (const auto& name : preset_names()) {
            CAPTURE(name);
            const auto model = NonlinearityModel::preset(name);
            const auto c = constants_for_fraction(2.0, 0.5, noise, model);
            const auto drift = build_FN(model, noise, basis);
            const auto probes = lyapunov_probes(n, 10000, kProbeSeed + 1, c.kappa);
            const auto s = drift_inequality_batch(b, probes, 2.0, c.kappa, c.lambda_kappa, 0.0, drift.eval.get(),
                                                  noise);
            CHECK(s.min_margin >= -1e-8);
        }
    }
    SUBCASE("linear case without noise") {
        const NoiseSpec silent = NoiseSpec::zero(n);
        const double kappa = 0.4, lambda = 1.0, m = 0.8;
        for (const auto& x : lyapunov_probes(n, 500, 2)) {
            const LyapunovParams lp{2.0, kappa};
            const double h = h1_seminorm(x);
            const double expect = (lambda * V(b, x, lp) - m * Theta(b, x, lp) + 2.0 * kappa * h * h * V(b, x, lp)) /
                                  Theta(b, x, lp);
            const double got = drift_inequality_margin(b, x, 2.0, kappa, lambda, m, nullptr, silent);
            CHECK(got == doctest::Approx(expect).epsilon(1e-10));
            CHECK(got >= 0.0);
        }
    }
}

TEST_CASE("weighted norms and Lipschitz seminorms") {
    const std::size_t n = 8;
    const Basis b(n);
    const LyapunovParams lp{2.0, 0.2};
    const auto probes = lyapunov_probes(n, 300, 8);
    const SpectralVector e1 = SpectralVector::mode(n, 1);

    CHECK(weighted_norm([](const SpectralVector&) { return 0.0; }, probes, b, lp).value == 0.0);
    CHECK(weighted_norm([](const SpectralVector&) { return 1.0; }, probes, b, lp).value == 1.0);
    const auto vn = weighted_norm([&](const SpectralVector& x) { return V(b, x, lp); }, probes, b, lp);
    CHECK(vn.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(vn.census == 300);

    const auto pairs = lipschitz_pairs(n, 200, 4);
    CHECK(lipschitz_seminorm([](const SpectralVector&) { return 3.0; }, pairs, 0, b, lp).value == 0.0);
    const auto lin = [&](const SpectralVector& x) { return dot(e1, x); };
    const double l0 = lipschitz_seminorm(lin, pairs, 0, b, lp).value;
    CHECK(l0 <= 1.0 + 1e-12);
    CHECK(l0 >= 1.0 - 1e-6);
    const double l1 = lipschitz_seminorm(lin, pairs, 1, b, lp).value;
    CHECK(l1 <= pi * (1.0 + 1e-12));
    CHECK(l1 >= pi * (1.0 - 1e-6));
}

TEST_CASE("form bound audits") {
    const std::size_t n = 16;
    const NoiseSpec noise = NoiseSpec::power_law(2 * n, 1.0, 2.0);

    std::vector<std::pair<SpectralVector, SpectralVector>> samples;
    const auto xs = lyapunov_probes(n, 1000, 31);
    for (std::size_t i = 0; i < xs.size(); ++i) samples.emplace_back(xs[i], random_direction(n, 32, i));

    const DriftMap zero = [](const SpectralVector& x) { return SpectralVector(x.size()); };
    const DriftMap minus = [](const SpectralVector& x) { return -1.0 * x; };
    for (bool scaled : {false, true}) {
        CAPTURE(scaled);
        CHECK(form_bound_batch(zero, samples, 0.5, scaled).c_epsilon <= 0.0);
        CHECK(form_bound_batch(minus, samples, 0.5, scaled).c_epsilon <= -1.0 + 1e-9);
    }

    const auto model = NonlinearityModel::preset("burgers");
    const auto f1 = build_FN(model, noise, n);
    const auto f2 = build_FN(model, noise, 2 * n);
    const DriftMap d1 = [&](const SpectralVector& x) { return (*f1.eval)(x); };
    const DriftMap d2 = [&](const SpectralVector& x) { return (*f2.eval)(project(x, 2 * n)); };
    for (bool scaled : {false, true}) {
        CAPTURE(scaled);
        const auto a1 = form_bound_batch(d1, samples, 0.5, scaled);
        const auto a2 = form_bound_batch(d2, samples, 0.5, scaled);
        CHECK(a1.census == 1000);
        CHECK(std::isfinite(a1.c_epsilon));
        CHECK(std::isfinite(a2.c_epsilon));
        CHECK(std::abs(a2.c_epsilon - a1.c_epsilon) <= 0.2 * std::abs(a1.c_epsilon));
    }
}
