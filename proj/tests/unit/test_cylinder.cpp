#include "doctest.h"

#include <cmath>
#include <numbers>

#include "kolmo/cylinder.hpp"
#include "kolmo/lyapunov.hpp"
#include "kolmo/probes.hpp"

using namespace kolmo;
using std::numbers::pi;

TEST_CASE("values and derivatives") {
    const std::size_t n = 6;
    const SpectralVector zero(n);
    const SpectralVector e1 = SpectralVector::mode(n, 1);

    const auto lin = CylinderFunction::linear(e1);
    for (const auto& x : lyapunov_probes(n, 20, 1)) {
        CHECK(lin.grad(x) == e1);
        CHECK(lin.hess_pair(x, 1, 1) == 0.0);
        CHECK(lin.eval(x) == x[0]);
    }

    const auto [c1, s1] = trig_family(1);
    CHECK(c1.eval(zero) == 2.0);
    CHECK(s1.eval(zero) == 1.0);
    CHECK(l2_norm(c1.grad(zero)) == 0.0);
    CHECK(c1.hess_pair(zero, 1, 1) == -1.0);
    CHECK(c1.eval(e1) != c1.eval(2.0 * e1));
    CHECK(c1.eval(e1) == doctest::Approx(std::cos(1.0) + 1.0));
    CHECK(c1.eval(2.0 * e1) == doctest::Approx(std::cos(2.0) + 1.0));

    SUBCASE("gradients and Hessians against finite differences") {
        std::vector<CylinderFunction> us;
        for (std::size_t k = 1; k <= 4; ++k) {
            auto [c, s] = trig_family(k);
            us.push_back(c);
            us.push_back(s);
        }
        us.push_back(CylinderFunction::ridge(SpectralVector{0.5, -1.0, 0.25}, Polynomial{1.0, 0.0, -2.0, 0.5}));
        CylinderCallbacks cb;
        cb.value = [](std::span<const double> z) { return std::exp(-z[0] * z[0]) * std::cos(z[1]); };
        cb.gradient = [](std::span<const double> z, std::span<double> g) {
            const double e = std::exp(-z[0] * z[0]);
            g[0] = -2.0 * z[0] * e * std::cos(z[1]);
            g[1] = -e * std::sin(z[1]);
        };
        cb.hessian = [](std::span<const double> z, std::size_t i, std::size_t j) {
            const double e = std::exp(-z[0] * z[0]);
            if (i == 0 && j == 0) return (4.0 * z[0] * z[0] - 2.0) * e * std::cos(z[1]);
            if (i == 1 && j == 1) return -e * std::cos(z[1]);
            return 2.0 * z[0] * e * std::sin(z[1]);
        };
        us.push_back(CylinderFunction::custom(2, cb));

        const double h = 1e-5;
        double worst_g = 0.0, worst_h = 0.0;
        for (const auto& u : us) {
            for (const auto& x : lyapunov_probes(n, 50, 2)) {
                const auto g = u.grad(x);
                CHECK(g.size() == u.base_n());
                for (std::size_t k = 1; k <= u.base_n(); ++k) {
                    const auto e = SpectralVector::mode(n, k);
                    const double fd = (u.eval(x + h * e) - u.eval(x - h * e)) / (2.0 * h);
                    worst_g = std::max(worst_g, std::abs(fd - g[k - 1]));
                    for (std::size_t j = 1; j <= u.base_n(); ++j) {
                        const auto ej = SpectralVector::mode(n, j);
                        const double hh = 1e-4;
                        const double fd2 = (u.eval(x + hh * e + hh * ej) - u.eval(x + hh * e - hh * ej) -
                                            u.eval(x - hh * e + hh * ej) + u.eval(x - hh * e - hh * ej)) /
                                           (4.0 * hh * hh);
                        worst_h = std::max(worst_h, std::abs(fd2 - u.hess_pair(x, k, j)));
                    }
                }
            }
        }
        CHECK(worst_g < 1e-6);
        CHECK(worst_h < 1e-5);
    }
    SUBCASE("only the base coordinates matter") {
        const auto [c3, s3] = trig_family(3);
        for (const auto& x : lyapunov_probes(12, 50, 3)) {
            CHECK(c3.eval(x) == c3.eval(project(x, 3)));
            CHECK(s3.eval(x) == s3.eval(project(x, 3)));
            CHECK(c3.grad(x) == c3.grad(project(x, 3)));
        }
    }
}

TEST_CASE("Kolmogorov operator and carre du champ") {
    const std::size_t n = 8;
    const NoiseSpec noise = NoiseSpec::power_law(n, 1.0, 2.0);
    const SpectralVector zero(n);
    const SpectralVector e1 = SpectralVector::mode(n, 1);
    const auto basis = std::make_shared<const Basis>(n);

    const auto one = CylinderFunction::constant(3.0);
    const auto lin = CylinderFunction::linear(e1);
    const auto [c1, s1] = trig_family(1);
    const auto gl = build_FN(NonlinearityModel::preset("ginzburg-landau"), noise, basis);

    for (const auto& x : lyapunov_probes(n, 50, 4)) {
        CHECK(apply_L(one, x, gl.eval.get(), noise) == 0.0);
        CHECK(carre_du_champ(one, x, noise) == 0.0);
        CHECK(apply_L(lin, x, nullptr, noise) == doctest::Approx(-pi * pi * x[0]).epsilon(1e-14));
        CHECK(carre_du_champ(lin, x, noise) == 1.0);
        CHECK(carre_du_champ(c1, x, noise) >= 0.0);
        CHECK(carre_du_champ(c1, x, noise) == doctest::Approx(std::pow(std::sin(x[0]), 2)).epsilon(1e-14));
    }
    CHECK(apply_L(c1, zero, gl.eval.get(), noise) == doctest::Approx(-0.5).epsilon(1e-15));

    SUBCASE("explicit formula on a ridge") {
        const SpectralVector l{0.3, -0.7, 0.2};
        const auto u = CylinderFunction::trig(l, false);
        for (const auto& x : lyapunov_probes(n, 50, 5)) {
            const SpectralVector f = (*gl.eval)(x);
            const double s = dot(l, x);
            double expect = 0.0, tr = 0.0;
            for (std::size_t k = 1; k <= 3; ++k) {
                tr += noise.alpha(k) * l[k - 1] * l[k - 1];
                expect += (-pi * pi * k * k * x[k - 1] + f[k - 1]) * l[k - 1] * std::cos(s);
            }
            expect += -0.5 * tr * std::sin(s);
            CHECK(apply_L(u, x, f, noise) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("operator with F_N approaches the operator with F") {
    const auto model = NonlinearityModel::preset("mixed");
    const auto probes = probe_ball(64, 20, 6.0, 9, 2.0);
    const auto [c2, s2] = trig_family(2);
    const Basis fine(64, 1024);
    const NoiseSpec noise = NoiseSpec::power_law(64, 1.0, 2.0);
    std::vector<double> errs;
    for (std::size_t n : {8, 16, 32}) {
        const auto fn = build_FN(model, noise, n);
        double worst = 0.0;
        for (const auto& p : probes) {
            const SpectralVector x = project(p, n);
            const double exact = apply_L(s2, x, eval_F(fine, project(x, 64), model), noise);
            const double approx = apply_L(s2, x, fn.eval.get(), noise);
            worst = std::max(worst, std::abs(exact - approx));
        }
        errs.push_back(worst);
    }
    CAPTURE(errs[0]);
    CAPTURE(errs[1]);
    CAPTURE(errs[2]);
    CHECK(errs[1] <= errs[0] * 1.1);
    CHECK(errs[2] <= errs[1] * 1.1);
    CHECK(errs[2] < 0.5 * errs[0]);
}

TEST_CASE("trig family membership bounds") {
    const std::size_t n = 8;
    const NoiseSpec noise = NoiseSpec::power_law(n, 1.0, 2.0);
    const Basis b(n);
    const LyapunovParams lp{2.0, 0.2};
    const auto probes = lyapunov_probes(n, 500, 6);
    for (std::size_t k = 1; k <= 4; ++k) {
        const auto [c, s] = trig_family(k);
        for (const auto* u : {&c, &s}) {
            const double nu = weighted_norm([&](const SpectralVector& x) { return u->eval(x); }, probes, b, lp).value;
            const double nd =
                weighted_norm([&](const SpectralVector& x) { return l2_norm(u->grad(x)); }, probes, b, lp).value;
            const double nt =
                weighted_norm([&](const SpectralVector& x) { return u->trace_hess(x, noise); }, probes, b, lp).value;
            CHECK(nu <= 2.0);
            CHECK(nd <= 2.0 * pi * k);
            CHECK(nt <= noise.trace());
            for (const auto& x : probes) {
                CHECK(u->eval(x) >= 0.0);
                CHECK(u->eval(x) <= 2.0);
            }
        }
    }
}
