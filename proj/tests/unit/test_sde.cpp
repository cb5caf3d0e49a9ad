#include "doctest.h"

#include <cmath>
#include <algorithm>
#include <numbers>
#include <sstream>

#include "kolmo/drift.hpp"
#include "kolmo/sde.hpp"
#include "kolmo/stats.hpp"

using namespace kolmo;
using std::numbers::pi;

TEST_CASE("integrator config") {
    const auto cfg = [](double dt, std::vector<double> t) { return IntegratorConfig{dt, std::move(t)}; };
    CHECK_NOTHROW(cfg(5e-4, {0.0, 0.1, 0.25}).validate());
    CHECK_THROWS_AS(cfg(5e-4, {0.1, 0.05}).validate(), ParameterError);
    CHECK_THROWS_AS(cfg(5e-4, {0.10001}).validate(), ParameterError);
    CHECK_THROWS_AS(cfg(0.0, {}).validate(), ParameterError);
    const auto u = IntegratorConfig::uniform(5e-4, 0.1, 10);
    CHECK(u.checkpoints.size() == 21);
    CHECK(u.checkpoint_steps().back() == 200);
    CHECK_THROWS_AS(IntegratorConfig::uniform(5e-4, 0.1, 7), ParameterError);
}

TEST_CASE("linear substep is exact") {
    const std::size_t n = 4;
    const Integrator heat(n, NoiseSpec::zero(n), 5e-4);
    const SpectralVector x0{1.0, 1.0, 0.0, 0.0};
    const auto rec = simulate(heat, x0, IntegratorConfig{5e-4, {0.1}}, 1);
    REQUIRE_FALSE(rec.diverged);
    for (std::size_t k = 1; k <= 2; ++k) {
        const double expect = std::exp(-pi * pi * k * k * 0.1);
        CHECK(std::abs(rec.final_state[k - 1] / expect - 1.0) < 1e-12);
    }
    CHECK(rec.final_state[0] == doctest::Approx(0.372708).epsilon(1e-6));
    CHECK(rec.final_state[2] == 0.0);

    const Integrator ou(n, NoiseSpec::power_law(n, 1.0, 2.0), 5e-4);
    const std::vector<double> zeros(n, 0.0);
    const SpectralVector y = ou.step(x0, zeros);
    CHECK(y[0] == std::exp(-pi * pi * 5e-4));

    for (double dt : {1e-3, 1e-5, 1e-7}) {
        const Integrator one(1, NoiseSpec::power_law(1, 1.0, 2.0), dt);
        const double var = one.noise_sd(1) * one.noise_sd(1);
        CHECK(var == doctest::Approx((1.0 - std::exp(-2.0 * pi * pi * dt)) / (2.0 * pi * pi)).epsilon(1e-12));
        CHECK(std::abs(var / dt - 1.0) <= 1.01 * pi * pi * dt);
    }
    const IntegratorConfig at0{5e-4, {0.0}};
    CHECK(simulate(ou, x0, at0, 3).final_state == x0);
}

TEST_CASE("determinism") {
    const std::size_t n = 8;
    const NoiseSpec noise = NoiseSpec::power_law(n, 1.0, 2.0);
    const auto f = build_FN(NonlinearityModel::preset("mixed"), noise, n);
    const Integrator integ(n, noise, 5e-4, f.eval);
    const auto cfg = IntegratorConfig::uniform(5e-4, 0.05, 10);
    const SpectralVector x0 = SpectralVector::mode(n, 1, 0.5);
    const auto a = ensemble(integ, x0, 40, cfg, 99, 1);
    const auto b = ensemble(integ, x0, 40, cfg, 99, 1);
    const auto c = ensemble(integ, x0, 40, cfg, 99, 8);
    const auto d = ensemble(integ, x0, 40, cfg, 100, 1);
    bool same_ab = true, same_ac = true, differ = false;
    for (std::size_t i = 0; i < 40; ++i) {
        same_ab = same_ab && a.paths[i].states == b.paths[i].states;
        same_ac = same_ac && a.paths[i].states == c.paths[i].states;
        differ = differ || !(a.paths[i].final_state == d.paths[i].final_state);
    }
    CHECK(same_ab);
    CHECK(same_ac);
    CHECK(differ);
    CHECK_FALSE(a.paths[0].final_state == a.paths[1].final_state);
    // a single path equals the matching ensemble member
    CHECK(simulate(integ, x0, cfg, 99, 7).states == a.paths[7].states);
}

TEST_CASE("OU statistics") {
    const std::size_t n = 16;
    const NoiseSpec noise = NoiseSpec::power_law(n, 1.0, 2.0);
    const Integrator ou(n, noise, 5e-4);
    const SpectralVector x0 = SpectralVector::mode(n, 1, 1.0) + SpectralVector::mode(n, 2, 0.5);

    SUBCASE("transient mean") {
        const auto cfg = IntegratorConfig{5e-4, {0.05, 0.2}};
        const auto obs = observe(ou, {x0}, 5000, cfg, 12, 1,
                                 [](std::size_t, std::size_t, std::span<const SpectralVector> s, std::span<double> out) {
                                     out[0] = s[0][0];
                                 });
        for (std::size_t c = 0; c < 2; ++c) {
            std::vector<double> v(obs.paths);
            for (std::size_t p = 0; p < obs.paths; ++p) v[p] = obs.at(p, c, 0);
            const auto e = mean_estimate(v);
            const double expect = std::exp(-pi * pi * cfg.checkpoints[c]);
            CAPTURE(e.value);
            CAPTURE(e.se);
            CHECK(std::abs(e.value - expect) <= 3.0 * e.se);
            // variance of a_1 at time t is alpha_1 (1 - e^{-2 pi^2 t}) / (2 pi^2)
            double ss = 0.0;
            for (double x : v) ss += (x - e.value) * (x - e.value);
            const double var = ss / (v.size() - 1);
            const double var_exact = (1.0 - std::exp(-2.0 * pi * pi * cfg.checkpoints[c])) / (2.0 * pi * pi);
            CHECK(var == doctest::Approx(var_exact).epsilon(0.06));
        }
    }
    SUBCASE("stationary variance of mode 1") {
        SpectralVector a(n);
        const std::uint64_t burn = 10000, total = 400000, thin = 10;
        REQUIRE(ou.advance(a.span(), 5, 0, 0, burn));
        BatchAccumulator acc((total - burn) / thin, 50);
        for (std::uint64_t s = burn; s < total; s += thin) {
            REQUIRE(ou.advance(a.span(), 5, 0, s, s + thin));
            acc.add(a[0] * a[0]);
        }
        const auto e = acc.result();
        CAPTURE(e.value);
        CAPTURE(e.se);
        CHECK(e.K == 50);
        CHECK(std::abs(e.value - 1.0 / (2.0 * pi * pi)) <= 3.0 * e.se);
        CHECK(1.0 / (2.0 * pi * pi) == doctest::Approx(0.0506606).epsilon(1e-6));
    }
}

TEST_CASE("coupled ensembles") {
    const std::size_t n = 8;
    const NoiseSpec noise = NoiseSpec::power_law(n, 1.0, 2.0);
    const auto cfg = IntegratorConfig::uniform(5e-4, 0.2, 40);
    const SpectralVector x0 = SpectralVector::mode(n, 1, 0.8);
    const SpectralVector y0 = x0 + SpectralVector::mode(n, 1, 0.1) + SpectralVector::mode(n, 3, -0.1);

    const Integrator ou(n, noise, 5e-4);
    const auto same = coupled_ensemble(ou, x0, x0, 20, cfg, 4);
    const auto diff = coupled_ensemble(ou, x0, y0, 20, cfg, 4);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(same.x.paths[i].states == same.y.paths[i].states);
        for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
            const double t = cfg.checkpoints[c];
            const SpectralVector d = diff.y.paths[i].states[c] - diff.x.paths[i].states[c];
            CHECK(d[0] == doctest::Approx(0.1 * std::exp(-pi * pi * t)).epsilon(1e-9));
            CHECK(d[2] == doctest::Approx(-0.1 * std::exp(-9.0 * pi * pi * t)).epsilon(1e-9));
        }
    }

    const auto gl = build_FN(NonlinearityModel::preset("ginzburg-landau"), noise, n);
    const Integrator integ(n, noise, 5e-4, gl.eval);
    const auto cfg1 = IntegratorConfig::uniform(5e-4, 1.0, 200);
    const auto c = coupled_ensemble(integ, x0, x0 + SpectralVector::mode(n, 2, 1e-3), 20, cfg1, 6);
    CHECK(c.x.diverged == 0);
    for (std::size_t i = 0; i < 20; ++i) {
        const double d = l2_norm(c.y.paths[i].final_state - c.x.paths[i].final_state);
        CHECK(std::isfinite(d));
        CHECK(d < 0.1);
    }
}

TEST_CASE("increments shrink with dt") {
    const std::size_t n = 4;
    const NoiseSpec noise = NoiseSpec::power_law(n, 1.0, 2.0);
    const auto gl = build_FN(NonlinearityModel::preset("ginzburg-landau"), noise, n);
    std::vector<double> ms;
    for (double dt : {4e-4, 2e-4, 1e-4}) {
        const Integrator integ(n, noise, dt, gl.eval);
        const IntegratorConfig cfg{dt, {0.02, 0.02 + dt}};
        const auto obs = observe(integ, {SpectralVector::mode(n, 1, 0.5)}, 4000, cfg, 8, 1,
                                 [](std::size_t, std::size_t, std::span<const SpectralVector> s, std::span<double> out) {
                                     out[0] = s[0][0];
                                 });
        double m = 0.0;
        for (std::size_t p = 0; p < obs.paths; ++p) m += std::pow(obs.at(p, 1, 0) - obs.at(p, 0, 0), 2);
        ms.push_back(m / obs.paths);
    }
    CHECK(ms[1] / ms[0] == doctest::Approx(0.5).epsilon(0.2));
    CHECK(ms[2] / ms[1] == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("divergence census") {
    const std::size_t n = 4;
    const NoiseSpec noise = NoiseSpec::power_law(n, 1.0, 2.0);
    const auto basis = std::make_shared<const Basis>(n);
    const auto blowup = std::make_shared<const DriftEvaluator>(basis, PsiMap(), ReactionMap(Polynomial{0, 0, 0, 0, 0, 1}));
    const Integrator integ(n, noise, 5e-4, blowup);
    const auto cfg = IntegratorConfig::uniform(5e-4, 0.1, 10);
    const auto rec = simulate(integ, SpectralVector::mode(n, 1, 10.0), cfg, 1);
    CHECK(rec.diverged);
    CHECK(std::isnan(rec.final_state[0]));
    CHECK_THROWS_AS(ensemble(integ, SpectralVector::mode(n, 1, 10.0), 10, cfg, 1), EnsembleError);
    CHECK_NOTHROW(ensemble(integ, SpectralVector::mode(n, 1, 0.01), 10, cfg, 1));
}

TEST_CASE("CSV dump") {
    const std::size_t n = 3;
    const Integrator ou(n, NoiseSpec::power_law(n, 1.0, 2.0), 1e-3);
    const auto ens = ensemble(ou, SpectralVector(n), 2, IntegratorConfig::uniform(1e-3, 0.01, 5), 1);
    std::ostringstream os;
    write_csv(ens, os);
    std::string line;
    std::istringstream is(os.str());
    std::getline(is, line);
    CHECK(line == "t,path,k,a_k");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 2 * 3 * 3);
    std::ostringstream capped;
    write_csv(ens, capped, 4);
    const std::string text = capped.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("statistics helpers") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0, std::nan("")};
    const auto e = mean_estimate(v);
    CHECK(e.K == 4);
    CHECK(e.value == 2.5);
    CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    std::vector<double> series(1000);
    for (std::size_t i = 0; i < series.size(); ++i) series[i] = static_cast<double>(i % 10);
    const auto b = batch_means(series, 20);
    CHECK(b.K == 20);
    CHECK(b.value == doctest::Approx(4.5));
    CHECK(b.se == doctest::Approx(0.0).epsilon(1e-12));
}
