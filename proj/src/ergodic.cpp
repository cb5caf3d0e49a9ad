#include "kolmo/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "kolmo/parallel.hpp"
#include "kolmo/probes.hpp"
#include "kolmo/rng.hpp"

namespace kolmo {

StationaryPath stationary_path(const Integrator& integrator, const SpectralVector& x0, const ErgodicConfig& config) {
    if (!(config.horizon > config.burn_in) || config.burn_in < 0.0) {
        throw ParameterError("ergodic horizon must exceed the burn-in");
    }
    if (config.thinning == 0) throw ParameterError("thinning must be positive");
    const double dt = integrator.dt();
    const auto burn = static_cast<std::uint64_t>(std::llround(config.burn_in / dt));
    const auto total = static_cast<std::uint64_t>(std::llround(config.horizon / dt));
    StationaryPath path;
    path.dt = dt;
    path.thinning = config.thinning;
    SpectralVector a = x0;
    if (a.size() != integrator.modes()) throw DimensionError("start state has the wrong mode count");
    if (!integrator.advance(a.span(), config.seed, 0, 0, burn)) throw EnsembleError("long path diverged during burn-in");
    path.samples.reserve((total - burn) / config.thinning + 1);
    for (std::uint64_t s = burn; s + config.thinning <= total; s += config.thinning) {
        if (!integrator.advance(a.span(), config.seed, 0, s, s + config.thinning)) {
            throw EnsembleError("long path diverged");
        }
        path.samples.push_back(a);
    }
    return path;
}

Estimate ergodic_average(const StateFunction& f, const StationaryPath& path, std::size_t batches) {
    std::vector<double> v;
    v.reserve(path.samples.size());
    for (const auto& x : path.samples) v.push_back(f(x));
    return batch_means(v, batches);
}

Estimate ergodic_average(const Integrator& integrator, const StateFunction& f, const SpectralVector& x0,
                         const ErgodicConfig& config) {
    return ergodic_average(f, stationary_path(integrator, x0, config), config.batches);
}

Estimate stationarity_residual(const CylinderFunction& u, const StationaryPath& path, const Integrator& integrator,
                               std::size_t batches) {
    const DriftEvaluator* drift = integrator.drift();
    const NoiseSpec& noise = integrator.noise();
    return ergodic_average([&](const SpectralVector& x) { return apply_L(u, x, drift, noise); }, path, batches);
}

double theta_moment_bound(std::size_t n, const LyapunovParams& params, double lambda, double m, bool* estimated) {
    if (!(m > 0.0)) throw ParameterError("m must be positive");
    const double c = 2.0 * lambda / m;
    if (params.p == 2.0) {
        if (estimated) *estimated = false;
        return lambda * std::exp(params.kappa * c * c / (std::numbers::pi * std::numbers::pi));
    }
    // V grows along rays, so the sup sits on the sphere |x'|_2 = c
    if (estimated) *estimated = true;
    const Basis basis(n);
    double sup = 0.0;
    for (auto x : probe_ball(n, 2000, c, kProbeSeed)) {
        const double h = h1_seminorm(x);
        if (h == 0.0) continue;
        x *= c / h;
        sup = std::max(sup, V(basis, x, params));
    }
    // the pure first mode is the extremal direction for the exponential factor
    sup = std::max(sup, V(basis, SpectralVector::mode(n, 1, c / std::numbers::pi), params));
    return lambda * sup;
}

ThetaMoment theta_moment_check(const StationaryPath& path, const LyapunovParams& params, double lambda, double m,
                               std::size_t batches) {
    if (path.samples.empty()) throw ParameterError("empty path");
    const Basis basis(path.samples.front().size());
    ThetaMoment r;
    r.estimate = ergodic_average([&](const SpectralVector& x) { return Theta(basis, x, params); }, path, batches);
    r.bound = theta_moment_bound(basis.modes(), params, lambda, m, &r.bound_estimated);
    const double rel = r.estimate.value > 0.0 ? r.estimate.se / r.estimate.value : 0.0;
    r.pass = std::isfinite(r.estimate.value) && r.estimate.value <= r.bound * (1.0 + 3.0 * rel);
    return r;
}

Estimate invariance_residual(const StateFunction& f, double t, const StationaryPath& path,
                             const Integrator& integrator, std::size_t stride, std::uint64_t seed, unsigned threads,
                             std::size_t batches) {
    if (stride == 0) throw ParameterError("stride must be positive");
    const double dt = integrator.dt();
    const double steps = std::round(t / dt);
    if (std::abs(t - steps * dt) > 1e-12) throw ParameterError("t is not on the step grid");
    const std::size_t K = path.samples.size() / stride;
    std::vector<double> d(K, 0.0);
    const auto s1 = static_cast<std::uint64_t>(steps);
    std::vector<unsigned char> bad(K, 0);
    parallel_for(K, threads, [&](std::size_t i) {
        SpectralVector y = path.samples[i * stride];
        const double f0 = f(y);
        if (!integrator.advance(y.span(), seed, i, 0, s1)) {
            bad[i] = 1;
            d[i] = std::nan("");
            return;
        }
        d[i] = f(y) - f0;
    });
    std::size_t diverged = 0;
    for (unsigned char b : bad) diverged += b;
    if (static_cast<double>(diverged) > kMaxDivergedFraction * static_cast<double>(K)) {
        throw EnsembleError("invariance runs diverged");
    }
    d.erase(std::remove_if(d.begin(), d.end(), [](double v) { return std::isnan(v); }), d.end());
    Estimate e = batch_means(d, batches);
    e.param = t;
    return e;
}

void write_functional_csv(const StateFunction& f, const StationaryPath& path, std::ostream& out) {
    out << "index,t,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < path.samples.size(); ++i) {
        out << i << ',' << static_cast<double>(i + 1) * path.spacing() << ',' << f(path.samples[i]) << '\n';
    }
}

}  // namespace kolmo
