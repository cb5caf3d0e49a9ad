#include "kolmo/sde.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "kolmo/parallel.hpp"
#include "kolmo/rng.hpp"

namespace kolmo {

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive");
    double prev = -1.0;
    for (double t : checkpoints) {
        if (!(t >= 0.0)) throw ParameterError("checkpoint times must be nonnegative");
        if (t <= prev) throw ParameterError("checkpoint times must be strictly increasing");
        const double k = std::round(t / dt);
        if (std::abs(t - k * dt) > 1e-12) throw ParameterError("checkpoint " + std::to_string(t) + " is not on the step grid");
        prev = t;
    }
}

std::vector<std::uint64_t> IntegratorConfig::checkpoint_steps() const {
    validate();
    std::vector<std::uint64_t> s;
    s.reserve(checkpoints.size());
    for (double t : checkpoints) s.push_back(static_cast<std::uint64_t>(std::llround(t / dt)));
    return s;
}

IntegratorConfig IntegratorConfig::uniform(double dt, double T, std::size_t every) {
    if (every == 0) throw ParameterError("checkpoint spacing must be positive");
    IntegratorConfig c;
    c.dt = dt;
    const double steps = std::round(T / dt);
    if (std::abs(T - steps * dt) > 1e-12) throw ParameterError("T is not on the step grid");
    const auto total = static_cast<std::uint64_t>(steps);
    if (total % every != 0) throw ParameterError("T is not on the checkpoint grid");
    for (std::uint64_t s = 0; s <= total; s += every) c.checkpoints.push_back(static_cast<double>(s) * dt);
    return c;
}

Integrator::Integrator(std::size_t n, NoiseSpec noise, double dt, std::shared_ptr<const DriftEvaluator> drift)
    : n_(n), noise_(std::move(noise)), dt_(dt), drift_(std::move(drift)) {
    if (n == 0) throw DimensionError("integrator needs at least one mode");
    if (!(dt > 0.0)) throw ParameterError("dt must be positive");
    if (noise_.modes() < n) throw DimensionError("noise has fewer modes than the integrator");
    if (drift_ && drift_->modes() != n) throw DimensionError("drift and integrator mode counts differ");
    if (drift_ && drift_->is_zero()) drift_.reset();
    decay_.resize(n);
    sd_.resize(n);
    for (std::size_t k = 1; k <= n; ++k) {
        const double mu = std::numbers::pi * std::numbers::pi * static_cast<double>(k * k);
        decay_[k - 1] = std::exp(-mu * dt);
        sd_[k - 1] = std::sqrt(noise_.alpha(k) * -std::expm1(-2.0 * mu * dt) / (2.0 * mu));
    }
}

void Integrator::step(std::span<double> a, std::span<const double> xi) const {
    thread_local std::vector<double> f;
    if (drift_) {
        f.resize(n_);
        drift_->apply(a, f);
        for (std::size_t k = 0; k < n_; ++k) a[k] = decay_[k] * (a[k] + dt_ * f[k]) + sd_[k] * xi[k];
    } else {
        for (std::size_t k = 0; k < n_; ++k) a[k] = decay_[k] * a[k] + sd_[k] * xi[k];
    }
}

SpectralVector Integrator::step(const SpectralVector& x, std::span<const double> xi) const {
    if (x.size() != n_ || xi.size() < n_) throw DimensionError("step: state or draw size mismatch");
    SpectralVector y = x;
    step(y.span(), xi);
    return y;
}

void Integrator::draw(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::span<double> xi) const {
    for (std::size_t j = 0; 2 * j < n_; ++j) {
        double z0 = 0.0, z1 = 0.0;
        normal_pair(hash_key(seed, path, step, j), z0, z1);
        xi[2 * j] = z0;
        if (2 * j + 1 < n_) xi[2 * j + 1] = z1;
    }
}

bool Integrator::advance(std::span<double> a, std::uint64_t seed, std::uint64_t path, std::uint64_t s0,
                         std::uint64_t s1) const {
    thread_local std::vector<double> xi;
    xi.resize(n_);
    for (std::uint64_t s = s0; s < s1; ++s) {
        draw(seed, path, s, xi);
        step(a, xi);
        for (double v : a) {
            if (!(std::abs(v) <= kDivergenceLevel)) return false;
        }
    }
    return true;
}

namespace {

void check_fraction(std::size_t diverged, std::size_t K) {
    if (static_cast<double>(diverged) > kMaxDivergedFraction * static_cast<double>(K)) {
        throw EnsembleError(std::to_string(diverged) + " of " + std::to_string(K) + " paths diverged");
    }
}

}  // namespace

PathRecord simulate(const Integrator& integrator, const SpectralVector& x0, const IntegratorConfig& config,
                    std::uint64_t seed, std::uint64_t path) {
    if (x0.size() != integrator.modes()) throw DimensionError("start state has the wrong mode count");
    if (std::abs(config.dt - integrator.dt()) > 1e-15) throw ParameterError("config dt differs from integrator dt");
    const auto steps = config.checkpoint_steps();
    PathRecord rec;
    rec.times = config.checkpoints;
    SpectralVector a = x0;
    std::uint64_t s = 0;
    for (std::uint64_t target : steps) {
        if (!rec.diverged && !integrator.advance(a.span(), seed, path, s, target)) rec.diverged = true;
        s = target;
        if (rec.diverged) break;
        rec.states.push_back(a);
    }
    if (rec.diverged) {
        std::fill(a.span().begin(), a.span().end(), std::numeric_limits<double>::quiet_NaN());
    }
    rec.final_state = a;
    return rec;
}

PathEnsemble ensemble(const Integrator& integrator, const SpectralVector& x0, std::size_t K,
                      const IntegratorConfig& config, std::uint64_t seed, unsigned threads) {
    PathEnsemble ens;
    ens.seed = seed;
    ens.times = config.checkpoints;
    ens.paths.resize(K);
    config.validate();
    parallel_for(K, threads, [&](std::size_t i) { ens.paths[i] = simulate(integrator, x0, config, seed, i); });
    for (const auto& p : ens.paths) ens.diverged += p.diverged ? 1 : 0;
    check_fraction(ens.diverged, K);
    return ens;
}

CoupledEnsemble coupled_ensemble(const Integrator& integrator, const SpectralVector& x0, const SpectralVector& y0,
                                 std::size_t K, const IntegratorConfig& config, std::uint64_t seed,
                                 unsigned threads) {
    CoupledEnsemble c;
    c.x = ensemble(integrator, x0, K, config, seed, threads);
    c.y = ensemble(integrator, y0, K, config, seed, threads);
    return c;
}

ObservedEnsemble observe(const Integrator& integrator, const StartFn& starts, std::size_t K,
                         const IntegratorConfig& config, std::uint64_t seed, std::size_t width,
                         const Observer& observer, unsigned threads, std::uint64_t path_offset) {
    if (std::abs(config.dt - integrator.dt()) > 1e-15) throw ParameterError("config dt differs from integrator dt");
    const auto steps = config.checkpoint_steps();
    ObservedEnsemble obs;
    obs.paths = K;
    obs.checkpoints = steps.size();
    obs.width = width;
    obs.times = config.checkpoints;
    obs.values.assign(K * steps.size() * width, std::numeric_limits<double>::quiet_NaN());
    obs.diverged.assign(K, 0);
    parallel_for(K, threads, [&](std::size_t i) {
        std::vector<SpectralVector> states = starts(i);
        for (const auto& x : states) {
            if (x.size() != integrator.modes()) throw DimensionError("start state has the wrong mode count");
        }
        std::uint64_t s = 0;
        for (std::size_t c = 0; c < steps.size(); ++c) {
            for (auto& x : states) {
                if (!integrator.advance(x.span(), seed, path_offset + i, s, steps[c])) {
                    obs.diverged[i] = 1;
                    break;
                }
            }
            if (obs.diverged[i]) break;
            s = steps[c];
            const auto out = std::span<double>(obs.values).subspan((i * steps.size() + c) * width, width);
            observer(i, c, states, out);
        }
        if (obs.diverged[i]) {
            const auto out = std::span<double>(obs.values).subspan(i * steps.size() * width, steps.size() * width);
            std::fill(out.begin(), out.end(), std::numeric_limits<double>::quiet_NaN());
        }
    });
    for (unsigned char d : obs.diverged) obs.diverged_count += d;
    check_fraction(obs.diverged_count, K);
    return obs;
}

ObservedEnsemble observe(const Integrator& integrator, const std::vector<SpectralVector>& starts, std::size_t K,
                         const IntegratorConfig& config, std::uint64_t seed, std::size_t width,
                         const Observer& observer, unsigned threads, std::uint64_t path_offset) {
    return observe(
        integrator, [&](std::size_t) { return starts; }, K, config, seed, width, observer, threads, path_offset);
}

void write_csv(const PathEnsemble& ens, std::ostream& out, std::size_t max_rows) {
    out << "t,path,k,a_k\n";
    out << std::setprecision(17);
    std::size_t rows = 0;
    for (std::size_t p = 0; p < ens.paths.size(); ++p) {
        const auto& rec = ens.paths[p];
        for (std::size_t c = 0; c < rec.states.size(); ++c) {
            for (std::size_t k = 1; k <= rec.states[c].size(); ++k) {
                if (rows++ >= max_rows) return;
                out << rec.times[c] << ',' << p << ',' << k << ',' << rec.states[c][k - 1] << '\n';
            }
        }
    }
}

}  // namespace kolmo
