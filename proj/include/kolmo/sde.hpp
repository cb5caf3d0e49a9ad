#pragma once

// Exponential Euler integrator for dx = (Delta x + F_N(x)) dt + sqrt(A_N) dW on
// E_N with keyed normal draws, single paths and ensembles.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "kolmo/drift.hpp"
#include "kolmo/noise.hpp"
#include "kolmo/spectral.hpp"

namespace kolmo {

class EnsembleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Any coefficient beyond this flags the path as diverged.
inline constexpr double kDivergenceLevel = 1e8;
/// Largest tolerated fraction of diverged paths.
inline constexpr double kMaxDivergedFraction = 0.01;

struct IntegratorConfig {
    double dt = 5e-4;
    /// Sorted checkpoint times, each an integer multiple of dt.
    std::vector<double> checkpoints;

    void validate() const;
    std::vector<std::uint64_t> checkpoint_steps() const;
    /// Checkpoints 0, every*dt, 2*every*dt, ... up to T (T must be on that grid).
    static IntegratorConfig uniform(double dt, double T, std::size_t every = 10);
};

class Integrator {
public:
    /// drift may be null (F_N = 0); otherwise its mode count must equal n.
    Integrator(std::size_t n, NoiseSpec noise, double dt, std::shared_ptr<const DriftEvaluator> drift = nullptr);

    std::size_t modes() const { return n_; }
    double dt() const { return dt_; }
    const NoiseSpec& noise() const { return noise_; }
    const DriftEvaluator* drift() const { return drift_.get(); }

    /// a_k <- e^{-mu_k dt}(a_k + dt f_k(a)) + sd_k xi_k. Thread safe.
    void step(std::span<double> a, std::span<const double> xi) const;
    SpectralVector step(const SpectralVector& x, std::span<const double> xi) const;

    /// Standard normals for (seed, path, step): one Box-Muller pair per two modes.
    void draw(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::span<double> xi) const;

    /// Steps s0 -> s1 with keyed noise; false once a coefficient leaves the
    /// divergence level or turns nonfinite.
    bool advance(std::span<double> a, std::uint64_t seed, std::uint64_t path, std::uint64_t s0,
                 std::uint64_t s1) const;

    /// Per-mode decay e^{-mu_k dt} and noise standard deviation.
    double decay(std::size_t k) const { return decay_[k - 1]; }
    double noise_sd(std::size_t k) const { return sd_[k - 1]; }

private:
    std::size_t n_;
    NoiseSpec noise_;
    double dt_;
    std::shared_ptr<const DriftEvaluator> drift_;
    std::vector<double> decay_, sd_;
};

struct PathRecord {
    std::vector<double> times;
    std::vector<SpectralVector> states;
    SpectralVector final_state;
    bool diverged = false;
};

/// Path `path` of the keyed family from x0 up to T = last checkpoint.
PathRecord simulate(const Integrator& integrator, const SpectralVector& x0, const IntegratorConfig& config,
                    std::uint64_t seed, std::uint64_t path = 0);

struct PathEnsemble {
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<PathRecord> paths;
    std::size_t diverged = 0;

    std::size_t size() const { return paths.size(); }
};

/// K paths with independent streams. Throws EnsembleError above 1% divergence.
PathEnsemble ensemble(const Integrator& integrator, const SpectralVector& x0, std::size_t K,
                      const IntegratorConfig& config, std::uint64_t seed, unsigned threads = 1);

struct CoupledEnsemble {
    PathEnsemble x, y;
};
/// Both trajectories of path i consume the same draws.
CoupledEnsemble coupled_ensemble(const Integrator& integrator, const SpectralVector& x0, const SpectralVector& y0,
                                 std::size_t K, const IntegratorConfig& config, std::uint64_t seed,
                                 unsigned threads = 1);

/// Called at each checkpoint with the states of all coupled copies; writes
/// `width` numbers into out.
using Observer = std::function<void(std::size_t path, std::size_t checkpoint, std::span<const SpectralVector> states,
                                    std::span<double> out)>;

/// Observed functionals, laid out [path][checkpoint][width]. Diverged paths hold NaN.
struct ObservedEnsemble {
    std::size_t paths = 0;
    std::size_t checkpoints = 0;
    std::size_t width = 0;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<unsigned char> diverged;
    std::size_t diverged_count = 0;

    double at(std::size_t path, std::size_t checkpoint, std::size_t j) const {
        return values[(path * checkpoints + checkpoint) * width + j];
    }
    std::span<const double> row(std::size_t path, std::size_t checkpoint) const {
        return std::span<const double>(values).subspan((path * checkpoints + checkpoint) * width, width);
    }
};

/// Runs K paths of every start in `starts` with shared noise per path index
/// and records observer output at the checkpoints.
ObservedEnsemble observe(const Integrator& integrator, const std::vector<SpectralVector>& starts, std::size_t K,
                         const IntegratorConfig& config, std::uint64_t seed, std::size_t width,
                         const Observer& observer, unsigned threads = 1, std::uint64_t path_offset = 0);

using StartFn = std::function<std::vector<SpectralVector>(std::size_t path)>;
/// Same with per-path start states.
ObservedEnsemble observe(const Integrator& integrator, const StartFn& starts, std::size_t K,
                         const IntegratorConfig& config, std::uint64_t seed, std::size_t width,
                         const Observer& observer, unsigned threads = 1, std::uint64_t path_offset = 0);

/// Rows t, path, k, a_k; writes at most max_rows data rows.
void write_csv(const PathEnsemble& ens, std::ostream& out, std::size_t max_rows = 1000000);

}  // namespace kolmo
