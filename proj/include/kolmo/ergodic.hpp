#pragma once

// Invariant measure by long-run averaging along one path, with residuals of
// infinitesimal invariance, p_t-invariance and the Theta-moment bound.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "kolmo/cylinder.hpp"
#include "kolmo/lyapunov.hpp"
#include "kolmo/sde.hpp"
#include "kolmo/stats.hpp"

namespace kolmo {

struct ErgodicConfig {
    double burn_in = 5.0;
    double horizon = 200.0;      // total simulated time, burn-in included
    std::size_t thinning = 10;   // steps between stored samples
    std::size_t batches = 50;
    std::uint64_t seed = 1;
};

/// Thinned states after burn-in.
struct StationaryPath {
    double dt = 0.0;
    std::size_t thinning = 0;
    std::vector<SpectralVector> samples;

    double spacing() const { return dt * static_cast<double>(thinning); }
};

/// Throws EnsembleError if the path diverges.
StationaryPath stationary_path(const Integrator& integrator, const SpectralVector& x0, const ErgodicConfig& config);

Estimate ergodic_average(const StateFunction& f, const StationaryPath& path, std::size_t batches = 50);
Estimate ergodic_average(const Integrator& integrator, const StateFunction& f, const SpectralVector& x0,
                         const ErgodicConfig& config);

/// Time average of L u along the path.
Estimate stationarity_residual(const CylinderFunction& u, const StationaryPath& path, const Integrator& integrator,
                               std::size_t batches = 50);

struct ThetaMoment {
    Estimate estimate;         // time average of Theta
    double bound = 0.0;        // C = lambda sup{V : |x'|_2 <= 2 lambda / m}
    bool bound_estimated = false;  // sampled sup for p > 2
    bool pass = false;         // estimate <= C (1 + 3 relative se)
};
ThetaMoment theta_moment_check(const StationaryPath& path, const LyapunovParams& params, double lambda, double m,
                               std::size_t batches = 50);
/// The constant C above; p = 2 gives lambda exp(kappa c^2 / pi^2) with c = 2 lambda / m.
double theta_moment_bound(std::size_t n, const LyapunovParams& params, double lambda, double m, bool* estimated = nullptr);

/// Starts drawn every `stride` samples of the path are run for time t with
/// fresh noise; returns the batch-means estimate of E f(y_t) - f(y_0).
Estimate invariance_residual(const StateFunction& f, double t, const StationaryPath& path,
                             const Integrator& integrator, std::size_t stride, std::uint64_t seed,
                             unsigned threads = 1, std::size_t batches = 20);

/// Columns index, t, value of f along the path.
void write_functional_csv(const StateFunction& f, const StationaryPath& path, std::ostream& out);

}  // namespace kolmo
