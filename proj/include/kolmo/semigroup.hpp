#pragma once

// Monte Carlo estimators of p_t and g_lambda and residuals of the kernel
// identities, all computed on shared keyed ensembles.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kolmo/cylinder.hpp"
#include "kolmo/lyapunov.hpp"
#include "kolmo/sde.hpp"
#include "kolmo/stats.hpp"

namespace kolmo {

struct McConfig {
    std::size_t paths = 5000;
    double dt = 5e-4;
    std::size_t every = 10;   // checkpoint spacing in steps
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

/// f_j(x_tau) at the checkpoints 0, every*dt, ..., t for each path.
ObservedEnsemble track(const Integrator& integrator, const std::vector<SpectralVector>& starts, double t,
                       const McConfig& mc, const std::vector<StateFunction>& fns);

/// Weights w_c with int_0^T e^{-lambda tau} g(tau) dtau = sum w_c g(t_c) for g
/// piecewise linear on the grid.
std::vector<double> laplace_weights(const std::vector<double>& times, double lambda);

Estimate pt_estimate(const Integrator& integrator, const StateFunction& f, const SpectralVector& x, double t,
                     const McConfig& mc);
/// Means of f(x_t) at all checkpoints up to t.
std::vector<Estimate> pt_curve(const Integrator& integrator, const StateFunction& f, const SpectralVector& x,
                               double t, const McConfig& mc);

struct ResolventEstimate {
    Estimate est;           // g_lambda f(x) on [0, T_max]
    double t_max = 0.0;
    double tail = 0.0;      // e^{-lambda T_max} sup|f| / lambda over visited states
    double error = 0.0;     // 3 se + tail
    bool flagged = false;   // tail above the requested tolerance
};

/// T_max = 0 selects 12/lambda rounded up to the checkpoint grid.
ResolventEstimate resolvent_estimate(const Integrator& integrator, const StateFunction& f, const SpectralVector& x,
                                     double lambda, const McConfig& mc, double t_max = 0.0,
                                     double tail_tolerance = 1e-4);

/// Residual estimates sharing one ensemble started at x.
struct IdentityResiduals {
    std::vector<Estimate> kolmogorov;              // per u, at t
    std::vector<std::vector<Estimate>> martingale; // per u, per w, over [s, t]
    std::vector<Estimate> qv;                      // per u, at t
};
IdentityResiduals identity_residuals(const Integrator& integrator, const std::vector<CylinderFunction>& us,
                                     const std::vector<StateFunction>& weights, const SpectralVector& x, double s,
                                     double t, const McConfig& mc);

/// p_t u(x) - u(x) - int_0^t p_tau(L u)(x) dtau.
Estimate kolmogorov_residual(const Integrator& integrator, const CylinderFunction& u, const SpectralVector& x,
                             double t, const McConfig& mc);
/// E[(u(x_t) - u(x_s) - int_s^t Lu(x_r) dr) w(x_s)] for each w.
std::vector<Estimate> martingale_residual(const Integrator& integrator, const CylinderFunction& u,
                                          const SpectralVector& x, double s, double t,
                                          const std::vector<StateFunction>& weights, const McConfig& mc);
/// E[(u(x_t) - u(x_0) - int_0^t Lu)^2 - int_0^t Gamma(u)].
Estimate qv_residual(const Integrator& integrator, const CylinderFunction& u, const SpectralVector& x, double t,
                     const McConfig& mc);

/// e^{lambda t} V(x) - E V(x_t).
Estimate growth_check(const Integrator& integrator, const SpectralVector& x, double t, const LyapunovParams& params,
                      double lambda, const McConfig& mc);

struct ContractionReport {
    std::vector<double> ratios;
    double max_ratio = 0.0;
    double max_ratio_se = 0.0;
    double seminorm = 0.0;       // sampled (f)_{0,q,kappa} over the same pairs
    double bound = 0.0;          // e^{t lambda'} seminorm
    bool flagged = false;        // max ratio above bound + 3 se
};
ContractionReport contraction_check(const Integrator& integrator, const StateFunction& f,
                                    const std::vector<std::pair<SpectralVector, SpectralVector>>& pairs, double t,
                                    const LyapunovParams& params, double lambda_prime, const McConfig& mc);

/// lambda_{q,kappa} + empirical C_eps at eps = m_{q,kappa} from the form audit.
double lambda_prime(const DriftConstants& c, const DriftMap& drift,
                    const std::vector<std::pair<SpectralVector, SpectralVector>>& samples);

/// (1/m) sup |lambda u - L u| / Theta - sup |u| / V over the probes, per u.
std::vector<double> dissipativity_check(const std::vector<CylinderFunction>& us, double lambda, double m,
                                        const LyapunovParams& params, const std::vector<SpectralVector>& probes,
                                        const DriftEvaluator* drift, const NoiseSpec& noise, const Basis& basis);

struct NConvergenceRow {
    std::size_t n = 0;
    Estimate lambda_g;     // lambda g_lambda^{(N)} f(x)
    double diff = 0.0;     // |lambda g^{(N)} - lambda g^{(2N)}| (0 on the last row)
    double diff_se = 0.0;
};
/// Paths at different N share the noise of the common modes.
std::vector<NConvergenceRow> resolvent_nconvergence(const NonlinearityModel& model, const NoiseSpec& noise,
                                                    const StateFunction& f, const SpectralVector& x, double lambda,
                                                    const std::vector<std::size_t>& levels, const McConfig& mc);

}  // namespace kolmo
