#pragma once

// Lyapunov weights V_{p,kappa}, Theta_{p,kappa}, their derivatives, the
// explicit drift constants, exact evaluation of L_N V and sampled audits.

#include <cstddef>
#include <functional>
#include <vector>

#include "kolmo/drift.hpp"
#include "kolmo/noise.hpp"
#include "kolmo/spectral.hpp"

namespace kolmo {

inline constexpr double kExpCap = 700.0;

/// p = 2 selects V_kappa = exp(kappa |x|^2) and Theta_kappa = V_kappa (1 + |x'|^2).
struct LyapunovParams {
    double p = 2.0;
    double kappa = 0.1;
};

/// V_{p,kappa}(x); +infinity once kappa |x|_2^2 exceeds the exponent cap.
double V(const Basis& basis, const SpectralVector& x, const LyapunovParams& params);
/// Theta_{p,kappa}(x) = V_p (1 + |x'|^2) + V_kappa (p^2/4) int |x|^{p-2} x'^2.
double Theta(const Basis& basis, const SpectralVector& x, const LyapunovParams& params);

/// Coefficients of DV_{q,kappa}(x) in E_N (exact derivative of the grid-defined V).
SpectralVector grad_V(const Basis& basis, const SpectralVector& x, double q, double kappa);
/// (xi, D^2 V_{q,kappa}(x) eta).
double hess_V_form(const Basis& basis, const SpectralVector& x, const SpectralVector& xi,
                   const SpectralVector& eta, double q, double kappa);

double kappa0(double h1_L1, double a0);
double lambda_kappa(double kappa, double traceA, double h0_L1, double h1_L1, double a0);
double m_kappa_lambda(double kappa, double lambda, double traceA, double h0_L1, double h1_L1, double a0);

struct DriftConstants {
    double q = 2.0;
    double kappa = 0.0;
    double kappa0 = 0.0;
    double lambda_kappa = 0.0;
    double lambda = 0.0;           // 2 lambda_kappa + 1
    double m_kappa_lambda = 0.0;
    double lambda_q_kappa = 0.0;   // equals lambda for q = 2
    double m_q_kappa = 0.0;        // equals m_kappa_lambda for q = 2
    double epsilon = 0.0;          // (q-1)/(2(4 kappa + q))
    double young_c1 = 0.0;         // reaction-term constant of the q chain
    double young_c2 = 0.0;         // trace-term constant of the q chain
};

/// Constants for V_{q,kappa}; kappa given as an absolute value (< kappa0).
DriftConstants constants_q(double q, double kappa, const NoiseSpec& noise, const NonlinearityModel& model);
/// kappa = fraction * kappa0.
DriftConstants constants_for_fraction(double q, double fraction, const NoiseSpec& noise,
                                      const NonlinearityModel& model);

/// L_N V_{q,kappa}(x) = 1/2 sum alpha_k d_kk V + sum (-(pi k)^2 x_k + f_k) d_k V,
/// with f = F_N(x) supplied in coefficients.
double apply_L_to_V(const Basis& basis, const SpectralVector& x, double q, double kappa,
                    const SpectralVector& f, const NoiseSpec& noise);
double apply_L_to_V(const Basis& basis, const SpectralVector& x, double q, double kappa,
                    const DriftEvaluator* drift, const NoiseSpec& noise);

/// Grid pairing w sum_j x'_j psi'(x_j) x_j |x_j|^{q-2}.
double burgers_pairing(const Basis& basis, const SpectralVector& x, const PsiMap& psi, double q);

/// (lambda V - m Theta - L_N V) / Theta.
double drift_inequality_margin(const Basis& basis, const SpectralVector& x, double q, double kappa,
                               double lambda, double m, const DriftEvaluator* drift, const NoiseSpec& noise);

struct MarginSummary {
    double min_margin = 0.0;
    std::size_t argmin = 0;
    std::size_t census = 0;
};
MarginSummary drift_inequality_batch(const Basis& basis, const std::vector<SpectralVector>& probes, double q,
                                     double kappa, double lambda, double m, const DriftEvaluator* drift,
                                     const NoiseSpec& noise);

using StateFunction = std::function<double(const SpectralVector&)>;

/// Sampled lower bound of a supremum with the probe census.
struct SampledSup {
    double value = 0.0;
    std::size_t argmax = 0;
    std::size_t census = 0;
};

SampledSup weighted_norm(const StateFunction& f, const std::vector<SpectralVector>& probes,
                         const Basis& basis, const LyapunovParams& params);
SampledSup lipschitz_seminorm(const StateFunction& f,
                              const std::vector<std::pair<SpectralVector, SpectralVector>>& pairs, int l,
                              const Basis& basis, const LyapunovParams& params);
/// Random pairs plus pairs +-t eta_1 with t -> 0.
std::vector<std::pair<SpectralVector, SpectralVector>> lipschitz_pairs(std::size_t n, std::size_t count,
                                                                       std::uint64_t seed);

using DriftMap = std::function<SpectralVector(const SpectralVector&)>;

/// ((DF(x) y, y) - |y'|^2 - eps |x'|^2 |y|^2) / |y|^2 by central differences.
double form_bound_audit(const DriftMap& f, const SpectralVector& x, const SpectralVector& y, double epsilon);
/// Same with the pair ((-Delta)^{1/2} y, (-Delta)^{-1/2} y).
double form_bound_audit_e(const DriftMap& f, const SpectralVector& x, const SpectralVector& y, double epsilon);

struct FormAudit {
    double c_epsilon = 0.0;  // sampled max
    std::size_t census = 0;
};
FormAudit form_bound_batch(const DriftMap& f, const std::vector<std::pair<SpectralVector, SpectralVector>>& samples,
                           double epsilon, bool scaled);

}  // namespace kolmo
