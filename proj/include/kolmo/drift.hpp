#pragma once

// Nonlinearity F = F_Phi + G_Psi, its regularized Galerkin version F_N and
// sampled audits of the structural conditions on Psi and Phi.

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kolmo/noise.hpp"
#include "kolmo/polynomial.hpp"
#include "kolmo/spectral.hpp"

namespace kolmo {

inline constexpr double kNoLevel = std::numeric_limits<double>::infinity();

/// Quintic smoothstep 6s^5 - 15s^4 + 10s^3 clamped to [0,1], and its derivative.
double smoothstep(double s);
double smoothstep_d1(double s);

/// C^2 cutoff: 1 on [-1/2,1/2], 0 outside (-1,1).
double cutoff_profile(double t);
double cutoff_profile_d1(double t);
double cutoff_profile_d2(double t);

/// C^2 odd truncation: identity on [-1,1], (3/2) sign y for |y| >= 2, 0 <= theta' <= 1.
double truncation_profile(double y);
double truncation_profile_d1(double y);

/// theta_N(y) = N theta(y/N).
inline double truncate_level(double y, double level) {
    return std::abs(y) <= level ? y : level * truncation_profile(y / level);
}

/// Standard bump exp(-1/(1-y^2)) with a fixed Gauss-Legendre rule.
struct Mollifier {
    std::vector<double> nodes;    // 32 points on (-1,1)
    std::vector<double> weights;  // delta(y_i) w_i, normalized to sum to 1
    double mass = 0.0;            // integral of the raw bump, 64-point rule
    double m2 = 0.0;              // integral y^2 delta(y) dy, 64-point rule
    std::vector<double> moments;  // discrete moments sum weights_i y_i^l

    static const Mollifier& standard();
};

/// Psi^(N)(x) = Psi(x) theta(x/N); level = kNoLevel means no cutoff.
class PsiMap {
public:
    PsiMap() = default;
    explicit PsiMap(Polynomial psi, double level = kNoLevel);

    double value(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    bool is_zero() const { return psi_.is_zero(); }
    double level() const { return level_; }
    const Polynomial& polynomial() const { return psi_; }

private:
    Polynomial psi_, dpsi_, ddpsi_;
    double level_ = kNoLevel;
};

/// (theta_N o phi)_beta(r, x): polynomial reaction with optional truncation and
/// r-dependent mollification of width beta sqrt(r(1-r)).
class ReactionMap {
public:
    ReactionMap() = default;
    explicit ReactionMap(Polynomial phi, double level = kNoLevel, double beta = 0.0);

    double value(double r, double x) const;
    /// Mollification width at r.
    double width(double r) const;
    /// Unmollified truncated value theta_N(phi(x)).
    double base(double x) const { return truncate_level(phi_(x), level_); }

    ReactionMap with_beta(double beta) const { return ReactionMap(phi_, level_, beta); }
    bool is_zero() const { return phi_.is_zero(); }
    double level() const { return level_; }
    double beta() const { return beta_; }
    const Polynomial& polynomial() const { return phi_; }

private:
    double mollified(double x, double s) const;

    Polynomial phi_;
    std::vector<Polynomial> taylor_;  // phi^(l)/l!
    double level_ = kNoLevel;
    double beta_ = 0.0;
};

/// Constants in the structural conditions; Phi is r-independent so the
/// L^1 norms of h_0, h_1, g_0 equal their values.
struct ConditionConstants {
    double C = 0.0;              // (Psi)
    double g = 0.0;              // (Phi1)
    double q1 = kNoLevel;
    double q2 = 1.0;
    double h0 = 0.0;             // (Phi2)
    double h1 = 0.0;
    double rho0 = 1.0;           // (Phi3)
    double g0 = 0.0;
    double g1 = 0.0;
    double p1 = kNoLevel;
};

struct NonlinearityModel {
    std::string name;
    Polynomial psi;
    Polynomial phi;
    ConditionConstants constants;

    /// "burgers", "ginzburg-landau", "mixed", or "ou" for F = 0.
    static NonlinearityModel preset(const std::string& name);
    /// Custom polynomials; constants are filled from audit_conditions.
    static NonlinearityModel custom(std::string name, Polynomial psi, Polynomial phi);
    void validate() const;
};

std::vector<std::string> preset_names();

/// x |-> P_n(x' psi'(x) + Phi(r, x)) evaluated on a basis grid.
class DriftEvaluator {
public:
    DriftEvaluator(std::shared_ptr<const Basis> basis, PsiMap psi, ReactionMap phi);

    std::size_t modes() const { return basis_->modes(); }
    const Basis& basis() const { return *basis_; }
    std::shared_ptr<const Basis> basis_ptr() const { return basis_; }
    bool is_zero() const { return psi_.is_zero() && phi_.is_zero(); }
    const PsiMap& psi() const { return psi_; }
    const ReactionMap& phi() const { return phi_; }

    /// a has at most N entries; out has n <= N entries. Thread safe.
    void apply(std::span<const double> a, std::span<double> out) const;
    SpectralVector operator()(const SpectralVector& x) const;
    SpectralVector operator()(const SpectralVector& x, std::size_t n) const;

private:
    std::shared_ptr<const Basis> basis_;
    PsiMap psi_;
    ReactionMap phi_;
};

SpectralVector eval_GPsi(const Basis& basis, const SpectralVector& x, const PsiMap& psi);
SpectralVector eval_GPsi(const SpectralVector& x, const Polynomial& psi);
SpectralVector eval_FPhi(const Basis& basis, const SpectralVector& x, const ReactionMap& phi);
SpectralVector eval_FPhi(const SpectralVector& x, const Polynomial& phi);
SpectralVector eval_F(const Basis& basis, const SpectralVector& x, const NonlinearityModel& model);
SpectralVector eval_F(const SpectralVector& x, const NonlinearityModel& model);

PsiMap cutoff_psi(const Polynomial& psi, double level);
ReactionMap truncate_phi(const Polynomial& phi, double level);
ReactionMap mollify_phi(const ReactionMap& phi, double beta);

class SelectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BetaSelection {
    double beta = 0.0;
    int ladder_index = 0;     // beta = 2^{-ladder_index}
    double sup_error = 0.0;   // sampled sup of the grid L^2 difference
    std::size_t probes = 0;
};

inline constexpr int kBetaLadderMax = 20;
inline constexpr std::size_t kBetaProbes = 200;
inline constexpr std::uint64_t kBetaProbeSeed = 0x5eed0b17a11ULL;

/// Largest beta in {2^-1..2^-20} with sup |F_phiN - F_(phiN)_beta|_2 <= 1/N on the probe ball.
BetaSelection select_beta(const ReactionMap& phiN, std::size_t n, double radius,
                          std::uint64_t seed = kBetaProbeSeed);

/// Betas for increasing levels, forced non-increasing by a running minimum.
struct BetaSchedule {
    std::vector<std::size_t> levels;
    std::vector<double> raw;
    std::vector<double> beta;
    bool raw_monotone = true;
};
BetaSchedule beta_schedule(const NonlinearityModel& model, const std::vector<std::size_t>& levels);

struct RegularizedDrift {
    std::size_t n = 0;
    double psi_level = kNoLevel;
    double phi_level = kNoLevel;
    double beta = 0.0;
    BetaSelection selection;
    std::shared_ptr<const DriftEvaluator> eval;

    SpectralVector operator()(const SpectralVector& x) const { return (*eval)(x); }
    bool is_zero() const { return eval->is_zero(); }
};

/// F_N = F_(Phi_N)_beta_N + G_Psi_N with cutoff and truncation at level N.
/// beta_override > 0 skips the ladder.
RegularizedDrift build_FN(const NonlinearityModel& model, const NoiseSpec& noise, std::size_t n,
                          double beta_override = 0.0);
/// Same with a given grid size.
RegularizedDrift build_FN(const NonlinearityModel& model, const NoiseSpec& noise,
                          std::shared_ptr<const Basis> basis, double beta_override = 0.0);

struct ConvergenceRow {
    std::size_t n = 0;
    double sup = 0.0;
    double mean = 0.0;
};
struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool decreasing = true;  // each doubling within 10% slack
};

/// sup over probes of |P_N F(x) - F_N(P_N x)|_2. Probes may have more modes
/// than any N; F(x) is evaluated on a grid fine enough for the probes.
ConvergenceReport convergence_report(const NonlinearityModel& model, const NoiseSpec& noise,
                                     const std::vector<std::size_t>& levels,
                                     const std::vector<SpectralVector>& probes);

struct AuditBox {
    double r0 = 0.01, r1 = 0.99;
    double x0 = -20.0, x1 = 20.0;
    std::size_t nr = 9, nx = 801;
};

struct SamplePoint {
    double r = 0.0;
    double x = 0.0;
    double value = 0.0;
};

struct ConditionAudit {
    std::string condition;
    bool holds = true;
    std::vector<std::pair<std::string, double>> constants;
    std::optional<SamplePoint> counterexample;
    std::string note;

    double constant(const std::string& key) const;
};

struct AuditReport {
    std::vector<ConditionAudit> conditions;
    /// Phi is a polynomial of odd degree with negative leading coefficient.
    bool odd_negative_polynomial = false;

    const ConditionAudit& get(const std::string& condition) const;
    bool all_hold() const;
};

std::vector<AuditBox> default_audit_boxes();
AuditReport audit_conditions(const NonlinearityModel& model, const std::vector<AuditBox>& boxes);
AuditReport audit_conditions(const NonlinearityModel& model);

}  // namespace kolmo
