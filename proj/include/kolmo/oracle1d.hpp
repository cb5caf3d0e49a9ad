#pragma once

// One-mode resolvent of L_1 u = (alpha_1/2) u'' + (-pi^2 x + F_1(x)) u' on a
// truncated line, with an exponentially fitted tridiagonal generator.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "kolmo/noise.hpp"
#include "kolmo/drift.hpp"
#include "kolmo/semigroup.hpp"

namespace kolmo {

using ScalarMap = std::function<double(double)>;

/// Smallest R with rho(R) < 1e-16, rounded up to a multiple of 0.5.
double truncation_radius(double alpha1);

struct Mesh1D {
    double R = 0.0;
    double alpha = 0.0;
    std::vector<double> x;    // uniform on [-R, R]
    std::vector<double> rho;  // exp(-pi^2 x^2 / alpha)

    std::size_t size() const { return x.size(); }
    double h() const { return 2.0 * R / static_cast<double>(x.size() - 1); }
    std::vector<double> sample(const ScalarMap& f) const;

    static Mesh1D build(double alpha1, std::size_t n = 2001, double R = 0.0);
};

/// B(z) = z / (e^z - 1).
double bernoulli_weight(double z);

class DiscreteResolvent {
public:
    /// F1 empty means zero. Throws std::logic_error if the generator is not an M-matrix.
    DiscreteResolvent(Mesh1D mesh, ScalarMap F1 = {});

    const Mesh1D& mesh() const { return mesh_; }
    /// L_h u_i = up_i (u_{i+1} - u_i) + down_i (u_{i-1} - u_i).
    const std::vector<double>& up() const { return up_; }
    const std::vector<double>& down() const { return down_; }
    double drift(double x) const;

    std::vector<double> apply_L(std::span<const double> u) const;
    /// (lambda - L_h) u = f.
    std::vector<double> solve(std::span<const double> f, double lambda) const;
    std::vector<double> solve(const ScalarMap& f, double lambda) const;
    bool is_m_matrix() const;
    /// Invariant probability of the fitted chain (detailed balance), as node masses.
    std::vector<double> stationary_masses() const;

private:
    Mesh1D mesh_;
    ScalarMap F1_;
    std::vector<double> up_, down_;
};

/// max |R_lambda f - R_mu f - (mu - lambda) R_lambda R_mu f| / max(1, sup|R_lambda f|).
double resolvent_identity_residual(const DiscreteResolvent& op, std::span<const double> f, double lambda, double mu);
/// max |lambda R_lambda 1 - 1|.
double markov_residual(const DiscreteResolvent& op, double lambda);

/// sum_i pi_i f(x_i) for the stationary masses.
double stationary_expectation(const DiscreteResolvent& op, const ScalarMap& f);

/// sup over the mesh of (L_1 V)/V with the drift of the operator, continuous formula.
double weight_rate(const DiscreteResolvent& op, const ScalarMap& V, const ScalarMap& dV, const ScalarMap& d2V);

struct WeightedBound {
    bool skipped = false;
    std::string diagnostic;
    double condition_margin = 0.0;  // min_i (lambda_V V - L_h V)_i / V_i
    double lambda_v = 0.0;          // rate used in the bound
    double lhs = 0.0;               // max |u| / V
    double rhs = 0.0;               // max |f| / V / (lambda - lambda_V)
    double margin = 0.0;            // rhs - lhs
};
/// A discrete defect of the weight condition up to the mesh tolerance is
/// absorbed into lambda_V; larger defects skip the check.
WeightedBound weighted_bound_check(const DiscreteResolvent& op, const ScalarMap& f, double lambda,
                                   const ScalarMap& V, double lambda_v);

struct GradientBound {
    double lhs = 0.0;        // max |u'| / V1
    double rhs = 0.0;        // max |f'| / V1 / (lambda - lambda_V1)
    double tolerance = 0.0;  // mesh tolerance
    double margin = 0.0;     // rhs + tolerance - lhs
    double quotient_sup = 0.0;  // sup over node pairs of |f_i - f_j| / (|x_i - x_j| max(V1_i, V1_j))
    double gradient_sup = 0.0;  // max |f'| / V1
    double quotient_gap = 0.0;  // |quotient_sup - gradient_sup|
    double quotient_tolerance = 0.0;  // h max |V1'|/V1 gradient_sup + mesh tolerance
};
/// Pairs are restricted to the level set {V1 <= level}; level <= 0 uses the whole mesh.
GradientBound gradient_bound_check(const DiscreteResolvent& op, const ScalarMap& f, double lambda,
                                   const ScalarMap& V1, double lambda_v1, double level = 0.0);
/// sup over the mesh of (L_1 V1)/V1 + b'(x), the rate for the differentiated equation.
double gradient_weight_rate(const DiscreteResolvent& op, const ScalarMap& V1, const ScalarMap& dV1,
                            const ScalarMap& d2V1);

/// Central differences, one-sided at the ends.
std::vector<double> mesh_derivative(const Mesh1D& mesh, std::span<const double> u);

/// F_1(c) = (F_N(c eta_1), eta_1) for a one-mode drift evaluator.
ScalarMap scalar_drift(std::shared_ptr<const DriftEvaluator> drift);

struct CrossValidation {
    double oracle = 0.0;
    ResolventEstimate mc;
    double discrepancy = 0.0;
    double tolerance = 0.0;  // 3 se + mesh tolerance
    bool pass = false;
};
/// f acts on the first coefficient; the oracle value is interpolated at x0.
CrossValidation cross_validate(const ScalarMap& f, double x0, double lambda, const NoiseSpec& noise,
                               std::shared_ptr<const DriftEvaluator> drift, const McConfig& mc,
                               std::size_t nodes = 2001, double mesh_tolerance = 1e-3);

double interpolate(const Mesh1D& mesh, std::span<const double> u, double x);

/// Two columns x,u.
void write_csv(const Mesh1D& mesh, std::span<const double> u, std::ostream& out);

}  // namespace kolmo
