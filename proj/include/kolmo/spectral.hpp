#pragma once

// Dirichlet sine basis on (0,1): coefficient and collocation representations,
// grid quadrature, norms, projections and spectral scalings.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace kolmo {

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// eta_k(r) = sqrt(2) sin(pi k r).
double basis_eval(std::size_t k, double r);

/// Coefficients a_1..a_N in the sine basis (index 0 holds a_1).
class SpectralVector {
public:
    SpectralVector() = default;
    explicit SpectralVector(std::size_t n) : a_(n, 0.0) {}
    explicit SpectralVector(std::vector<double> a) : a_(std::move(a)) {}
    SpectralVector(std::initializer_list<double> a) : a_(a) {}

    /// Unit vector amp * eta_k in E_n (k is 1-based).
    static SpectralVector mode(std::size_t n, std::size_t k, double amp = 1.0);

    std::size_t size() const { return a_.size(); }
    double operator[](std::size_t i) const { return a_[i]; }
    double& operator[](std::size_t i) { return a_[i]; }
    /// Coefficient of eta_k, zero beyond the stored modes.
    double coeff(std::size_t k) const { return k >= 1 && k <= a_.size() ? a_[k - 1] : 0.0; }

    std::span<const double> span() const { return a_; }
    std::span<double> span() { return a_; }
    const std::vector<double>& values() const { return a_; }

    SpectralVector& operator+=(const SpectralVector& o);
    SpectralVector& operator-=(const SpectralVector& o);
    SpectralVector& operator*=(double s);

    bool operator==(const SpectralVector&) const = default;

private:
    std::vector<double> a_;
};

SpectralVector operator+(SpectralVector a, const SpectralVector& b);
SpectralVector operator-(SpectralVector a, const SpectralVector& b);
SpectralVector operator*(double s, SpectralVector a);

/// L2 inner product; vectors of different length are zero-padded.
double dot(const SpectralVector& a, const SpectralVector& b);
double l2_norm(const SpectralVector& x);
/// |x'|_2 = sqrt(sum (pi k)^2 a_k^2).
double h1_seminorm(const SpectralVector& x);

/// P_n: keep the first n coefficients (pads with zeros when n > size).
SpectralVector project(const SpectralVector& x, std::size_t n);
/// a_k -> (pi k)^{-l} a_k, i.e. (-Delta)^{-l/2}.
SpectralVector frac_laplacian_scale(const SpectralVector& x, int l);
/// a_k -> -(pi k)^2 a_k.
SpectralVector laplacian(const SpectralVector& x);

/// Values at the interior nodes r_j = j/(M+1), j = 1..M.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(std::size_t m) : v_(m, 0.0) {}
    explicit GridFunction(std::vector<double> v) : v_(std::move(v)) {}

    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t j) const { return v_[j]; }
    double& operator[](std::size_t j) { return v_[j]; }
    std::span<const double> span() const { return v_; }
    std::span<double> span() { return v_; }
    const std::vector<double>& values() const { return v_; }

private:
    std::vector<double> v_;
};

/// Sine basis truncated at N modes with an M-point interior collocation grid.
///
/// The rectangle rule with weight 1/(M+1) on the interior nodes is the
/// trapezoid rule on [0,1] for functions vanishing at the endpoints, and it
/// makes the first M sine modes exactly discretely orthonormal.
class Basis {
public:
    /// M defaults to 8N.
    explicit Basis(std::size_t n, std::size_t m = 0);

    std::size_t modes() const { return n_; }
    std::size_t grid_size() const { return m_; }
    double weight() const { return w_; }
    double node(std::size_t j) const { return static_cast<double>(j + 1) * w_; }
    std::span<const double> nodes() const { return nodes_; }

    /// eta_k(r_j), k = 1..N.
    double eta(std::size_t j, std::size_t k) const { return sin_[j * n_ + (k - 1)]; }

    GridFunction synthesize(const SpectralVector& x) const;
    SpectralVector analyze(const GridFunction& g, std::size_t n) const;
    SpectralVector analyze(const GridFunction& g) const { return analyze(g, n_); }
    GridFunction derivative_grid(const SpectralVector& x) const;

    /// Allocation-free kernels (x has at most N entries, out has M entries).
    void synthesize_into(std::span<const double> a, std::span<double> v) const;
    void derivative_into(std::span<const double> a, std::span<double> v) const;
    /// out has n <= N entries.
    void analyze_into(std::span<const double> v, std::span<double> out) const;

    /// Grid L^p norm; p = 2 uses Parseval, p = infinity the grid maximum.
    double norm_p(const SpectralVector& x, double p) const;
    /// |x|_q^q on the grid.
    double lq_power(const SpectralVector& x, double q) const;
    /// |x'|_2 by the trapezoid rule including the endpoint derivative values.
    double h1_seminorm_grid(const SpectralVector& x) const;

    /// Grid inner product w * sum_j f_j g_j.
    double grid_dot(std::span<const double> f, std::span<const double> g) const;

private:
    std::size_t n_;
    std::size_t m_;
    double w_;
    std::vector<double> nodes_;
    std::vector<double> sin_;  // m x n, eta_k(r_j)
    std::vector<double> dcos_; // m x n, eta_k'(r_j)
    std::vector<double> sin_t_;  // n x m transposes for the synthesis kernels
    std::vector<double> dcos_t_;
};

}  // namespace kolmo
