#include "kolmo/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace kolmo {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
}  // namespace

double basis_eval(std::size_t k, double r) {
    return kSqrt2 * std::sin(kPi * static_cast<double>(k) * r);
}

SpectralVector SpectralVector::mode(std::size_t n, std::size_t k, double amp) {
    if (k < 1 || k > n) throw DimensionError("mode index out of range: " + std::to_string(k));
    SpectralVector v(n);
    v[k - 1] = amp;
    return v;
}

SpectralVector& SpectralVector::operator+=(const SpectralVector& o) {
    if (o.size() > a_.size()) a_.resize(o.size(), 0.0);
    for (std::size_t i = 0; i < o.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

SpectralVector& SpectralVector::operator-=(const SpectralVector& o) {
    if (o.size() > a_.size()) a_.resize(o.size(), 0.0);
    for (std::size_t i = 0; i < o.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

SpectralVector& SpectralVector::operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
}

SpectralVector operator+(SpectralVector a, const SpectralVector& b) { return a += b; }
SpectralVector operator-(SpectralVector a, const SpectralVector& b) { return a -= b; }
SpectralVector operator*(double s, SpectralVector a) { return a *= s; }

double dot(const SpectralVector& a, const SpectralVector& b) {
    const std::size_t n = std::min(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(const SpectralVector& x) { return std::sqrt(dot(x, x)); }

double h1_seminorm(const SpectralVector& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wk = kPi * static_cast<double>(i + 1);
        s += wk * wk * x[i] * x[i];
    }
    return std::sqrt(s);
}

SpectralVector project(const SpectralVector& x, std::size_t n) {
    SpectralVector out(n);
    for (std::size_t i = 0; i < std::min(n, x.size()); ++i) out[i] = x[i];
    return out;
}

SpectralVector frac_laplacian_scale(const SpectralVector& x, int l) {
    SpectralVector out = x;
    if (l == 0) return out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] *= std::pow(kPi * static_cast<double>(i + 1), -static_cast<double>(l));
    }
    return out;
}

SpectralVector laplacian(const SpectralVector& x) {
    SpectralVector out = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wk = kPi * static_cast<double>(i + 1);
        out[i] *= -wk * wk;
    }
    return out;
}

Basis::Basis(std::size_t n, std::size_t m) : n_(n), m_(m == 0 ? 8 * n : m) {
    if (n_ == 0) throw DimensionError("basis needs at least one mode");
    if (m_ < 4 * n_) {
        throw DimensionError("grid size M=" + std::to_string(m_) + " below 4N=" +
                             std::to_string(4 * n_));
    }
    w_ = 1.0 / static_cast<double>(m_ + 1);
    nodes_.resize(m_);
    sin_.resize(m_ * n_);
    dcos_.resize(m_ * n_);
    sin_t_.resize(m_ * n_);
    dcos_t_.resize(m_ * n_);
    for (std::size_t j = 0; j < m_; ++j) {
        nodes_[j] = static_cast<double>(j + 1) * w_;
        for (std::size_t k = 1; k <= n_; ++k) {
            // Reduce the angle through the integer product to keep the table
            // symmetric to the last bit.
            const double arg = kPi * static_cast<double>((k * (j + 1)) % (2 * (m_ + 1))) * w_;
            sin_[j * n_ + k - 1] = kSqrt2 * std::sin(arg);
            dcos_[j * n_ + k - 1] = kSqrt2 * kPi * static_cast<double>(k) * std::cos(arg);
            sin_t_[(k - 1) * m_ + j] = sin_[j * n_ + k - 1];
            dcos_t_[(k - 1) * m_ + j] = dcos_[j * n_ + k - 1];
        }
    }
}

void Basis::synthesize_into(std::span<const double> a, std::span<double> v) const {
    const std::size_t n = std::min(a.size(), n_);
    std::fill(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m_), 0.0);
    double* out = v.data();
    for (std::size_t k = 0; k < n; ++k) {
        const double* col = &sin_t_[k * m_];
        const double ak = a[k];
        for (std::size_t j = 0; j < m_; ++j) out[j] += col[j] * ak;
    }
}

void Basis::derivative_into(std::span<const double> a, std::span<double> v) const {
    const std::size_t n = std::min(a.size(), n_);
    std::fill(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m_), 0.0);
    double* out = v.data();
    for (std::size_t k = 0; k < n; ++k) {
        const double* col = &dcos_t_[k * m_];
        const double ak = a[k];
        for (std::size_t j = 0; j < m_; ++j) out[j] += col[j] * ak;
    }
}

void Basis::analyze_into(std::span<const double> v, std::span<double> out) const {
    const std::size_t n = out.size();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < m_; ++j) {
        const double* row = &sin_[j * n_];
        const double vj = v[j];
        for (std::size_t k = 0; k < n; ++k) out[k] += row[k] * vj;
    }
    for (double& o : out) o *= w_;
}

GridFunction Basis::synthesize(const SpectralVector& x) const {
    if (x.size() > n_) throw DimensionError("vector has more modes than the basis");
    GridFunction g(m_);
    synthesize_into(x.span(), g.span());
    return g;
}

GridFunction Basis::derivative_grid(const SpectralVector& x) const {
    if (x.size() > n_) throw DimensionError("vector has more modes than the basis");
    GridFunction g(m_);
    derivative_into(x.span(), g.span());
    return g;
}

SpectralVector Basis::analyze(const GridFunction& g, std::size_t n) const {
    if (g.size() != m_) throw DimensionError("grid function size does not match basis grid");
    if (n > m_) {
        throw DimensionError("cannot analyze onto " + std::to_string(n) + " modes from " +
                             std::to_string(m_) + " nodes");
    }
    SpectralVector out(n);
    const std::size_t tabled = std::min(n, n_);
    analyze_into(g.span(), out.span().subspan(0, tabled));
    for (std::size_t k = n_ + 1; k <= n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < m_; ++j) s += g[j] * basis_eval(k, nodes_[j]);
        out[k - 1] = s * w_;
    }
    return out;
}

double Basis::grid_dot(std::span<const double> f, std::span<const double> g) const {
    double s = 0.0;
    for (std::size_t j = 0; j < m_; ++j) s += f[j] * g[j];
    return s * w_;
}

double Basis::lq_power(const SpectralVector& x, double q) const {
    const GridFunction v = synthesize(x);
    double s = 0.0;
    for (double vj : v.values()) s += std::pow(std::abs(vj), q);
    return s * w_;
}

double Basis::norm_p(const SpectralVector& x, double p) const {
    if (!(p >= 1.0)) throw ParameterError("L^p norm needs p >= 1");
    if (std::isinf(p)) {
        const GridFunction v = synthesize(x);
        double mx = 0.0;
        for (double vj : v.values()) mx = std::max(mx, std::abs(vj));
        return mx;
    }
    if (p == 2.0) return l2_norm(x);
    return std::pow(lq_power(x, p), 1.0 / p);
}

double Basis::h1_seminorm_grid(const SpectralVector& x) const {
    const GridFunction d = derivative_grid(x);
    double s = 0.0;
    for (double v : d.values()) s += v * v;
    // endpoint values of x' = sum a_k sqrt2 pi k cos(pi k r): r=0 and r=1
    double d0 = 0.0;
    double d1 = 0.0;
    for (std::size_t k = 1; k <= x.size(); ++k) {
        const double c = kSqrt2 * kPi * static_cast<double>(k) * x[k - 1];
        d0 += c;
        d1 += (k % 2 == 0) ? c : -c;
    }
    s += 0.5 * (d0 * d0 + d1 * d1);
    return std::sqrt(s * w_);
}

}  // namespace kolmo
