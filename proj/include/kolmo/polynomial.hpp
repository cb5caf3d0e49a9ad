#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace kolmo {

/// Real polynomial c_0 + c_1 x + ... + c_d x^d.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> c);
    Polynomial(std::initializer_list<double> c) : Polynomial(std::vector<double>(c)) {}

    double operator()(double x) const {
        double s = 0.0;
        for (std::size_t i = c_.size(); i-- > 0;) s = s * x + c_[i];
        return s;
    }

    Polynomial derivative() const;
    /// Degree, with the zero polynomial reported as degree 0.
    std::size_t degree() const { return c_.empty() ? 0 : c_.size() - 1; }
    bool is_zero() const { return c_.empty(); }
    double leading() const { return c_.empty() ? 0.0 : c_.back(); }
    const std::vector<double>& coefficients() const { return c_; }
    /// sum |c_i| R^i, an upper bound for |p| on [-R, R].
    double abs_bound(double radius) const;

private:
    std::vector<double> c_;  // trailing zeros stripped
};

}  // namespace kolmo
