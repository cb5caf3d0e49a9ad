#include "kolmo/polynomial.hpp"

#include <cmath>

namespace kolmo {

Polynomial::Polynomial(std::vector<double> c) : c_(std::move(c)) {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

Polynomial Polynomial::derivative() const {
    if (c_.size() <= 1) return Polynomial();
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
    return Polynomial(std::move(d));
}

double Polynomial::abs_bound(double radius) const {
    double s = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;) s = s * radius + std::abs(c_[i]);
    return s;
}

}  // namespace kolmo
