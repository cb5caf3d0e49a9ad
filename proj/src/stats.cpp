#include "kolmo/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace kolmo {

Estimate mean_estimate(std::span<const double> samples) {
    Estimate e;
    double sum = 0.0;
    for (double v : samples) {
        if (std::isnan(v)) continue;
        sum += v;
        ++e.K;
    }
    if (e.K == 0) throw std::invalid_argument("mean of an empty sample");
    e.value = sum / static_cast<double>(e.K);
    if (e.K < 2) return e;
    double ss = 0.0;
    for (double v : samples) {
        if (!std::isnan(v)) ss += (v - e.value) * (v - e.value);
    }
    e.se = std::sqrt(ss / static_cast<double>(e.K - 1) / static_cast<double>(e.K));
    return e;
}

Estimate batch_means(std::span<const double> series, std::size_t batches) {
    if (batches < 2 || series.size() < batches) throw std::invalid_argument("batch means needs >= 2 nonempty batches");
    const std::size_t per = series.size() / batches;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t i = b * per; i < (b + 1) * per; ++i) s += series[i];
        means[b] = s / static_cast<double>(per);
    }
    return mean_estimate(means);
}

BatchAccumulator::BatchAccumulator(std::size_t total, std::size_t batches)
    : per_batch_(batches == 0 ? 0 : total / batches), batches_(batches) {
    if (batches < 2 || per_batch_ == 0) throw std::invalid_argument("batch means needs >= 2 nonempty batches");
    means_.reserve(batches);
}

void BatchAccumulator::add(double v) {
    if (means_.size() == batches_) return;
    current_ += v;
    if (++count_ == per_batch_) {
        means_.push_back(current_ / static_cast<double>(per_batch_));
        current_ = 0.0;
        count_ = 0;
    }
}

Estimate BatchAccumulator::result() const { return mean_estimate(means_); }

}  // namespace kolmo
