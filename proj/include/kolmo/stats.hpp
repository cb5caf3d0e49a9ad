#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kolmo {

struct Estimate {
    double value = 0.0;
    double se = 0.0;
    std::size_t K = 0;      // samples (paths or batches)
    double param = 0.0;     // t or lambda
};

/// Mean and standard error of iid samples; NaN entries are skipped.
Estimate mean_estimate(std::span<const double> samples);
/// Batch-means estimate of the mean of a correlated series.
Estimate batch_means(std::span<const double> series, std::size_t batches);

/// Running sums for a streamed series split into equal consecutive batches.
class BatchAccumulator {
public:
    BatchAccumulator(std::size_t total, std::size_t batches);
    void add(double v);
    Estimate result() const;

private:
    std::size_t per_batch_;
    std::size_t batches_;
    std::size_t count_ = 0;
    double current_ = 0.0;
    std::vector<double> means_;
};

}  // namespace kolmo
