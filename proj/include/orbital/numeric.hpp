#pragma once

#include <cmath>
#include <span>

namespace orbital {

/// Neumaier-compensated accumulator. Mass bookkeeping throughout the library
/// runs through this so that partition sums close to ~1 ulp instead of
/// drifting with the term count.
class NeumaierSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) noexcept {
    NeumaierSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

}  // namespace orbital
