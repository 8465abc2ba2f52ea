#pragma once

#include <cmath>
#include <cstdint>

namespace posthoc {

// Neumaier-compensated running sum. The phi/alpha stream spans several orders
// of magnitude in the continuum case, where a plain sum loses the small terms.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    void merge(const CompensatedSum& other) {
        add(other.sum_);
        add(other.carry_);
    }

    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

// Streaming first and second moments over a fixed count of terms.
class MomentAccumulator {
public:
    void add(double x) {
        n_ += 1;
        sum_.add(x);
        sum_sq_.add(x * x);
    }

    void merge(const MomentAccumulator& other) {
        n_ += other.n_;
        sum_.merge(other.sum_);
        sum_sq_.merge(other.sum_sq_);
    }

    std::uint64_t count() const { return n_; }
    double sum() const { return sum_.value(); }

    double mean() const { return n_ == 0 ? 0.0 : sum_.value() / static_cast<double>(n_); }

    // Unbiased sample variance; 0 when fewer than two terms.
    double sample_variance() const {
        if (n_ < 2) {
            return 0.0;
        }
        const double n = static_cast<double>(n_);
        const double centered = sum_sq_.value() - sum_.value() * sum_.value() / n;
        return centered > 0.0 ? centered / (n - 1.0) : 0.0;
    }

    double std_error() const {
        return n_ == 0 ? 0.0 : std::sqrt(sample_variance() / static_cast<double>(n_));
    }

private:
    std::uint64_t n_ = 0;
    CompensatedSum sum_;
    CompensatedSum sum_sq_;
};

}  // namespace posthoc
