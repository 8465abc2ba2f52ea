#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace posthoc {

// A p-value. Strictly positive: the null generators draw from (0,1], and a
// value of exactly 0 is a generator contract violation, not something to clamp.
class PValue {
public:
    explicit PValue(double v) : value_(v) {
        if (!(v > 0.0) || v > 1.0 || !std::isfinite(v)) {
            throw std::domain_error("p-value must lie in (0, 1], got " + std::to_string(v));
        }
    }
    double value() const { return value_; }

private:
    double value_;
};

// A significance threshold, 0 < alpha <= 1.
class Alpha {
public:
    explicit Alpha(double v) : value_(v) {
        if (!(v > 0.0) || v > 1.0 || !std::isfinite(v)) {
            throw std::domain_error("alpha must lie in (0, 1], got " + std::to_string(v));
        }
    }
    double value() const { return value_; }

    friend bool operator==(Alpha a, Alpha b) { return a.value_ == b.value_; }
    friend bool operator<(Alpha a, Alpha b) { return a.value_ < b.value_; }

private:
    double value_;
};

// An e-value: non-negative, finite. Large values are evidence against the null.
class EValue {
public:
    explicit EValue(double v) : value_(v) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::domain_error("e-value must be finite and >= 0, got " + std::to_string(v));
        }
    }
    double value() const { return value_; }

private:
    double value_;
};

// Rejection rule: ties count as rejections.
inline bool reject(PValue p, Alpha alpha) {
    return p.value() <= alpha.value();
}

// One simulated study: the raw data statistic, the evidence value the
// researcher saw, the threshold she selected, and the resulting decision.
// ratio_term is the rejection indicator divided by the selected threshold,
// whose average over trials is the expected discrepancy ratio.
struct TrialRecord {
    double statistic;
    PValue p;
    Alpha alpha;
    bool rejected;
    double ratio_term;
};

inline TrialRecord make_trial(double statistic, PValue p, Alpha alpha) {
    const bool rejected = reject(p, alpha);
    return TrialRecord{statistic, p, alpha, rejected, rejected ? 1.0 / alpha.value() : 0.0};
}

// Per-threshold summary: among trials that landed on threshold a, how often
// the null was rejected, and how that compares to a itself (difference d_a,
// ratio r_a). Rates are absent when no trial landed in the cell.
struct DiscrepancyRow {
    double a = 0.0;
    // Set for binned (continuum) rows; a is then the bin's geometric midpoint.
    std::optional<double> bin_low;
    std::optional<double> bin_high;
    std::uint64_t n_conditional = 0;
    std::uint64_t n_rejected = 0;
    std::optional<double> cond_rate;
    std::optional<double> d_a;
    std::optional<double> r_a;
};

inline DiscrepancyRow make_discrepancy_row(double a, std::uint64_t n_conditional,
                                           std::uint64_t n_rejected) {
    DiscrepancyRow row;
    row.a = a;
    row.n_conditional = n_conditional;
    row.n_rejected = n_rejected;
    if (n_conditional > 0) {
        const double rate = static_cast<double>(n_rejected) / static_cast<double>(n_conditional);
        row.cond_rate = rate;
        row.d_a = rate - a;
        row.r_a = rate / a;
    }
    return row;
}

}  // namespace posthoc
