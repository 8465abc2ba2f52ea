#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "posthoc/strategies.hpp"
#include "posthoc/types.hpp"

namespace posthoc {

enum class Derivation {
    Fixed,
    TwoThreshold,
    StepGreedy,
    ContinuumTruncated,
    ContinuumLimit,
};

struct ClosedFormRate {
    double a;
    double cond_rate;
};

// Exact values under the exact-uniform null. A divergent expectation is an
// explicit flag, never a floating-point infinity: "diverges" and "overflowed"
// must stay distinguishable.
struct ClosedFormReport {
    Derivation derivation;
    std::vector<ClosedFormRate> rates;
    std::optional<double> expected_ratio;  // absent iff diverges
    bool diverges = false;
    bool degenerate = false;  // a1 == a2, collapses to a fixed-level test
    std::optional<std::string> note;
};

// Conditional type I error rates for the two-threshold model:
// (1, (a2-a1)/(1-a1)). Requires 0 < a1 < a2 <= 1 and a1 < 1.
std::pair<double, double> two_threshold_conditional_rates(Alpha a1, Alpha a2);

// E r_alpha = 1 + (a2-a1)/a2 for the two-threshold model; a1 == a2 is the
// degenerate fixed-level case and returns 1.
double two_threshold_expected_ratio(Alpha a1, Alpha a2);

// E r_alpha for the floored continuum model: 1 + ln(cap_c/floor_eps).
// The mass below the floor contributes eps*(1/eps) = 1; the alpha = p region
// contributes the integral of 1/x from eps to cap_c.
double continuum_truncated_expected_ratio(Alpha cap_c, double floor_eps);

// E r_alpha = 1 exactly for a prespecified threshold.
double fixed_alpha_expected_ratio(Alpha a);

// k-threshold generalization: E r_alpha = sum_j (a_j - a_{j-1})/a_j with
// a_0 = 0; equals the two-threshold form at k = 2.
double step_greedy_expected_ratio(const std::vector<Alpha>& thresholds);

// The full exact report for a strategy, as the `exact` command prints it.
// A continuum strategy with floor_eps == 0 yields the divergent limit report.
ClosedFormReport closed_form_for(const StrategySpec& spec);

std::string to_string(Derivation d);

}  // namespace posthoc
