#include "posthoc/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace posthoc {

std::pair<double, double> two_threshold_conditional_rates(Alpha a1, Alpha a2) {
    if (!(a1.value() < a2.value())) {
        throw std::domain_error("two_threshold_conditional_rates: requires a1 < a2");
    }
    // Given alpha = a1, p was at most a1, so the null is always rejected.
    const double rate_a2 = (a2.value() - a1.value()) / (1.0 - a1.value());
    return {1.0, rate_a2};
}

double two_threshold_expected_ratio(Alpha a1, Alpha a2) {
    if (a1.value() > a2.value()) {
        throw std::domain_error("two_threshold_expected_ratio: requires a1 <= a2");
    }
    return 1.0 + (a2.value() - a1.value()) / a2.value();
}

double continuum_truncated_expected_ratio(Alpha cap_c, double floor_eps) {
    if (!(floor_eps > 0.0) || floor_eps > cap_c.value()) {
        throw std::domain_error(
            "continuum_truncated_expected_ratio: requires 0 < floor_eps <= cap_c");
    }
    return 1.0 + std::log(cap_c.value() / floor_eps);
}

double fixed_alpha_expected_ratio(Alpha) {
    return 1.0;
}

double step_greedy_expected_ratio(const std::vector<Alpha>& thresholds) {
    if (thresholds.empty()) {
        throw std::domain_error("step_greedy_expected_ratio: empty threshold list");
    }
    double total = 0.0;
    double prev = 0.0;
    for (Alpha t : thresholds) {
        total += (t.value() - prev) / t.value();
        prev = t.value();
    }
    return total;
}

namespace {

ClosedFormReport fixed_report(Alpha a) {
    ClosedFormReport report;
    report.derivation = Derivation::Fixed;
    report.rates = {{a.value(), a.value()}};
    report.expected_ratio = fixed_alpha_expected_ratio(a);
    return report;
}

ClosedFormReport two_threshold_report(Alpha a1, Alpha a2) {
    ClosedFormReport report;
    report.derivation = Derivation::TwoThreshold;
    const auto [r1, r2] = two_threshold_conditional_rates(a1, a2);
    report.rates = {{a1.value(), r1}, {a2.value(), r2}};
    report.expected_ratio = two_threshold_expected_ratio(a1, a2);
    return report;
}

ClosedFormReport step_greedy_report(const std::vector<Alpha>& thresholds) {
    ClosedFormReport report;
    report.derivation = Derivation::StepGreedy;
    const std::size_t k = thresholds.size();
    double prev = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double a = thresholds[j].value();
        // Interior thresholds always reject; the last one rejects only for
        // p in (a_{k-1}, a_k].
        const double rate = j + 1 < k ? 1.0 : (a - prev) / (1.0 - prev);
        report.rates.push_back({a, rate});
        prev = thresholds[j].value();
    }
    report.expected_ratio = step_greedy_expected_ratio(thresholds);
    return report;
}

ClosedFormReport continuum_report(Alpha cap_c, double floor_eps) {
    ClosedFormReport report;
    if (floor_eps == 0.0) {
        report.derivation = Derivation::ContinuumLimit;
        report.diverges = true;
        report.rates = {{cap_c.value(), 0.0}};
        report.note = "every a < cap has cond_rate 1 and r_a = 1/a; "
                      "E r_alpha = 1 + ln(cap/eps) -> infinity as eps -> 0";
        return report;
    }
    report.derivation = Derivation::ContinuumTruncated;
    if (floor_eps == cap_c.value()) {
        // The floored rule degenerates to Fixed(cap).
        report.degenerate = true;
        report.rates = {{cap_c.value(), cap_c.value()}};
    } else {
        report.rates = {{floor_eps, 1.0}, {cap_c.value(), 0.0}};
        report.note = "every a in [eps, cap) has cond_rate 1 and r_a = 1/a";
    }
    report.expected_ratio = continuum_truncated_expected_ratio(cap_c, floor_eps);
    return report;
}

}  // namespace

ClosedFormReport closed_form_for(const StrategySpec& spec) {
    return std::visit(
        [](const auto& s) -> ClosedFormReport {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FixedStrategy>) {
                return fixed_report(s.a);
            } else if constexpr (std::is_same_v<T, TwoThresholdStrategy>) {
                return two_threshold_report(s.a1, s.a2);
            } else if constexpr (std::is_same_v<T, StepGreedyStrategy>) {
                return step_greedy_report(s.thresholds);
            } else {
                static_assert(std::is_same_v<T, ContinuumGreedyStrategy>);
                return continuum_report(s.cap_c, s.floor_eps);
            }
        },
        spec);
}

std::string to_string(Derivation d) {
    switch (d) {
        case Derivation::Fixed: return "fixed";
        case Derivation::TwoThreshold: return "two_threshold";
        case Derivation::StepGreedy: return "step_greedy";
        case Derivation::ContinuumTruncated: return "continuum_truncated";
        case Derivation::ContinuumLimit: return "continuum_limit";
    }
    throw std::logic_error("to_string: unknown derivation");
}

}  // namespace posthoc
