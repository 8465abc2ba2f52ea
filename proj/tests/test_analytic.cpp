#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "posthoc/analytic.hpp"
#include "support/quadrature.hpp"

using posthoc::Alpha;
using posthoc::ClosedFormReport;
using posthoc::Derivation;

TEST_CASE("two-threshold conditional rates: headline case") {
    const auto [r1, r2] = posthoc::two_threshold_conditional_rates(Alpha(0.005), Alpha(0.05));
    CHECK(r1 == 1.0);
    CHECK(std::abs(r2 - 0.04522613065326633) < 1e-12);
}

TEST_CASE("two-threshold conditional rates agree with direct integration of the uniform law") {
    // Oracle: P(p <= a2 | p > a1) as a ratio of integrals of the uniform density.
    const auto density = [](double) { return 1.0; };
    const double a1 = 0.01;
    const double a2 = 0.05;
    const double numer = posthoc::test::integrate(density, a1, a2);
    const double denom = posthoc::test::integrate(density, a1, 1.0);
    const auto [r1, r2] = posthoc::two_threshold_conditional_rates(Alpha(a1), Alpha(a2));
    CHECK(r1 == 1.0);
    CHECK(std::abs(r2 - numer / denom) < 1e-9);
    CHECK(std::abs(r2 - 0.04040404040404040) < 1e-12);
}

TEST_CASE("two-threshold conditional rates: a2 = 1 rejects everything") {
    const auto [r1, r2] = posthoc::two_threshold_conditional_rates(Alpha(0.005), Alpha(1.0));
    CHECK(r1 == 1.0);
    CHECK(r2 == 1.0);
}

TEST_CASE("two-threshold conditional rates reject a1 >= a2") {
    CHECK_THROWS_AS(posthoc::two_threshold_conditional_rates(Alpha(0.05), Alpha(0.05)),
                    std::domain_error);
    CHECK_THROWS_AS(posthoc::two_threshold_conditional_rates(Alpha(0.1), Alpha(0.05)),
                    std::domain_error);
}

TEST_CASE("two-threshold expected ratio: closed cases") {
    CHECK(std::abs(posthoc::two_threshold_expected_ratio(Alpha(0.005), Alpha(0.05)) - 1.9) <
          1.9e-12);
    CHECK(std::abs(posthoc::two_threshold_expected_ratio(Alpha(0.01), Alpha(0.05)) - 1.8) <
          1e-12);
    // Degenerate a1 == a2 collapses to a fixed-level test.
    CHECK(posthoc::two_threshold_expected_ratio(Alpha(0.05), Alpha(0.05)) == 1.0);
    CHECK_THROWS_AS(posthoc::two_threshold_expected_ratio(Alpha(0.1), Alpha(0.05)),
                    std::domain_error);
}

TEST_CASE("two-threshold expected ratio re-derives from its decomposition") {
    // a1*(1/a1) + (a2-a1)*(1/a2) must reproduce 1 + (a2-a1)/a2.
    for (double a1 = 0.001; a1 < 0.2; a1 += 0.013) {
        for (double a2 = a1 + 0.01; a2 <= 1.0; a2 += 0.09) {
            const double decomposition = a1 * (1.0 / a1) + (a2 - a1) * (1.0 / a2);
            const double closed = posthoc::two_threshold_expected_ratio(Alpha(a1), Alpha(a2));
            CHECK(std::abs(decomposition - closed) < 1e-14);
            CHECK(closed > 1.0);
        }
    }
}

TEST_CASE("two-threshold expected ratio is monotone the right way") {
    // Decreasing in a1 at fixed a2.
    double prev = posthoc::two_threshold_expected_ratio(Alpha(0.001), Alpha(0.05));
    for (double a1 = 0.005; a1 < 0.05; a1 += 0.005) {
        const double cur = posthoc::two_threshold_expected_ratio(Alpha(a1), Alpha(0.05));
        CHECK(cur < prev);
        prev = cur;
    }
    // Conditional rate given a2 stays strictly below a2.
    for (double a1 = 0.001; a1 < 0.049; a1 += 0.006) {
        const auto [r1, r2] = posthoc::two_threshold_conditional_rates(Alpha(a1), Alpha(0.05));
        CHECK(r2 < 0.05);
    }
}

TEST_CASE("continuum truncated expected ratio: quadrature oracle") {
    // Oracle: floor mass eps * (1/eps) plus the integral of 1/x over [eps, C].
    const double cap = 0.05;
    const double eps = 1e-6;
    const double oracle =
        1.0 + posthoc::test::integrate([](double x) { return 1.0 / x; }, eps, cap, 1e-13);
    const double closed = posthoc::continuum_truncated_expected_ratio(Alpha(cap), eps);
    CHECK(std::abs(closed - oracle) < 1e-9);
    CHECK(std::abs(closed - 11.819778284410283) < 1e-12);
}

TEST_CASE("continuum truncated expected ratio: edges and identities") {
    CHECK(posthoc::continuum_truncated_expected_ratio(Alpha(0.05), 0.05) == 1.0);
    // Halving the floor adds exactly ln 2.
    const double base = posthoc::continuum_truncated_expected_ratio(Alpha(0.05), 1e-3);
    const double halved = posthoc::continuum_truncated_expected_ratio(Alpha(0.05), 5e-4);
    CHECK(std::abs((halved - base) - 0.6931471805599453) < 1e-12);
    CHECK_THROWS_AS(posthoc::continuum_truncated_expected_ratio(Alpha(0.05), 0.0),
                    std::domain_error);
    CHECK_THROWS_AS(posthoc::continuum_truncated_expected_ratio(Alpha(0.05), 0.06),
                    std::domain_error);
}

TEST_CASE("continuum divergence signature: geometric floor sweep grows by ln(ratio)") {
    const double ln10 = 2.302585092994046;
    double prev = posthoc::continuum_truncated_expected_ratio(Alpha(0.05), 1e-2);
    for (const double eps : {1e-3, 1e-4, 1e-5, 1e-6}) {
        const double cur = posthoc::continuum_truncated_expected_ratio(Alpha(0.05), eps);
        CHECK(std::abs((cur - prev) - ln10) < 1e-12);
        prev = cur;
    }
}

TEST_CASE("fixed alpha expected ratio is exactly 1") {
    CHECK(posthoc::fixed_alpha_expected_ratio(Alpha(0.05)) == 1.0);
    CHECK(posthoc::fixed_alpha_expected_ratio(Alpha(0.005)) == 1.0);
    CHECK(posthoc::fixed_alpha_expected_ratio(Alpha(1.0)) == 1.0);
}

TEST_CASE("step greedy expected ratio generalizes the two-threshold form") {
    CHECK(posthoc::step_greedy_expected_ratio({Alpha(0.05)}) == 1.0);
    const double two = posthoc::two_threshold_expected_ratio(Alpha(0.005), Alpha(0.05));
    const double step = posthoc::step_greedy_expected_ratio({Alpha(0.005), Alpha(0.05)});
    CHECK(step == two);
    // Adding a reachable middle threshold only increases the ratio.
    const double three =
        posthoc::step_greedy_expected_ratio({Alpha(0.005), Alpha(0.01), Alpha(0.05)});
    CHECK(three > two);
}

TEST_CASE("closed-form reports carry the right derivation and shape") {
    const auto fixed = posthoc::closed_form_for(posthoc::make_fixed(0.05));
    CHECK(fixed.derivation == Derivation::Fixed);
    CHECK(*fixed.expected_ratio == 1.0);
    REQUIRE(fixed.rates.size() == 1);
    CHECK(fixed.rates[0].cond_rate == 0.05);

    const auto two = posthoc::closed_form_for(posthoc::make_two_threshold(0.005, 0.05));
    CHECK(two.derivation == Derivation::TwoThreshold);
    CHECK(std::abs(*two.expected_ratio - 1.9) < 1.9e-12);
    REQUIRE(two.rates.size() == 2);
    CHECK(two.rates[0].cond_rate == 1.0);

    const auto step = posthoc::closed_form_for(posthoc::make_step_greedy({0.005, 0.05}));
    CHECK(step.derivation == Derivation::StepGreedy);
    CHECK(*step.expected_ratio == *two.expected_ratio);
    CHECK(step.rates[1].cond_rate == two.rates[1].cond_rate);

    const auto cont = posthoc::closed_form_for(posthoc::make_continuum_greedy(0.05, 1e-4));
    CHECK(cont.derivation == Derivation::ContinuumTruncated);
    CHECK(std::abs(*cont.expected_ratio - 7.214608098422191) < 1e-12);
    CHECK_FALSE(cont.diverges);

    const auto degenerate = posthoc::closed_form_for(posthoc::make_continuum_greedy(0.05, 0.05));
    CHECK(degenerate.degenerate);
    CHECK(*degenerate.expected_ratio == 1.0);
}

TEST_CASE("the divergent limit is a flag, never a floating-point infinity") {
    const auto report = posthoc::closed_form_for(posthoc::make_continuum_greedy(0.05, 0.0));
    CHECK(report.derivation == Derivation::ContinuumLimit);
    CHECK(report.diverges);
    CHECK_FALSE(report.expected_ratio.has_value());
}
