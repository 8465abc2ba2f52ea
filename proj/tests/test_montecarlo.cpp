#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "posthoc/accum.hpp"
#include "posthoc/montecarlo.hpp"
#include "posthoc/report_io.hpp"

using posthoc::Alpha;
using posthoc::CellLayout;
using posthoc::EvidenceModel;
using posthoc::PValue;
using posthoc::SimulationConfig;
using posthoc::SimulationReport;
using posthoc::TrialRecord;

namespace {

SimulationConfig config_for(const posthoc::StrategySpec& strategy, std::uint64_t n,
                            std::uint64_t seed,
                            EvidenceModel evidence = EvidenceModel::exact_uniform()) {
    SimulationConfig config;
    config.strategy = strategy;
    config.n_trials = n;
    config.seed = seed;
    config.evidence = evidence;
    config.workers = 1;
    return config;
}

}  // namespace

TEST_CASE("two-threshold run reproduces the closed forms at n = 10^6") {
    const auto report =
        posthoc::run_simulation(config_for(posthoc::make_two_threshold(0.005, 0.05), 1'000'000, 1));
    CHECK(std::abs(report.expected_ratio.mean - 1.9) < 0.05);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].a == 0.005);
    CHECK(*report.rows[0].cond_rate == 1.0);  // exact: alpha = a1 forces p <= a1
    CHECK(std::abs(*report.rows[1].cond_rate - 0.04522613065326633) < 0.001);
    REQUIRE(report.analytic_reference.has_value());
    CHECK(std::abs(*report.analytic_reference->expected_ratio - 1.9) < 1.9e-12);
}

TEST_CASE("two-threshold (0.01, 0.05) run agrees with the 1.8 closed form") {
    const auto report =
        posthoc::run_simulation(config_for(posthoc::make_two_threshold(0.01, 0.05), 1'000'000, 3));
    CHECK(std::abs(report.expected_ratio.mean - 1.8) < 0.05);
}

TEST_CASE("fixed-threshold control is calibrated") {
    const auto report =
        posthoc::run_simulation(config_for(posthoc::make_fixed(0.05), 1'000'000, 2));
    CHECK(std::abs(report.expected_ratio.mean - 1.0) < 0.01);
    REQUIRE(report.rows.size() == 1);
    CHECK(std::abs(*report.rows[0].d_a) < 0.001);
    CHECK_FALSE(report.tail_warning);
}

TEST_CASE("continuum run tracks the truncated closed form") {
    const auto report = posthoc::run_simulation(
        config_for(posthoc::make_continuum_greedy(0.05, 1e-4), 1'000'000, 1));
    const double closed = 7.214608098422191;
    CHECK(std::abs(report.expected_ratio.mean - closed) < 4.0 * report.expected_ratio.std_error);
    // Every bin below the cap rejects always.
    REQUIRE(report.rows.size() == 20);
    for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
        REQUIRE(report.rows[i].cond_rate.has_value());
        CHECK(*report.rows[i].cond_rate == 1.0);
    }
}

TEST_CASE("trial accounting: every trial lands in exactly one cell") {
    for (const auto& strategy :
         {posthoc::make_two_threshold(0.005, 0.05), posthoc::make_continuum_greedy(0.05, 1e-3),
          posthoc::make_step_greedy({0.001, 0.01, 0.2})}) {
        const auto report = posthoc::run_simulation(config_for(strategy, 100'000, 4));
        std::uint64_t n_cond = 0;
        std::uint64_t n_rej = 0;
        for (const auto& row : report.rows) {
            n_cond += row.n_conditional;
            n_rej += row.n_rejected;
        }
        CHECK(n_cond == 100'000);
        const double implied =
            report.overall_rejection_rate.mean * static_cast<double>(report.overall_rejection_rate.n);
        CHECK(static_cast<std::uint64_t>(std::llround(implied)) == n_rej);
    }
}

TEST_CASE("reports are bit-identical for any worker count") {
    for (const unsigned workers : {2u, 3u, 8u}) {
        auto base = config_for(posthoc::make_continuum_greedy(0.05, 1e-3), 300'000, 9);
        auto parallel = base;
        parallel.workers = workers;
        const std::string a =
            posthoc::simulation_report_json(posthoc::run_simulation(base)).dump();
        const std::string b =
            posthoc::simulation_report_json(posthoc::run_simulation(parallel)).dump();
        CHECK(a == b);
    }
}

TEST_CASE("identity check: conditional table reproduces the direct phi/alpha average") {
    // For discrete strategies, sum over cells of (n_cond/n) * cond_rate / a
    // must equal the direct mean of phi/alpha to near machine precision.
    for (const auto& strategy : {posthoc::make_two_threshold(0.005, 0.05),
                                 posthoc::make_step_greedy({0.001, 0.005, 0.05, 0.5})}) {
        for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
            const auto report = posthoc::run_simulation(config_for(strategy, 100'000, seed));
            posthoc::CompensatedSum from_table;
            const double n = static_cast<double>(report.expected_ratio.n);
            for (const auto& row : report.rows) {
                if (row.n_conditional == 0) {
                    continue;
                }
                const double p_cell = static_cast<double>(row.n_conditional) / n;
                from_table.add(p_cell * (*row.cond_rate / row.a));
            }
            CHECK(std::abs(from_table.value() - report.expected_ratio.mean) < 1e-12);
        }
    }
}

TEST_CASE("oracle agreement across 100 seeds at n = 10^5") {
    for (const auto& strategy :
         {posthoc::make_two_threshold(0.005, 0.05), posthoc::make_continuum_greedy(0.05, 1e-2)}) {
        const double closed =
            *posthoc::closed_form_for(strategy).expected_ratio;
        int within = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto report = posthoc::run_simulation(config_for(strategy, 100'000, seed));
            if (std::abs(report.expected_ratio.mean - closed) <=
                4.0 * report.expected_ratio.std_error) {
                ++within;
            }
        }
        CHECK(within >= 99);
    }
}

TEST_CASE("empty cells carry the no-data marker instead of dividing by zero") {
    // a1 = 1e-9 is never hit in 1000 uniform draws.
    const auto report =
        posthoc::run_simulation(config_for(posthoc::make_two_threshold(1e-9, 0.5), 1000, 7));
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].n_conditional == 0);
    CHECK_FALSE(report.rows[0].cond_rate.has_value());
    CHECK_FALSE(report.rows[0].d_a.has_value());
    CHECK_FALSE(report.rows[0].r_a.has_value());
    CHECK(report.rows[1].n_conditional == 1000);
}

TEST_CASE("heavy-tail warning fires when one trial can dominate the mean") {
    // Fixed(0.005) at n = 1000: a single rejection contributes 200 > 0.01 * n.
    const auto small = posthoc::run_simulation(config_for(posthoc::make_fixed(0.005), 1000, 1));
    CHECK(small.max_ratio_term == 200.0);
    CHECK(small.tail_warning);

    const auto big = posthoc::run_simulation(config_for(posthoc::make_fixed(0.05), 1'000'000, 1));
    CHECK_FALSE(big.tail_warning);
}

TEST_CASE("post-hoc validity verdicts") {
    // Raw uniform p through the continuum strategy: badly violated.
    const auto raw = posthoc::run_simulation(
        config_for(posthoc::make_continuum_greedy(0.05, 1e-4), 1'000'000, 1));
    const auto raw_verdict = posthoc::verify_post_hoc_validity(raw);
    CHECK_FALSE(raw_verdict.valid);
    REQUIRE(raw_verdict.margin.has_value());
    CHECK(std::abs(*raw_verdict.margin - 6.2146) < 0.5);

    // Same strategy on calibrated p*: valid.
    const auto calibrated = posthoc::run_simulation(
        config_for(posthoc::make_continuum_greedy(0.05, 1e-4), 1'000'000, 1,
                   EvidenceModel::calibrated_e(0.5)));
    CHECK(posthoc::verify_post_hoc_validity(calibrated).valid);
    CHECK_FALSE(calibrated.analytic_reference.has_value());

    // Fixed control on raw p: valid.
    const auto fixed = posthoc::run_simulation(config_for(posthoc::make_fixed(0.05), 100'000, 1));
    CHECK(posthoc::verify_post_hoc_validity(fixed).valid);
}

TEST_CASE("config validation") {
    auto config = config_for(posthoc::make_fixed(0.05), 0, 1);
    CHECK_THROWS_AS(posthoc::run_simulation(config), std::invalid_argument);

    auto sentinel = config_for(posthoc::make_continuum_greedy(0.05, 0.0), 1000, 1);
    CHECK_THROWS_AS(posthoc::run_simulation(sentinel), std::invalid_argument);

    auto bad_edges = config_for(posthoc::make_continuum_greedy(0.05, 1e-3), 1000, 1);
    bad_edges.bin_edges = std::vector<double>{0.05, 0.01};
    CHECK_THROWS_AS(posthoc::run_simulation(bad_edges), std::invalid_argument);

    // Edges that do not cover the reachable interval: strategy/cell mismatch.
    auto uncovering = config_for(posthoc::make_continuum_greedy(0.05, 1e-3), 10'000, 1);
    uncovering.bin_edges = std::vector<double>{0.01, 0.05};
    CHECK_THROWS_AS(posthoc::run_simulation(uncovering), std::logic_error);
}

TEST_CASE("conditional_rate_table on explicit records") {
    std::vector<TrialRecord> records;
    const auto strategy = posthoc::make_two_threshold(0.005, 0.05);
    std::uint64_t expect_rej_a2 = 0;
    for (int i = 1; i <= 1000; ++i) {
        const PValue p(static_cast<double>(i) / 1000.0);
        const Alpha a = posthoc::select_alpha(strategy, p);
        records.push_back(posthoc::make_trial(p.value(), p, a));
        if (a.value() == 0.05 && p.value() <= 0.05) {
            ++expect_rej_a2;
        }
    }
    const CellLayout cells = posthoc::cell_layout_for(strategy, std::nullopt);
    const auto rows = posthoc::conditional_rate_table(records, cells);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].a == 0.005);
    CHECK(rows[0].n_conditional == 5);  // p in {0.001,...,0.005}
    CHECK(rows[0].n_rejected == 5);
    CHECK(rows[1].n_conditional == 995);
    CHECK(rows[1].n_rejected == expect_rej_a2);

    // A record whose alpha matches no cell is a hard error.
    std::vector<TrialRecord> stray{posthoc::make_trial(0.3, PValue(0.3), Alpha(0.3))};
    CHECK_THROWS_AS(posthoc::conditional_rate_table(stray, cells), std::logic_error);
}

TEST_CASE("geometric bins: exact endpoints, geometric midpoints") {
    const auto edges = posthoc::geometric_bin_edges(1e-4, 0.05, 20);
    REQUIRE(edges.size() == 21);
    CHECK(edges.front() == 1e-4);
    CHECK(edges.back() == 0.05);
    for (std::size_t i = 1; i < edges.size(); ++i) {
        CHECK(edges[i] > edges[i - 1]);
    }
    const auto report = posthoc::run_simulation(
        config_for(posthoc::make_continuum_greedy(0.05, 1e-4), 10'000, 5));
    for (const auto& row : report.rows) {
        REQUIRE(row.bin_low.has_value());
        CHECK(row.a == std::sqrt(*row.bin_low * *row.bin_high));
    }
    // Degenerate interval: a single discrete cell, no bins.
    const auto layout =
        posthoc::cell_layout_for(posthoc::make_continuum_greedy(0.05, 0.05), std::nullopt);
    CHECK_FALSE(layout.binned());
    CHECK(layout.alphas == std::vector<double>{0.05});
}

TEST_CASE("estimates: normal-approximation CI bounds") {
    const auto e = posthoc::make_estimate(2.0, 0.1, 100);
    CHECK(e.ci95_low == 2.0 - 1.96 * 0.1);
    CHECK(e.ci95_high == 2.0 + 1.96 * 0.1);
    CHECK(e.n == 100);
}

TEST_CASE("gaussian-z evidence behaves like the uniform null") {
    const auto report = posthoc::run_simulation(config_for(
        posthoc::make_two_threshold(0.005, 0.05), 200'000, 6, EvidenceModel::gaussian_z()));
    CHECK(std::abs(report.expected_ratio.mean - 1.9) <
          5.0 * report.expected_ratio.std_error);
    REQUIRE(report.analytic_reference.has_value());
}
