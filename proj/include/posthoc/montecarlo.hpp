#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "posthoc/analytic.hpp"
#include "posthoc/evidence.hpp"
#include "posthoc/strategies.hpp"
#include "posthoc/types.hpp"

namespace posthoc {

struct SimulationConfig {
    std::uint64_t n_trials = 1'000'000;
    std::uint64_t seed = 0;
    StrategySpec strategy = FixedStrategy{Alpha(0.05)};
    EvidenceModel evidence = EvidenceModel::exact_uniform();
    // Conditional-table bins for continuum strategies; defaults to 20
    // geometric bins from floor_eps to cap_c. Ignored for discrete strategies.
    std::optional<std::vector<double>> bin_edges;
    unsigned workers = 0;  // 0 = available parallelism
};

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
};

Estimate make_estimate(double mean, double std_error, std::uint64_t n);

// Where trials land for conditioning: one cell per reachable threshold, or
// geometric bins spanning a continuum strategy's interval.
struct CellLayout {
    std::vector<double> alphas;  // discrete cells (empty when binned)
    std::vector<double> edges;   // bin edges, size m+1 (empty when discrete)

    bool binned() const { return !edges.empty(); }
    std::size_t size() const { return binned() ? edges.size() - 1 : alphas.size(); }
};

CellLayout cell_layout_for(const StrategySpec& spec,
                           const std::optional<std::vector<double>>& bin_edges);
std::vector<double> geometric_bin_edges(double low, double high, std::size_t bins);

struct SimulationReport {
    SimulationConfig config;
    Estimate expected_ratio;
    Estimate overall_rejection_rate;
    std::vector<DiscrepancyRow> rows;
    double max_ratio_term = 0.0;
    // Single trials dominating the mean make the normal-theory CI dubious.
    bool tail_warning = false;
    std::optional<ClosedFormReport> analytic_reference;
};

// Runs config.n_trials independent trials under the null: draw evidence,
// select alpha, tally the decision, and average phi/alpha. Trial i always
// uses the substream (seed, i), so reports are bit-identical for any worker
// count.
SimulationReport run_simulation(const SimulationConfig& config);

// Conditional tallies for a batch of already-simulated trials. Trials whose
// alpha matches no cell are a strategy/cell mismatch and throw.
std::vector<DiscrepancyRow> conditional_rate_table(std::span<const TrialRecord> records,
                                                   const CellLayout& cells);

struct Verdict {
    bool valid = true;
    double bound = 0.0;            // 1 + z_slack * std_error
    std::optional<double> margin;  // mean - 1 when violated
};

// Post-hoc validity audit: E r_alpha should not exceed 1 beyond Monte-Carlo
// noise. valid iff mean <= 1 + z_slack * std_error.
Verdict verify_post_hoc_validity(const SimulationReport& report, double z_slack = 3.0);

}  // namespace posthoc
