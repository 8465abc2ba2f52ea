#include "posthoc/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "posthoc/accum.hpp"

namespace posthoc {

namespace {

// Trials are accumulated in fixed-size chunks merged in chunk order, so the
// reduction tree never depends on how many workers ran.
constexpr std::uint64_t kChunkTrials = 1u << 16;
constexpr std::size_t kDefaultBins = 20;

struct ChunkAccum {
    MomentAccumulator ratio;
    std::uint64_t n_rejected = 0;
    double max_ratio = 0.0;
    std::vector<std::uint64_t> cell_n;
    std::vector<std::uint64_t> cell_rej;
};

std::size_t cell_index(const CellLayout& cells, double alpha) {
    if (cells.binned()) {
        const auto& edges = cells.edges;
        if (alpha < edges.front() || alpha > edges.back()) {
            throw std::logic_error("observed alpha " + std::to_string(alpha) +
                                   " falls outside the bin range (strategy/cell mismatch)");
        }
        // Half-open bins [e_{j-1}, e_j); the last bin also owns its top edge.
        auto it = std::upper_bound(edges.begin(), edges.end(), alpha);
        std::size_t idx = static_cast<std::size_t>(it - edges.begin());
        if (idx == edges.size()) {
            --idx;
        }
        return idx - 1;
    }
    const auto& alphas = cells.alphas;
    const auto it = std::lower_bound(alphas.begin(), alphas.end(), alpha);
    if (it == alphas.end() || *it != alpha) {
        throw std::logic_error("observed alpha " + std::to_string(alpha) +
                               " matches no conditional cell (strategy/cell mismatch)");
    }
    return static_cast<std::size_t>(it - alphas.begin());
}

std::vector<DiscrepancyRow> rows_from_tallies(const CellLayout& cells,
                                              const std::vector<std::uint64_t>& cell_n,
                                              const std::vector<std::uint64_t>& cell_rej) {
    std::vector<DiscrepancyRow> rows;
    rows.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells.binned()) {
            const double lo = cells.edges[i];
            const double hi = cells.edges[i + 1];
            // Alpha spans orders of magnitude, so the representative point is
            // the geometric midpoint.
            DiscrepancyRow row = make_discrepancy_row(std::sqrt(lo * hi), cell_n[i], cell_rej[i]);
            row.bin_low = lo;
            row.bin_high = hi;
            rows.push_back(row);
        } else {
            rows.push_back(make_discrepancy_row(cells.alphas[i], cell_n[i], cell_rej[i]));
        }
    }
    return rows;
}

void validate_bin_edges(const std::vector<double>& edges) {
    if (edges.size() < 2) {
        throw std::invalid_argument("bin_edges needs at least two edges");
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!(edges[i] > 0.0) || edges[i] > 1.0) {
            throw std::invalid_argument("bin_edges must lie within (0, 1]");
        }
        if (i > 0 && !(edges[i - 1] < edges[i])) {
            throw std::invalid_argument("bin_edges must be strictly increasing");
        }
    }
}

Estimate bernoulli_estimate(std::uint64_t successes, std::uint64_t n) {
    const double nd = static_cast<double>(n);
    const double mean = nd == 0.0 ? 0.0 : static_cast<double>(successes) / nd;
    double se = 0.0;
    if (n > 1) {
        const double var = static_cast<double>(successes) * (1.0 - mean) / (nd - 1.0);
        se = std::sqrt(var / nd);
    }
    return make_estimate(mean, se, n);
}

}  // namespace

Estimate make_estimate(double mean, double std_error, std::uint64_t n) {
    Estimate e;
    e.mean = mean;
    e.std_error = std_error;
    e.n = n;
    e.ci95_low = mean - 1.96 * std_error;
    e.ci95_high = mean + 1.96 * std_error;
    return e;
}

std::vector<double> geometric_bin_edges(double low, double high, std::size_t bins) {
    if (!(low > 0.0) || !(high > low)) {
        throw std::invalid_argument("geometric_bin_edges: requires 0 < low < high");
    }
    if (bins == 0) {
        throw std::invalid_argument("geometric_bin_edges: requires at least one bin");
    }
    std::vector<double> edges(bins + 1);
    edges.front() = low;
    edges.back() = high;
    const double ratio = high / low;
    for (std::size_t j = 1; j < bins; ++j) {
        edges[j] = low * std::pow(ratio, static_cast<double>(j) / static_cast<double>(bins));
    }
    validate_bin_edges(edges);
    return edges;
}

CellLayout cell_layout_for(const StrategySpec& spec,
                           const std::optional<std::vector<double>>& bin_edges) {
    const ReachableAlphas reach = reachable_alphas(spec);
    CellLayout layout;
    if (const auto* finite = std::get_if<std::vector<Alpha>>(&reach)) {
        layout.alphas.reserve(finite->size());
        for (Alpha a : *finite) {
            layout.alphas.push_back(a.value());
        }
        return layout;
    }
    const auto& interval = std::get<AlphaInterval>(reach);
    if (interval.low.value() == interval.high.value()) {
        layout.alphas = {interval.low.value()};
        return layout;
    }
    if (bin_edges) {
        validate_bin_edges(*bin_edges);
        layout.edges = *bin_edges;
    } else {
        layout.edges = geometric_bin_edges(interval.low.value(), interval.high.value(),
                                           kDefaultBins);
    }
    return layout;
}

SimulationReport run_simulation(const SimulationConfig& config) {
    if (config.n_trials < 1) {
        throw std::invalid_argument("n_trials must be at least 1");
    }
    if (is_divergent_sentinel(config.strategy)) {
        throw std::invalid_argument(
            "cont:<C>,0 has a divergent expectation and cannot be simulated; "
            "use a positive floor");
    }
    const CellLayout cells = cell_layout_for(config.strategy, config.bin_edges);

    const std::uint64_t n = config.n_trials;
    const std::uint64_t n_chunks = (n + kChunkTrials - 1) / kChunkTrials;
    unsigned workers = config.workers != 0
                           ? config.workers
                           : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(
        std::min<std::uint64_t>(workers, n_chunks));

    std::vector<ChunkAccum> partials(n_chunks);
    std::atomic<std::uint64_t> next_chunk{0};
    std::exception_ptr worker_error;
    std::mutex error_mutex;

    auto run_chunks = [&]() {
        try {
            for (;;) {
                const std::uint64_t c = next_chunk.fetch_add(1, std::memory_order_relaxed);
                if (c >= n_chunks) {
                    return;
                }
                ChunkAccum& acc = partials[c];
                acc.cell_n.assign(cells.size(), 0);
                acc.cell_rej.assign(cells.size(), 0);
                const std::uint64_t begin = c * kChunkTrials;
                const std::uint64_t end = std::min(n, begin + kChunkTrials);
                for (std::uint64_t i = begin; i < end; ++i) {
                    TrialStream rng(config.seed, i);
                    const Evidence ev = draw_evidence(config.evidence, rng);
                    const Alpha alpha = select_alpha(config.strategy, ev.p);
                    const TrialRecord rec = make_trial(ev.statistic, ev.p, alpha);
                    acc.ratio.add(rec.ratio_term);
                    acc.n_rejected += rec.rejected ? 1 : 0;
                    acc.max_ratio = std::max(acc.max_ratio, rec.ratio_term);
                    const std::size_t cell = cell_index(cells, alpha.value());
                    acc.cell_n[cell] += 1;
                    acc.cell_rej[cell] += rec.rejected ? 1 : 0;
                }
            }
        } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!worker_error) {
                worker_error = std::current_exception();
            }
        }
    };

    if (workers <= 1) {
        run_chunks();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(run_chunks);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (worker_error) {
        std::rethrow_exception(worker_error);
    }

    // Deterministic reduction: chunk order, never thread order.
    MomentAccumulator ratio;
    std::uint64_t n_rejected = 0;
    double max_ratio = 0.0;
    std::vector<std::uint64_t> cell_n(cells.size(), 0);
    std::vector<std::uint64_t> cell_rej(cells.size(), 0);
    for (const ChunkAccum& acc : partials) {
        ratio.merge(acc.ratio);
        n_rejected += acc.n_rejected;
        max_ratio = std::max(max_ratio, acc.max_ratio);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            cell_n[i] += acc.cell_n[i];
            cell_rej[i] += acc.cell_rej[i];
        }
    }

    SimulationReport report;
    report.config = config;
    report.config.bin_edges = cells.binned() ? std::optional(cells.edges) : std::nullopt;
    report.expected_ratio = make_estimate(ratio.mean(), ratio.std_error(), ratio.count());
    report.overall_rejection_rate = bernoulli_estimate(n_rejected, n);
    report.rows = rows_from_tallies(cells, cell_n, cell_rej);
    report.max_ratio_term = max_ratio;
    report.tail_warning = max_ratio > 0.01 * static_cast<double>(n);
    if (config.evidence.kind != EvidenceKind::CalibratedE) {
        // Under either plain-p model the null p is exactly uniform, so the
        // closed forms apply as an oracle.
        report.analytic_reference = closed_form_for(config.strategy);
    }
    return report;
}

std::vector<DiscrepancyRow> conditional_rate_table(std::span<const TrialRecord> records,
                                                   const CellLayout& cells) {
    std::vector<std::uint64_t> cell_n(cells.size(), 0);
    std::vector<std::uint64_t> cell_rej(cells.size(), 0);
    for (const TrialRecord& rec : records) {
        const std::size_t cell = cell_index(cells, rec.alpha.value());
        cell_n[cell] += 1;
        cell_rej[cell] += rec.rejected ? 1 : 0;
    }
    return rows_from_tallies(cells, cell_n, cell_rej);
}

Verdict verify_post_hoc_validity(const SimulationReport& report, double z_slack) {
    Verdict verdict;
    verdict.bound = 1.0 + z_slack * report.expected_ratio.std_error;
    verdict.valid = report.expected_ratio.mean <= verdict.bound;
    if (!verdict.valid) {
        verdict.margin = report.expected_ratio.mean - 1.0;
    }
    return verdict;
}

}  // namespace posthoc
