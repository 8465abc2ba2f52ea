// posthoc: quantify what happens to type I error when the significance
// threshold is chosen after seeing the p-value, and the e-value repair.
//
// Subcommands: exact, simulate, compare, sweep. Exit codes: 0 success,
// 2 usage/config error, 3 oracle self-test failure.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "posthoc/analytic.hpp"
#include "posthoc/montecarlo.hpp"
#include "posthoc/report_io.hpp"
#include "posthoc/version.hpp"

namespace {

using posthoc::Json;

constexpr int kExitUsage = 2;
constexpr int kExitOracleFailure = 3;
constexpr double kOracleGateSeUnits = 6.0;

struct OracleFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string iso_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string join_argv(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += argv[i];
    }
    return out;
}

// Reproducibility sidecar: everything about the run, on stderr so the
// report stream stays byte-stable across worker counts.
void emit_manifest(const std::string& command, Json config) {
    Json m;
    m["command"] = command;
    m["version"] = posthoc::kVersion;
    m["timestamp"] = iso_timestamp();
    m["config"] = std::move(config);
    std::cerr << "manifest: " << m.dump() << "\n";
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw std::invalid_argument("cannot open output file '" + out_path + "'");
    }
    out << text;
}

unsigned default_workers_from_env() {
    const char* env = std::getenv("POSTHOC_WORKERS");
    if (env == nullptr || *env == '\0') {
        return 0;
    }
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == nullptr || *end != '\0') {
        throw std::invalid_argument("POSTHOC_WORKERS must be a non-negative integer");
    }
    return static_cast<unsigned>(v);
}

std::vector<double> parse_grid(const std::string& text) {
    auto parse_list = [](const std::string& list) {
        std::vector<double> values;
        std::size_t start = 0;
        while (start <= list.size()) {
            std::size_t comma = list.find(',', start);
            if (comma == std::string::npos) {
                comma = list.size();
            }
            const std::string token = list.substr(start, comma - start);
            double value = 0.0;
            const auto [ptr, ec] =
                std::from_chars(token.data(), token.data() + token.size(), value);
            if (ec != std::errc{} || ptr != token.data() + token.size()) {
                throw std::invalid_argument("grid parse error: bad number '" + token + "'");
            }
            values.push_back(value);
            start = comma + 1;
        }
        return values;
    };

    const bool geom = text.rfind("geom:", 0) == 0;
    const bool lin = text.rfind("lin:", 0) == 0;
    if (geom || lin) {
        const auto args = parse_list(text.substr(geom ? 5 : 4));
        if (args.size() != 3) {
            throw std::invalid_argument("grid parse error: expected <start>,<stop>,<points>");
        }
        const double start = args[0];
        const double stop = args[1];
        const auto points = static_cast<std::size_t>(args[2]);
        if (points < 2 || static_cast<double>(points) != args[2]) {
            throw std::invalid_argument("grid parse error: point count must be an integer >= 2");
        }
        if (geom && (start * stop <= 0.0)) {
            throw std::invalid_argument("grid parse error: geometric grid needs same-sign endpoints");
        }
        std::vector<double> values(points);
        values.front() = start;
        values.back() = stop;
        for (std::size_t i = 1; i + 1 < points; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(points - 1);
            values[i] = geom ? start * std::pow(stop / start, t) : start + (stop - start) * t;
        }
        return values;
    }
    const auto values = parse_list(text);
    if (values.size() < 2) {
        throw std::invalid_argument("grid parse error: need at least 2 points");
    }
    return values;
}

// Shared simulate/compare/sweep knobs.
struct SimFlags {
    std::string strategy;
    std::string evidence = "uniform";
    double delta = 0.5;
    std::uint64_t n = 1'000'000;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::size_t bins = 20;
    std::string format;
    std::string out_path;
};

void add_sim_options(CLI::App* cmd, SimFlags& flags, const std::string& default_format) {
    flags.format = default_format;
    cmd->add_option("--strategy", flags.strategy,
                    "fixed:<a> | two:<a1>,<a2> | step:<a1>,...,<ak> | cont:<C>,<eps>")
        ->required();
    cmd->add_option("--delta", flags.delta, "mean shift of the e-value's design alternative");
    cmd->add_option("--n", flags.n, "number of simulated trials");
    cmd->add_option("--seed", flags.seed, "root seed; every output is a pure function of it");
    cmd->add_option("--workers", flags.workers,
                    "worker threads (0 = available parallelism; results never depend on this)");
    cmd->add_option("--bins", flags.bins, "conditional-table bins for continuum strategies");
    cmd->add_option("--out", flags.out_path, "write the report to a file instead of stdout");
}

posthoc::SimulationConfig build_config(const SimFlags& flags) {
    posthoc::SimulationConfig config;
    config.n_trials = flags.n;
    config.seed = flags.seed;
    config.strategy = posthoc::parse_strategy(flags.strategy);
    const posthoc::EvidenceKind kind = posthoc::evidence_kind_from_string(flags.evidence);
    switch (kind) {
        case posthoc::EvidenceKind::ExactUniform:
            config.evidence = posthoc::EvidenceModel::exact_uniform();
            break;
        case posthoc::EvidenceKind::GaussianZ:
            config.evidence = posthoc::EvidenceModel::gaussian_z(flags.delta);
            break;
        case posthoc::EvidenceKind::CalibratedE:
            config.evidence = posthoc::EvidenceModel::calibrated_e(flags.delta);
            break;
    }
    config.workers = flags.workers != 0 ? flags.workers : default_workers_from_env();
    if (const auto* cont = std::get_if<posthoc::ContinuumGreedyStrategy>(&config.strategy)) {
        if (cont->floor_eps > 0.0 && cont->floor_eps < cont->cap_c.value()) {
            config.bin_edges =
                posthoc::geometric_bin_edges(cont->floor_eps, cont->cap_c.value(), flags.bins);
        }
    }
    return config;
}

Json manifest_config(const SimFlags& flags) {
    Json j;
    j["strategy"] = flags.strategy;
    j["evidence"] = flags.evidence;
    j["delta"] = flags.delta;
    j["n_trials"] = flags.n;
    j["seed"] = flags.seed;
    j["workers"] = flags.workers;
    j["bins"] = flags.bins;
    j["format"] = flags.format;
    return j;
}

void check_oracle_gate(const posthoc::SimulationReport& report) {
    const auto agreement = posthoc::oracle_agreement_se_units(report);
    if (agreement && *agreement > kOracleGateSeUnits) {
        throw OracleFailure("oracle self-test failure: Monte-Carlo mean is " +
                            posthoc::format_double(*agreement) +
                            " standard errors from the closed form");
    }
}

int run_exact(const std::string& strategy_text, const std::string& format,
              const std::string& out_path, const std::string& command) {
    const posthoc::StrategySpec spec =
        posthoc::parse_strategy(strategy_text, /*allow_divergent_sentinel=*/true);
    const posthoc::ClosedFormReport report = posthoc::closed_form_for(spec);
    Json config;
    config["strategy"] = strategy_text;
    config["format"] = format;
    emit_manifest(command, config);
    if (report.degenerate) {
        std::cerr << "warning: degenerate strategy parameters (fixed-level test)\n";
    }
    if (format == "json") {
        write_output(posthoc::render_json(posthoc::exact_report_json(spec, report)), out_path);
    } else {
        write_output(posthoc::render_exact_table(spec, report), out_path);
    }
    return 0;
}

int run_simulate(const SimFlags& flags, const std::string& command) {
    const posthoc::SimulationConfig config = build_config(flags);
    emit_manifest(command, manifest_config(flags));
    const posthoc::SimulationReport report = posthoc::run_simulation(config);
    std::string text;
    if (flags.format == "json") {
        text = posthoc::render_json(posthoc::simulation_report_json(report));
    } else if (flags.format == "csv") {
        text = posthoc::render_csv(posthoc::simulation_csv_grid(report));
        const auto agreement = posthoc::oracle_agreement_se_units(report);
        if (agreement) {
            std::cerr << "oracle: |delta| = " << posthoc::format_double(*agreement) << " SE\n";
        }
    } else {
        text = posthoc::render_simulation_table(report);
    }
    write_output(text, flags.out_path);
    check_oracle_gate(report);
    return 0;
}

posthoc::CompareReport run_compare_reports(const SimFlags& flags) {
    posthoc::SimulationConfig raw = build_config(flags);
    raw.evidence = posthoc::EvidenceModel::exact_uniform();
    posthoc::SimulationConfig calibrated = raw;
    calibrated.evidence = posthoc::EvidenceModel::calibrated_e(flags.delta);

    posthoc::CompareReport report;
    report.raw_p.report = posthoc::run_simulation(raw);
    report.raw_p.verdict = posthoc::verify_post_hoc_validity(report.raw_p.report);
    report.calibrated.report = posthoc::run_simulation(calibrated);
    report.calibrated.verdict = posthoc::verify_post_hoc_validity(report.calibrated.report);
    return report;
}

int run_compare(const SimFlags& flags, const std::string& command) {
    emit_manifest(command, manifest_config(flags));
    const posthoc::CompareReport report = run_compare_reports(flags);
    std::string text;
    if (flags.format == "json") {
        text = posthoc::render_json(posthoc::compare_report_json(report));
    } else {
        text = posthoc::render_compare_table(report);
    }
    write_output(text, flags.out_path);
    check_oracle_gate(report.raw_p.report);
    return 0;
}

std::vector<posthoc::SweepRow> run_sweep_rows(const std::string& axis,
                                              const std::vector<double>& grid,
                                              const SimFlags& flags, bool evidence_set) {
    std::vector<posthoc::SweepRow> rows;
    rows.reserve(grid.size());
    const posthoc::StrategySpec base = posthoc::parse_strategy(flags.strategy);

    for (const double value : grid) {
        SimFlags point = flags;
        std::optional<double> closed_form;
        if (axis == "eps") {
            const auto* cont = std::get_if<posthoc::ContinuumGreedyStrategy>(&base);
            if (cont == nullptr) {
                throw std::invalid_argument("axis 'eps' needs a cont:<C>,<eps> strategy");
            }
            const double cap = cont->cap_c.value();
            point.strategy = "cont:" + posthoc::format_double(cap) + "," +
                             posthoc::format_double(value);
            closed_form =
                posthoc::continuum_truncated_expected_ratio(posthoc::Alpha(cap), value);
        } else if (axis == "a1") {
            const auto* two = std::get_if<posthoc::TwoThresholdStrategy>(&base);
            if (two == nullptr) {
                throw std::invalid_argument("axis 'a1' needs a two:<a1>,<a2> strategy");
            }
            const double a2 = two->a2.value();
            closed_form =
                posthoc::two_threshold_expected_ratio(posthoc::Alpha(value), two->a2);
            if (value == a2) {
                // Degenerate endpoint: the rule collapses to a fixed-level test.
                std::cerr << "warning: a1 == a2 at grid point " << posthoc::format_double(value)
                          << "; simulating fixed:" << posthoc::format_double(a2) << "\n";
                point.strategy = "fixed:" + posthoc::format_double(a2);
            } else {
                point.strategy = "two:" + posthoc::format_double(value) + "," +
                                 posthoc::format_double(a2);
            }
        } else if (axis == "delta") {
            if (evidence_set && flags.evidence != "calibrated") {
                throw std::invalid_argument("axis 'delta' sweeps the p* pipeline; "
                                            "--evidence must be 'calibrated'");
            }
            point.evidence = "calibrated";
            point.delta = value;
        } else {
            throw std::invalid_argument("unknown sweep axis '" + axis +
                                        "' (expected eps, a1 or delta)");
        }

        const posthoc::SimulationReport report = posthoc::run_simulation(build_config(point));
        rows.push_back(posthoc::SweepRow{axis, value, report.expected_ratio, closed_form});
    }
    return rows;
}

int run_sweep(const std::string& axis, const std::string& grid_text, const SimFlags& flags,
              bool evidence_set, const std::string& command) {
    Json config = manifest_config(flags);
    config["axis"] = axis;
    config["grid"] = grid_text;
    emit_manifest(command, std::move(config));

    const std::vector<double> grid = parse_grid(grid_text);
    const auto rows = run_sweep_rows(axis, grid, flags, evidence_set);

    std::string text;
    if (flags.format == "json") {
        text = posthoc::render_json(posthoc::sweep_json(rows));
    } else if (flags.format == "table") {
        text = posthoc::render_sweep_table(rows);
    } else {
        text = posthoc::render_csv(posthoc::sweep_csv_grid(rows));
    }
    write_output(text, flags.out_path);

    for (const auto& row : rows) {
        if (row.closed_form && row.expected_ratio.std_error > 0.0 &&
            std::abs(row.expected_ratio.mean - *row.closed_form) >
                kOracleGateSeUnits * row.expected_ratio.std_error) {
            throw OracleFailure("oracle self-test failure at " + row.axis + " = " +
                                posthoc::format_double(row.value));
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string command = join_argv(argc, argv);

    CLI::App app{"post-hoc significance thresholds: how badly tests break when alpha is "
                 "chosen after seeing p, and the e-value repair"};
    app.set_version_flag("--version", posthoc::kVersion);
    app.require_subcommand(1);

    // exact
    auto* exact_cmd = app.add_subcommand("exact", "closed-form conditional rates and E r_alpha");
    std::string exact_strategy;
    std::string exact_format = "table";
    std::string exact_out;
    exact_cmd->add_option("strategy", exact_strategy, "strategy spec, e.g. two:0.005,0.05")
        ->required();
    exact_cmd->add_option("--format", exact_format)
        ->check(CLI::IsMember({"table", "json"}));
    exact_cmd->add_option("--out", exact_out);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo estimate of E r_alpha and the "
                                                   "conditional discrepancy table");
    SimFlags sim_flags;
    add_sim_options(sim_cmd, sim_flags, "table");
    sim_cmd->add_option("--evidence", sim_flags.evidence, "uniform | gauss | calibrated")
        ->check(CLI::IsMember({"uniform", "gauss", "calibrated"}));
    sim_cmd->add_option("--format", sim_flags.format)
        ->check(CLI::IsMember({"table", "json", "csv"}));

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "raw p vs calibrated p* under the same "
                                                  "strategy, with validity verdicts");
    SimFlags cmp_flags;
    add_sim_options(cmp_cmd, cmp_flags, "table");
    cmp_cmd->add_option("--format", cmp_flags.format)->check(CLI::IsMember({"table", "json"}));

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "E r_alpha along a parameter grid, as "
                                                  "plot-ready CSV");
    SimFlags sweep_flags;
    std::string sweep_axis;
    std::string sweep_grid;
    add_sim_options(sweep_cmd, sweep_flags, "csv");
    auto* sweep_evidence_opt =
        sweep_cmd->add_option("--evidence", sweep_flags.evidence, "uniform | gauss | calibrated")
            ->check(CLI::IsMember({"uniform", "gauss", "calibrated"}));
    sweep_cmd->add_option("--axis", sweep_axis, "eps | a1 | delta")->required();
    sweep_cmd->add_option("--grid", sweep_grid,
                          "comma list, geom:<start>,<stop>,<points> or lin:<start>,<stop>,<points>")
        ->required();
    sweep_cmd->add_option("--format", sweep_flags.format)
        ->check(CLI::IsMember({"table", "json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (exact_cmd->parsed()) {
            return run_exact(exact_strategy, exact_format, exact_out, command);
        }
        if (sim_cmd->parsed()) {
            return run_simulate(sim_flags, command);
        }
        if (cmp_cmd->parsed()) {
            return run_compare(cmp_flags, command);
        }
        return run_sweep(sweep_axis, sweep_grid, sweep_flags,
                         sweep_evidence_opt->count() > 0, command);
    } catch (const OracleFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOracleFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
