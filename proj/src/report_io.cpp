#include "posthoc/report_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace posthoc {

namespace {

Json opt_json(const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
}

Json estimate_json(const Estimate& e) {
    Json j;
    j["mean"] = e.mean;
    j["std_error"] = e.std_error;
    j["n"] = e.n;
    j["ci95_low"] = e.ci95_low;
    j["ci95_high"] = e.ci95_high;
    return j;
}

Json discrepancy_row_json(const DiscrepancyRow& row) {
    Json j;
    j["a"] = row.a;
    j["bin_low"] = opt_json(row.bin_low);
    j["bin_high"] = opt_json(row.bin_high);
    j["n_conditional"] = row.n_conditional;
    j["n_rejected"] = row.n_rejected;
    j["cond_rate"] = opt_json(row.cond_rate);
    j["d_a"] = opt_json(row.d_a);
    j["r_a"] = opt_json(row.r_a);
    return j;
}

Json config_json(const SimulationConfig& config) {
    // Echoes what determines the numbers. Worker count does not, so it stays
    // out of the report and lives in the stderr manifest.
    Json j;
    j["strategy"] = to_string(config.strategy);
    j["evidence"] = to_string(config.evidence.kind);
    j["delta"] = config.evidence.kind == EvidenceKind::ExactUniform
                     ? Json(nullptr)
                     : Json(config.evidence.delta_design);
    j["n_trials"] = config.n_trials;
    j["seed"] = config.seed;
    j["bin_edges"] = config.bin_edges ? Json(*config.bin_edges) : Json(nullptr);
    return j;
}

// Shared table helpers.

std::string fmt(double v, int width = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%*.6g", width, v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v, int width = 12) {
    if (!v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%*s", width, "-");
        return buf;
    }
    return fmt(*v, width);
}

void append_estimate_line(std::ostringstream& out, const char* label, const Estimate& e) {
    out << label << " = " << format_double(e.mean) << "  (SE " << format_double(e.std_error)
        << ", 95% CI [" << format_double(e.ci95_low) << ", " << format_double(e.ci95_high)
        << "])\n";
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) {
        throw std::logic_error("format_double: conversion failed");
    }
    return std::string(buf, ptr);
}

std::optional<double> oracle_agreement_se_units(const SimulationReport& report) {
    if (!report.analytic_reference || !report.analytic_reference->expected_ratio) {
        return std::nullopt;
    }
    const double diff =
        std::abs(report.expected_ratio.mean - *report.analytic_reference->expected_ratio);
    if (report.expected_ratio.std_error > 0.0) {
        return diff / report.expected_ratio.std_error;
    }
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

Json closed_form_json(const ClosedFormReport& report) {
    Json j;
    j["derivation"] = to_string(report.derivation);
    j["diverges"] = report.diverges;
    j["degenerate"] = report.degenerate;
    j["expected_ratio"] = opt_json(report.expected_ratio);
    Json rows = Json::array();
    for (const auto& rate : report.rates) {
        Json row;
        row["a"] = rate.a;
        row["cond_rate"] = rate.cond_rate;
        row["d_a"] = rate.cond_rate - rate.a;
        row["r_a"] = rate.cond_rate / rate.a;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    j["note"] = report.note ? Json(*report.note) : Json(nullptr);
    return j;
}

Json exact_report_json(const StrategySpec& spec, const ClosedFormReport& report) {
    Json j;
    j["schema"] = "posthoc.exact/1";
    j["strategy"] = to_string(spec);
    Json body = closed_form_json(report);
    for (auto& [key, value] : body.items()) {
        j[key] = std::move(value);
    }
    return j;
}

Json simulation_report_json(const SimulationReport& report) {
    Json j;
    j["schema"] = "posthoc.simulate/1";
    j["config"] = config_json(report.config);
    j["expected_ratio"] = estimate_json(report.expected_ratio);
    j["overall_rejection_rate"] = estimate_json(report.overall_rejection_rate);
    j["max_ratio_term"] = report.max_ratio_term;
    j["tail_warning"] = report.tail_warning;
    Json rows = Json::array();
    for (const auto& row : report.rows) {
        rows.push_back(discrepancy_row_json(row));
    }
    j["rows"] = std::move(rows);
    j["analytic_reference"] =
        report.analytic_reference ? closed_form_json(*report.analytic_reference) : Json(nullptr);
    const auto agreement = oracle_agreement_se_units(report);
    if (agreement && std::isfinite(*agreement)) {
        Json a;
        a["closed_form"] = *report.analytic_reference->expected_ratio;
        a["se_units"] = *agreement;
        j["oracle_agreement"] = std::move(a);
    } else {
        j["oracle_agreement"] = nullptr;
    }
    return j;
}

Json verdict_json(const Verdict& verdict) {
    Json j;
    j["status"] = verdict.valid ? "valid" : "violated";
    j["bound"] = verdict.bound;
    j["margin"] = opt_json(verdict.margin);
    return j;
}

Json compare_report_json(const CompareReport& report) {
    Json j;
    j["schema"] = "posthoc.compare/1";
    Json raw;
    raw["report"] = simulation_report_json(report.raw_p.report);
    raw["verdict"] = verdict_json(report.raw_p.verdict);
    Json cal;
    cal["report"] = simulation_report_json(report.calibrated.report);
    cal["verdict"] = verdict_json(report.calibrated.verdict);
    j["raw_p"] = std::move(raw);
    j["calibrated"] = std::move(cal);
    return j;
}

Json sweep_json(const std::vector<SweepRow>& rows) {
    Json j;
    j["schema"] = "posthoc.sweep/1";
    j["axis"] = rows.empty() ? "" : rows.front().axis;
    Json out = Json::array();
    for (const auto& row : rows) {
        Json r;
        r["value"] = row.value;
        r["er_mean"] = row.expected_ratio.mean;
        r["er_se"] = row.expected_ratio.std_error;
        r["closed_form"] = opt_json(row.closed_form);
        out.push_back(std::move(r));
    }
    j["rows"] = std::move(out);
    return j;
}

std::string render_json(const Json& j) {
    return j.dump(2) + "\n";
}

std::string render_exact_table(const StrategySpec& spec, const ClosedFormReport& report) {
    std::ostringstream out;
    out << "strategy: " << to_string(spec) << "\n";
    out << "derivation: " << to_string(report.derivation) << "\n";
    if (report.degenerate) {
        out << "warning: degenerate parameters; collapses to a fixed-level test\n";
    }
    if (report.diverges) {
        out << "E r_alpha = DIVERGES (inf)\n";
    } else {
        out << "E r_alpha = " << format_double(*report.expected_ratio) << "\n";
    }
    out << "\n           a    cond_rate          d_a          r_a\n";
    for (const auto& rate : report.rates) {
        out << fmt(rate.a) << " " << fmt(rate.cond_rate) << " " << fmt(rate.cond_rate - rate.a)
            << " " << fmt(rate.cond_rate / rate.a) << "\n";
    }
    if (report.note) {
        out << "note: " << *report.note << "\n";
    }
    return out.str();
}

std::string render_simulation_table(const SimulationReport& report) {
    std::ostringstream out;
    const auto& cfg = report.config;
    out << "strategy: " << to_string(cfg.strategy) << "   evidence: " << to_string(cfg.evidence.kind);
    if (cfg.evidence.kind != EvidenceKind::ExactUniform) {
        out << " (delta " << format_double(cfg.evidence.delta_design) << ")";
    }
    out << "   n = " << cfg.n_trials << "   seed = " << cfg.seed << "\n";
    append_estimate_line(out, "E r_alpha", report.expected_ratio);
    append_estimate_line(out, "rejection rate", report.overall_rejection_rate);
    out << "max phi/alpha = " << format_double(report.max_ratio_term)
        << (report.tail_warning ? "   TAIL WARNING: single trials dominate the mean" : "")
        << "\n\n";
    out << "           a        n_cond         n_rej    cond_rate          d_a          r_a\n";
    for (const auto& row : report.rows) {
        char counts[64];
        std::snprintf(counts, sizeof counts, " %13llu %13llu",
                      static_cast<unsigned long long>(row.n_conditional),
                      static_cast<unsigned long long>(row.n_rejected));
        out << fmt(row.a) << counts << " " << fmt_opt(row.cond_rate) << " " << fmt_opt(row.d_a)
            << " " << fmt_opt(row.r_a) << "\n";
    }
    const auto agreement = oracle_agreement_se_units(report);
    if (report.analytic_reference && report.analytic_reference->expected_ratio && agreement) {
        out << "\noracle: closed form "
            << format_double(*report.analytic_reference->expected_ratio) << ", |delta| = "
            << format_double(*agreement) << " SE\n";
    } else if (report.analytic_reference && report.analytic_reference->diverges) {
        out << "\noracle: closed form DIVERGES (inf)\n";
    }
    return out.str();
}

std::string render_compare_table(const CompareReport& report) {
    std::ostringstream out;
    auto verdict_line = [&](const char* label, const Verdict& v) {
        out << label << ": " << (v.valid ? "valid" : "violated")
            << "  (bound 1 + 3 SE = " << format_double(v.bound);
        if (v.margin) {
            out << ", margin above 1 = " << format_double(*v.margin);
        }
        out << ")\n";
    };
    out << "=== raw p ===\n" << render_simulation_table(report.raw_p.report);
    verdict_line("verdict", report.raw_p.verdict);
    out << "\n=== calibrated p* ===\n" << render_simulation_table(report.calibrated.report);
    verdict_line("verdict", report.calibrated.verdict);
    return out.str();
}

std::string render_sweep_table(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "        axis        value      er_mean        er_se  closed_form\n";
    for (const auto& row : rows) {
        char axis[64];
        std::snprintf(axis, sizeof axis, "%12s", row.axis.c_str());
        out << axis << " " << fmt(row.value) << " " << fmt(row.expected_ratio.mean) << " "
            << fmt(row.expected_ratio.std_error) << " " << fmt_opt(row.closed_form) << "\n";
    }
    return out.str();
}

std::string render_csv(const std::vector<std::vector<std::string>>& grid) {
    std::string out;
    for (const auto& row : grid) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> grid;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t eol = text.find('\n', start);
        if (eol == std::string::npos) {
            eol = text.size();
        }
        const std::string line = text.substr(start, eol - start);
        std::vector<std::string> cells;
        std::size_t cell_start = 0;
        while (true) {
            const std::size_t comma = line.find(',', cell_start);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(cell_start));
                break;
            }
            cells.push_back(line.substr(cell_start, comma - cell_start));
            cell_start = comma + 1;
        }
        grid.push_back(std::move(cells));
        start = eol + 1;
    }
    return grid;
}

std::vector<std::vector<std::string>> simulation_csv_grid(const SimulationReport& report) {
    std::vector<std::vector<std::string>> grid;
    grid.push_back({"a", "bin_low", "bin_high", "n_conditional", "n_rejected", "cond_rate",
                    "d_a", "r_a"});
    auto opt_cell = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    for (const auto& row : report.rows) {
        grid.push_back({format_double(row.a), opt_cell(row.bin_low), opt_cell(row.bin_high),
                        std::to_string(row.n_conditional), std::to_string(row.n_rejected),
                        opt_cell(row.cond_rate), opt_cell(row.d_a), opt_cell(row.r_a)});
    }
    return grid;
}

std::vector<std::vector<std::string>> sweep_csv_grid(const std::vector<SweepRow>& rows) {
    std::vector<std::vector<std::string>> grid;
    grid.push_back({"axis", "value", "er_mean", "er_se", "closed_form"});
    for (const auto& row : rows) {
        grid.push_back({row.axis, format_double(row.value), format_double(row.expected_ratio.mean),
                        format_double(row.expected_ratio.std_error),
                        row.closed_form ? format_double(*row.closed_form) : std::string()});
    }
    return grid;
}

}  // namespace posthoc
