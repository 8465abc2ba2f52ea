#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "posthoc/analytic.hpp"
#include "posthoc/montecarlo.hpp"

namespace posthoc {

using Json = nlohmann::ordered_json;

// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

// Distance between the Monte-Carlo mean and its closed form, in reported
// standard-error units. Absent when the report carries no finite oracle.
std::optional<double> oracle_agreement_se_units(const SimulationReport& report);

// Raw p and calibrated p* pushed through the same strategy, with the
// post-hoc validity verdict for each arm.
struct CompareArm {
    SimulationReport report;
    Verdict verdict;
};
struct CompareReport {
    CompareArm raw_p;
    CompareArm calibrated;
};

struct SweepRow {
    std::string axis;
    double value;
    Estimate expected_ratio;
    std::optional<double> closed_form;
};

Json closed_form_json(const ClosedFormReport& report);
Json exact_report_json(const StrategySpec& spec, const ClosedFormReport& report);
Json simulation_report_json(const SimulationReport& report);
Json verdict_json(const Verdict& verdict);
Json compare_report_json(const CompareReport& report);
Json sweep_json(const std::vector<SweepRow>& rows);

// Canonical JSON text: 2-space indent, fixed field order, LF-terminated.
std::string render_json(const Json& j);

std::string render_exact_table(const StrategySpec& spec, const ClosedFormReport& report);
std::string render_simulation_table(const SimulationReport& report);
std::string render_compare_table(const CompareReport& report);
std::string render_sweep_table(const std::vector<SweepRow>& rows);

// CSV: comma separators, '.' decimal point, header row, LF line endings.
std::string render_csv(const std::vector<std::vector<std::string>>& grid);
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

std::vector<std::vector<std::string>> simulation_csv_grid(const SimulationReport& report);
std::vector<std::vector<std::string>> sweep_csv_grid(const std::vector<SweepRow>& rows);

}  // namespace posthoc
