#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "posthoc/analytic.hpp"
#include "posthoc/evidence.hpp"
#include "posthoc/montecarlo.hpp"
#include "posthoc/report_io.hpp"
#include "posthoc/version.hpp"

namespace py = pybind11;

namespace {

py::object json_to_py(const posthoc::Json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null:
            return py::none();
        case nlohmann::json::value_t::boolean:
            return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer:
            return py::int_(j.get<std::int64_t>());
        case nlohmann::json::value_t::number_unsigned:
            return py::int_(j.get<std::uint64_t>());
        case nlohmann::json::value_t::number_float:
            return py::float_(j.get<double>());
        case nlohmann::json::value_t::string:
            return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& item : j) {
                out.append(json_to_py(item));
            }
            return out;
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) {
                out[py::str(key)] = json_to_py(value);
            }
            return out;
        }
        default:
            return py::none();
    }
}

posthoc::EvidenceModel evidence_from(const std::string& name, double delta) {
    switch (posthoc::evidence_kind_from_string(name)) {
        case posthoc::EvidenceKind::ExactUniform:
            return posthoc::EvidenceModel::exact_uniform();
        case posthoc::EvidenceKind::GaussianZ:
            return posthoc::EvidenceModel::gaussian_z(delta);
        case posthoc::EvidenceKind::CalibratedE:
            return posthoc::EvidenceModel::calibrated_e(delta);
    }
    throw std::invalid_argument("unknown evidence model");
}

posthoc::SimulationConfig config_from(const std::string& strategy, const std::string& evidence,
                                      double delta, std::uint64_t n, std::uint64_t seed,
                                      unsigned workers, std::size_t bins) {
    posthoc::SimulationConfig config;
    config.strategy = posthoc::parse_strategy(strategy);
    config.evidence = evidence_from(evidence, delta);
    config.n_trials = n;
    config.seed = seed;
    config.workers = workers;
    if (const auto* cont = std::get_if<posthoc::ContinuumGreedyStrategy>(&config.strategy)) {
        if (cont->floor_eps > 0.0 && cont->floor_eps < cont->cap_c.value()) {
            config.bin_edges =
                posthoc::geometric_bin_edges(cont->floor_eps, cont->cap_c.value(), bins);
        }
    }
    return config;
}

}  // namespace

PYBIND11_MODULE(posthoc_alpha, m) {
    m.doc() = "Type I error inflation from choosing the significance threshold after seeing "
              "the p-value, and the e-value repair";
    m.attr("__version__") = posthoc::kVersion;

    m.def(
        "reject", [](double p, double alpha) {
            return posthoc::reject(posthoc::PValue(p), posthoc::Alpha(alpha));
        },
        py::arg("p"), py::arg("alpha"), "True iff p <= alpha (ties reject)");

    m.def(
        "select_alpha", [](const std::string& strategy, double p) {
            return posthoc::select_alpha(posthoc::parse_strategy(strategy), posthoc::PValue(p))
                .value();
        },
        py::arg("strategy"), py::arg("p"),
        "The threshold the strategy picks after seeing p");

    m.def(
        "reachable_alphas", [](const std::string& strategy) -> py::object {
            const auto reach = posthoc::reachable_alphas(posthoc::parse_strategy(strategy));
            py::dict out;
            if (const auto* finite = std::get_if<std::vector<posthoc::Alpha>>(&reach)) {
                py::list alphas;
                for (const auto a : *finite) {
                    alphas.append(a.value());
                }
                out["kind"] = "finite";
                out["alphas"] = alphas;
            } else {
                const auto& interval = std::get<posthoc::AlphaInterval>(reach);
                out["kind"] = "interval";
                out["low"] = interval.low.value();
                out["high"] = interval.high.value();
            }
            return out;
        },
        py::arg("strategy"), "The set of thresholds a strategy can land on");

    m.def(
        "likelihood_ratio_e", [](double z, double delta) {
            return posthoc::likelihood_ratio_e(z, delta).value();
        },
        py::arg("z"), py::arg("delta"),
        "Likelihood-ratio e-value of N(delta,1) vs N(0,1) at z");

    m.def(
        "calibrate_to_p", [](double e) {
            return posthoc::calibrate_to_p(posthoc::EValue(e)).value();
        },
        py::arg("e"), "Conservative p-value min(1, 1/e)");

    m.def("normal_cdf", &posthoc::normal_cdf, py::arg("z"), "Standard normal CDF");

    m.def(
        "exact", [](const std::string& strategy) {
            const auto spec = posthoc::parse_strategy(strategy, /*allow_divergent_sentinel=*/true);
            return json_to_py(posthoc::exact_report_json(spec, posthoc::closed_form_for(spec)));
        },
        py::arg("strategy"), "Closed-form conditional rates and E r_alpha");

    m.def(
        "simulate", [](const std::string& strategy, const std::string& evidence, double delta,
                       std::uint64_t n, std::uint64_t seed, unsigned workers, std::size_t bins) {
            const auto config = config_from(strategy, evidence, delta, n, seed, workers, bins);
            py::gil_scoped_release release;
            const auto report = posthoc::run_simulation(config);
            py::gil_scoped_acquire acquire;
            return json_to_py(posthoc::simulation_report_json(report));
        },
        py::arg("strategy"), py::arg("evidence") = "uniform", py::arg("delta") = 0.5,
        py::arg("n") = 1'000'000, py::arg("seed") = 0, py::arg("workers") = 0,
        py::arg("bins") = 20,
        "Monte-Carlo estimate of E r_alpha with the conditional discrepancy table");

    m.def(
        "compare", [](const std::string& strategy, double delta, std::uint64_t n,
                      std::uint64_t seed, unsigned workers, std::size_t bins) {
            const auto raw = config_from(strategy, "uniform", delta, n, seed, workers, bins);
            auto calibrated = raw;
            calibrated.evidence = posthoc::EvidenceModel::calibrated_e(delta);
            posthoc::CompareReport report;
            {
                py::gil_scoped_release release;
                report.raw_p.report = posthoc::run_simulation(raw);
                report.calibrated.report = posthoc::run_simulation(calibrated);
            }
            report.raw_p.verdict = posthoc::verify_post_hoc_validity(report.raw_p.report);
            report.calibrated.verdict =
                posthoc::verify_post_hoc_validity(report.calibrated.report);
            return json_to_py(posthoc::compare_report_json(report));
        },
        py::arg("strategy"), py::arg("delta") = 0.5, py::arg("n") = 1'000'000,
        py::arg("seed") = 0, py::arg("workers") = 0, py::arg("bins") = 20,
        "Raw p vs calibrated p* under the same strategy, with validity verdicts");
}
