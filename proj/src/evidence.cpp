#include "posthoc/evidence.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace posthoc {

namespace {

void check_delta(double delta) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw std::domain_error("delta_design must be finite and >= 0, got " +
                                std::to_string(delta));
    }
}

}  // namespace

EvidenceModel EvidenceModel::exact_uniform() {
    return EvidenceModel{EvidenceKind::ExactUniform, 0.0};
}

EvidenceModel EvidenceModel::gaussian_z(double delta_design) {
    check_delta(delta_design);
    return EvidenceModel{EvidenceKind::GaussianZ, delta_design};
}

EvidenceModel EvidenceModel::calibrated_e(double delta_design) {
    check_delta(delta_design);
    if (delta_design == 0.0) {
        throw std::domain_error("CalibratedE needs delta_design > 0; delta = 0 makes e == 1");
    }
    return EvidenceModel{EvidenceKind::CalibratedE, delta_design};
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
}

EValue likelihood_ratio_e(double z, double delta) {
    check_delta(delta);
    if (!std::isfinite(z)) {
        throw std::domain_error("likelihood_ratio_e: z must be finite");
    }
    const double e = std::exp(delta * z - 0.5 * delta * delta);
    if (!std::isfinite(e)) {
        std::ostringstream msg;
        msg << "likelihood_ratio_e overflow at z=" << z << ", delta=" << delta;
        throw std::range_error(msg.str());
    }
    return EValue(e);
}

PValue calibrate_to_p(EValue e) {
    if (e.value() <= 1.0) {
        return PValue(1.0);
    }
    return PValue(1.0 / e.value());
}

Evidence draw_evidence(const EvidenceModel& model, TrialStream& rng) {
    switch (model.kind) {
        case EvidenceKind::ExactUniform: {
            const double u = rng.uniform();
            return Evidence{u, PValue(u)};
        }
        case EvidenceKind::GaussianZ: {
            const double z = rng.normal();
            // 1 - Phi(z) = Phi(-z), evaluated directly to avoid cancellation.
            return Evidence{z, PValue(normal_cdf(-z))};
        }
        case EvidenceKind::CalibratedE: {
            const double z = rng.normal();
            return Evidence{z, calibrate_to_p(likelihood_ratio_e(z, model.delta_design))};
        }
    }
    throw std::logic_error("draw_evidence: unknown evidence kind");
}

PValue draw_null_p(const EvidenceModel& model, TrialStream& rng) {
    if (model.kind == EvidenceKind::CalibratedE) {
        throw std::domain_error("draw_null_p: CalibratedE yields p*, use draw_evidence");
    }
    return draw_evidence(model, rng).p;
}

std::string to_string(EvidenceKind kind) {
    switch (kind) {
        case EvidenceKind::ExactUniform: return "uniform";
        case EvidenceKind::GaussianZ: return "gauss";
        case EvidenceKind::CalibratedE: return "calibrated";
    }
    throw std::logic_error("to_string: unknown evidence kind");
}

EvidenceKind evidence_kind_from_string(const std::string& name) {
    if (name == "uniform") return EvidenceKind::ExactUniform;
    if (name == "gauss") return EvidenceKind::GaussianZ;
    if (name == "calibrated") return EvidenceKind::CalibratedE;
    throw std::invalid_argument("unknown evidence model '" + name +
                                "' (expected uniform, gauss or calibrated)");
}

}  // namespace posthoc
