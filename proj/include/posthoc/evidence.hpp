#pragma once

#include <string>

#include "posthoc/rng.hpp"
#include "posthoc/types.hpp"

namespace posthoc {

enum class EvidenceKind {
    ExactUniform,  // p drawn uniform on (0,1]
    GaussianZ,     // Z ~ N(0,1) under H0, one-sided p = 1 - Phi(Z)
    CalibratedE,   // Z ~ N(0,1), e = likelihood ratio N(delta,1) vs N(0,1), p* = min(1, 1/e)
};

// How a trial's evidence is generated under the null. delta_design is the
// mean shift of the alternative used to build the likelihood-ratio e-value;
// for GaussianZ it is carried but plays no role in p generation.
struct EvidenceModel {
    EvidenceKind kind = EvidenceKind::ExactUniform;
    double delta_design = 0.5;

    static EvidenceModel exact_uniform();
    static EvidenceModel gaussian_z(double delta_design = 0.5);
    static EvidenceModel calibrated_e(double delta_design = 0.5);
};

// Standard normal CDF, erfc-based. Absolute error well below 1e-12 over the
// whole line, so p-values near 0.005 are exact to reporting precision.
double normal_cdf(double z);

// Likelihood ratio of N(delta,1) against N(0,1) at observation z:
// exp(delta*z - delta^2/2). Throws std::range_error if the value overflows.
EValue likelihood_ratio_e(double z, double delta);

// Reciprocal calibrator p* = min(1, 1/e); e = 0 maps to 1.
PValue calibrate_to_p(EValue e);

// One trial's evidence: the raw statistic and the p-value the researcher
// compares against thresholds (the calibrated p* in the CalibratedE model).
struct Evidence {
    double statistic;
    PValue p;
};

Evidence draw_evidence(const EvidenceModel& model, TrialStream& rng);

// Null p-value draw for the plain-p models (ExactUniform, GaussianZ).
// CalibratedE has no raw p; use draw_evidence for the p* pipeline.
PValue draw_null_p(const EvidenceModel& model, TrialStream& rng);

std::string to_string(EvidenceKind kind);
EvidenceKind evidence_kind_from_string(const std::string& name);

}  // namespace posthoc
