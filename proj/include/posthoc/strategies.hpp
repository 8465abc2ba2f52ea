#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "posthoc/types.hpp"

namespace posthoc {

// Always test at the same threshold; the calibrated control case.
struct FixedStrategy {
    Alpha a;
};

// Two standard thresholds in the field: pick a1 when p <= a1, else a2.
struct TwoThresholdStrategy {
    Alpha a1;
    Alpha a2;
};

// k competing standards: pick the smallest threshold that still rejects,
// falling back to the largest when none does. [a1] is Fixed(a1) and
// [a1, a2] is TwoThreshold(a1, a2) pointwise.
struct StepGreedyStrategy {
    std::vector<Alpha> thresholds;  // strictly increasing
};

// Any threshold up to cap_c is claimable: pick alpha = p itself (floored at
// floor_eps) when p <= cap_c, else cap_c. floor_eps == 0 is the analytic-only
// divergent sentinel: exact reports accept it, simulation rejects it.
struct ContinuumGreedyStrategy {
    Alpha cap_c;
    double floor_eps;
};

using StrategySpec =
    std::variant<FixedStrategy, TwoThresholdStrategy, StepGreedyStrategy, ContinuumGreedyStrategy>;

StrategySpec make_fixed(double a);
StrategySpec make_two_threshold(double a1, double a2);
StrategySpec make_step_greedy(std::vector<double> thresholds);
StrategySpec make_continuum_greedy(double cap_c, double floor_eps);

// The threshold the behavioral model selects after seeing p. Deterministic in
// p; no auxiliary randomness.
Alpha select_alpha(const StrategySpec& spec, PValue p);

// The set of thresholds a strategy can land on: a finite list for the
// discrete strategies, a closed interval [floor_eps, cap_c] for the continuum.
struct AlphaInterval {
    Alpha low;
    Alpha high;
};
using ReachableAlphas = std::variant<std::vector<Alpha>, AlphaInterval>;

ReachableAlphas reachable_alphas(const StrategySpec& spec);

// Textual form: fixed:<a> | two:<a1>,<a2> | step:<a1>,...,<ak> | cont:<C>,<eps>.
// Decimals or scientific notation. cont:<C>,0 parses only when
// allow_divergent_sentinel is set. Throws std::invalid_argument naming the
// offending token on malformed input.
StrategySpec parse_strategy(const std::string& text, bool allow_divergent_sentinel = false);
std::string to_string(const StrategySpec& spec);

bool is_divergent_sentinel(const StrategySpec& spec);

}  // namespace posthoc
