#include "posthoc/strategies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace posthoc {

namespace {

double parse_number(const std::string& token) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument("strategy parse error: bad number '" + token + "'");
    }
    return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string format_number(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

StrategySpec make_fixed(double a) {
    return FixedStrategy{Alpha(a)};
}

StrategySpec make_two_threshold(double a1, double a2) {
    if (!(a1 < a2)) {
        throw std::domain_error("two-threshold strategy needs a1 < a2");
    }
    return TwoThresholdStrategy{Alpha(a1), Alpha(a2)};
}

StrategySpec make_step_greedy(std::vector<double> thresholds) {
    if (thresholds.empty()) {
        throw std::domain_error("step strategy needs at least one threshold");
    }
    std::vector<Alpha> alphas;
    alphas.reserve(thresholds.size());
    for (double t : thresholds) {
        alphas.emplace_back(t);
    }
    for (std::size_t i = 1; i < alphas.size(); ++i) {
        if (!(alphas[i - 1].value() < alphas[i].value())) {
            throw std::domain_error("step strategy thresholds must be strictly increasing");
        }
    }
    return StepGreedyStrategy{std::move(alphas)};
}

StrategySpec make_continuum_greedy(double cap_c, double floor_eps) {
    Alpha cap(cap_c);
    if (!(floor_eps >= 0.0) || !std::isfinite(floor_eps)) {
        throw std::domain_error("continuum floor must be finite and >= 0");
    }
    if (floor_eps > cap_c) {
        throw std::domain_error("continuum floor must not exceed the cap");
    }
    return ContinuumGreedyStrategy{cap, floor_eps};
}

Alpha select_alpha(const StrategySpec& spec, PValue p) {
    return std::visit(
        [&](const auto& s) -> Alpha {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FixedStrategy>) {
                return s.a;
            } else if constexpr (std::is_same_v<T, TwoThresholdStrategy>) {
                return p.value() <= s.a1.value() ? s.a1 : s.a2;
            } else if constexpr (std::is_same_v<T, StepGreedyStrategy>) {
                for (Alpha t : s.thresholds) {
                    if (p.value() <= t.value()) {
                        return t;
                    }
                }
                return s.thresholds.back();
            } else {
                static_assert(std::is_same_v<T, ContinuumGreedyStrategy>);
                if (!(s.floor_eps > 0.0)) {
                    throw std::domain_error(
                        "continuum strategy with eps = 0 is analytic-only; it cannot select alpha");
                }
                if (p.value() > s.cap_c.value()) {
                    return s.cap_c;
                }
                return Alpha(std::max(s.floor_eps, p.value()));
            }
        },
        spec);
}

ReachableAlphas reachable_alphas(const StrategySpec& spec) {
    return std::visit(
        [](const auto& s) -> ReachableAlphas {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FixedStrategy>) {
                return std::vector<Alpha>{s.a};
            } else if constexpr (std::is_same_v<T, TwoThresholdStrategy>) {
                return std::vector<Alpha>{s.a1, s.a2};
            } else if constexpr (std::is_same_v<T, StepGreedyStrategy>) {
                return s.thresholds;
            } else {
                static_assert(std::is_same_v<T, ContinuumGreedyStrategy>);
                if (!(s.floor_eps > 0.0)) {
                    throw std::domain_error(
                        "continuum strategy with eps = 0 has no bounded reachable set");
                }
                return AlphaInterval{Alpha(s.floor_eps), s.cap_c};
            }
        },
        spec);
}

StrategySpec parse_strategy(const std::string& text, bool allow_divergent_sentinel) {
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("strategy parse error: missing ':' in '" + text + "'");
    }
    const std::string kind = text.substr(0, colon);
    const std::vector<std::string> args = split(text.substr(colon + 1), ',');

    auto expect_arity = [&](std::size_t n) {
        if (args.size() != n) {
            throw std::invalid_argument("strategy parse error: '" + kind + "' takes " +
                                        std::to_string(n) + " parameter(s), got '" + text + "'");
        }
    };

    try {
        if (kind == "fixed") {
            expect_arity(1);
            return make_fixed(parse_number(args[0]));
        }
        if (kind == "two") {
            expect_arity(2);
            return make_two_threshold(parse_number(args[0]), parse_number(args[1]));
        }
        if (kind == "step") {
            if (args.empty()) {
                throw std::invalid_argument("strategy parse error: 'step' needs thresholds");
            }
            std::vector<double> values;
            values.reserve(args.size());
            for (const auto& a : args) {
                values.push_back(parse_number(a));
            }
            return make_step_greedy(std::move(values));
        }
        if (kind == "cont") {
            expect_arity(2);
            const double cap = parse_number(args[0]);
            const double eps = parse_number(args[1]);
            if (eps == 0.0 && !allow_divergent_sentinel) {
                throw std::invalid_argument(
                    "strategy parse error: 'cont:" + args[0] +
                    ",0' is the divergent sentinel, valid only for exact reports");
            }
            return make_continuum_greedy(cap, eps);
        }
    } catch (const std::domain_error& e) {
        throw std::invalid_argument("strategy parse error in '" + text + "': " + e.what());
    }
    throw std::invalid_argument("strategy parse error: unknown kind '" + kind + "'");
}

std::string to_string(const StrategySpec& spec) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FixedStrategy>) {
                return "fixed:" + format_number(s.a.value());
            } else if constexpr (std::is_same_v<T, TwoThresholdStrategy>) {
                return "two:" + format_number(s.a1.value()) + "," + format_number(s.a2.value());
            } else if constexpr (std::is_same_v<T, StepGreedyStrategy>) {
                std::string out = "step:";
                for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
                    if (i > 0) {
                        out += ',';
                    }
                    out += format_number(s.thresholds[i].value());
                }
                return out;
            } else {
                static_assert(std::is_same_v<T, ContinuumGreedyStrategy>);
                return "cont:" + format_number(s.cap_c.value()) + "," + format_number(s.floor_eps);
            }
        },
        spec);
}

bool is_divergent_sentinel(const StrategySpec& spec) {
    const auto* cont = std::get_if<ContinuumGreedyStrategy>(&spec);
    return cont != nullptr && cont->floor_eps == 0.0;
}

}  // namespace posthoc
