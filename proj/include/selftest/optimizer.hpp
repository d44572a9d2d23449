#pragma once

// Search over the slope s of the linear bound: for each s the best valid
// offset mu(s) is the spectral floor of K - s W over the angle grid.  On top
// of that a scan-plus-golden-section optimizer picks s for a user objective,
// and a pointwise maximum of valid lines yields the lower envelope.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "selftest/certifier.hpp"
#include "selftest/errors.hpp"
#include "selftest/tradeoff.hpp"

namespace selftest {

// mu(s) = min over the angle grid of lambda_min(K - s W); by construction
// (s, mu(s)) certifies on that grid.
inline double mu_of_s(Scenario sc, double s, int grid_n, std::size_t threads = 1) {
    if (!(s > 0.0)) throw InvalidRange("slope s must be positive");
    if (grid_n < 2) throw InvalidGrid("grid must have at least 2 points per angle");
    return detail::sweep_spectral_floor(sc, s, grid_n, threads).min_value;
}

struct Objective {
    enum class Kind { MinThreshold, MaxBoundAt };
    Kind kind = Kind::MinThreshold;
    double beta = 0.0;  // used by MaxBoundAt

    static Objective min_threshold() { return {Kind::MinThreshold, 0.0}; }
    static Objective max_bound_at(double beta) { return {Kind::MaxBoundAt, beta}; }
};

inline std::string objective_name(const Objective& o) {
    if (o.kind == Objective::Kind::MinThreshold) return "threshold";
    return "bound-at:" + std::to_string(o.beta);
}

struct EnvelopeResult {
    std::vector<double> slopes;
    std::vector<double> offsets;  // mu(s) per slope
    Objective objective;
    BoundConstants best;
    int grid_n = 0;
    double best_objective_value = 0.0;
};

namespace detail {

// Value to MINIMIZE for either objective.
inline double objective_cost(const Objective& o, double s, double mu) {
    if (o.kind == Objective::Kind::MinThreshold) return (kLambdaMax - mu) / s;
    return -(s * o.beta + mu);
}

}  // namespace detail

// Uniform scan over s with mu(s) computed per step, followed by 20 rounds of
// golden-section refinement between the neighbours of the best scan node.
inline EnvelopeResult optimize_constants(Scenario sc, const Objective& objective, double s_min,
                                         double s_max, int steps, int grid_n,
                                         std::size_t threads = 1) {
    if (!(s_min > 0.0) || s_min > s_max) throw InvalidRange("need 0 < s_min <= s_max");
    if (grid_n < 2) throw InvalidGrid("grid must have at least 2 points per angle");
    const bool degenerate = s_min == s_max;
    if (!degenerate && steps < 2) throw InvalidRange("need at least 2 scan steps");
    if (degenerate) steps = 1;

    EnvelopeResult result;
    result.objective = objective;
    result.grid_n = grid_n;

    std::size_t best_idx = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int i = 0; i < steps; ++i) {
        const double s = degenerate ? s_min
                                    : s_min + (s_max - s_min) * static_cast<double>(i) /
                                                  static_cast<double>(steps - 1);
        const double mu = mu_of_s(sc, s, grid_n, threads);
        result.slopes.push_back(s);
        result.offsets.push_back(mu);
        const double cost = detail::objective_cost(objective, s, mu);
        if (cost < best_cost) {
            best_cost = cost;
            best_idx = result.slopes.size() - 1;
        }
    }
    result.best = {result.slopes[best_idx], result.offsets[best_idx]};
    result.best_objective_value = objective.kind == Objective::Kind::MinThreshold
                                      ? best_cost
                                      : -best_cost;
    if (degenerate) return result;

    // Golden-section refinement inside the bracket around the best node.
    double lo = result.slopes[best_idx > 0 ? best_idx - 1 : 0];
    double hi = result.slopes[std::min(result.slopes.size() - 1, best_idx + 1)];
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto cost_at = [&](double s) {
        return detail::objective_cost(objective, s, mu_of_s(sc, s, grid_n, threads));
    };
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = cost_at(x1);
    double f2 = cost_at(x2);
    for (int it = 0; it < 20; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = cost_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = cost_at(x2);
        }
    }
    const double s_refined = f1 <= f2 ? x1 : x2;
    const double cost_refined = std::min(f1, f2);
    if (cost_refined < best_cost) {
        result.best = {s_refined, mu_of_s(sc, s_refined, grid_n, threads)};
        result.best_objective_value = objective.kind == Objective::Kind::MinThreshold
                                          ? cost_refined
                                          : -cost_refined;
    }
    return result;
}

// Pointwise maximum of the valid lines s beta + mu(s) over the given slopes,
// clamped below by the trivial bound; paired with the mixture upper bound.
inline TradeoffCurve envelope(Scenario sc, const std::vector<double>& s_values, int grid_n,
                              int beta_samples, std::size_t threads = 1) {
    if (s_values.empty()) throw InvalidRange("need at least one slope");
    for (double s : s_values) {
        if (!(s > 0.0)) throw InvalidRange("slopes must be positive");
    }
    if (beta_samples < 2) throw InvalidRange("need at least 2 beta samples");
    if (grid_n < 2) throw InvalidGrid("grid must have at least 2 points per angle");

    std::vector<double> offsets;
    offsets.reserve(s_values.size());
    for (double s : s_values) offsets.push_back(mu_of_s(sc, s, grid_n, threads));

    TradeoffCurve curve;
    curve.scenario = sc;
    curve.beta_classical = beta_classical(sc);
    curve.beta_quantum = beta_quantum(sc);
    curve.lambda_max = kLambdaMax;
    curve.points.reserve(beta_samples);
    for (int i = 0; i < beta_samples; ++i) {
        const double beta = curve.beta_classical +
                            (curve.beta_quantum - curve.beta_classical) *
                                static_cast<double>(i) / static_cast<double>(beta_samples - 1);
        double lower = kLambdaMax;
        for (std::size_t j = 0; j < s_values.size(); ++j) {
            lower = std::max(lower, s_values[j] * beta + offsets[j]);
        }
        curve.points.push_back(
            {beta, lower,
             upper_bound_curve(beta, curve.beta_classical, curve.beta_quantum, kLambdaMax)});
    }
    return curve;
}

}  // namespace selftest
