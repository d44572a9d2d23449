#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "selftest/optimizer.hpp"
#include "support.hpp"

using namespace selftest;

namespace {
const double kSqrt2 = std::numbers::sqrt2;
}

TEST_CASE("mu_of_s recovers the certified offsets at the tight slopes") {
    const BoundConstants k1 = default_chsh_constants();
    const double mu_chsh = mu_of_s(Scenario::Chsh, k1.s, 51);
    CHECK(mu_chsh <= k1.mu + 1e-6);
    CHECK(mu_chsh >= k1.mu - 1e-3);
    CHECK(std::abs(mu_chsh - k1.mu) < 1e-9);

    const BoundConstants k2 = default_mermin_constants();
    const double mu_mermin = mu_of_s(Scenario::Mermin, k2.s, 21);
    CHECK(std::abs(mu_mermin - (-1.0 / kSqrt2)) < 1e-9);
}

TEST_CASE("mu_of_s tends to zero with the slope") {
    const double mu = mu_of_s(Scenario::Chsh, 1e-4, 51);
    CHECK(mu <= 1e-12);
    CHECK(std::abs(mu) <= 3e-4);
}

TEST_CASE("mu_of_s validates inputs") {
    CHECK_THROWS_AS(mu_of_s(Scenario::Chsh, 0.0, 51), InvalidRange);
    CHECK_THROWS_AS(mu_of_s(Scenario::Chsh, 0.5, 1), InvalidGrid);
}

TEST_CASE("grid refinement can only lower mu") {
    for (const double s : {0.4, 0.6, 0.69, 0.9}) {
        const double coarse = mu_of_s(Scenario::Chsh, s, 11);
        const double fine = mu_of_s(Scenario::Chsh, s, 21);  // contains the coarse nodes
        CHECK(fine <= coarse + 1e-12);
    }
}

TEST_CASE("threshold optimization beats the coarse scan") {
    const EnvelopeResult result = optimize_constants(
        Scenario::Chsh, Objective::min_threshold(), 0.5, 0.9, 9, 51);
    CHECK(result.slopes.size() == 9);
    CHECK(result.offsets.size() == 9);
    CHECK(result.best_objective_value <= 2.107);
    CHECK(result.best_objective_value >= 2.10);

    // every scan pair re-certifies on the same grid
    for (std::size_t i = 0; i < result.slopes.size(); ++i) {
        const CertificateReport report = certify(
            Scenario::Chsh, {result.slopes[i], result.offsets[i]}, 51, 1e-9, false);
        CHECK(report.certified);
    }
    const CertificateReport best = certify(Scenario::Chsh, result.best, 51, 1e-9, false);
    CHECK(best.certified);
}

TEST_CASE("bound maximization at the Mermin quantum value reaches 1") {
    const BoundConstants k = default_mermin_constants();
    const EnvelopeResult result = optimize_constants(
        Scenario::Mermin, Objective::max_bound_at(4.0), k.s - 0.02, k.s + 0.02, 5, 9);
    CHECK(std::abs(result.best_objective_value - 1.0) <= 1e-6);
    CHECK(result.best_objective_value <= 1.0 + 1e-12);
}

TEST_CASE("degenerate scan range returns the single slope") {
    const EnvelopeResult result = optimize_constants(
        Scenario::Chsh, Objective::min_threshold(), 0.7, 0.7, 5, 21);
    REQUIRE(result.slopes.size() == 1);
    CHECK(result.slopes[0] == 0.7);
    CHECK(result.offsets[0] == mu_of_s(Scenario::Chsh, 0.7, 21));
    CHECK(result.best.s == 0.7);
}

TEST_CASE("optimize_constants validates its range") {
    CHECK_THROWS_AS(optimize_constants(Scenario::Chsh, Objective::min_threshold(), -0.1, 0.5, 5,
                                       21),
                    InvalidRange);
    CHECK_THROWS_AS(optimize_constants(Scenario::Chsh, Objective::min_threshold(), 0.9, 0.5, 5,
                                       21),
                    InvalidRange);
    CHECK_THROWS_AS(optimize_constants(Scenario::Chsh, Objective::min_threshold(), 0.3, 0.5, 1,
                                       21),
                    InvalidRange);
}

TEST_CASE("envelope of a single certified slope reproduces the linear bound") {
    const BoundConstants k = default_chsh_constants();
    const TradeoffCurve curve = envelope(Scenario::Chsh, {k.s}, 51, 33);
    REQUIRE(curve.points.size() == 33);
    CHECK(curve.beta_classical == 2.0);
    CHECK(curve.beta_quantum == doctest::Approx(2.0 * kSqrt2).epsilon(1e-15));
    for (const auto& pt : curve.points) {
        const double expected = linear_lower_bound(Scenario::Chsh, pt.beta, k);
        CHECK(std::abs(pt.lower - expected) < 1e-9);
        CHECK(pt.lower <= pt.upper + 1e-12);
    }
    CHECK(std::abs(curve.points.back().lower - 1.0) < 1e-6);
}

TEST_CASE("envelope is monotone and dominates its constituents") {
    const BoundConstants k = default_chsh_constants();
    const std::vector<double> slopes{k.s, 0.45};
    const TradeoffCurve base = envelope(Scenario::Chsh, {k.s}, 31, 17);
    const TradeoffCurve extended = envelope(Scenario::Chsh, slopes, 31, 17);
    std::vector<double> offsets;
    for (double s : slopes) offsets.push_back(mu_of_s(Scenario::Chsh, s, 31));
    for (std::size_t i = 0; i < base.points.size(); ++i) {
        CHECK(extended.points[i].lower >= base.points[i].lower - 1e-12);
        if (i > 0) {
            CHECK(base.points[i].lower >= base.points[i - 1].lower - 1e-12);
            CHECK(base.points[i].beta > base.points[i - 1].beta);
        }
        // pointwise max dominates every constituent line
        for (std::size_t j = 0; j < slopes.size(); ++j) {
            const double line = std::max(kLambdaMax,
                                         slopes[j] * extended.points[i].beta + offsets[j]);
            CHECK(extended.points[i].lower >= line - 1e-12);
        }
    }
}

TEST_CASE("envelope validates inputs") {
    CHECK_THROWS_AS(envelope(Scenario::Chsh, {}, 21, 11), InvalidRange);
    CHECK_THROWS_AS(envelope(Scenario::Chsh, {-0.5}, 21, 11), InvalidRange);
    CHECK_THROWS_AS(envelope(Scenario::Chsh, {0.5}, 21, 1), InvalidRange);
}
