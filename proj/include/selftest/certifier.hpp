#pragma once

// Certification of the operator inequality K >= s W + mu 1 over the full
// angle domain: builds T = K - s W - mu 1, exploits the conjugation symmetries
// and the generic block projectors, evaluates the closed-form block
// quantities, and certifies positivity by a grid sweep with an optional
// Lipschitz continuum margin.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "selftest/bell.hpp"
#include "selftest/detail/parallel.hpp"
#include "selftest/errors.hpp"
#include "selftest/extraction.hpp"
#include "selftest/matops.hpp"

namespace selftest {

// Slope / offset pair of the linear bound s * beta + mu.
struct BoundConstants {
    double s = 0.0;
    double mu = 0.0;

    friend bool operator==(const BoundConstants& a, const BoundConstants& b) {
        return a.s == b.s && a.mu == b.mu;
    }
};

// s = (4 + 5 sqrt 2)/16, mu = -(1 + 2 sqrt 2)/4.
inline BoundConstants default_chsh_constants() {
    return {(4.0 + 5.0 * std::numbers::sqrt2) / 16.0, -(1.0 + 2.0 * std::numbers::sqrt2) / 4.0};
}

// s = (2 + sqrt 2)/8, mu = -1/sqrt 2.
inline BoundConstants default_mermin_constants() {
    return {(2.0 + std::numbers::sqrt2) / 8.0, -1.0 / std::numbers::sqrt2};
}

enum class Scenario { Chsh, Mermin };

inline int scenario_parties(Scenario sc) { return sc == Scenario::Chsh ? 2 : 3; }

inline const char* scenario_name(Scenario sc) { return sc == Scenario::Chsh ? "chsh" : "mermin"; }

inline BoundConstants default_constants(Scenario sc) {
    return sc == Scenario::Chsh ? default_chsh_constants() : default_mermin_constants();
}

namespace detail {

inline void require_slope(const BoundConstants& k) {
    if (!(k.s > 0.0)) throw InvalidRange("slope s must be positive");
}

}  // namespace detail

// T(a, b) = K(a, b) - s W(a, b) - mu 1.
inline HermitianOperator t_chsh(double a, double b, const BoundConstants& k) {
    detail::require_slope(k);
    ComplexMatrix t = k_chsh(a, b).matrix() - k.s * chsh_operator(a, b).matrix() -
                      k.mu * ComplexMatrix::identity(4);
    return HermitianOperator(std::move(t));
}

// T(a, b, c) = K(a, b, c) - s W(a, b, c) - mu 1.
inline HermitianOperator t_mermin(double a, double b, double c, const BoundConstants& k) {
    detail::require_slope(k);
    ComplexMatrix t = k_mermin(a, b, c).matrix() - k.s * mermin_operator(a, b, c).matrix() -
                      k.mu * ComplexMatrix::identity(8);
    return HermitianOperator(std::move(t));
}

// P_x = (1 + (-1)^x yy)/2, the rank-2 projectors commuting with T(a, b).
inline HermitianOperator chsh_projector(int x) {
    if (x != 0 && x != 1) throw InvalidRange("projector index must be 0 or 1");
    const double sign = x == 0 ? 1.0 : -1.0;
    ComplexMatrix p = 0.5 * (pauli_string({0, 0}) + sign * pauli_string({2, 2}));
    return HermitianOperator(std::move(p));
}

// P_{x1 x2} = (1 + (-1)^{x1} yy1 + (-1)^{x2} y1y + (-1)^{x1+x2} 1yy)/4.
inline HermitianOperator mermin_projector(int x1, int x2) {
    if ((x1 != 0 && x1 != 1) || (x2 != 0 && x2 != 1)) {
        throw InvalidRange("projector indices must be 0 or 1");
    }
    const double s1 = x1 == 0 ? 1.0 : -1.0;
    const double s2 = x2 == 0 ? 1.0 : -1.0;
    ComplexMatrix p = 0.25 * (pauli_string({0, 0, 0}) + s1 * pauli_string({2, 2, 0}) +
                              s2 * pauli_string({2, 0, 2}) + (s1 * s2) * pauli_string({0, 2, 2}));
    return HermitianOperator(std::move(p));
}

// Scalar data of one block M = P T P: its trace, the trace of its square and
// lambda = (tr M)^2 - tr M^2.  A rank-2 Hermitian block is PSD iff
// tr M >= 0 and lambda >= 0.
struct BlockSpectrum {
    std::vector<int> label;
    double trace_m = 0.0;
    double trace_m_sq = 0.0;
    double lambda = 0.0;
};

inline BlockSpectrum block_spectrum(const HermitianOperator& t, const HermitianOperator& p,
                                    std::vector<int> label = {}) {
    if (t.dim() != p.dim()) throw DimensionMismatch("projector dimension mismatch");
    const ComplexMatrix& pm = p.matrix();
    if (max_abs_diff(pm * pm, pm) > 1e-10) {
        throw ProjectorMismatch("input is not an orthogonal projector");
    }
    const ComplexMatrix& tm = t.matrix();
    const double comm = (tm * pm - pm * tm).frobenius_norm();
    if (comm > 1e-10 * std::max(1.0, tm.frobenius_norm())) {
        throw ProjectorMismatch("projector does not commute with the operator, |[T,P]| = " +
                                std::to_string(comm));
    }
    const ComplexMatrix m = pm * tm * pm;
    BlockSpectrum out;
    out.label = std::move(label);
    out.trace_m = std::real(m.trace());
    out.trace_m_sq = std::real((m * m).trace());
    out.lambda = out.trace_m * out.trace_m - out.trace_m_sq;
    return out;
}

// Eigenvalue pair of the 2x2 block recovered from its trace data.
inline std::pair<double, double> block_eigenvalues(const BlockSpectrum& b) {
    const double disc = std::max(0.0, 2.0 * b.trace_m_sq - b.trace_m * b.trace_m);
    const double root = std::sqrt(disc);
    return {0.5 * (b.trace_m - root), 0.5 * (b.trace_m + root)};
}

// ---------------------------------------------------------------------------
// Closed-form block quantities.
// ---------------------------------------------------------------------------

// tr M_x = 1/2 - 2 mu + (-1)^x g(a) g(b) / 2.
inline double chsh_block_trace(int x, double a, double b, const BoundConstants& k) {
    const double sign = x == 0 ? 1.0 : -1.0;
    return 0.5 - 2.0 * k.mu + sign * dephasing_weight(a) * dephasing_weight(b) / 2.0;
}

// tr M_x^2 in closed form.
inline double chsh_block_trace_sq(int x, double a, double b, const BoundConstants& k) {
    const double r2 = std::numbers::sqrt2;
    const double s = k.s, mu = k.mu;
    const double ga = dephasing_weight(a), gb = dephasing_weight(b);
    const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
    const double sign = x == 0 ? 1.0 : -1.0;
    const double even =
        2.0 * ((0.25 - mu) * (0.25 - mu) +
               (1.0 + ga * ga + gb * gb + 3.0 * ga * ga * gb * gb) / 32.0 + 4.0 * s * s -
               (s / r2) * (ca + ga * sa) * (cb + gb * sb));
    const double odd = 0.5 * ((1.0 - 2.0 * mu) * ga * gb -
                              2.0 * s * r2 * (ga * ca + sa) * (gb * cb + sb) +
                              16.0 * s * s * std::sin(2.0 * a) * std::sin(2.0 * b));
    return even + sign * odd;
}

// lambda_x(a, b) = (tr M_x)^2 - tr M_x^2 in closed form (any constants).
inline double chsh_lambda(int x, double a, double b, const BoundConstants& k) {
    const double r2 = std::numbers::sqrt2;
    const double s = k.s, mu = k.mu;
    const double ga = dephasing_weight(a), gb = dephasing_weight(b);
    const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
    const double sign = x == 0 ? 1.0 : -1.0;
    const double even = 2.0 * (0.25 - mu) * (0.25 - mu) +
                        (-1.0 - ga * ga - gb * gb + ga * ga * gb * gb) / 16.0 - 8.0 * s * s +
                        s * r2 * (ca + ga * sa) * (cb + gb * sb);
    const double odd = -mu * ga * gb + s * r2 * (ga * ca + sa) * (gb * cb + sb) -
                       8.0 * s * s * std::sin(2.0 * a) * std::sin(2.0 * b);
    return even + sign * odd;
}

inline constexpr double kLambdaDomainSlack = 1e-9;

namespace detail {

inline void require_lambda_domain(double u, double t) {
    const double zeta = std::cos(std::numbers::pi / 8.0);
    if (!(u >= -kLambdaDomainSlack && u <= std::numbers::pi / 4.0 + kLambdaDomainSlack)) {
        throw DomainError("u outside [0, pi/4]");
    }
    if (!(t >= zeta - kLambdaDomainSlack && t <= 1.0 + kLambdaDomainSlack)) {
        throw DomainError("t outside [cos(pi/8), 1]");
    }
}

}  // namespace detail

// lambda_0 in the coordinates u = (a+b)/2, t = cos((a-b)/2), for the default
// CHSH constants.  Quartic in t.
inline double lambda0_poly(double u, double t) {
    detail::require_lambda_domain(u, t);
    const double r2 = std::numbers::sqrt2;
    const double su = std::sin(u), cu = std::cos(u);
    const double s2u = std::sin(2.0 * u), c4u = std::cos(4.0 * u);
    const double t2 = t * t;
    return (15.0 + 12.0 * r2) / 2.0 * t2 * t2 -
           2.0 * (10.0 + 7.0 * r2) * (su + cu) * t2 * t +
           ((27.0 + 17.0 * r2) / 2.0 + (27.0 + 19.0 * r2) / 2.0 * s2u) * t2 -
           ((3.0 + 2.0 * r2) * su - (2.0 + r2) / 2.0 * cu -
            (8.0 + 5.0 * r2) / 2.0 * (su - cu) * su * su) *
               t -
           (4.0 + 3.0 * r2) / 2.0 * s2u + (2.0 + r2) / 4.0 * c4u - (10.0 + 5.0 * r2) / 4.0;
}

// lambda_1 in the same coordinates, default CHSH constants.
inline double lambda1_poly(double u, double t) {
    detail::require_lambda_domain(u, t);
    const double r2 = std::numbers::sqrt2;
    const double su = std::sin(u), cu = std::cos(u);
    const double s2u = std::sin(2.0 * u), c2u = std::cos(2.0 * u);
    const double s4u = std::sin(4.0 * u), c4u = std::cos(4.0 * u);
    const double t2 = t * t;
    return (25.0 + 16.0 * r2) / 2.0 * t2 * t2 -
           0.5 * ((8.0 + 5.0 * r2) * su + (26.0 + 19.0 * r2) * cu) * t2 * t +
           0.25 * (-(38.0 + 24.0 * r2) + (31.0 + 22.0 * r2) * s2u - (23.0 + 16.0 * r2) * c2u) *
               t2 +
           0.5 *
               (-(2.0 + 2.0 * r2) * su + (33.0 + 24.0 * r2) * cu -
                (40.0 + 28.0 * r2) * su * su * cu - (6.0 + 4.0 * r2) * su * su * su) *
               t -
           (19.0 + 14.0 * r2) / 8.0 * s2u + (5.0 + 2.0 * r2) / 8.0 * c2u -
           (23.0 + 16.0 * r2) / 16.0 * s4u - (25.0 + 16.0 * r2) / 16.0 * c4u +
           (3.0 + 4.0 * r2) / 16.0;
}

// tr M_{x1 x2} = 2 (1/8 - mu)
//   + [(-1)^{x1} g(a) g(b) - (-1)^{x2} g(a) g(c) - (-1)^{x1+x2} g(b) g(c)] / 4.
inline double mermin_block_trace(int x1, int x2, double a, double b, double c,
                                 const BoundConstants& k) {
    const double s1 = x1 == 0 ? 1.0 : -1.0;
    const double s2 = x2 == 0 ? 1.0 : -1.0;
    const double ga = dephasing_weight(a), gb = dephasing_weight(b), gc = dephasing_weight(c);
    return 2.0 * (0.125 - k.mu) + 0.25 * (s1 * ga * gb - s2 * ga * gc - s1 * s2 * gb * gc);
}

// lambda_{x1 x2}(a, b, c) in closed form.
inline double mermin_lambda(int x1, int x2, double a, double b, double c,
                            const BoundConstants& k) {
    const double r2 = std::numbers::sqrt2;
    const double s = k.s, mu = k.mu;
    const double s1 = x1 == 0 ? 1.0 : -1.0;
    const double s2 = x2 == 0 ? 1.0 : -1.0;
    const double ga = dephasing_weight(a), gb = dephasing_weight(b), gc = dephasing_weight(c);
    const double ca = std::cos(a), sa = std::sin(a);
    const double cb = std::cos(b), sb = std::sin(b);
    const double cc = std::cos(c), sc = std::sin(c);
    const double s2a = std::sin(2.0 * a), s2b = std::sin(2.0 * b), s2c = std::sin(2.0 * c);

    const double even =
        2.0 * (0.125 - mu) * (0.125 - mu) - 1.0 / 32.0 +
        (1.0 - ga * ga) * (1.0 - gb * gb) * (1.0 - gc * gc) / 64.0 - 8.0 * s * s +
        (s / r2) * (ca + ga * sa) * (cb + gb * sb) * (cc + gc * sc);
    const double odd1 = -mu * ga * gb / 2.0 - 8.0 * s * s * s2a * s2b +
                        (s / r2) * (ga * ca + sa) * (gb * cb + sb) * (cc + gc * sc);
    const double odd2 = mu * ga * gc / 2.0 + 8.0 * s * s * s2a * s2c -
                        (s / r2) * (ga * ca + sa) * (cb + gb * sb) * (gc * cc + sc);
    const double odd12 = mu * gb * gc / 2.0 + 8.0 * s * s * s2b * s2c -
                         (s / r2) * (ca + ga * sa) * (gb * cb + sb) * (gc * cc + sc);
    return even + s1 * odd1 + s2 * odd2 + s1 * s2 * odd12;
}

// Delta lambda = lambda_00 - lambda_01 in closed form.
inline double mermin_delta_lambda(double a, double b, double c, const BoundConstants& k) {
    const double r2 = std::numbers::sqrt2;
    const double ga = dephasing_weight(a), gb = dephasing_weight(b), gc = dephasing_weight(c);
    const double cc = std::cos(c), sc = std::sin(c);
    return k.mu * (ga + gb) * gc +
           16.0 * k.s * k.s * (std::sin(2.0 * a) + std::sin(2.0 * b)) * std::sin(2.0 * c) -
           k.s * r2 * (gc * cc + sc) *
               ((ga + gb) * std::cos(a - b) + (1.0 + ga * gb) * std::sin(a + b));
}

// Lower bound f(u, t) on Delta lambda / (2 s sin 2c) after the two ratio
// bounds are applied (default Mermin constants baked in).  Cubic in t.
inline double mermin_f(double u, double t) {
    const double r2 = std::numbers::sqrt2;
    const double su = std::sin(u), cu = std::cos(u);
    const double s2u = std::sin(2.0 * u);
    return -(6.0 + 4.0 * r2) * (su + cu) * t * t * t +
           (6.0 + 4.0 * r2 + (1.0 - r2) * s2u) * t * t +
           (su + cu) * (1.0 + (7.0 + 5.0 * r2) * s2u) * t - (9.0 + 5.0 * r2) / 2.0 * s2u -
           (7.0 + 5.0 * r2) / 2.0 * s2u * s2u - 1.0;
}

inline double mermin_f_tt(double u, double t) {
    const double r2 = std::numbers::sqrt2;
    return -6.0 * (6.0 + 4.0 * r2) * (std::sin(u) + std::cos(u)) * t +
           2.0 * (6.0 + 4.0 * r2 + (1.0 - r2) * std::sin(2.0 * u));
}

// Polynomial part of lambda_01 in x = 1 - sin(a + pi/4) coordinates.
inline double mermin_p_poly(double x, double y, double z) {
    const double r2 = std::numbers::sqrt2;
    const double e2 = x * y + x * z + y * z;
    const double cubic = x * x * y + x * x * z + x * y * y + x * z * z + y * y * z + y * z * z;
    const double quart = x * x * y * y + x * x * z * z + y * y * z * z;
    const double xyz = x * y * z;
    return (3.0 + 2.0 * r2) * e2 - (4.0 + 3.0 * r2) / 2.0 * cubic + (4.0 + 3.0 * r2) / 2.0 * quart +
           (69.0 + 48.0 * r2) / 4.0 * xyz * (x + y + z) - (50.0 + 35.0 * r2) / 8.0 * xyz * e2 -
           (128.0 + 87.0 * r2) / 4.0 * xyz - (31.0 + 22.0 * r2) / 8.0 * xyz * xyz;
}

// Manifestly non-negative part of lambda_01.
inline double mermin_q_term(double a, double b, double c) {
    const double r2 = std::numbers::sqrt2;
    const double q = std::numbers::pi / 4.0;
    return (2.0 + r2) / 8.0 * (1.0 - dephasing_weight(a)) * (1.0 - dephasing_weight(b)) *
           (1.0 - dephasing_weight(c)) * std::cos(a + q) * std::cos(b + q) * std::cos(c + q);
}

// Single-variable minorant of P in the geometric mean r = cbrt(xyz), obtained
// from x+y+z >= 3r, xy+yz+xz in [3r^2, 3 eta^2] and the quartic mean bound.
// The r^4 coefficient is 3(4+3 sqrt 2)/2 + 3(69+48 sqrt 2)/4 = 231/4 + 81 sqrt 2 / 2.
inline double mermin_p_prime(double r) {
    const double r2 = std::numbers::sqrt2;
    const double rr = r * r;
    return (9.0 + 3.0 * r2) / 2.0 * rr - (446.0 + 291.0 * r2) / 16.0 * rr * r +
           (231.0 / 4.0 + 81.0 * r2 / 2.0) * rr * rr - (31.0 + 22.0 * r2) / 8.0 * rr * rr * rr;
}

// ---------------------------------------------------------------------------
// Grid check reports.
// ---------------------------------------------------------------------------

struct ClauseResult {
    std::string name;
    double worst = 0.0;      // most adverse value seen (slack for >=, magnitude for ==)
    double threshold = 0.0;  // pass when worst >= -threshold (slack) or worst <= threshold (eq)
    bool is_equality = false;
    bool passed = false;
    std::vector<double> location;  // grid point attaining `worst`
};

struct CheckReport {
    bool passed = false;
    std::vector<ClauseResult> clauses;

    std::string summary() const {
        std::ostringstream os;
        for (const auto& c : clauses) {
            os << (c.passed ? "ok  " : "FAIL") << "  " << c.name << "  worst=" << c.worst;
            if (!c.location.empty()) {
                os << " at (";
                for (std::size_t i = 0; i < c.location.size(); ++i) {
                    if (i) os << ", ";
                    os << c.location[i];
                }
                os << ")";
            }
            os << "\n";
        }
        return os.str();
    }
};

namespace detail {

// Clause accumulator for ">= -threshold" style inequalities.
struct SlackClause {
    ClauseResult result;

    explicit SlackClause(std::string name, double threshold) {
        result.name = std::move(name);
        result.threshold = threshold;
        result.worst = std::numeric_limits<double>::infinity();
    }

    void observe(double slack, std::initializer_list<double> where) {
        if (slack < result.worst) {
            result.worst = slack;
            result.location.assign(where);
        }
    }

    ClauseResult finish() {
        result.passed = result.worst >= -result.threshold;
        return result;
    }
};

// Clause accumulator for "|value| <= threshold" style identities.
struct EqualityClause {
    ClauseResult result;

    explicit EqualityClause(std::string name, double threshold) {
        result.name = std::move(name);
        result.threshold = threshold;
        result.is_equality = true;
        result.worst = 0.0;
    }

    void observe(double value, std::initializer_list<double> where) {
        const double mag = std::abs(value);
        if (mag > result.worst) {
            result.worst = mag;
            result.location.assign(where);
        }
    }

    ClauseResult finish() {
        result.passed = result.worst <= result.threshold;
        return result;
    }
};

inline std::vector<double> uniform_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return g;
}

// Deterministic uniforms in [0, 1).
struct UniformStream {
    std::mt19937_64 eng;
    explicit UniformStream(std::uint64_t seed) : eng(seed) {}
    double next() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
};

}  // namespace detail

inline constexpr int kCheckGridPoints = 2001;
inline constexpr int kCheckSampleCount = 200;

// Verifies the quadratic-minorant argument for lambda_0 on the rectangle
// u in [0, pi/4], t in [cos(pi/8), 1]: boundary ordering and non-negativity,
// non-negativity of the interpolating quadratic q, and concavity of
// h = lambda_0 - q (so h >= 0 follows from its vanishing boundary values).
inline CheckReport quadratic_minorant_check(const BoundConstants& k = default_chsh_constants()) {
    const double zeta = std::cos(std::numbers::pi / 8.0);
    const bool default_constants = k == default_chsh_constants();
    const auto lam0 = [&](double u, double t) {
        if (default_constants) return lambda0_poly(u, t);
        const double d = std::acos(std::min(1.0, t));
        return chsh_lambda(0, u + d, u - d, k);
    };

    const int n = kCheckGridPoints;
    const auto ugrid = detail::uniform_grid(0.0, std::numbers::pi / 4.0, n);
    const auto tgrid = detail::uniform_grid(zeta, 1.0, n);
    const double dt = tgrid[1] - tgrid[0];

    detail::SlackClause boundary_order("lambda0(u, zeta) >= lambda0(u, 1)", 1e-8);
    detail::SlackClause boundary_nonneg("lambda0(u, 1) >= 0", 1e-8);
    detail::SlackClause q_nonneg("quadratic minorant q >= 0", 1e-8);
    detail::EqualityClause h_boundary("h vanishes on the t-boundary", 1e-10);
    detail::SlackClause h_concave("d2h/dt2 <= 0 (finite differences)", 1e-10);

    std::vector<double> hrow(n);
    for (int iu = 0; iu < n; ++iu) {
        const double u = ugrid[iu];
        const double lz = lam0(u, zeta);
        const double l1 = lam0(u, 1.0);
        boundary_order.observe(lz - l1, {u});
        boundary_nonneg.observe(l1, {u});

        for (int it = 0; it < n; ++it) {
            const double t = tgrid[it];
            const double w = (1.0 - t) / (1.0 - zeta);
            const double q = (lz - l1) * w * w + l1;
            q_nonneg.observe(q, {u, t});
            hrow[it] = lam0(u, t) - q;
        }
        h_boundary.observe(hrow.front(), {u, zeta});
        h_boundary.observe(hrow.back(), {u, 1.0});
        for (int it = 1; it + 1 < n; ++it) {
            const double second = (hrow[it - 1] - 2.0 * hrow[it] + hrow[it + 1]) / (dt * dt);
            // concavity: second derivative must stay non-positive
            h_concave.observe(-second, {u, tgrid[it]});
        }
    }

    CheckReport report;
    report.clauses.push_back(boundary_order.finish());
    report.clauses.push_back(boundary_nonneg.finish());
    report.clauses.push_back(q_nonneg.finish());
    report.clauses.push_back(h_boundary.finish());
    report.clauses.push_back(h_concave.finish());
    report.passed = std::all_of(report.clauses.begin(), report.clauses.end(),
                                [](const ClauseResult& c) { return c.passed; });
    return report;
}

// Verifies the printed reductions behind the Mermin block positivity: the
// lambda symmetry triple, the Delta lambda >= 0 route through f(u, t), the
// two dephasing ratio bounds, the lambda_01 = P + Q decomposition and the
// non-negativity of the P'(r) minorant on [0, 1 - 1/sqrt 2].
inline CheckReport mermin_reduction_checks() {
    const BoundConstants k = default_mermin_constants();
    const double r2 = std::numbers::sqrt2;
    const double quarter = std::numbers::pi / 4.0;
    const double zeta = std::cos(std::numbers::pi / 8.0);
    const double eta = 1.0 - 1.0 / r2;
    const int n = kCheckGridPoints;

    detail::EqualityClause symmetry("lambda symmetry triple", 1e-10);
    detail::EqualityClause delta_consistency("delta lambda = lambda00 - lambda01", 1e-10);
    detail::SlackClause ratio_g("g(c)/sin 2c <= (1+sqrt2)/2", 1e-8);
    detail::SlackClause ratio_mixed("(g(c) cos c + sin c)/sin 2c <= (2+sqrt2)/2", 1e-8);
    detail::SlackClause chain("delta lambda / (2 s sin 2c) >= f(u, t)", 1e-8);
    detail::SlackClause f_boundary("f >= 0 at t = zeta and t = 1", 1e-8);
    detail::SlackClause f_concave("d2f/dt2 <= 0", 1e-10);
    detail::EqualityClause decomposition("lambda01 = P + Q", 1e-9);
    detail::SlackClause q_nonneg("Q >= 0", 1e-12);
    detail::SlackClause p_minorant("P(x, y, z) >= P'(r)", 1e-8);
    detail::SlackClause p_prime_nonneg("P'(r) >= 0 on [0, eta]", 1e-8);
    detail::SlackClause delta_nonneg("delta lambda >= 0", 1e-10);

    detail::UniformStream rng(987654321u);
    for (int i = 0; i < kCheckSampleCount; ++i) {
        const double a = rng.next() * quarter;
        const double b = rng.next() * quarter;
        const double c = rng.next() * quarter;

        const double l00 = mermin_lambda(0, 0, a, b, c, k);
        const double l01 = mermin_lambda(0, 1, a, b, c, k);
        symmetry.observe(l00 - mermin_lambda(1, 0, c, b, a, k), {a, b, c});
        symmetry.observe(l00 - mermin_lambda(1, 1, a, c, b, k), {a, b, c});

        const double dl = mermin_delta_lambda(a, b, c, k);
        delta_consistency.observe(dl - (l00 - l01), {a, b, c});
        delta_nonneg.observe(dl, {a, b, c});

        if (c >= 0.01) {
            const double u = 0.5 * (a + b);
            const double t = std::cos(0.5 * (a - b));
            chain.observe(dl / (2.0 * k.s * std::sin(2.0 * c)) - mermin_f(u, t), {a, b, c});
        }

        const double x = 1.0 - std::sin(a + quarter);
        const double y = 1.0 - std::sin(b + quarter);
        const double z = 1.0 - std::sin(c + quarter);
        const double q = mermin_q_term(a, b, c);
        decomposition.observe(l01 - (mermin_p_poly(x, y, z) + q), {a, b, c});
        q_nonneg.observe(q, {a, b, c});

        const double xr = rng.next() * eta;
        const double yr = rng.next() * eta;
        const double zr = rng.next() * eta;
        p_minorant.observe(mermin_p_poly(xr, yr, zr) - mermin_p_prime(std::cbrt(xr * yr * zr)),
                           {xr, yr, zr});
    }

    const auto cgrid = detail::uniform_grid(0.0, quarter, n);
    for (int i = 1; i < n; ++i) {
        const double c = cgrid[i];
        const double gc = dephasing_weight(c);
        const double s2c = std::sin(2.0 * c);
        ratio_g.observe((1.0 + r2) / 2.0 - gc / s2c, {c});
        ratio_mixed.observe((2.0 + r2) / 2.0 - (gc * std::cos(c) + std::sin(c)) / s2c, {c});
    }

    const auto ugrid = detail::uniform_grid(0.0, quarter, n);
    const auto tgrid = detail::uniform_grid(zeta, 1.0, n);
    for (int iu = 0; iu < n; ++iu) {
        const double u = ugrid[iu];
        f_boundary.observe(mermin_f(u, zeta), {u, zeta});
        f_boundary.observe(mermin_f(u, 1.0), {u, 1.0});
        for (int it = 0; it < n; ++it) {
            f_concave.observe(-mermin_f_tt(u, tgrid[it]), {u, tgrid[it]});
        }
    }

    const auto rgrid = detail::uniform_grid(0.0, eta, n);
    for (int i = 0; i < n; ++i) {
        p_prime_nonneg.observe(mermin_p_prime(rgrid[i]), {rgrid[i]});
    }

    CheckReport report;
    report.clauses.push_back(symmetry.finish());
    report.clauses.push_back(delta_consistency.finish());
    report.clauses.push_back(delta_nonneg.finish());
    report.clauses.push_back(ratio_g.finish());
    report.clauses.push_back(ratio_mixed.finish());
    report.clauses.push_back(chain.finish());
    report.clauses.push_back(f_boundary.finish());
    report.clauses.push_back(f_concave.finish());
    report.clauses.push_back(decomposition.finish());
    report.clauses.push_back(q_nonneg.finish());
    report.clauses.push_back(p_minorant.finish());
    report.clauses.push_back(p_prime_nonneg.finish());
    report.passed = std::all_of(report.clauses.begin(), report.clauses.end(),
                                [](const ClauseResult& c) { return c.passed; });
    return report;
}

// ---------------------------------------------------------------------------
// Grid certification.
// ---------------------------------------------------------------------------

struct CertificateReport {
    Scenario scenario = Scenario::Chsh;
    BoundConstants constants;
    int grid_points_per_angle = 0;
    double tolerance = 0.0;
    double min_eigenvalue = 0.0;
    std::vector<double> argmin_angles;
    std::optional<double> continuum_margin;
    bool certified = false;

    friend bool operator==(const CertificateReport& a, const CertificateReport& b) {
        return a.scenario == b.scenario && a.constants == b.constants &&
               a.grid_points_per_angle == b.grid_points_per_angle &&
               a.tolerance == b.tolerance && a.min_eigenvalue == b.min_eigenvalue &&
               a.argmin_angles == b.argmin_angles &&
               a.continuum_margin == b.continuum_margin && a.certified == b.certified;
    }
};

namespace detail {

// Uniform nodes over [0, pi/2]; pi/4 is always inserted so the dephasing-axis
// kink sits on a node.
inline std::vector<double> sweep_nodes(int grid_n) {
    const double half = std::numbers::pi / 2.0;
    std::vector<double> nodes(grid_n);
    for (int i = 0; i < grid_n; ++i) {
        nodes[i] = half * static_cast<double>(i) / static_cast<double>(grid_n - 1);
    }
    const double quarter = std::numbers::pi / 4.0;
    bool has = false;
    for (double v : nodes) {
        if (std::abs(v - quarter) < 1e-14) {
            has = true;
            break;
        }
    }
    if (!has) {
        nodes.push_back(quarter);
        std::sort(nodes.begin(), nodes.end());
    }
    return nodes;
}

inline const ComplexMatrix& cached_target(Scenario sc) {
    static const ComplexMatrix chsh = target_state_chsh().matrix();
    static const ComplexMatrix mermin = target_state_mermin().matrix();
    return sc == Scenario::Chsh ? chsh : mermin;
}

// Minimum eigenvalue of K - s W at one node.  At angles sitting exactly on
// the axis kink both branch assignments are evaluated and the smaller result
// is kept.
inline double node_spectral_floor(Scenario sc, double s, const std::vector<double>& angles) {
    const double quarter = std::numbers::pi / 4.0;
    const ComplexMatrix w = sc == Scenario::Chsh
                                ? chsh_operator(angles[0], angles[1]).matrix()
                                : mermin_operator(angles[0], angles[1], angles[2]).matrix();

    std::vector<std::size_t> kink;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        if (std::abs(angles[i] - quarter) < 1e-14) kink.push_back(i);
    }

    double best = std::numeric_limits<double>::infinity();
    const std::size_t combos = std::size_t{1} << kink.size();
    for (std::size_t mask = 0; mask < combos; ++mask) {
        std::vector<DephasingChannel> channels;
        channels.reserve(angles.size());
        for (std::size_t i = 0; i < angles.size(); ++i) {
            channels.push_back(dephasing_channel(angles[i]));
        }
        for (std::size_t b = 0; b < kink.size(); ++b) {
            channels[kink[b]] = dephasing_channel(
                angles[kink[b]], (mask >> b) & 1 ? DephasingAxis::Z : DephasingAxis::X);
        }
        ComplexMatrix m = k_matrix(channels, cached_target(sc));
        m -= s * w;
        best = std::min(best, min_eigenvalue(m));
    }
    return best;
}

struct SweepOutcome {
    double min_value = 0.0;
    std::vector<double> argmin_angles;
};

// Minimum over the angle grid of the smallest eigenvalue of K - s W.
inline SweepOutcome sweep_spectral_floor(Scenario sc, double s, int grid_n, std::size_t threads) {
    if (grid_n < 2) throw InvalidGrid("grid must have at least 2 points per angle");
    const auto nodes = sweep_nodes(grid_n);
    const std::size_t per_angle = nodes.size();
    const int parties = scenario_parties(sc);

    std::size_t total = 1;
    for (int i = 0; i < parties; ++i) total *= per_angle;

    const auto value_at = [&](std::size_t flat) {
        std::vector<double> angles(parties);
        std::size_t rest = flat;
        for (int i = parties - 1; i >= 0; --i) {
            angles[i] = nodes[rest % per_angle];
            rest /= per_angle;
        }
        return node_spectral_floor(sc, s, angles);
    };

    const MinResult best = parallel_min(total, threads, value_at);

    SweepOutcome out;
    out.min_value = best.value;
    out.argmin_angles.resize(parties);
    std::size_t rest = best.index;
    for (int i = parties - 1; i >= 0; --i) {
        out.argmin_angles[i] = nodes[rest % per_angle];
        rest /= per_angle;
    }
    return out;
}

// Conservative per-angle Lipschitz constant for lambda_min(T(theta)); checked
// empirically against central differences before rigorous margins are issued.
inline constexpr double kAngleLipschitz = 10.0;

inline void verify_lipschitz_bound(Scenario sc, const BoundConstants& k) {
    const double quarter = std::numbers::pi / 4.0;
    const double delta = 1e-5;
    const int parties = scenario_parties(sc);
    const auto t_at = [&](const std::vector<double>& th) {
        return sc == Scenario::Chsh ? t_chsh(th[0], th[1], k).matrix()
                                    : t_mermin(th[0], th[1], th[2], k).matrix();
    };

    UniformStream rng(20240811u);
    double worst = 0.0;
    for (int sample = 0; sample < 32; ++sample) {
        std::vector<double> th(parties);
        for (int i = 0; i < parties; ++i) {
            // stay inside one dephasing branch so the central difference is valid
            const bool upper = rng.next() < 0.5;
            const double lo = upper ? quarter + 2.0 * delta : 2.0 * delta;
            const double hi = upper ? quarter * 2.0 - 2.0 * delta : quarter - 2.0 * delta;
            th[i] = lo + rng.next() * (hi - lo);
        }
        for (int dir = 0; dir < parties; ++dir) {
            std::vector<double> plus = th, minus = th;
            plus[dir] += delta;
            minus[dir] -= delta;
            const double slope = operator_norm(
                (1.0 / (2.0 * delta)) * (t_at(plus) - t_at(minus)));
            worst = std::max(worst, slope);
        }
    }
    if (worst >= kAngleLipschitz) {
        throw Error("empirical angle derivative " + std::to_string(worst) +
                    " exceeds the assumed Lipschitz constant");
    }
}

}  // namespace detail

// Grid-sweep certificate for K >= s W + mu 1.  `certified` refers to the grid
// only; with `rigorous` the report also carries the Lipschitz continuum lower
// bound min_grid - L h n_angles.
inline CertificateReport certify(Scenario sc, const BoundConstants& k, int grid_n,
                                 double tolerance, bool rigorous, std::size_t threads = 1) {
    detail::require_slope(k);
    if (grid_n < 2) throw InvalidGrid("grid must have at least 2 points per angle");
    if (!(tolerance > 0.0)) throw InvalidRange("tolerance must be positive");

    const auto sweep = detail::sweep_spectral_floor(sc, k.s, grid_n, threads);

    CertificateReport report;
    report.scenario = sc;
    report.constants = k;
    report.grid_points_per_angle = grid_n;
    report.tolerance = tolerance;
    report.min_eigenvalue = sweep.min_value - k.mu;
    report.argmin_angles = sweep.argmin_angles;
    report.certified = report.min_eigenvalue >= -tolerance;
    if (rigorous) {
        detail::verify_lipschitz_bound(sc, k);
        const double h = (std::numbers::pi / 2.0) / static_cast<double>(grid_n - 1);
        report.continuum_margin = report.min_eigenvalue -
                                  detail::kAngleLipschitz * h *
                                      static_cast<double>(scenario_parties(sc));
    }
    return report;
}

}  // namespace selftest
