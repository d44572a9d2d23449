#pragma once

// Fidelity-violation trade-off curves: the linear lower bound and its
// threshold, the mixture upper bound, the exact Mermin curve, and the
// flagged counterexample family showing the upper bound is not achievable.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "selftest/bell.hpp"
#include "selftest/certifier.hpp"
#include "selftest/errors.hpp"
#include "selftest/extraction.hpp"
#include "selftest/matops.hpp"

namespace selftest {

// Largest squared Schmidt coefficient of both targets: the separable ceiling.
inline constexpr double kLambdaMax = 0.5;

// Threshold reported by earlier numerical work, kept for comparison output.
inline constexpr double kPriorChshThreshold = 2.37;

inline double beta_classical(Scenario) { return 2.0; }

inline double beta_quantum(Scenario sc) {
    return sc == Scenario::Chsh ? 2.0 * std::numbers::sqrt2 : 4.0;
}

struct TradeoffPoint {
    double beta = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct TradeoffCurve {
    Scenario scenario = Scenario::Chsh;
    std::vector<TradeoffPoint> points;
    double beta_classical = 0.0;
    double beta_quantum = 0.0;
    double lambda_max = kLambdaMax;
};

// max(s beta + mu, lambda_max): the certified linear bound clamped below by
// the trivial separable bound.
inline double linear_lower_bound(Scenario sc, double beta, const BoundConstants& k,
                                 double lambda_max = kLambdaMax) {
    const double lo = beta_classical(sc), hi = beta_quantum(sc);
    if (!(beta >= lo - 1e-9 && beta <= hi + 1e-9)) {
        throw BetaOutOfRange("beta outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "]");
    }
    return std::max(k.s * beta + k.mu, lambda_max);
}

// beta* = (lambda_max - mu)/s, where the linear bound starts beating the
// trivial one.
inline double chsh_threshold(const BoundConstants& k, double lambda_max = kLambdaMax) {
    detail::require_slope(k);
    return (lambda_max - k.mu) / k.s;
}

// lambda_max + (1 - lambda_max) (beta - beta_c)/(beta_q - beta_c).
inline double upper_bound_curve(double beta, double beta_c, double beta_q, double lambda_max) {
    if (!(beta_c < beta_q)) throw InvalidRange("beta_c must be below beta_q");
    if (!(lambda_max > 0.0 && lambda_max <= 1.0)) {
        throw InvalidRange("lambda_max must lie in (0, 1]");
    }
    if (!(beta >= beta_c - 1e-9 && beta <= beta_q + 1e-9)) {
        throw BetaOutOfRange("beta outside [beta_c, beta_q]");
    }
    return lambda_max + (1.0 - lambda_max) * (beta - beta_c) / (beta_q - beta_c);
}

// Exact trade-off for the Mermin scenario: 1/2 up to gamma* = 2 sqrt 2, then
// the affine segment reaching 1 at gamma = 4.  Lower and upper coincide.
inline std::pair<double, double> mermin_exact_curve(double gamma) {
    if (!(gamma >= 2.0 - 1e-12 && gamma <= 4.0 + 1e-12)) {
        throw GammaOutOfRange("gamma outside [2, 4]");
    }
    const double gamma_star = 2.0 * std::numbers::sqrt2;
    if (gamma <= gamma_star) return {0.5, 0.5};
    const double v = upper_bound_curve(gamma, gamma_star, 4.0, kLambdaMax);
    return {v, v};
}

namespace detail {

inline ComplexMatrix flag_projector(int bit) {
    ComplexMatrix p(2, 2);
    p(bit, bit) = 1.0;
    return p;
}

}  // namespace detail

// rho_XYAB = p |00><00| (x) target + (1-p) |11><11| (x) separable, the flagged
// mixture interpolating between the quantum and classical strategies.
inline DensityMatrix mixture_state(double p, const DensityMatrix& target,
                                   const DensityMatrix& separable) {
    if (!(p >= 0.0 && p <= 1.0)) throw ProbabilityOutOfRange("p must lie in [0, 1]");
    if (target.dim() != separable.dim()) {
        throw DimensionMismatch("mixture components of different dimension");
    }
    const ComplexMatrix p00 = kron(detail::flag_projector(0), detail::flag_projector(0));
    const ComplexMatrix p11 = kron(detail::flag_projector(1), detail::flag_projector(1));
    ComplexMatrix rho = p * kron(p00, target.matrix()) + (1.0 - p) * kron(p11, separable.matrix());
    return DensityMatrix(std::move(rho));
}

// Classically correlated two-qubit state (1/4)(11 + xx); reaches the CHSH
// classical value 2 under the all-sigma_x strategy.
inline DensityMatrix separable_chsh_state() {
    return DensityMatrix(0.25 * (pauli_string({0, 0}) + pauli_string({1, 1})));
}

// Flag-controlled CHSH operator on X (x) Y (x) A (x) B: flag 0 plays the
// optimal angles, flag 1 the classical ones.
inline HermitianOperator flagged_chsh_operator(double angle_flag0 = std::numbers::pi / 4.0,
                                               double angle_flag1 = 0.0) {
    ComplexMatrix w(16, 16);
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            const double ax = x == 0 ? angle_flag0 : angle_flag1;
            const double ay = y == 0 ? angle_flag0 : angle_flag1;
            ComplexMatrix wxy(4, 4);
            for (int j = 0; j < 2; ++j) {
                for (int kk = 0; kk < 2; ++kk) {
                    const double sign = (j == 1 && kk == 1) ? -1.0 : 1.0;
                    wxy += sign * kron(observable(ax, j).matrix(), observable(ay, kk).matrix());
                }
            }
            w += kron(kron(detail::flag_projector(x), detail::flag_projector(y)), wxy);
        }
    }
    return HermitianOperator(std::move(w));
}

inline double mixture_bell_value(const DensityMatrix& rho) {
    if (rho.dim() != 16) throw DimensionMismatch("flagged mixture state must be 16-dimensional");
    return std::real((rho.matrix() * flagged_chsh_operator().matrix()).trace());
}

// ---------------------------------------------------------------------------
// Counterexample family: flags select between classically correlated states
// and a maximally entangled one.
// ---------------------------------------------------------------------------

// tau^00 = tau^01 = tau^10 = (1/4)(11 + xx).
inline DensityMatrix counterexample_tau00() { return separable_chsh_state(); }

// tau^11, the maximally entangled conditional state (the extraction target).
inline DensityMatrix counterexample_tau11() { return target_state_chsh(); }

struct CounterexampleFamily {
    double nu = 0.0;
    DensityMatrix state;                         // 16 x 16 on X Y A B
    std::vector<HermitianOperator> observables;  // A0, A1, B0, B1 (4 x 4 on XA / YB)
};

// State sum_xy p_xy |x><x| (x) |y><y| (x) tau^xy with p_11 = nu and the three
// remaining weights (1 - nu)/3, plus the flag-controlled observables
// A_0 = 1 (x) sigma_x, A_1 = |0><0| (x) sigma_x + |1><1| (x) sigma_z.
inline CounterexampleFamily counterexample(double nu) {
    if (!(nu > 0.0 && nu < 1.0)) throw ProbabilityOutOfRange("nu must lie in (0, 1)");
    const ComplexMatrix tau00 = counterexample_tau00().matrix();
    const ComplexMatrix tau11 = counterexample_tau11().matrix();

    ComplexMatrix rho(16, 16);
    const double rest = (1.0 - nu) / 3.0;
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            const bool entangled = x == 1 && y == 1;
            const double weight = entangled ? nu : rest;
            rho += weight * kron(kron(detail::flag_projector(x), detail::flag_projector(y)),
                                 entangled ? tau11 : tau00);
        }
    }

    ComplexMatrix a0 = kron(identity2(), pauli_x());
    ComplexMatrix a1 =
        kron(detail::flag_projector(0), pauli_x()) + kron(detail::flag_projector(1), pauli_z());

    CounterexampleFamily family{nu, DensityMatrix(std::move(rho)), {}};
    family.observables.emplace_back(a0);
    family.observables.emplace_back(a1);
    family.observables.emplace_back(a0);
    family.observables.emplace_back(std::move(a1));
    return family;
}

namespace detail {

// Embed a two-qubit operator acting on qubits (q1, q2) of an n-qubit space
// (qubit 0 = most significant factor).
inline ComplexMatrix embed_two_qubit(const ComplexMatrix& m, int q1, int q2, int n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    ComplexMatrix out(dim, dim);
    const auto bit = [n_qubits](std::size_t idx, int q) {
        return static_cast<int>((idx >> (n_qubits - 1 - q)) & 1);
    };
    for (std::size_t row = 0; row < dim; ++row) {
        for (std::size_t col = 0; col < dim; ++col) {
            bool same = true;
            for (int q = 0; q < n_qubits && same; ++q) {
                if (q == q1 || q == q2) continue;
                same = bit(row, q) == bit(col, q);
            }
            if (!same) continue;
            const std::size_t r = (bit(row, q1) << 1) | bit(row, q2);
            const std::size_t c = (bit(col, q1) << 1) | bit(col, q2);
            out(row, col) = m(r, c);
        }
    }
    return out;
}

}  // namespace detail

// CHSH value of the family under its own observables: 2 + (2 sqrt 2 - 2) nu.
inline double counterexample_bell_value(const CounterexampleFamily& family) {
    ComplexMatrix w(16, 16);
    for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
            const double sign = (j == 1 && k == 1) ? -1.0 : 1.0;
            const ComplexMatrix aj =
                detail::embed_two_qubit(family.observables[j].matrix(), 0, 2, 4);
            const ComplexMatrix bk =
                detail::embed_two_qubit(family.observables[2 + k].matrix(), 1, 3, 4);
            w += sign * (aj * bk);
        }
    }
    return std::real((family.state.matrix() * w).trace());
}

// Extracted tau^00 once both parties apply the unital channels forced by the
// fidelity-1 and fidelity-1/2 constraints: (1/4)(11 + H (x) H) with
// H = (sigma_x + sigma_z)/sqrt 2.
inline DensityMatrix counterexample_forced_state() {
    return DensityMatrix(0.25 * (pauli_string({0, 0}) + kron(hadamard(), hadamard())));
}

struct CounterexampleGap {
    double upper_bound_value = 0.0;
    double forced_fidelity = 0.0;
};

// Value of the mixture upper bound at the family's violation, and the best
// fidelity actually reachable for the tau^00 branch under the forced
// channels.  The gap between them shows the upper bound is unachievable.
inline CounterexampleGap counterexample_gap(double nu) {
    if (!(nu > 0.0 && nu < 1.0)) throw ProbabilityOutOfRange("nu must lie in (0, 1)");
    CounterexampleGap gap;
    gap.upper_bound_value = (1.0 + nu) / 2.0;
    gap.forced_fidelity =
        fidelity_with_pure(counterexample_forced_state(), counterexample_tau11());
    return gap;
}

// ---------------------------------------------------------------------------
// Randomized search over extraction strategies that keep tau^11 fixed.
// ---------------------------------------------------------------------------

struct UnitarySearchResult {
    int samples = 0;
    double max_fidelity = 0.0;
    double min_fidelity = 1.0;
};

namespace detail {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline ComplexMatrix bloch_operator(const Vec3& v) {
    return v[0] * pauli_x() + v[1] * pauli_y() + v[2] * pauli_z();
}

// U sigma_j U^dagger = sum_i R_ij sigma_i.
inline Mat3 bloch_rotation(const ComplexMatrix& u) {
    Mat3 r{};
    const ComplexMatrix ud = u.adjoint();
    for (int j = 0; j < 3; ++j) {
        const ComplexMatrix img = u * pauli(j + 1) * ud;
        for (int i = 0; i < 3; ++i) {
            r[i][j] = 0.5 * std::real((pauli(i + 1) * img).trace());
        }
    }
    return r;
}

// Correlation matrix C_ij = tr(rho sigma_i (x) sigma_j) of a two-qubit state.
inline Mat3 correlation_matrix(const ComplexMatrix& rho) {
    Mat3 c{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            c[i][j] = std::real((kron(pauli(i + 1), pauli(j + 1)) * rho).trace());
        }
    }
    return c;
}

inline Vec3 mat_vec(const Mat3& m, const Vec3& v) {
    Vec3 out{};
    for (int i = 0; i < 3; ++i) {
        out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    }
    return out;
}

inline Mat3 mat_mul(const Mat3& a, const Mat3& b) {
    Mat3 out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
    return out;
}

inline Mat3 transpose(const Mat3& m) {
    Mat3 out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i][j] = m[j][i];
    return out;
}

// SU(2) element for the unit quaternion (w, v): U = w 1 - i v . sigma.
inline ComplexMatrix su2_from_quaternion(double w, const Vec3& v) {
    ComplexMatrix u(2, 2);
    u(0, 0) = cplx(w, -v[2]);
    u(0, 1) = cplx(-v[1], -v[0]);
    u(1, 0) = cplx(v[1], -v[0]);
    u(1, 1) = cplx(w, v[2]);
    return u;
}

// Unit quaternion of a proper rotation (Shepperd's method).
inline ComplexMatrix su2_from_rotation(const Mat3& r) {
    double w, x, y, z;
    const double tr = r[0][0] + r[1][1] + r[2][2];
    if (tr > 0.0) {
        const double s = std::sqrt(tr + 1.0) * 2.0;
        w = 0.25 * s;
        x = (r[2][1] - r[1][2]) / s;
        y = (r[0][2] - r[2][0]) / s;
        z = (r[1][0] - r[0][1]) / s;
    } else if (r[0][0] > r[1][1] && r[0][0] > r[2][2]) {
        const double s = std::sqrt(1.0 + r[0][0] - r[1][1] - r[2][2]) * 2.0;
        w = (r[2][1] - r[1][2]) / s;
        x = 0.25 * s;
        y = (r[0][1] + r[1][0]) / s;
        z = (r[0][2] + r[2][0]) / s;
    } else if (r[1][1] > r[2][2]) {
        const double s = std::sqrt(1.0 + r[1][1] - r[0][0] - r[2][2]) * 2.0;
        w = (r[0][2] - r[2][0]) / s;
        x = (r[0][1] + r[1][0]) / s;
        y = 0.25 * s;
        z = (r[1][2] + r[2][1]) / s;
    } else {
        const double s = std::sqrt(1.0 + r[2][2] - r[0][0] - r[1][1]) * 2.0;
        w = (r[1][0] - r[0][1]) / s;
        x = (r[0][2] + r[2][0]) / s;
        y = (r[1][2] + r[2][1]) / s;
        z = 0.25 * s;
    }
    return su2_from_quaternion(w, {x, y, z});
}

}  // namespace detail

// Samples unitary pairs (U_A, U_B) leaving tau^11 invariant, propagates the
// channel constraints they force on the tau^00 branch and records the
// resulting fidelity with tau^11.  A seeded generator keeps runs
// reproducible; the fidelity never reaches the 1/2 needed to meet the upper
// bound.
inline UnitarySearchResult counterexample_unitary_search(int samples, std::uint64_t seed) {
    if (samples <= 0) throw InvalidRange("sample count must be positive");
    const DensityMatrix tau11 = counterexample_tau11();
    const detail::Mat3 corr = detail::correlation_matrix(tau11.matrix());
    const detail::Mat3 corr_t = detail::transpose(corr);

    detail::UniformStream rng(seed);
    const auto normal = [&rng]() {
        const double u1 = 1.0 - rng.next();
        const double u2 = rng.next();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    };

    UnitarySearchResult result;
    result.samples = samples;
    for (int i = 0; i < samples; ++i) {
        double w = normal();
        detail::Vec3 v{normal(), normal(), normal()};
        const double norm = std::sqrt(w * w + v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        w /= norm;
        for (auto& t : v) t /= norm;

        const ComplexMatrix ua = detail::su2_from_quaternion(w, v);
        const detail::Mat3 ra = detail::bloch_rotation(ua);
        // Invariance of tau^11 forces R_B = C^T R_A C.
        const detail::Mat3 rb = detail::mat_mul(corr_t, detail::mat_mul(ra, corr));
        const ComplexMatrix ub = detail::su2_from_rotation(rb);

        const ComplexMatrix pair = kron(ua, ub);
        if (max_abs_diff(pair * tau11.matrix() * pair.adjoint(), tau11.matrix()) > 1e-9) {
            throw Error("sampled unitary pair fails to stabilize tau^11");
        }

        // Bloch images of sigma_x under the flag-1 unitaries.
        const detail::Vec3 a{ra[0][0], ra[1][0], ra[2][0]};
        const detail::Vec3 n{rb[0][0], rb[1][0], rb[2][0]};
        // Channel constraints forced by unit fidelity on the other two flags.
        const detail::Vec3 m = detail::mat_vec(corr, n);
        const detail::Vec3 q = detail::mat_vec(corr_t, a);

        ComplexMatrix extracted =
            0.25 * (pauli_string({0, 0}) +
                    kron(detail::bloch_operator(m), detail::bloch_operator(q)));
        const double fid = fidelity_with_pure(DensityMatrix(std::move(extracted)), tau11);
        result.max_fidelity = std::max(result.max_fidelity, fid);
        result.min_fidelity = std::min(result.min_fidelity, fid);
    }
    return result;
}

}  // namespace selftest
