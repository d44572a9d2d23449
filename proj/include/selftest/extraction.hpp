#pragma once

// The local dephasing extraction channel, the CHSH / Mermin target states and
// the extraction operators K obtained by pushing the (self-dual) channel onto
// the target.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "selftest/bell.hpp"
#include "selftest/errors.hpp"
#include "selftest/matops.hpp"

namespace selftest {

enum class DephasingAxis { X, Z };

// g(x) = (1 + sqrt(2)) (sin x + cos x - 1); zero at the endpoints, one at pi/4.
inline double dephasing_weight(double x) {
    return (1.0 + std::numbers::sqrt2) * (std::sin(x) + std::cos(x) - 1.0);
}

// Self-dual qubit dephasing channel rho -> (1+g)/2 rho + (1-g)/2 Gamma rho Gamma
// with Gamma = sigma_x on [0, pi/4] and sigma_z on (pi/4, pi/2].
struct DephasingChannel {
    double angle = 0.0;
    double weight = 0.0;
    DephasingAxis axis = DephasingAxis::X;
};

inline DephasingChannel dephasing_channel(double x) {
    detail::require_angle(x, "channel angle");
    DephasingChannel ch;
    ch.angle = x;
    ch.weight = dephasing_weight(x);
    ch.axis = x <= std::numbers::pi / 4.0 ? DephasingAxis::X : DephasingAxis::Z;
    return ch;
}

// Branch-forced variant, only meaningful at the kink x = pi/4 where both
// assignments act identically (g = 1).
inline DephasingChannel dephasing_channel(double x, DephasingAxis forced) {
    if (std::abs(x - std::numbers::pi / 4.0) > 1e-9) {
        throw InvalidRange("forced dephasing axis is only allowed at x = pi/4");
    }
    DephasingChannel ch = dephasing_channel(x);
    ch.axis = forced;
    return ch;
}

namespace detail {

inline const ComplexMatrix& dephasing_axis_matrix(DephasingAxis axis) {
    static const ComplexMatrix x = pauli_x();
    static const ComplexMatrix z = pauli_z();
    return axis == DephasingAxis::X ? x : z;
}

// Linear extension of the channel to arbitrary 2x2 matrices.
inline ComplexMatrix apply_channel_linear(const DephasingChannel& ch, const ComplexMatrix& m) {
    const ComplexMatrix& g = dephasing_axis_matrix(ch.axis);
    return (0.5 * (1.0 + ch.weight)) * m + (0.5 * (1.0 - ch.weight)) * (g * m * g);
}

// Apply the channel to one qubit factor of a 2^n-dimensional operator.
inline ComplexMatrix apply_channel_factor(const DephasingChannel& ch, const ComplexMatrix& m,
                                          std::size_t factor, std::size_t n_factors) {
    ComplexMatrix g = ComplexMatrix::identity(1);
    for (std::size_t i = 0; i < n_factors; ++i) {
        g = kron(g, i == factor ? dephasing_axis_matrix(ch.axis) : identity2());
    }
    return (0.5 * (1.0 + ch.weight)) * m + (0.5 * (1.0 - ch.weight)) * (g * m * g);
}

}  // namespace detail

inline HermitianOperator apply_channel(const DephasingChannel& ch, const HermitianOperator& rho) {
    if (rho.dim() != 2) throw DimensionMismatch("dephasing channel acts on qubits");
    return HermitianOperator(detail::apply_channel_linear(ch, rho.matrix()));
}

// Choi matrix sum_ij |i><j| (x) Lambda(|i><j|); PSD iff the channel is CP.
inline HermitianOperator choi_matrix(const DephasingChannel& ch) {
    ComplexMatrix c(4, 4);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            ComplexMatrix eij(2, 2);
            eij(i, j) = 1.0;
            c += kron(eij, detail::apply_channel_linear(ch, eij));
        }
    }
    return HermitianOperator(std::move(c));
}

// Maximally entangled two-qubit target
// Phi = (1/4)(11 + yy + (xx + zx + xz - zz)/sqrt(2)).
inline DensityMatrix target_state_chsh() {
    const double r = 1.0 / std::numbers::sqrt2;
    ComplexMatrix phi = pauli_string({0, 0}) + pauli_string({2, 2}) +
                        r * (pauli_string({1, 1}) + pauli_string({3, 1}) +
                             pauli_string({1, 3}) - pauli_string({3, 3}));
    phi *= 0.25;
    return DensityMatrix(std::move(phi));
}

// Three-qubit target
// Upsilon = (1/8)(111 + yy1 - y1y - 1yy)
//         + (1/(8 sqrt 2))(xxx - xxz + xzx + zxx + xzz + zxz - zzx + zzz).
inline DensityMatrix target_state_mermin() {
    const double r = 1.0 / std::numbers::sqrt2;
    ComplexMatrix ups = pauli_string({0, 0, 0}) + pauli_string({2, 2, 0}) -
                        pauli_string({2, 0, 2}) - pauli_string({0, 2, 2});
    ups += r * (pauli_string({1, 1, 1}) - pauli_string({1, 1, 3}) + pauli_string({1, 3, 1}) +
                pauli_string({3, 1, 1}) + pauli_string({1, 3, 3}) + pauli_string({3, 1, 3}) -
                pauli_string({3, 3, 1}) + pauli_string({3, 3, 3}));
    ups *= 0.125;
    return DensityMatrix(std::move(ups));
}

namespace detail {

inline ComplexMatrix k_matrix(const std::vector<DephasingChannel>& channels,
                              const ComplexMatrix& target) {
    ComplexMatrix m = target;
    for (std::size_t f = 0; f < channels.size(); ++f) {
        m = apply_channel_factor(channels[f], m, f, channels.size());
    }
    return m;
}

}  // namespace detail

// K(a, b) = (Lambda(a) (x) Lambda(b))(Phi).
inline HermitianOperator k_chsh(double a, double b) {
    const auto channels = std::vector<DephasingChannel>{dephasing_channel(a), dephasing_channel(b)};
    return HermitianOperator(detail::k_matrix(channels, target_state_chsh().matrix()));
}

// K(a, b, c) = (Lambda(a) (x) Lambda(b) (x) Lambda(c))(Upsilon).
inline HermitianOperator k_mermin(double a, double b, double c) {
    const auto channels = std::vector<DephasingChannel>{
        dephasing_channel(a), dephasing_channel(b), dephasing_channel(c)};
    return HermitianOperator(detail::k_matrix(channels, target_state_mermin().matrix()));
}

// Closed-form Pauli expansion of K(a, b), valid on a, b in [0, pi/4] where the
// dephasing acts along sigma_x.
inline HermitianOperator chsh_k_closed_form(double a, double b) {
    detail::require_angle(a, "a");
    detail::require_angle(b, "b");
    const double ga = dephasing_weight(a);
    const double gb = dephasing_weight(b);
    const double r = 1.0 / std::numbers::sqrt2;
    ComplexMatrix k = pauli_string({0, 0}) + (ga * gb) * pauli_string({2, 2}) +
                      r * (pauli_string({1, 1}) + ga * pauli_string({3, 1}) +
                           gb * pauli_string({1, 3}) - (ga * gb) * pauli_string({3, 3}));
    k *= 0.25;
    return HermitianOperator(std::move(k));
}

// Closed-form Pauli expansion of K(a, b, c) on [0, pi/4]^3.
inline HermitianOperator mermin_k_closed_form(double a, double b, double c) {
    detail::require_angle(a, "a");
    detail::require_angle(b, "b");
    detail::require_angle(c, "c");
    const double ga = dephasing_weight(a);
    const double gb = dephasing_weight(b);
    const double gc = dephasing_weight(c);
    const double r = 1.0 / std::numbers::sqrt2;
    ComplexMatrix k = pauli_string({0, 0, 0}) + (ga * gb) * pauli_string({2, 2, 0}) -
                      (ga * gc) * pauli_string({2, 0, 2}) - (gb * gc) * pauli_string({0, 2, 2});
    k += r * (pauli_string({1, 1, 1}) - gc * pauli_string({1, 1, 3}) +
              gb * pauli_string({1, 3, 1}) + ga * pauli_string({3, 1, 1}) +
              (gb * gc) * pauli_string({1, 3, 3}) + (ga * gc) * pauli_string({3, 1, 3}) -
              (ga * gb) * pauli_string({3, 3, 1}) + (ga * gb * gc) * pauli_string({3, 3, 3}));
    k *= 0.125;
    return HermitianOperator(std::move(k));
}

}  // namespace selftest
