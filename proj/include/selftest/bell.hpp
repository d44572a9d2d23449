#pragma once

// Parametrized binary qubit observables, Bell operator assembly for the
// CHSH/Mermin scenarios (and generic two-setting two-outcome correlator
// scenarios), and the simultaneous 2x2 block reduction of a pair of binary
// observables.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "selftest/errors.hpp"
#include "selftest/matops.hpp"

namespace selftest {

inline constexpr double kAngleSlack = 1e-12;

namespace detail {

inline void require_angle(double a, const char* name) {
    if (!(a >= -kAngleSlack && a <= std::numbers::pi / 2.0 + kAngleSlack)) {
        throw AngleOutOfRange(std::string(name) + " = " + std::to_string(a) +
                              " outside [0, pi/2]");
    }
}

}  // namespace detail

// A_r = cos(a) sigma_x + (-1)^r sin(a) sigma_z for r in {0, 1}, a in [0, pi/2].
inline HermitianOperator observable(double angle, int sign_index) {
    detail::require_angle(angle, "observable angle");
    if (sign_index != 0 && sign_index != 1) {
        throw InvalidRange("sign index must be 0 or 1");
    }
    const double sign = sign_index == 0 ? 1.0 : -1.0;
    ComplexMatrix m = std::cos(angle) * pauli_x() + (sign * std::sin(angle)) * pauli_z();
    return HermitianOperator(std::move(m));
}

// W(a, b) = sum_{j,k} (-1)^{jk} A_j (x) B_k.
inline HermitianOperator chsh_operator(double a, double b) {
    detail::require_angle(a, "a");
    detail::require_angle(b, "b");
    ComplexMatrix w(4, 4);
    for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
            const double sign = (j == 1 && k == 1) ? -1.0 : 1.0;
            w += sign * kron(observable(a, j).matrix(), observable(b, k).matrix());
        }
    }
    return HermitianOperator(std::move(w));
}

// W(a, b, c) = sum_{j,k} (-1)^{jk} A_j (x) B_k (x) C_{j xor k}.
inline HermitianOperator mermin_operator(double a, double b, double c) {
    detail::require_angle(a, "a");
    detail::require_angle(b, "b");
    detail::require_angle(c, "c");
    ComplexMatrix w(8, 8);
    for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
            const double sign = (j == 1 && k == 1) ? -1.0 : 1.0;
            w += sign * kron(observable(a, j).matrix(), observable(b, k).matrix(),
                             observable(c, j ^ k).matrix());
        }
    }
    return HermitianOperator(std::move(w));
}

// Full-correlator Bell scenario: one real weight per setting tuple, applied to
// the tensor product of the per-party observables.  Setting tuples are indexed
// with party 0 in the most significant bit.
struct BellScenario {
    int parties = 2;
    std::vector<double> coefficients;  // size 2^parties

    BellScenario(int n, std::vector<double> coeffs)
        : parties(n), coefficients(std::move(coeffs)) {
        if (parties < 2) throw InvalidRange("scenario needs at least two parties");
        if (coefficients.size() != (std::size_t{1} << parties)) {
            throw DimensionMismatch("coefficient table must have 2^parties entries");
        }
    }
};

inline BellScenario chsh_scenario() {
    return BellScenario(2, {1.0, 1.0, 1.0, -1.0});
}

inline BellScenario mermin_scenario() {
    // Nonzero tuples (j, k, j xor k) with weight (-1)^{jk}.
    std::vector<double> c(8, 0.0);
    c[0b000] = 1.0;
    c[0b011] = 1.0;
    c[0b101] = 1.0;
    c[0b110] = -1.0;
    return BellScenario(3, std::move(c));
}

inline HermitianOperator bell_operator(const BellScenario& scenario,
                                       const std::vector<double>& angles) {
    if (angles.size() != static_cast<std::size_t>(scenario.parties)) {
        throw DimensionMismatch("one angle per party required");
    }
    const std::size_t dim = std::size_t{1} << scenario.parties;
    ComplexMatrix w(dim, dim);
    for (std::size_t tuple = 0; tuple < scenario.coefficients.size(); ++tuple) {
        const double weight = scenario.coefficients[tuple];
        if (weight == 0.0) continue;
        ComplexMatrix term = ComplexMatrix::identity(1);
        for (int party = 0; party < scenario.parties; ++party) {
            const int setting = (tuple >> (scenario.parties - 1 - party)) & 1;
            term = kron(term, observable(angles[party], setting).matrix());
        }
        w += weight * term;
    }
    return HermitianOperator(std::move(w));
}

// Result of the simultaneous block reduction of two binary observables.  In
// the returned basis both (padded) observables are block-diagonal with 2x2
// blocks of the canonical cos(a) sigma_x +/- sin(a) sigma_z form.  Unpaired
// common eigenvectors get one appended dimension each (padded_dims counts
// them); the padded operators restrict to the inputs on the original space.
struct JordanBlocks {
    std::vector<double> block_angles;  // ascending
    ComplexMatrix basis;               // unitary, (dim + padded_dims)^2
    int padded_dims = 0;

    std::size_t output_dim() const { return basis.rows(); }

    // Canonical block-diagonal form of observable r (0 or 1) in block order.
    ComplexMatrix canonical_form(int r) const {
        const std::size_t n = output_dim();
        ComplexMatrix d(n, n);
        const double sign = r == 0 ? 1.0 : -1.0;
        for (std::size_t blk = 0; blk < block_angles.size(); ++blk) {
            const double a = block_angles[blk];
            const std::size_t o = 2 * blk;
            d(o, o) = sign * std::sin(a);
            d(o, o + 1) = std::cos(a);
            d(o + 1, o) = std::cos(a);
            d(o + 1, o + 1) = -sign * std::sin(a);
        }
        return d;
    }

    // Padded observable r in the original coordinates (basis D_r basis^dagger).
    ComplexMatrix padded_observable(int r) const {
        return basis * canonical_form(r) * basis.adjoint();
    }
};

namespace detail {

// Deterministic phase fix: first component of magnitude > 1e-10 made real
// positive.
inline void fix_phase(std::vector<cplx>& v) {
    for (const auto& x : v) {
        const double m = std::abs(x);
        if (m > 1e-10) {
            const cplx ph = std::conj(x) / m;
            for (auto& y : v) y *= ph;
            return;
        }
    }
}

inline std::vector<cplx> column_of(const ComplexMatrix& m, std::size_t j) {
    std::vector<cplx> v(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) v[i] = m(i, j);
    return v;
}

inline std::vector<cplx> apply_matrix(const ComplexMatrix& m, const std::vector<cplx>& v) {
    std::vector<cplx> out(m.rows(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
    return out;
}

}  // namespace detail

// Simultaneous reduction of two binary observables (A^2 = 1) into common 2x2
// blocks.  Algorithm: the anticommutator {A0, A1}/2 commutes with both inputs
// and equals cos(2a) on each block; its eigenspaces are resolved by the
// restriction of A0, and each +1 eigenvector v of A0 is completed to a block
// by the partner (A1 v - cos(2a) v)/sin(2a), then rotated into canonical form.
inline JordanBlocks jordan_decompose(const HermitianOperator& obs0,
                                     const HermitianOperator& obs1) {
    const std::size_t d = obs0.dim();
    if (obs1.dim() != d) throw DimensionMismatch("observables of different dimension");
    const ComplexMatrix& a0 = obs0.matrix();
    const ComplexMatrix& a1 = obs1.matrix();
    const ComplexMatrix eye = ComplexMatrix::identity(d);
    if (max_abs_diff(a0 * a0, eye) > 1e-9 || max_abs_diff(a1 * a1, eye) > 1e-9) {
        throw NotBinaryObservable("inputs must square to the identity within 1e-9");
    }

    const HermitianOperator anticom(0.5 * (a0 * a1 + a1 * a0));
    const Spectrum spec = eigh(anticom);

    struct Block {
        double angle;
        std::vector<cplx> p, q;  // columns, length d (original space)
    };
    std::vector<Block> blocks;
    // Unpaired common eigenvectors: (A0 eigenvalue, A1 eigenvalue, vector).
    struct Trivial {
        int sign0, sign1;
        std::vector<cplx> v;
    };
    std::vector<Trivial> leftovers;

    const double group_tol = 1e-7;
    std::size_t start = 0;
    while (start < d) {
        std::size_t stop = start + 1;
        while (stop < d && spec.eigenvalues[stop] - spec.eigenvalues[stop - 1] < group_tol) ++stop;
        const std::size_t k = stop - start;
        const double m = std::clamp(spec.eigenvalues[start], -1.0, 1.0);
        const double angle = 0.5 * std::acos(m);

        // Restriction of A0 to the eigenspace, in the eigenvector basis.
        ComplexMatrix e(d, k);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < d; ++i) e(i, j) = spec.eigenvectors(i, start + j);
        const ComplexMatrix a0e_full = e.adjoint() * (a0 * e);
        const Spectrum sub = eigh(HermitianOperator(a0e_full));

        if (m > 1.0 - 1e-9 || m < -1.0 + 1e-9) {
            // A0 = A1 (m = +1) or A0 = -A1 (m = -1): every vector here is a
            // common eigenvector.  Pair +1 with -1 vectors of A0; the rest are
            // left for padding.
            std::vector<std::vector<cplx>> plus, minus;
            for (std::size_t j = 0; j < k; ++j) {
                std::vector<cplx> w = detail::apply_matrix(e, detail::column_of(sub.eigenvectors, j));
                detail::fix_phase(w);
                (sub.eigenvalues[j] > 0.0 ? plus : minus).push_back(std::move(w));
            }
            const int s1_of_plus = m > 0.0 ? 1 : -1;
            const std::size_t pairs = std::min(plus.size(), minus.size());
            for (std::size_t i = 0; i < pairs; ++i) {
                Block blk;
                if (m > 0.0) {
                    // A0 = A1 = diag(1,-1) on (p, q); rotate to the angle-0
                    // form sigma_x via the Hadamard pair.
                    blk.angle = 0.0;
                    blk.p.resize(d);
                    blk.q.resize(d);
                    const double r = 1.0 / std::numbers::sqrt2;
                    for (std::size_t row = 0; row < d; ++row) {
                        blk.p[row] = r * (plus[i][row] + minus[i][row]);
                        blk.q[row] = r * (plus[i][row] - minus[i][row]);
                    }
                } else {
                    // A0 = diag(1,-1), A1 = diag(-1,1): already the canonical
                    // angle-pi/2 block.
                    blk.angle = std::numbers::pi / 2.0;
                    blk.p = plus[i];
                    blk.q = minus[i];
                }
                blocks.push_back(std::move(blk));
            }
            for (std::size_t i = pairs; i < plus.size(); ++i)
                leftovers.push_back({1, s1_of_plus, std::move(plus[i])});
            for (std::size_t i = pairs; i < minus.size(); ++i)
                leftovers.push_back({-1, -s1_of_plus, std::move(minus[i])});
        } else {
            const double c2a = m;
            for (std::size_t j = 0; j < k; ++j) {
                if (sub.eigenvalues[j] < 0.0) continue;  // partners of earlier vectors
                std::vector<cplx> v = detail::apply_matrix(e, detail::column_of(sub.eigenvectors, j));
                detail::fix_phase(v);
                std::vector<cplx> u = detail::apply_matrix(a1, v);
                double norm2 = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    u[i] -= c2a * v[i];
                    norm2 += std::norm(u[i]);
                }
                const double inv = 1.0 / std::sqrt(norm2);
                for (auto& x : u) x *= inv;

                // In basis (v, u): A0 = sigma_z, A1 = sin(2a) sigma_x +
                // cos(2a) sigma_z.  Rotate by phi = pi/2 - angle about y to
                // reach the canonical pair.
                const double phi = std::numbers::pi / 2.0 - angle;
                const double ch = std::cos(phi / 2.0);
                const double sh = std::sin(phi / 2.0);
                Block blk;
                blk.angle = angle;
                blk.p.resize(d);
                blk.q.resize(d);
                for (std::size_t row = 0; row < d; ++row) {
                    blk.p[row] = ch * v[row] - sh * u[row];
                    blk.q[row] = sh * v[row] + ch * u[row];
                }
                blocks.push_back(std::move(blk));
            }
        }
        start = stop;
    }

    const int pad = static_cast<int>(leftovers.size());
    const std::size_t dout = d + pad;
    if (dout % 2 != 0) {
        throw OddDimensionAfterPadding("padded dimension " + std::to_string(dout) + " is odd");
    }

    // Promote each unpaired common eigenvector with one appended dimension.
    int next_pad = 0;
    for (auto& t : leftovers) {
        std::vector<cplx> extra(dout, cplx(0.0, 0.0));
        extra[d + next_pad] = 1.0;
        ++next_pad;
        std::vector<cplx> v(dout, cplx(0.0, 0.0));
        for (std::size_t i = 0; i < d; ++i) v[i] = t.v[i];

        Block blk;
        blk.p.resize(dout);
        blk.q.resize(dout);
        if (t.sign0 == t.sign1) {
            // Aligned: extend with A0 = A1 = diag(sign, -sign) on (v, extra),
            // i.e. an angle-0 block after the Hadamard rotation.
            blk.angle = 0.0;
            const double r = 1.0 / std::numbers::sqrt2;
            const auto& hi = t.sign0 > 0 ? v : extra;
            const auto& lo = t.sign0 > 0 ? extra : v;
            for (std::size_t row = 0; row < dout; ++row) {
                blk.p[row] = r * (hi[row] + lo[row]);
                blk.q[row] = r * (hi[row] - lo[row]);
            }
        } else {
            // Anti-aligned: extend to the canonical angle-pi/2 block.
            blk.angle = std::numbers::pi / 2.0;
            blk.p = t.sign0 > 0 ? v : extra;
            blk.q = t.sign0 > 0 ? extra : v;
        }
        blocks.push_back(std::move(blk));
    }

    std::stable_sort(blocks.begin(), blocks.end(),
                     [](const Block& x, const Block& y) { return x.angle < y.angle; });

    JordanBlocks out;
    out.padded_dims = pad;
    out.basis = ComplexMatrix(dout, dout);
    for (std::size_t blk = 0; blk < blocks.size(); ++blk) {
        out.block_angles.push_back(blocks[blk].angle);
        const std::size_t rows = blocks[blk].p.size();
        for (std::size_t i = 0; i < rows; ++i) {
            out.basis(i, 2 * blk) = blocks[blk].p[i];
            out.basis(i, 2 * blk + 1) = blocks[blk].q[i];
        }
    }
    return out;
}

}  // namespace selftest
