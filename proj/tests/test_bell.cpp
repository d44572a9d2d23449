#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "selftest/bell.hpp"
#include "selftest/matops.hpp"
#include "support.hpp"

using namespace selftest;
using testsupport::Rng;

namespace {
const double kSqrt2 = std::numbers::sqrt2;
const double kHalfPi = std::numbers::pi / 2.0;
const double kQuarterPi = std::numbers::pi / 4.0;

// Direct Pauli expansion of the CHSH operator.
ComplexMatrix chsh_expansion(double a, double b) {
    return 2.0 * (std::cos(a) * std::cos(b) * kron(pauli_x(), pauli_x()) +
                  std::sin(a) * std::cos(b) * kron(pauli_z(), pauli_x()) +
                  std::cos(a) * std::sin(b) * kron(pauli_x(), pauli_z()) -
                  std::sin(a) * std::sin(b) * kron(pauli_z(), pauli_z()));
}

// Direct Pauli expansion of the Mermin operator.
ComplexMatrix mermin_expansion(double a, double b, double c) {
    const double ca = std::cos(a), sa = std::sin(a);
    const double cb = std::cos(b), sb = std::sin(b);
    const double cc = std::cos(c), sc = std::sin(c);
    const auto x = pauli_x();
    const auto z = pauli_z();
    return 2.0 * (ca * cb * cc * kron(x, x, x) - ca * cb * sc * kron(x, x, z) +
                  ca * sb * cc * kron(x, z, x) + sa * cb * cc * kron(z, x, x) +
                  ca * sb * sc * kron(x, z, z) + sa * cb * sc * kron(z, x, z) -
                  sa * sb * cc * kron(z, z, x) + sa * sb * sc * kron(z, z, z));
}

// Direct sum of canonical 2x2 blocks with the given angles, conjugated by u.
std::pair<HermitianOperator, HermitianOperator> build_pair(const std::vector<double>& angles,
                                                           const ComplexMatrix& u) {
    const std::size_t dim = 2 * angles.size();
    ComplexMatrix a0(dim, dim), a1(dim, dim);
    for (std::size_t blk = 0; blk < angles.size(); ++blk) {
        const double ang = angles[blk];
        const std::size_t o = 2 * blk;
        a0(o, o) = std::sin(ang);
        a0(o, o + 1) = std::cos(ang);
        a0(o + 1, o) = std::cos(ang);
        a0(o + 1, o + 1) = -std::sin(ang);
        a1(o, o) = -std::sin(ang);
        a1(o, o + 1) = std::cos(ang);
        a1(o + 1, o) = std::cos(ang);
        a1(o + 1, o + 1) = std::sin(ang);
    }
    return {HermitianOperator(u * a0 * u.adjoint()), HermitianOperator(u * a1 * u.adjoint())};
}

}  // namespace

TEST_CASE("observable endpoints") {
    CHECK(max_abs_diff(observable(0.0, 0).matrix(), pauli_x()) < 1e-15);
    CHECK(max_abs_diff(observable(kHalfPi, 1).matrix(), -1.0 * pauli_z()) < 1e-15);
}

TEST_CASE("observables anticommute at a = pi/4") {
    const ComplexMatrix a0 = observable(kQuarterPi, 0).matrix();
    const ComplexMatrix a1 = observable(kQuarterPi, 1).matrix();
    CHECK((a0 * a1 + a1 * a0).max_abs() < 1e-15);
}

TEST_CASE("anticommutator identity {A0, A1} = 2 cos(2a) 1") {
    Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        const double a = rng.uniform(0.0, kHalfPi);
        const ComplexMatrix a0 = observable(a, 0).matrix();
        const ComplexMatrix a1 = observable(a, 1).matrix();
        const ComplexMatrix expected = (2.0 * std::cos(2.0 * a)) * identity2();
        CHECK(max_abs_diff(a0 * a1 + a1 * a0, expected) < 1e-12);
        CHECK(max_abs_diff(a0 * a0, identity2()) < 1e-12);
    }
}

TEST_CASE("observable rejects angles outside [0, pi/2]") {
    CHECK_THROWS_AS(observable(-0.1, 0), AngleOutOfRange);
    CHECK_THROWS_AS(observable(kHalfPi + 0.1, 1), AngleOutOfRange);
}

TEST_CASE("CHSH operator reaches 2 sqrt 2 at the optimal angles") {
    const auto evals = eigh(chsh_operator(kQuarterPi, kQuarterPi)).eigenvalues;
    CHECK(evals.back() == doctest::Approx(2.0 * kSqrt2).epsilon(1e-12));
}

TEST_CASE("CHSH operator at zero angles is classical") {
    const ComplexMatrix expected = 2.0 * kron(pauli_x(), pauli_x());
    CHECK(max_abs_diff(chsh_operator(0.0, 0.0).matrix(), expected) < 1e-15);
    const auto evals = eigh(chsh_operator(0.0, 0.0)).eigenvalues;
    CHECK(evals.back() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("CHSH operator is traceless and matches its Pauli expansion") {
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const double a = kHalfPi * i / 4.0;
            const double b = kHalfPi * j / 4.0;
            const HermitianOperator w = chsh_operator(a, b);
            CHECK(std::abs(w.matrix().trace()) < 1e-13);
            CHECK(max_abs_diff(w.matrix(), chsh_expansion(a, b)) < 1e-12);
        }
    }
}

TEST_CASE("CHSH operator norm never exceeds the quantum bound") {
    for (int i = 0; i < 41; ++i) {
        for (int j = 0; j < 41; ++j) {
            const double a = kHalfPi * i / 40.0;
            const double b = kHalfPi * j / 40.0;
            CHECK(detail::operator_norm(chsh_operator(a, b).matrix()) <= 2.0 * kSqrt2 + 1e-9);
        }
    }
}

TEST_CASE("Mermin operator values at the reference points") {
    CHECK(eigh(mermin_operator(kQuarterPi, kQuarterPi, kQuarterPi)).eigenvalues.back() ==
          doctest::Approx(4.0).epsilon(1e-12));
    CHECK(eigh(mermin_operator(kQuarterPi, kQuarterPi, 0.0)).eigenvalues.back() ==
          doctest::Approx(2.0 * kSqrt2).epsilon(1e-12));
}

TEST_CASE("Mermin operator is traceless and matches its Pauli expansion") {
    Rng rng(12);
    for (int trial = 0; trial < 8; ++trial) {
        const double a = rng.uniform(0.0, kHalfPi);
        const double b = rng.uniform(0.0, kHalfPi);
        const double c = rng.uniform(0.0, kHalfPi);
        const HermitianOperator w = mermin_operator(a, b, c);
        CHECK(std::abs(w.matrix().trace()) < 1e-12);
        CHECK(max_abs_diff(w.matrix(), mermin_expansion(a, b, c)) < 1e-12);
    }
}

TEST_CASE("generic Bell operator reproduces the CHSH table") {
    const BellScenario sc = chsh_scenario();
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const double a = kHalfPi * i / 4.0;
            const double b = kHalfPi * j / 4.0;
            CHECK(max_abs_diff(bell_operator(sc, {a, b}).matrix(),
                               chsh_operator(a, b).matrix()) < 1e-12);
        }
    }
}

TEST_CASE("generic Bell operator reproduces the Mermin table") {
    const BellScenario sc = mermin_scenario();
    Rng rng(13);
    for (int trial = 0; trial < 6; ++trial) {
        const double a = rng.uniform(0.0, kHalfPi);
        const double b = rng.uniform(0.0, kHalfPi);
        const double c = rng.uniform(0.0, kHalfPi);
        CHECK(max_abs_diff(bell_operator(sc, {a, b, c}).matrix(),
                           mermin_operator(a, b, c).matrix()) < 1e-12);
    }
    CHECK(max_abs_diff(bell_operator(sc, {kQuarterPi, kQuarterPi, kQuarterPi}).matrix(),
                       mermin_operator(kQuarterPi, kQuarterPi, kQuarterPi).matrix()) < 1e-12);
}

TEST_CASE("all-zero coefficient table gives the zero operator") {
    const BellScenario sc(2, {0.0, 0.0, 0.0, 0.0});
    CHECK(bell_operator(sc, {0.3, 0.9}).matrix().max_abs() == 0.0);
}

TEST_CASE("Bell operator rejects mismatched angle counts") {
    CHECK_THROWS_AS(bell_operator(chsh_scenario(), {0.1}), DimensionMismatch);
    CHECK_THROWS_AS(BellScenario(2, {1.0, 1.0}), DimensionMismatch);
}

TEST_CASE("jordan_decompose of identical observables") {
    const auto blocks = jordan_decompose(HermitianOperator(pauli_x()), HermitianOperator(pauli_x()));
    REQUIRE(blocks.block_angles.size() == 1);
    CHECK(blocks.block_angles[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(blocks.padded_dims == 0);
    CHECK(max_abs_diff(blocks.padded_observable(0), pauli_x()) < 1e-10);
    CHECK(max_abs_diff(blocks.padded_observable(1), pauli_x()) < 1e-10);
}

TEST_CASE("jordan_decompose leaves the canonical pair fixed") {
    const auto blocks = jordan_decompose(observable(kQuarterPi, 0), observable(kQuarterPi, 1));
    REQUIRE(blocks.block_angles.size() == 1);
    CHECK(blocks.block_angles[0] == doctest::Approx(kQuarterPi).epsilon(1e-12));
    CHECK(blocks.padded_dims == 0);
    CHECK(max_abs_diff(blocks.padded_observable(0), observable(kQuarterPi, 0).matrix()) < 1e-10);
    CHECK(max_abs_diff(blocks.padded_observable(1), observable(kQuarterPi, 1).matrix()) < 1e-10);
}

TEST_CASE("jordan_decompose recovers a hidden block structure") {
    Rng rng(14);
    const std::vector<double> angles = {0.3, 0.7, 1.1};
    const ComplexMatrix u = testsupport::random_unitary(6, rng);
    const auto [a0, a1] = build_pair(angles, u);
    const auto blocks = jordan_decompose(a0, a1);
    REQUIRE(blocks.block_angles.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(blocks.block_angles[i] == doctest::Approx(angles[i]).epsilon(1e-8));
    }
    CHECK(max_abs_diff(blocks.padded_observable(0), a0.matrix()) < 1e-8);
    CHECK(max_abs_diff(blocks.padded_observable(1), a1.matrix()) < 1e-8);
}

TEST_CASE("jordan_decompose round trip over random block structures") {
    Rng rng(15);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t nblocks = 1 + (rng.eng() % 4);  // dims 2..8
        std::vector<double> angles(nblocks);
        for (auto& a : angles) a = rng.uniform(0.02, kHalfPi - 0.02);
        std::sort(angles.begin(), angles.end());
        const ComplexMatrix u = testsupport::random_unitary(2 * nblocks, rng);
        const auto [a0, a1] = build_pair(angles, u);

        const auto blocks = jordan_decompose(a0, a1);
        REQUIRE(blocks.block_angles.size() == nblocks);
        for (std::size_t i = 0; i < nblocks; ++i) {
            CHECK(blocks.block_angles[i] == doctest::Approx(angles[i]).epsilon(1e-8));
        }
        CHECK(max_abs_diff(blocks.padded_observable(0), a0.matrix()) < 1e-8);
        CHECK(max_abs_diff(blocks.padded_observable(1), a1.matrix()) < 1e-8);

        // basis unitarity
        CHECK(max_abs_diff(blocks.basis.adjoint() * blocks.basis,
                           ComplexMatrix::identity(blocks.output_dim())) < 1e-8);
    }
}

TEST_CASE("block angles are invariant under a common unitary conjugation") {
    Rng rng(16);
    const std::vector<double> angles = {0.25, 0.9};
    const auto [a0, a1] = build_pair(angles, ComplexMatrix::identity(4));
    const auto base = jordan_decompose(a0, a1);
    for (int trial = 0; trial < 10; ++trial) {
        const ComplexMatrix u = testsupport::random_unitary(4, rng);
        const auto [b0, b1] = build_pair(angles, u);
        const auto rotated = jordan_decompose(b0, b1);
        REQUIRE(rotated.block_angles.size() == base.block_angles.size());
        for (std::size_t i = 0; i < base.block_angles.size(); ++i) {
            CHECK(std::abs(rotated.block_angles[i] - base.block_angles[i]) < 1e-8);
        }
    }
}

TEST_CASE("jordan_decompose pads unpaired trivial blocks") {
    // Both observables the 2x2 identity: two aligned trivial blocks, no
    // possible pairing, so both are promoted with appended dimensions.
    const HermitianOperator one(ComplexMatrix::identity(2));
    const auto blocks = jordan_decompose(one, one);
    CHECK(blocks.padded_dims == 2);
    REQUIRE(blocks.block_angles.size() == 2);
    CHECK(blocks.block_angles[0] == doctest::Approx(0.0));
    CHECK(blocks.block_angles[1] == doctest::Approx(0.0));
    // The padded observables restrict to the identity on the original space.
    const ComplexMatrix padded = blocks.padded_observable(0);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(std::abs(padded(i, j) - (i == j ? cplx(1, 0) : cplx(0, 0))) < 1e-10);
        }
    }
}

TEST_CASE("jordan_decompose handles odd input dimensions") {
    ComplexMatrix d(3, 3);
    d(0, 0) = 1.0;
    d(1, 1) = 1.0;
    d(2, 2) = -1.0;
    const HermitianOperator a(d);
    const auto blocks = jordan_decompose(a, a);
    CHECK(blocks.padded_dims == 1);
    CHECK(blocks.output_dim() == 4);
    REQUIRE(blocks.block_angles.size() == 2);
    CHECK(blocks.block_angles[0] == doctest::Approx(0.0));
    CHECK(blocks.block_angles[1] == doctest::Approx(0.0));
    const ComplexMatrix padded = blocks.padded_observable(0);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(std::abs(padded(i, j) - d(i, j)) < 1e-10);
        }
    }
}

TEST_CASE("jordan_decompose canonicalizes anti-aligned observables") {
    const auto blocks =
        jordan_decompose(HermitianOperator(pauli_z()), HermitianOperator(-1.0 * pauli_z()));
    REQUIRE(blocks.block_angles.size() == 1);
    CHECK(blocks.block_angles[0] == doctest::Approx(kHalfPi).epsilon(1e-12));
    CHECK(blocks.padded_dims == 0);
    CHECK(max_abs_diff(blocks.padded_observable(0), pauli_z()) < 1e-10);
}

TEST_CASE("jordan_decompose rejects non-involutions") {
    const ComplexMatrix bad = pauli_x() + 0.1 * identity2();
    CHECK_THROWS_AS(jordan_decompose(HermitianOperator(bad), HermitianOperator(pauli_x())),
                    NotBinaryObservable);
}

TEST_CASE("jordan_decompose is deterministic") {
    Rng rng(17);
    const ComplexMatrix u = testsupport::random_unitary(6, rng);
    const auto [a0, a1] = build_pair({0.2, 0.6, 1.2}, u);
    const auto first = jordan_decompose(a0, a1);
    const auto second = jordan_decompose(a0, a1);
    CHECK(first.block_angles == second.block_angles);
    CHECK(max_abs_diff(first.basis, second.basis) == 0.0);
}
