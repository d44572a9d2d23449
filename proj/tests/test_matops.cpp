#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "selftest/bell.hpp"
#include "selftest/extraction.hpp"
#include "selftest/matops.hpp"
#include "selftest/tradeoff.hpp"
#include "support.hpp"

using namespace selftest;
using testsupport::Rng;

namespace {
const double kSqrt2 = std::numbers::sqrt2;
const double kQuarterPi = std::numbers::pi / 4.0;
}  // namespace

TEST_CASE("kron of identities is the identity") {
    CHECK(max_abs_diff(kron(identity2(), identity2()), ComplexMatrix::identity(4)) == 0.0);
}

TEST_CASE("kron of two sigma_x has eigenvalues -1, -1, 1, 1") {
    const auto evals = eigh(HermitianOperator(kron(pauli_x(), pauli_x()))).eigenvalues;
    CHECK(evals[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(evals[1] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(evals[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(evals[3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kron(sigma_z, sigma_z) fixes |00>") {
    const ComplexMatrix zz = kron(pauli_z(), pauli_z());
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(zz(i, 0) - (i == 0 ? cplx(1, 0) : cplx(0, 0))) == 0.0);
    }
}

TEST_CASE("kron is associative and bilinear on random inputs") {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = testsupport::random_matrix(2, rng);
        const auto b = testsupport::random_matrix(3, rng);
        const auto c = testsupport::random_matrix(2, rng);
        CHECK(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))) < 1e-12);
        CHECK(max_abs_diff(kron(a + c, b), kron(a, b) + kron(c, b)) < 1e-12);
        CHECK(max_abs_diff(kron(a, 2.5 * b), 2.5 * kron(a, b)) < 1e-12);
    }
}

TEST_CASE("eigh of sigma_z") {
    const auto spec = eigh(HermitianOperator(pauli_z()));
    CHECK(spec.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(spec.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eigh of the CHSH operator at the optimal angles") {
    const HermitianOperator w = chsh_operator(kQuarterPi, kQuarterPi);

    // Independent check of the structure: W^2 = 4 + 4 yy by direct product.
    const ComplexMatrix wsq = w.matrix() * w.matrix();
    const ComplexMatrix expected =
        4.0 * ComplexMatrix::identity(4) + 4.0 * kron(pauli_y(), pauli_y());
    CHECK(max_abs_diff(wsq, expected) < 1e-12);

    const auto evals = eigh(w).eigenvalues;
    CHECK(evals[0] == doctest::Approx(-2.0 * kSqrt2).epsilon(1e-12));
    CHECK(std::abs(evals[1]) < 1e-12);
    CHECK(std::abs(evals[2]) < 1e-12);
    CHECK(evals[3] == doctest::Approx(2.0 * kSqrt2).epsilon(1e-12));
}

TEST_CASE("eigh of the pure target state") {
    const auto evals = eigh(target_state_chsh().op()).eigenvalues;
    CHECK(std::abs(evals[0]) < 1e-12);
    CHECK(std::abs(evals[1]) < 1e-12);
    CHECK(std::abs(evals[2]) < 1e-12);
    CHECK(evals[3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random Hermitian matrices reconstruct from their spectrum") {
    Rng rng(202);
    for (std::size_t dim = 2; dim <= 8; ++dim) {
        for (int trial = 0; trial < 5; ++trial) {
            const HermitianOperator h(testsupport::random_hermitian(dim, rng));
            const Spectrum spec = eigh(h);

            // eigenvector matrix unitary
            CHECK(max_abs_diff(spec.eigenvectors.adjoint() * spec.eigenvectors,
                               ComplexMatrix::identity(dim)) < 1e-10);

            // eigenvalue equation residuals
            const double hnorm = detail::operator_norm(h.matrix());
            const ComplexMatrix hv = h.matrix() * spec.eigenvectors;
            for (std::size_t k = 0; k < dim; ++k) {
                double resid = 0.0;
                for (std::size_t i = 0; i < dim; ++i) {
                    resid += std::norm(hv(i, k) - spec.eigenvalues[k] * spec.eigenvectors(i, k));
                }
                CHECK(std::sqrt(resid) < 1e-10 * hnorm);
            }

            // reconstruction
            ComplexMatrix d(dim, dim);
            for (std::size_t k = 0; k < dim; ++k) d(k, k) = spec.eigenvalues[k];
            CHECK(max_abs_diff(spec.eigenvectors * d * spec.eigenvectors.adjoint(), h.matrix()) <
                  1e-9);

            // ascending order and trace identity
            double sum = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                sum += spec.eigenvalues[k];
                if (k > 0) CHECK(spec.eigenvalues[k] >= spec.eigenvalues[k - 1]);
            }
            CHECK(sum == doctest::Approx(std::real(h.matrix().trace())).epsilon(1e-10));
        }
    }
}

TEST_CASE("eigh is deterministic") {
    Rng rng(303);
    const HermitianOperator h(testsupport::random_hermitian(6, rng));
    const Spectrum a = eigh(h);
    const Spectrum b = eigh(h);
    CHECK(a.eigenvalues == b.eigenvalues);
    CHECK(max_abs_diff(a.eigenvectors, b.eigenvectors) == 0.0);
}

TEST_CASE("non-Hermitian input is rejected") {
    ComplexMatrix m(2, 2);
    m(0, 1) = cplx(1.0, 0.0);
    m(1, 0) = cplx(0.5, 0.0);
    CHECK_THROWS_AS(HermitianOperator{m}, NonHermitian);
}

TEST_CASE("fidelity with a pure state") {
    const DensityMatrix phi = target_state_chsh();
    CHECK(fidelity_with_pure(phi, phi) == doctest::Approx(1.0).epsilon(1e-12));

    const DensityMatrix mixed(0.25 * ComplexMatrix::identity(4));
    CHECK(fidelity_with_pure(mixed, phi) == doctest::Approx(0.25).epsilon(1e-12));

    // Extracted tau^00 against tau^11: 1/4 + 1/(4 sqrt 2).
    const double expected = 0.25 + 0.25 / kSqrt2;
    CHECK(fidelity_with_pure(counterexample_forced_state(), counterexample_tau11()) ==
          doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("fidelity rejects mixed reference states") {
    const DensityMatrix mixed(0.25 * ComplexMatrix::identity(4));
    CHECK_THROWS_AS(fidelity_with_pure(target_state_chsh(), mixed), NotPure);
}

TEST_CASE("fidelity clamps to [0, 1]") {
    Rng rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        const DensityMatrix rho(testsupport::random_density(4, rng));
        const double f = fidelity_with_pure(rho, target_state_chsh());
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
    }
}
