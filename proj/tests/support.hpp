#pragma once

// Shared helpers for the test suites: seeded generators for random matrices,
// states and unitaries.  Kept independent of the library internals so tests
// can act as oracles.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "selftest/matops.hpp"

namespace testsupport {

using selftest::ComplexMatrix;
using selftest::cplx;

struct Rng {
    std::mt19937_64 eng;

    explicit Rng(std::uint64_t seed) : eng(seed) {}

    double uniform() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    cplx complex_normal() { return {normal(), normal()}; }
};

inline ComplexMatrix random_matrix(std::size_t n, Rng& rng) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.complex_normal();
    return m;
}

inline ComplexMatrix random_hermitian(std::size_t n, Rng& rng) {
    const ComplexMatrix a = random_matrix(n, rng);
    return 0.5 * (a + a.adjoint());
}

// Gram-Schmidt on the columns of a random matrix.
inline ComplexMatrix random_unitary(std::size_t n, Rng& rng) {
    ComplexMatrix a = random_matrix(n, rng);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t prev = 0; prev < j; ++prev) {
            cplx overlap(0.0, 0.0);
            for (std::size_t i = 0; i < n; ++i) overlap += std::conj(a(i, prev)) * a(i, j);
            for (std::size_t i = 0; i < n; ++i) a(i, j) -= overlap * a(i, prev);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += std::norm(a(i, j));
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) a(i, j) /= norm;
    }
    return a;
}

inline ComplexMatrix random_density(std::size_t n, Rng& rng) {
    const ComplexMatrix a = random_matrix(n, rng);
    ComplexMatrix rho = a * a.adjoint();
    const double tr = std::real(rho.trace());
    return (1.0 / tr) * rho;
}

}  // namespace testsupport
