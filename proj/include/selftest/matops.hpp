#pragma once

// Dense complex linear algebra for small operators (dim <= 16): construction,
// Kronecker products, a cyclic Jacobi Hermitian eigensolver and fidelity with
// pure states.  Everything is a pure value type; no shared state.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "selftest/errors.hpp"

namespace selftest {

using cplx = std::complex<double>;

inline constexpr double kHermiticityTol = 1e-12;
inline constexpr double kDensityTol = 1e-12;
inline constexpr double kPurityTol = 1e-10;

// Row-major dense complex matrix.
class ComplexMatrix {
  public:
    ComplexMatrix() : rows_(0), cols_(0) {}

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, cplx(0.0, 0.0)) {}

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_) {
            throw DimensionMismatch("entry count does not match matrix shape");
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const cplx> data() const { return data_; }
    std::span<cplx> data() { return data_; }

    ComplexMatrix& operator+=(const ComplexMatrix& other) {
        require_same_shape(other);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
        return *this;
    }

    ComplexMatrix& operator-=(const ComplexMatrix& other) {
        require_same_shape(other);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
        return *this;
    }

    ComplexMatrix& operator*=(cplx factor) {
        for (auto& v : data_) v *= factor;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(cplx factor, ComplexMatrix m) { return m *= factor; }
    friend ComplexMatrix operator*(ComplexMatrix m, cplx factor) { return m *= factor; }
    friend ComplexMatrix operator*(double factor, ComplexMatrix m) { return m *= cplx(factor, 0.0); }
    friend ComplexMatrix operator*(ComplexMatrix m, double factor) { return m *= cplx(factor, 0.0); }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product shape mismatch");
        ComplexMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx(0.0, 0.0)) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) {
                    out(i, j) += aik * b(k, j);
                }
            }
        }
        return out;
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
        return out;
    }

    cplx trace() const {
        if (!square()) throw DimensionMismatch("trace of a non-square matrix");
        cplx t(0.0, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double sum = 0.0;
        for (const auto& v : data_) sum += std::norm(v);
        return std::sqrt(sum);
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    // max_ij |A_ij - conj(A_ji)|
    double hermiticity_defect() const {
        if (!square()) return std::numeric_limits<double>::infinity();
        double worst = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
        return worst;
    }

  private:
    void require_same_shape(const ComplexMatrix& other) const {
        if (rows_ != other.rows_ || cols_ != other.cols_) {
            throw DimensionMismatch("matrix shape mismatch");
        }
    }

    std::size_t rows_, cols_;
    std::vector<cplx> data_;
};

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a - b).max_abs();
}

// Standard Kronecker product; dimensions multiply.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx(0.0, 0.0)) continue;
            for (std::size_t k = 0; k < b.rows(); ++k) {
                for (std::size_t l = 0; l < b.cols(); ++l) {
                    out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
                }
            }
        }
    }
    return out;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c) {
    return kron(kron(a, b), c);
}

inline ComplexMatrix pauli_x() {
    return ComplexMatrix(2, 2, {cplx(0, 0), cplx(1, 0), cplx(1, 0), cplx(0, 0)});
}

inline ComplexMatrix pauli_y() {
    return ComplexMatrix(2, 2, {cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0)});
}

inline ComplexMatrix pauli_z() {
    return ComplexMatrix(2, 2, {cplx(1, 0), cplx(0, 0), cplx(0, 0), cplx(-1, 0)});
}

inline ComplexMatrix identity2() { return ComplexMatrix::identity(2); }

// H = (sigma_x + sigma_z)/sqrt(2)
inline ComplexMatrix hadamard() {
    const double r = 1.0 / std::numbers::sqrt2;
    return ComplexMatrix(2, 2, {cplx(r, 0), cplx(r, 0), cplx(r, 0), cplx(-r, 0)});
}

// V = (sigma_x - sigma_z)/sqrt(2)
inline ComplexMatrix v_reflection() {
    const double r = 1.0 / std::numbers::sqrt2;
    return ComplexMatrix(2, 2, {cplx(-r, 0), cplx(r, 0), cplx(r, 0), cplx(r, 0)});
}

// Single-qubit Pauli by index: 0 -> identity, 1 -> x, 2 -> y, 3 -> z.
inline ComplexMatrix pauli(int index) {
    switch (index) {
        case 0: return identity2();
        case 1: return pauli_x();
        case 2: return pauli_y();
        case 3: return pauli_z();
        default: throw InvalidRange("pauli index must be in 0..3");
    }
}

// Tensor product of single-qubit Paulis, e.g. pauli_string({2, 2}) = y (x) y.
inline ComplexMatrix pauli_string(std::initializer_list<int> indices) {
    ComplexMatrix out = ComplexMatrix::identity(1);
    for (int idx : indices) out = kron(out, pauli(idx));
    return out;
}

// Coefficient of the given Pauli string in the expansion M = sum_P c_P P.
inline double pauli_coefficient(const ComplexMatrix& m, std::initializer_list<int> indices) {
    const ComplexMatrix p = pauli_string(indices);
    if (p.rows() != m.rows()) throw DimensionMismatch("pauli string dimension mismatch");
    return std::real((p * m).trace()) / static_cast<double>(m.rows());
}

// Hermitian operator: square matrix with H = H^dagger within 1e-12.
class HermitianOperator {
  public:
    explicit HermitianOperator(ComplexMatrix m) : matrix_(std::move(m)) {
        if (!matrix_.square()) throw DimensionMismatch("Hermitian operator must be square");
        const double defect = matrix_.hermiticity_defect();
        if (defect > kHermiticityTol) {
            throw NonHermitian("hermiticity defect " + std::to_string(defect));
        }
        symmetrize();
    }

    std::size_t dim() const { return matrix_.rows(); }
    const ComplexMatrix& matrix() const { return matrix_; }

    friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
        return HermitianOperator(a.matrix_ + b.matrix_);
    }
    friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
        return HermitianOperator(a.matrix_ - b.matrix_);
    }
    friend HermitianOperator operator*(double f, const HermitianOperator& h) {
        return HermitianOperator(f * h.matrix_);
    }

  private:
    // Replace by (H + H^dagger)/2 so downstream code sees an exactly Hermitian matrix.
    void symmetrize() {
        const std::size_t n = matrix_.rows();
        for (std::size_t i = 0; i < n; ++i) {
            matrix_(i, i) = cplx(std::real(matrix_(i, i)), 0.0);
            for (std::size_t j = i + 1; j < n; ++j) {
                const cplx avg = 0.5 * (matrix_(i, j) + std::conj(matrix_(j, i)));
                matrix_(i, j) = avg;
                matrix_(j, i) = std::conj(avg);
            }
        }
    }

    ComplexMatrix matrix_;
};

// Full spectrum of a Hermitian operator: eigenvalues ascending, eigenvectors
// as columns of a unitary matrix.
struct Spectrum {
    std::vector<double> eigenvalues;
    ComplexMatrix eigenvectors;
};

namespace detail {

// Cyclic Jacobi for complex Hermitian matrices.  Deterministic: fixed sweep
// order, convergence when the off-diagonal Frobenius norm drops below
// 1e-13 * max(1, ||H||_F).  In-place on `a` (row-major n x n); accumulates
// eigenvectors into `vecs` when non-null.
inline void jacobi_hermitian(std::vector<cplx>& a, std::size_t n, std::vector<cplx>* vecs) {
    if (vecs) {
        vecs->assign(n * n, cplx(0.0, 0.0));
        for (std::size_t i = 0; i < n; ++i) (*vecs)[i * n + i] = 1.0;
    }
    double norm = 0.0;
    for (const auto& v : a) norm += std::norm(v);
    norm = std::sqrt(norm);
    const double tol = 1e-13 * std::max(1.0, norm);

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q)
                if (p != q) off += std::norm(a[p * n + q]);
        if (std::sqrt(off) < tol) return;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = a[p * n + q];
                const double mag = std::abs(apq);
                if (mag == 0.0) continue;
                const cplx phase = apq / mag;
                const double app = std::real(a[p * n + p]);
                const double aqq = std::real(a[q * n + q]);

                const double tau = (app - aqq) / (2.0 * mag);
                double t;
                if (tau >= 0.0) {
                    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
                } else {
                    t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                }
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx sp = s * phase;        // s e^{i phi}
                const cplx spc = std::conj(sp);   // s e^{-i phi}

                // Columns: M <- M R with R = [[c, -sp], [spc, c]] on (p, q).
                for (std::size_t i = 0; i < n; ++i) {
                    const cplx mip = a[i * n + p];
                    const cplx miq = a[i * n + q];
                    a[i * n + p] = c * mip + spc * miq;
                    a[i * n + q] = -sp * mip + c * miq;
                }
                // Rows: M <- R^dagger M.
                for (std::size_t j = 0; j < n; ++j) {
                    const cplx mpj = a[p * n + j];
                    const cplx mqj = a[q * n + j];
                    a[p * n + j] = c * mpj + sp * mqj;
                    a[q * n + j] = -spc * mpj + c * mqj;
                }
                a[p * n + q] = cplx(0.0, 0.0);
                a[q * n + p] = cplx(0.0, 0.0);
                a[p * n + p] = cplx(std::real(a[p * n + p]), 0.0);
                a[q * n + q] = cplx(std::real(a[q * n + q]), 0.0);

                if (vecs) {
                    for (std::size_t i = 0; i < n; ++i) {
                        const cplx vip = (*vecs)[i * n + p];
                        const cplx viq = (*vecs)[i * n + q];
                        (*vecs)[i * n + p] = c * vip + spc * viq;
                        (*vecs)[i * n + q] = -sp * vip + c * viq;
                    }
                }
            }
        }
    }
}

// Eigenvalues only (ascending), without the Hermiticity-wrapper overhead.
inline std::vector<double> eigenvalues_only(const ComplexMatrix& m) {
    const std::size_t n = m.rows();
    std::vector<cplx> work(m.data().begin(), m.data().end());
    jacobi_hermitian(work, n, nullptr);
    std::vector<double> evals(n);
    for (std::size_t i = 0; i < n; ++i) evals[i] = std::real(work[i * n + i]);
    std::sort(evals.begin(), evals.end());
    return evals;
}

inline double min_eigenvalue(const ComplexMatrix& m) {
    const auto evals = eigenvalues_only(m);
    return evals.front();
}

inline double max_eigenvalue(const ComplexMatrix& m) {
    const auto evals = eigenvalues_only(m);
    return evals.back();
}

inline double operator_norm(const ComplexMatrix& m) {
    const auto evals = eigenvalues_only(m);
    return std::max(std::abs(evals.front()), std::abs(evals.back()));
}

}  // namespace detail

// Full eigendecomposition, eigenvalues ascending with orthonormal eigenvectors.
inline Spectrum eigh(const HermitianOperator& h) {
    const std::size_t n = h.dim();
    std::vector<cplx> work(h.matrix().data().begin(), h.matrix().data().end());
    std::vector<cplx> vecs;
    detail::jacobi_hermitian(work, n, &vecs);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return std::real(work[i * n + i]) < std::real(work[j * n + j]);
    });

    Spectrum spec;
    spec.eigenvalues.resize(n);
    spec.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        spec.eigenvalues[k] = std::real(work[order[k] * n + order[k]]);
        for (std::size_t i = 0; i < n; ++i) spec.eigenvectors(i, k) = vecs[i * n + order[k]];
    }
    return spec;
}

// Density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
  public:
    explicit DensityMatrix(HermitianOperator op) : op_(std::move(op)) {
        const double tr = std::real(op_.matrix().trace());
        if (std::abs(tr - 1.0) > kDensityTol) {
            throw InvalidRange("density matrix trace " + std::to_string(tr));
        }
        const double lo = detail::min_eigenvalue(op_.matrix());
        if (lo < -kDensityTol) {
            throw InvalidRange("density matrix has negative eigenvalue " + std::to_string(lo));
        }
    }

    explicit DensityMatrix(ComplexMatrix m) : DensityMatrix(HermitianOperator(std::move(m))) {}

    std::size_t dim() const { return op_.dim(); }
    const HermitianOperator& op() const { return op_; }
    const ComplexMatrix& matrix() const { return op_.matrix(); }

  private:
    HermitianOperator op_;
};

// F(rho, psi) for rank-1 psi: Re tr(rho psi), clamped to [0, 1].
inline double fidelity_with_pure(const DensityMatrix& rho, const DensityMatrix& psi) {
    if (rho.dim() != psi.dim()) throw DimensionMismatch("fidelity dimension mismatch");
    const double top = detail::max_eigenvalue(psi.matrix());
    if (std::abs(top - 1.0) > kPurityTol) {
        throw NotPure("largest eigenvalue " + std::to_string(top) + " != 1");
    }
    const double f = std::real((rho.matrix() * psi.matrix()).trace());
    return std::clamp(f, 0.0, 1.0);
}

}  // namespace selftest
