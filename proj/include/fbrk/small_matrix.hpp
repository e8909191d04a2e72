#pragma once

// Fixed-size complex matrices for the 2x2 and 3x3 amplification maps.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace fbrk {

using cplx = std::complex<double>;

template <std::size_t N>
using CVector = std::array<cplx, N>;

template <std::size_t N>
struct CMatrix {
    std::array<cplx, N * N> a{};

    cplx& operator()(std::size_t i, std::size_t j) { return a[i * N + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return a[i * N + j]; }

    static CMatrix identity() {
        CMatrix m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    CVector<N> column(std::size_t j) const {
        CVector<N> c;
        for (std::size_t i = 0; i < N; ++i) c[i] = (*this)(i, j);
        return c;
    }

    void set_column(std::size_t j, const CVector<N>& c) {
        for (std::size_t i = 0; i < N; ++i) (*this)(i, j) = c[i];
    }

    CMatrix adjoint() const {
        CMatrix m;
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) m(i, j) = std::conj((*this)(j, i));
        return m;
    }

    CMatrix& operator+=(const CMatrix& o) {
        for (std::size_t k = 0; k < N * N; ++k) a[k] += o.a[k];
        return *this;
    }
    CMatrix& operator-=(const CMatrix& o) {
        for (std::size_t k = 0; k < N * N; ++k) a[k] -= o.a[k];
        return *this;
    }
    CMatrix& operator*=(cplx s) {
        for (auto& x : a) x *= s;
        return *this;
    }
};

using Mat2 = CMatrix<2>;
using Mat3 = CMatrix<3>;
using Vec2 = CVector<2>;
using Vec3 = CVector<3>;

template <std::size_t N>
CMatrix<N> operator+(CMatrix<N> l, const CMatrix<N>& r) { return l += r; }
template <std::size_t N>
CMatrix<N> operator-(CMatrix<N> l, const CMatrix<N>& r) { return l -= r; }
template <std::size_t N>
CMatrix<N> operator*(cplx s, CMatrix<N> m) { return m *= s; }

template <std::size_t N>
CMatrix<N> operator*(const CMatrix<N>& l, const CMatrix<N>& r) {
    CMatrix<N> m;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < N; ++k) {
            const cplx lik = l(i, k);
            for (std::size_t j = 0; j < N; ++j) m(i, j) += lik * r(k, j);
        }
    return m;
}

template <std::size_t N>
CVector<N> operator*(const CMatrix<N>& m, const CVector<N>& v) {
    CVector<N> out{};
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) out[i] += m(i, j) * v[j];
    return out;
}

template <std::size_t N>
double norm2(const CVector<N>& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

/// sqrt(sum |a_ij|^2)
template <std::size_t N>
double frobenius_norm(const CMatrix<N>& m) {
    double s = 0.0;
    for (const auto& x : m.a) s += std::norm(x);
    return std::sqrt(s);
}

/// Max absolute row sum.
template <std::size_t N>
double inf_norm(const CMatrix<N>& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < N; ++j) row += std::abs(m(i, j));
        best = std::max(best, row);
    }
    return best;
}

/// Solves X = L^{-1} R by Gaussian elimination with partial pivoting.
/// Throws NumericalError if L is singular to working precision.
template <std::size_t N>
CMatrix<N> solve(CMatrix<N> lhs, CMatrix<N> rhs);

extern template Mat2 solve<2>(Mat2, Mat2);
extern template Mat3 solve<3>(Mat3, Mat3);

/// Matrix exponential by scaling and squaring with a degree-6 diagonal Pade approximant.
template <std::size_t N>
CMatrix<N> expm_pade(const CMatrix<N>& m);

extern template Mat2 expm_pade<2>(const Mat2&);
extern template Mat3 expm_pade<3>(const Mat3&);

/// Roots of the characteristic polynomial of a 3x3 matrix (complex Cardano,
/// one Newton step per root). Order is not meaningful.
Vec3 eigenvalues(const Mat3& m);

/// Roots of the 2x2 characteristic polynomial.
Vec2 eigenvalues(const Mat2& m);

/// Unit-norm vector spanning (approximately) the kernel of m - lambda I.
/// Uses the best-conditioned cross product of two rows; falls back to the
/// smallest-residual coordinate vector when m - lambda I vanishes.
Vec3 eigenvector(const Mat3& m, cplx lambda);

/// exp(m) for skew-Hermitian m via unitary diagonalization, falling back to
/// expm_pade when the eigenvector basis is ill-conditioned (degenerate spectrum).
Mat3 expm_skew_hermitian(const Mat3& m);

} // namespace fbrk
