#include "fbrk/small_matrix.hpp"

#include "fbrk/errors.hpp"

#include <limits>

namespace fbrk {

template <std::size_t N>
CMatrix<N> solve(CMatrix<N> lhs, CMatrix<N> rhs) {
    for (std::size_t col = 0; col < N; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < N; ++r)
            if (std::abs(lhs(r, col)) > std::abs(lhs(pivot, col))) pivot = r;
        if (std::abs(lhs(pivot, col)) == 0.0) throw NumericalError("solve: singular matrix");
        if (pivot != col) {
            for (std::size_t j = 0; j < N; ++j) {
                std::swap(lhs(col, j), lhs(pivot, j));
                std::swap(rhs(col, j), rhs(pivot, j));
            }
        }
        for (std::size_t r = col + 1; r < N; ++r) {
            const cplx factor = lhs(r, col) / lhs(col, col);
            for (std::size_t j = col; j < N; ++j) lhs(r, j) -= factor * lhs(col, j);
            for (std::size_t j = 0; j < N; ++j) rhs(r, j) -= factor * rhs(col, j);
        }
    }
    CMatrix<N> x;
    for (std::size_t jc = 0; jc < N; ++jc) {
        for (std::size_t r = N; r-- > 0;) {
            cplx s = rhs(r, jc);
            for (std::size_t k = r + 1; k < N; ++k) s -= lhs(r, k) * x(k, jc);
            x(r, jc) = s / lhs(r, r);
        }
    }
    return x;
}

template Mat2 solve<2>(Mat2, Mat2);
template Mat3 solve<3>(Mat3, Mat3);

template <std::size_t N>
CMatrix<N> expm_pade(const CMatrix<N>& m) {
    constexpr int q = 6;
    const double norm = inf_norm(m);
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    CMatrix<N> x = m;
    x *= std::ldexp(1.0, -squarings);

    CMatrix<N> num = CMatrix<N>::identity();
    CMatrix<N> den = CMatrix<N>::identity();
    CMatrix<N> power = CMatrix<N>::identity();
    double c = 1.0;
    for (int k = 1; k <= q; ++k) {
        c *= static_cast<double>(q - k + 1) / static_cast<double>(k * (2 * q - k + 1));
        power = power * x;
        CMatrix<N> term = power;
        term *= c;
        num += term;
        if (k % 2 == 0) den += term;
        else den -= term;
    }
    CMatrix<N> e = solve(den, num);
    for (int s = 0; s < squarings; ++s) e = e * e;
    return e;
}

template Mat2 expm_pade<2>(const Mat2&);
template Mat3 expm_pade<3>(const Mat3&);

namespace {

// Characteristic polynomial lambda^3 + c2 lambda^2 + c1 lambda + c0.
struct Cubic {
    cplx c2, c1, c0;
    cplx operator()(cplx x) const { return ((x + c2) * x + c1) * x + c0; }
    cplx derivative(cplx x) const { return (3.0 * x + 2.0 * c2) * x + c1; }
};

Cubic characteristic(const Mat3& m) {
    const cplx tr = m(0, 0) + m(1, 1) + m(2, 2);
    const cplx minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) -
                        m(0, 2) * m(2, 0) + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    const cplx det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                     m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                     m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    return {-tr, minors, -det};
}

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 normalized(Vec3 v) {
    const double n = norm2(v);
    for (auto& x : v) x /= n;
    return v;
}

} // namespace

Vec3 eigenvalues(const Mat3& m) {
    // Work on the traceless part so clustered eigenvalues keep their relative accuracy.
    const cplx shift = (m(0, 0) + m(1, 1) + m(2, 2)) / 3.0;
    Mat3 b = m;
    for (std::size_t i = 0; i < 3; ++i) b(i, i) -= shift;
    const Cubic poly = characteristic(b);
    const cplx p = poly.c1;
    const cplx q = poly.c0;

    const cplx disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
    cplx w = -q / 2.0 + disc;
    if (std::abs(-q / 2.0 - disc) > std::abs(w)) w = -q / 2.0 - disc;

    Vec3 roots;
    if (std::abs(w) == 0.0) {
        roots = {cplx{}, cplx{}, cplx{}};
    } else {
        const cplx u = std::pow(w, 1.0 / 3.0);
        const cplx omega(-0.5, std::sqrt(3.0) / 2.0);
        cplx uk = u;
        for (auto& r : roots) {
            r = uk - p / (3.0 * uk);
            uk *= omega;
        }
    }

    const double scale = std::max(1e-300, inf_norm(b));
    for (auto& r : roots) {
        const cplx d = poly.derivative(r);
        if (std::abs(d) <= 1e-8 * scale * scale) continue;
        const cplx candidate = r - poly(r) / d;
        if (std::abs(poly(candidate)) < std::abs(poly(r))) r = candidate;
    }
    for (auto& r : roots) r += shift;
    return roots;
}

Vec2 eigenvalues(const Mat2& m) {
    const cplx half_tr = 0.5 * (m(0, 0) + m(1, 1));
    const cplx det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const cplx root = std::sqrt(half_tr * half_tr - det);
    return {half_tr + root, half_tr - root};
}

Vec3 eigenvector(const Mat3& m, cplx lambda) {
    std::array<Vec3, 3> rows;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) rows[i][j] = m(i, j) - (i == j ? lambda : cplx{});

    Vec3 best{};
    double best_norm = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) {
            Vec3 c = cross(rows[i], rows[j]);
            if (norm2(c) > best_norm) {
                best_norm = norm2(c);
                best = c;
            }
        }

    double row_scale = 0.0;
    for (const auto& r : rows) row_scale = std::max(row_scale, norm2(r));
    if (best_norm > 1e-12 * row_scale * row_scale && best_norm > 0.0) return normalized(best);

    // Rank <= 1: any vector bilinearly orthogonal to the dominant row works.
    if (row_scale > 0.0) {
        const Vec3* dominant = &rows[0];
        for (const auto& r : rows)
            if (norm2(r) > norm2(*dominant)) dominant = &r;
        Vec3 pick{};
        double pick_norm = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            Vec3 e{};
            e[k] = 1.0;
            Vec3 c = cross(*dominant, e);
            if (norm2(c) > pick_norm) {
                pick_norm = norm2(c);
                pick = c;
            }
        }
        return normalized(pick);
    }
    return {1.0, 0.0, 0.0};
}

Mat3 expm_skew_hermitian(const Mat3& m) {
    // m = i H with H Hermitian, so m is unitarily diagonalizable with imaginary spectrum.
    const Vec3 lambdas = eigenvalues(m);
    const double scale = std::max(1.0, inf_norm(m));

    Mat3 basis;
    for (std::size_t k = 0; k < 3; ++k) {
        Vec3 rows[3];
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) rows[i][j] = m(i, j) - (i == j ? lambdas[k] : cplx{});
        double conditioning = std::numeric_limits<double>::infinity();
        Vec3 v{};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i + 1; j < 3; ++j) {
                const Vec3 c = cross(rows[i], rows[j]);
                const double denom = norm2(rows[i]) * norm2(rows[j]);
                if (denom == 0.0 || norm2(c) == 0.0) continue;
                const double cond = denom / norm2(c);
                if (cond < conditioning) {
                    conditioning = cond;
                    v = c;
                }
            }
        if (!(conditioning < 1e6)) return expm_pade(m);
        basis.set_column(k, normalized(v));
    }

    const Mat3 gram = basis.adjoint() * basis;
    if (frobenius_norm(gram - Mat3::identity()) > 1e-10 * scale) return expm_pade(m);

    Mat3 diag;
    for (std::size_t k = 0; k < 3; ++k) diag(k, k) = std::exp(cplx(0.0, lambdas[k].imag()));
    return basis * diag * basis.adjoint();
}

} // namespace fbrk
