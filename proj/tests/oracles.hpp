#pragma once

// Brute-force reference computations used only by the tests. Nothing here
// calls into Eigen's eigen/SVD solvers, so agreement with the library is a
// real cross-check.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace esplab::oracle {

using cld = std::complex<long double>;

/// Characteristic polynomial coefficients c[0..n] (c[n] = 1) of a square
/// matrix by the Faddeev-LeVerrier recursion in long double.
inline std::vector<long double> characteristic_polynomial(const Eigen::MatrixXd& a)
{
    const auto n = static_cast<std::size_t>(a.rows());
    using M = std::vector<std::vector<long double>>;
    M A(n, std::vector<long double>(n)), Mk(n, std::vector<long double>(n, 0.0L));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            A[i][j] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

    std::vector<long double> c(n + 1, 0.0L);
    c[n] = 1.0L;
    for (std::size_t k = 1; k <= n; ++k) {
        // M_k = A M_{k-1} + c_{n-k+1} I
        M next(n, std::vector<long double>(n, 0.0L));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                long double s = 0.0L;
                for (std::size_t l = 0; l < n; ++l)
                    s += A[i][l] * Mk[l][j];
                next[i][j] = s + (i == j ? c[n - k + 1] : 0.0L);
            }
        Mk = std::move(next);
        long double tr = 0.0L;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l)
                tr += A[i][l] * Mk[l][i];
        c[n - k] = -tr / static_cast<long double>(k);
    }
    return c;
}

inline cld horner(const std::vector<long double>& c, cld z)
{
    cld v = 0.0L;
    for (std::size_t k = c.size(); k-- > 0;)
        v = v * z + c[k];
    return v;
}

/// All roots of the monic polynomial c by Durand-Kerner iteration followed
/// by Newton polishing.
inline std::vector<cld> polynomial_roots(const std::vector<long double>& c)
{
    const std::size_t n = c.size() - 1;
    if (n == 0)
        return {};
    long double bound = 0.0L; // Cauchy bound
    for (std::size_t k = 0; k < n; ++k)
        bound = std::max(bound, std::abs(c[k]));
    bound += 1.0L;

    std::vector<cld> z(n);
    const cld seed{0.4L, 0.9L};
    for (std::size_t i = 0; i < n; ++i)
        z[i] = std::pow(seed, static_cast<long double>(i)) * (bound / 2.0L);

    for (int it = 0; it < 5000; ++it) {
        long double change = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            cld denom = 1.0L;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i)
                    denom *= (z[i] - z[j]);
            if (std::abs(denom) == 0.0L)
                denom = 1e-30L;
            const cld step = horner(c, z[i]) / denom;
            z[i] -= step;
            change = std::max(change, std::abs(step));
        }
        if (change < 1e-17L * bound)
            break;
    }

    std::vector<long double> dc(n);
    for (std::size_t k = 1; k <= n; ++k)
        dc[k - 1] = c[k] * static_cast<long double>(k);
    for (auto& r : z)
        for (int it = 0; it < 5; ++it) {
            const cld d = horner(dc, r);
            if (std::abs(d) == 0.0L)
                break;
            r -= horner(c, r) / d;
        }
    return z;
}

inline double spectral_radius(const Eigen::MatrixXd& a)
{
    long double r = 0.0L;
    for (const auto& z : polynomial_roots(characteristic_polynomial(a)))
        r = std::max(r, std::abs(z));
    return static_cast<double>(r);
}

/// sqrt of the largest root of det(M^T M - s I).
inline double spectral_norm(const Eigen::MatrixXd& m)
{
    const Eigen::MatrixXd g = m.transpose() * m;
    long double top = 0.0L;
    for (const auto& z : polynomial_roots(characteristic_polynomial(g)))
        top = std::max(top, z.real());
    return static_cast<double>(std::sqrt(std::max(top, 0.0L)));
}

/// Largest singular value of a 2x2 matrix in closed form.
inline double spectral_norm_2x2(double a, double b, double c, double d)
{
    const double fro2 = a * a + b * b + c * c + d * d;
    const double det = a * d - b * c;
    return std::sqrt((fro2 + std::sqrt(std::max(0.0, fro2 * fro2 - 4.0 * det * det))) / 2.0);
}

/// Positive fixed point of x = tanh(gain * x) for gain > 1.
inline double tanh_fixed_point(double gain)
{
    double x = 1.0;
    for (int it = 0; it < 100000; ++it) {
        const double next = std::tanh(gain * x);
        if (std::abs(next - x) < 1e-15)
            return next;
        x = next;
    }
    return x;
}

/// Solve A x = b by Gaussian elimination with partial pivoting in long double.
inline std::vector<long double> solve_linear(std::vector<std::vector<long double>> a, std::vector<long double> b)
{
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k]))
                piv = i;
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const long double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j)
                a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<long double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        long double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j)
            s -= a[k][j] * x[j];
        x[k] = s / a[k][k];
    }
    return x;
}

/// Ridge weights for a single target column from the normal equations,
/// accumulated and solved in long double.
inline std::vector<long double> ridge_weights(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, long double lambda)
{
    const auto n = static_cast<std::size_t>(x.cols());
    std::vector<std::vector<long double>> g(n, std::vector<long double>(n, 0.0L));
    std::vector<long double> r(n, 0.0L);
    for (Eigen::Index t = 0; t < x.rows(); ++t)
        for (std::size_t i = 0; i < n; ++i) {
            const long double xi = x(t, static_cast<Eigen::Index>(i));
            r[i] += xi * y[t];
            for (std::size_t j = 0; j < n; ++j)
                g[i][j] += xi * x(t, static_cast<Eigen::Index>(j));
        }
    for (std::size_t i = 0; i < n; ++i)
        g[i][i] += lambda;
    return solve_linear(std::move(g), std::move(r));
}

} // namespace esplab::oracle
