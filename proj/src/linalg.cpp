#include "esplab/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace esplab {

bool all_finite(const Matrix& m) noexcept
{
    return m.allFinite();
}

double spectral_radius(const Matrix& m)
{
    if (m.rows() != m.cols())
        throw std::invalid_argument("spectral_radius: matrix is not square");
    if (!all_finite(m))
        throw std::invalid_argument("spectral_radius: matrix has non-finite entries");
    if (m.size() == 0)
        return 0.0;
    if (m.size() == 1)
        return std::abs(m(0, 0));

    // Hessenberg reduction followed by shifted QR iteration.
    Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectral_radius: eigenvalue iteration did not converge");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix& m)
{
    if (!all_finite(m))
        throw std::invalid_argument("spectral_norm: matrix has non-finite entries");
    if (m.size() == 0)
        return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("euclidean_distance: size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

} // namespace esplab
