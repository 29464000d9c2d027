#pragma once

#include <Eigen/Dense>

#include <span>

namespace esplab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Largest eigenvalue modulus of a square matrix. Complex conjugate pairs are
/// handled through their modulus. Throws std::invalid_argument for non-square
/// or non-finite input.
double spectral_radius(const Matrix& m);

/// Largest singular value.
double spectral_norm(const Matrix& m);

/// Euclidean distance accumulated strictly left to right, so the result is
/// independent of memory alignment and vectorization.
double euclidean_distance(std::span<const double> a, std::span<const double> b);

bool all_finite(const Matrix& m) noexcept;

} // namespace esplab
