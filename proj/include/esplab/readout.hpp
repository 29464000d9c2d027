#pragma once

#include "esplab/linalg.hpp"

#include <span>
#include <vector>

namespace esplab {

/// Harvested states (one row per retained time step) and aligned targets.
struct RegressionProblem {
    Matrix states;
    Matrix targets;

    /// Throws std::invalid_argument on row mismatch, empty input or non-finite values.
    void validate() const;
};

struct ReadoutWeights {
    Matrix w_out; ///< N_Y x N_R
    double lambda = 0.0;
};

/// Default ridge grid: 1e-8, 1e-7, ..., 1e2.
std::vector<double> default_lambda_grid();

/// Ridge regression: solves (X^T X + lambda I) w = X^T y.
/// lambda > 0 uses an LDLT factorisation plus one step of iterative
/// refinement. lambda == 0 uses a complete orthogonal decomposition of X,
/// which returns the minimum-norm least-squares solution when X is rank
/// deficient.
ReadoutWeights ridge_fit(const RegressionProblem& prob, double lambda);

/// Chronological hold-out selection: the last floor(rows * val_fraction)
/// rows validate, the rest train. Returns the grid value with the lowest
/// validation MSE; ties go to the larger lambda.
double select_lambda(const RegressionProblem& prob, std::span<const double> grid, double val_fraction);

/// Row-wise y = W_out x.
Matrix predict(const ReadoutWeights& wts, const Matrix& states);

/// Mean squared error over all entries.
double mse(const Matrix& pred, const Matrix& target);

/// log10 of mse(); returns -infinity when the error is exactly zero.
double log10_mse(const Matrix& pred, const Matrix& target);

} // namespace esplab
