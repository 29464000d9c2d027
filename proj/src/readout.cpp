#include "esplab/readout.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace esplab {

void RegressionProblem::validate() const
{
    if (states.rows() == 0 || states.cols() == 0)
        throw std::invalid_argument("regression problem has no rows or no features");
    if (targets.rows() != states.rows())
        throw std::invalid_argument("regression problem: " + std::to_string(states.rows()) + " state rows but " +
                                    std::to_string(targets.rows()) + " target rows");
    if (targets.cols() == 0)
        throw std::invalid_argument("regression problem has no target columns");
    if (!states.allFinite() || !targets.allFinite())
        throw std::invalid_argument("regression problem contains non-finite values");
}

std::vector<double> default_lambda_grid()
{
    std::vector<double> grid;
    for (int e = -8; e <= 2; ++e)
        grid.push_back(std::pow(10.0, e));
    return grid;
}

namespace {

// Solve (G + lambda I) W = R for lambda > 0, refining once against the
// unfactored system.
Matrix solve_regularised(const Matrix& gram, const Matrix& rhs, double lambda)
{
    Matrix a = gram;
    a.diagonal().array() += lambda;
    Eigen::LDLT<Matrix> ldlt(a);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("ridge_fit: factorisation failed");
    Matrix w = ldlt.solve(rhs);
    const Matrix residual = rhs - a * w;
    w += ldlt.solve(residual);
    return w;
}

void check_lambda(double lambda)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("ridge coefficient must be finite and nonnegative");
}

} // namespace

ReadoutWeights ridge_fit(const RegressionProblem& prob, double lambda)
{
    prob.validate();
    check_lambda(lambda);
    Matrix w; // N_R x N_Y
    if (lambda == 0.0) {
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(prob.states);
        w = cod.solve(prob.targets);
    } else {
        const Matrix gram = prob.states.transpose() * prob.states;
        const Matrix rhs = prob.states.transpose() * prob.targets;
        w = solve_regularised(gram, rhs, lambda);
    }
    return {w.transpose(), lambda};
}

double select_lambda(const RegressionProblem& prob, std::span<const double> grid, double val_fraction)
{
    prob.validate();
    if (grid.empty())
        throw std::invalid_argument("select_lambda: empty grid");
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw std::invalid_argument("select_lambda: validation fraction must lie in (0, 1)");
    for (double l : grid)
        check_lambda(l);

    const Eigen::Index rows = prob.states.rows();
    const auto n_val = static_cast<Eigen::Index>(std::floor(static_cast<double>(rows) * val_fraction));
    const Eigen::Index n_fit = rows - n_val;
    if (n_val < 1 || n_fit < 1)
        throw std::invalid_argument("select_lambda: " + std::to_string(rows) +
                                    " rows cannot be split into non-empty fit and validation parts");

    const RegressionProblem head{prob.states.topRows(n_fit), prob.targets.topRows(n_fit)};
    const Matrix val_states = prob.states.bottomRows(n_val);
    const Matrix val_targets = prob.targets.bottomRows(n_val);
    const Matrix gram = head.states.transpose() * head.states;
    const Matrix rhs = head.states.transpose() * head.targets;

    double best_lambda = grid.front();
    double best_mse = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
        ReadoutWeights wts = lambda == 0.0 ? ridge_fit(head, 0.0)
                                           : ReadoutWeights{solve_regularised(gram, rhs, lambda).transpose(), lambda};
        double err = mse(predict(wts, val_states), val_targets);
        if (!std::isfinite(err))
            err = std::numeric_limits<double>::infinity();
        if (err < best_mse || (err == best_mse && lambda > best_lambda)) {
            best_mse = err;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

Matrix predict(const ReadoutWeights& wts, const Matrix& states)
{
    if (states.cols() != wts.w_out.cols())
        throw std::invalid_argument("predict: states have " + std::to_string(states.cols()) +
                                    " columns, readout expects " + std::to_string(wts.w_out.cols()));
    return states * wts.w_out.transpose();
}

double mse(const Matrix& pred, const Matrix& target)
{
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw std::invalid_argument("mse: shape mismatch");
    if (pred.size() == 0)
        throw std::invalid_argument("mse: empty input");
    double sum = 0.0;
    for (Eigen::Index j = 0; j < pred.cols(); ++j)
        for (Eigen::Index i = 0; i < pred.rows(); ++i) {
            const double d = pred(i, j) - target(i, j);
            sum += d * d;
        }
    return sum / static_cast<double>(pred.size());
}

double log10_mse(const Matrix& pred, const Matrix& target)
{
    const double e = mse(pred, target);
    return e == 0.0 ? -std::numeric_limits<double>::infinity() : std::log10(e);
}

} // namespace esplab
