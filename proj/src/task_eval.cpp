#include "esplab/task_eval.hpp"

namespace esplab {

namespace {

Matrix to_matrix(const RowMatrix& m)
{
    return Matrix(m);
}

} // namespace

RegressionProblem harvest_training(const ReservoirParams& p, const NextStepTask& task, State* final_state)
{
    const Orbit orbit = run_orbit(p, State::Zero(static_cast<Eigen::Index>(p.n_r())), task.train_inputs);
    const auto n = static_cast<Eigen::Index>(task.train_inputs.length());
    const auto washout = static_cast<Eigen::Index>(task.washout);
    if (washout >= n)
        throw std::invalid_argument("washout leaves no training rows");

    // Orbit row t + 1 is the state after input t.
    RegressionProblem prob;
    prob.states = to_matrix(orbit.states().middleRows(washout + 1, n - washout));
    prob.targets = to_matrix(task.train_targets.steps().middleRows(washout, n - washout));
    if (final_state)
        *final_state = orbit.state_vector(orbit.length() - 1);
    return prob;
}

TrainEvalResult train_and_evaluate(const ReservoirParams& p, const NextStepTask& task, const TrainEvalOptions& opts)
{
    State last;
    const RegressionProblem train = harvest_training(p, task, &last);
    const double lambda = select_lambda(train, opts.lambda_grid, opts.val_fraction);

    TrainEvalResult r;
    r.weights = ridge_fit(train, lambda);
    r.train_mse = mse(predict(r.weights, train.states), train.targets);

    if (task.test_inputs.length() == 0)
        throw std::invalid_argument("task has an empty test split");
    const Orbit test_orbit = run_orbit(p, last, task.test_inputs);
    const auto m = static_cast<Eigen::Index>(task.test_inputs.length());
    const Matrix test_states = to_matrix(test_orbit.states().bottomRows(m));
    r.test_mse = mse(predict(r.weights, test_states), to_matrix(task.test_targets.steps()));
    return r;
}

} // namespace esplab
