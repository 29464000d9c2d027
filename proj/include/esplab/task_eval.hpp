#pragma once

#include "esplab/data.hpp"
#include "esplab/readout.hpp"
#include "esplab/reservoir.hpp"

#include <vector>

namespace esplab {

struct TrainEvalOptions {
    std::vector<double> lambda_grid = default_lambda_grid();
    double val_fraction = 0.2;
};

struct TrainEvalResult {
    ReadoutWeights weights;
    double train_mse = 0.0;
    double test_mse = 0.0;
};

/// States after each training input, with the washout rows dropped, paired
/// with the next-step targets. Also returns the final training state.
RegressionProblem harvest_training(const ReservoirParams& p, const NextStepTask& task, State* final_state = nullptr);

/// Drive the reservoir over the training inputs from the zero state, select
/// lambda on a chronological hold-out of the post-washout rows, refit on all
/// of them, then continue the same orbit through the test inputs.
TrainEvalResult train_and_evaluate(const ReservoirParams& p, const NextStepTask& task,
                                   const TrainEvalOptions& opts = {});

} // namespace esplab
