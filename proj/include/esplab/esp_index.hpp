#pragma once

#include "esplab/reservoir.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace esplab {

/// Default tolerance below which an index counts as zero.
inline constexpr double kDefaultEspTolerance = 1e-8;

struct EspIndexConfig {
    std::size_t p_trials = 50;  ///< random initial states
    std::size_t transient = 500;
    std::size_t horizon = 1000; ///< number of signal steps driven
    std::uint64_t seed = 0;     ///< trial i draws z_0 from SplitMix64(derive_seed(seed, {i}))
    bool keep_per_step = false;

    /// Throws std::invalid_argument unless p_trials >= 1 and transient < horizon.
    void validate() const;
};

struct EspIndexResult {
    double index = 0.0;
    std::vector<double> per_trial;
    /// Row i holds the per-step deviations of trial i, when requested.
    std::optional<Matrix> per_step;
};

struct OrbitDeviation {
    std::vector<double> delta;
    double mean = 0.0;
};

/// Euclidean distance between the two orbits at times transient+1 .. L and
/// their mean. Orbits must have equal length and transient < length - 1.
OrbitDeviation orbit_deviation(const Orbit& reference, const Orbit& trial, std::size_t transient);

/// Initial state for trial `trial_index`: uniform on (-1, 1)^n_r.
State trial_initial_state(std::size_t n_r, std::uint64_t seed, std::size_t trial_index);

/// Mean deviation of P randomly initialised orbits from the zero-start orbit,
/// after discarding `transient` steps, over the first `horizon` steps of `s`.
///
/// Trials run on up to `threads` workers; the result is bit-identical for
/// every thread count since sums are taken in trial order.
EspIndexResult esp_index(const ReservoirParams& p, const Signal& s, const EspIndexConfig& cfg,
                         unsigned threads = 1);

/// True iff r.index <= tol.
bool is_esp_empirical(const EspIndexResult& r, double tol = kDefaultEspTolerance);

} // namespace esplab
