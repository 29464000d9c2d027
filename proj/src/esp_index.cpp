#include "esplab/esp_index.hpp"

#include "esplab/parallel.hpp"
#include "esplab/rng.hpp"

#include <string>

namespace esplab {

void EspIndexConfig::validate() const
{
    if (p_trials == 0)
        throw std::invalid_argument("ESP index needs at least one trial");
    if (horizon == 0)
        throw std::invalid_argument("ESP index horizon must be positive");
    if (transient >= horizon)
        throw std::invalid_argument("ESP index transient (" + std::to_string(transient) +
                                    ") must be smaller than the horizon (" + std::to_string(horizon) + ")");
}

OrbitDeviation orbit_deviation(const Orbit& reference, const Orbit& trial, std::size_t transient)
{
    if (reference.length() != trial.length() || reference.dim() != trial.dim())
        throw std::invalid_argument("orbit_deviation: orbits differ in shape");
    if (reference.length() < 2 || transient >= reference.length() - 1)
        throw std::invalid_argument("orbit_deviation: transient " + std::to_string(transient) +
                                    " leaves no retained steps in an orbit of length " +
                                    std::to_string(reference.length()));

    OrbitDeviation out;
    const std::size_t last = reference.length() - 1;
    out.delta.reserve(last - transient);
    double sum = 0.0;
    for (std::size_t t = transient + 1; t <= last; ++t) {
        const double d = euclidean_distance(reference.state(t), trial.state(t));
        out.delta.push_back(d);
        sum += d;
    }
    out.mean = sum / static_cast<double>(out.delta.size());
    return out;
}

State trial_initial_state(std::size_t n_r, std::uint64_t seed, std::size_t trial_index)
{
    SplitMix64 rng{derive_seed(seed, {trial_index})};
    State z(static_cast<Eigen::Index>(n_r));
    for (Eigen::Index i = 0; i < z.size(); ++i)
        z[i] = rng.uniform_open_pm1();
    return z;
}

EspIndexResult esp_index(const ReservoirParams& p, const Signal& s, const EspIndexConfig& cfg, unsigned threads)
{
    cfg.validate();
    if (s.length() < cfg.horizon)
        throw std::invalid_argument("ESP index horizon " + std::to_string(cfg.horizon) +
                                    " exceeds signal length " + std::to_string(s.length()));
    if (s.dim() != p.n_u())
        throw std::invalid_argument("signal dimension does not match the reservoir input dimension");

    const Signal drive = s.slice(0, cfg.horizon);
    const Orbit reference = run_orbit(p, State::Zero(static_cast<Eigen::Index>(p.n_r())), drive);

    std::vector<OrbitDeviation> trials(cfg.p_trials);
    parallel_for(cfg.p_trials, threads, [&](std::size_t i) {
        const Orbit trial = run_orbit(p, trial_initial_state(p.n_r(), cfg.seed, i), drive);
        trials[i] = orbit_deviation(reference, trial, cfg.transient);
    });

    EspIndexResult result;
    result.per_trial.reserve(cfg.p_trials);
    double sum = 0.0;
    for (const auto& t : trials) {
        result.per_trial.push_back(t.mean);
        sum += t.mean;
    }
    result.index = sum / static_cast<double>(cfg.p_trials);

    if (cfg.keep_per_step) {
        const auto steps = static_cast<Eigen::Index>(cfg.horizon - cfg.transient);
        Matrix per_step(static_cast<Eigen::Index>(cfg.p_trials), steps);
        for (std::size_t i = 0; i < trials.size(); ++i)
            for (Eigen::Index j = 0; j < steps; ++j)
                per_step(static_cast<Eigen::Index>(i), j) = trials[i].delta[static_cast<std::size_t>(j)];
        result.per_step = std::move(per_step);
    }
    return result;
}

bool is_esp_empirical(const EspIndexResult& r, double tol)
{
    return r.index <= tol;
}

} // namespace esplab
