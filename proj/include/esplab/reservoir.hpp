#pragma once

#include "esplab/linalg.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace esplab {

/// Raised when a random draw cannot be rescaled to the requested spectral
/// radius (the raw recurrent matrix has spectral radius zero).
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A finite real-valued multivariate time series. Row t holds u(t + 1).
class Signal {
public:
    Signal() = default;

    /// Throws std::invalid_argument if `steps` has zero columns or non-finite values.
    explicit Signal(RowMatrix steps);

    static Signal univariate(std::span<const double> values);

    std::size_t length() const noexcept { return static_cast<std::size_t>(steps_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(steps_.cols()); }
    bool empty() const noexcept { return steps_.rows() == 0; }

    /// Input vector at zero-based step t.
    auto at(std::size_t t) const { return steps_.row(static_cast<Eigen::Index>(t)); }
    const RowMatrix& steps() const noexcept { return steps_; }

    /// Contiguous steps [first, first + count).
    Signal slice(std::size_t first, std::size_t count) const;

    bool operator==(const Signal& other) const;

private:
    RowMatrix steps_;
};

using State = Vector;

/// States x(0), x(1), ..., x(L) stored one per row.
class Orbit {
public:
    explicit Orbit(RowMatrix states) : states_{std::move(states)} {}

    std::size_t length() const noexcept { return static_cast<std::size_t>(states_.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(states_.cols()); }

    std::span<const double> state(std::size_t t) const
    {
        return {states_.data() + t * dim(), dim()};
    }
    State state_vector(std::size_t t) const { return states_.row(static_cast<Eigen::Index>(t)).transpose(); }
    const RowMatrix& states() const noexcept { return states_; }

private:
    RowMatrix states_;
};

/// Frozen reservoir weights and the hyper-parameters they were drawn with.
class ReservoirParams {
public:
    /// Wrap explicit matrices. target_rho and input_scale are measured from
    /// the matrices (spectral radius of w, largest |w_in| entry); seed is 0.
    static ReservoirParams from_matrices(Matrix w, Matrix w_in);

    std::size_t n_r() const noexcept { return static_cast<std::size_t>(w_.rows()); }
    std::size_t n_u() const noexcept { return static_cast<std::size_t>(w_in_.cols()); }
    const Matrix& w() const noexcept { return w_; }
    const Matrix& w_in() const noexcept { return w_in_; }
    double target_rho() const noexcept { return target_rho_; }
    double input_scale() const noexcept { return input_scale_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    friend ReservoirParams init_reservoir(std::size_t, std::size_t, double, double, std::uint64_t);

    ReservoirParams(Matrix w, Matrix w_in, double target_rho, double input_scale, std::uint64_t seed);

    Matrix w_;
    Matrix w_in_;
    double target_rho_ = 0.0;
    double input_scale_ = 0.0;
    std::uint64_t seed_ = 0;
};

/// Multiply w so that its spectral radius becomes target_rho. Throws
/// ConstructionError if w has spectral radius 0 and target_rho > 0.
Matrix rescale_to_spectral_radius(Matrix w, double target_rho);

/// Draw W and W_in i.i.d. uniform on [-1, 1] from SplitMix64(seed), W first
/// in row-major order, then W_in in row-major order. W is rescaled so that
/// its spectral radius equals target_rho; W_in is multiplied by input_scale.
///
/// Throws ConstructionError when the raw W has spectral radius 0 and
/// target_rho > 0. No automatic re-draw.
ReservoirParams init_reservoir(std::size_t n_r, std::size_t n_u, double target_rho, double input_scale,
                               std::uint64_t seed);

/// x' = tanh(W x + W_in u).
State step(const ReservoirParams& p, const State& x, const Vector& u);

/// Iterate the state map over every step of `s` starting from x0.
Orbit run_orbit(const ReservoirParams& p, const State& x0, const Signal& s);

/// Same as run_orbit but only keeps the final state.
State run_final_state(const ReservoirParams& p, const State& x0, const Signal& s);

} // namespace esplab
