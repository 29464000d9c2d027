#include "esplab/reservoir.hpp"

#include "esplab/rng.hpp"

#include <cmath>
#include <string>

namespace esplab {

namespace {

// Shared kernel for every state update so that step() and run_orbit() agree
// bit for bit.
void advance(const ReservoirParams& p, const Vector& x, const Vector& u, Vector& out)
{
    out.noalias() = p.w() * x;
    out.noalias() += p.w_in() * u;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out[i] = std::tanh(out[i]);
}

void check_state(const ReservoirParams& p, const State& x)
{
    if (static_cast<std::size_t>(x.size()) != p.n_r())
        throw std::invalid_argument("state has dimension " + std::to_string(x.size()) + ", reservoir has " +
                                    std::to_string(p.n_r()));
}

void check_signal(const ReservoirParams& p, const Signal& s)
{
    if (!s.empty() && s.dim() != p.n_u())
        throw std::invalid_argument("signal has dimension " + std::to_string(s.dim()) + ", reservoir expects " +
                                    std::to_string(p.n_u()));
}

} // namespace

Signal::Signal(RowMatrix steps) : steps_{std::move(steps)}
{
    if (steps_.cols() == 0)
        throw std::invalid_argument("signal steps must have positive dimension");
    if (!steps_.allFinite())
        throw std::invalid_argument("signal contains non-finite values");
}

Signal Signal::univariate(std::span<const double> values)
{
    RowMatrix m(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i)
        m(static_cast<Eigen::Index>(i), 0) = values[i];
    return Signal{std::move(m)};
}

Signal Signal::slice(std::size_t first, std::size_t count) const
{
    if (first + count > length())
        throw std::out_of_range("signal slice [" + std::to_string(first) + ", " + std::to_string(first + count) +
                                ") exceeds length " + std::to_string(length()));
    return Signal{steps_.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count))};
}

bool Signal::operator==(const Signal& other) const
{
    return steps_.rows() == other.steps_.rows() && steps_.cols() == other.steps_.cols() &&
           steps_ == other.steps_;
}

ReservoirParams::ReservoirParams(Matrix w, Matrix w_in, double target_rho, double input_scale,
                                 std::uint64_t seed)
  : w_{std::move(w)}, w_in_{std::move(w_in)}, target_rho_{target_rho}, input_scale_{input_scale}, seed_{seed}
{
}

ReservoirParams ReservoirParams::from_matrices(Matrix w, Matrix w_in)
{
    if (w.rows() == 0 || w.rows() != w.cols())
        throw std::invalid_argument("recurrent matrix must be square and non-empty");
    if (w_in.rows() != w.rows() || w_in.cols() == 0)
        throw std::invalid_argument("input matrix must have n_r rows and at least one column");
    if (!w.allFinite() || !w_in.allFinite())
        throw std::invalid_argument("reservoir matrices must be finite");
    const double rho = spectral_radius(w);
    const double scale = w_in.cwiseAbs().maxCoeff();
    return ReservoirParams{std::move(w), std::move(w_in), rho, scale, 0};
}

Matrix rescale_to_spectral_radius(Matrix w, double target_rho)
{
    if (target_rho == 0.0) {
        w.setZero();
        return w;
    }
    const double raw_rho = spectral_radius(w);
    if (raw_rho == 0.0)
        throw ConstructionError("recurrent matrix has spectral radius 0 and cannot be rescaled");
    w *= target_rho / raw_rho;
    return w;
}

ReservoirParams init_reservoir(std::size_t n_r, std::size_t n_u, double target_rho, double input_scale,
                               std::uint64_t seed)
{
    if (n_r == 0 || n_u == 0)
        throw std::invalid_argument("init_reservoir: n_r and n_u must be positive");
    if (!(target_rho >= 0.0) || !std::isfinite(target_rho))
        throw std::invalid_argument("init_reservoir: target_rho must be finite and nonnegative");
    if (!(input_scale >= 0.0) || !std::isfinite(input_scale))
        throw std::invalid_argument("init_reservoir: input_scale must be finite and nonnegative");

    const auto rows = static_cast<Eigen::Index>(n_r);
    const auto cols = static_cast<Eigen::Index>(n_u);
    SplitMix64 rng{seed};

    Matrix w(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < rows; ++j)
            w(i, j) = rng.uniform_pm1();
    Matrix w_in(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            w_in(i, j) = rng.uniform_pm1() * input_scale;

    try {
        w = rescale_to_spectral_radius(std::move(w), target_rho);
    } catch (const ConstructionError& e) {
        throw ConstructionError(std::string{e.what()} + " (seed " + std::to_string(seed) + ")");
    }
    return ReservoirParams{std::move(w), std::move(w_in), target_rho, input_scale, seed};
}

State step(const ReservoirParams& p, const State& x, const Vector& u)
{
    check_state(p, x);
    if (static_cast<std::size_t>(u.size()) != p.n_u())
        throw std::invalid_argument("input has dimension " + std::to_string(u.size()) + ", reservoir expects " +
                                    std::to_string(p.n_u()));
    State out(x.size());
    advance(p, x, u, out);
    return out;
}

Orbit run_orbit(const ReservoirParams& p, const State& x0, const Signal& s)
{
    check_state(p, x0);
    check_signal(p, s);
    const auto n = static_cast<Eigen::Index>(p.n_r());
    RowMatrix states(static_cast<Eigen::Index>(s.length()) + 1, n);
    states.row(0) = x0.transpose();

    Vector x = x0;
    Vector next(n);
    Vector u(static_cast<Eigen::Index>(p.n_u()));
    for (std::size_t t = 0; t < s.length(); ++t) {
        u = s.at(t).transpose();
        advance(p, x, u, next);
        x.swap(next);
        states.row(static_cast<Eigen::Index>(t) + 1) = x.transpose();
    }
    return Orbit{std::move(states)};
}

State run_final_state(const ReservoirParams& p, const State& x0, const Signal& s)
{
    check_state(p, x0);
    check_signal(p, s);
    Vector x = x0;
    Vector next(x.size());
    Vector u(static_cast<Eigen::Index>(p.n_u()));
    for (std::size_t t = 0; t < s.length(); ++t) {
        u = s.at(t).transpose();
        advance(p, x, u, next);
        x.swap(next);
    }
    return x;
}

} // namespace esplab
