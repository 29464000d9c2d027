#include "esplab/conditions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace esplab {

std::string_view to_string(SchurStatus s) noexcept
{
    return s == SchurStatus::certified ? "certified" : "unknown";
}

SchurStatus parse_schur_status(std::string_view s)
{
    if (s == "certified")
        return SchurStatus::certified;
    if (s == "unknown")
        return SchurStatus::unknown;
    throw std::invalid_argument("unrecognised Schur status '" + std::string{s} + "'");
}

bool necessary_condition(const Matrix& w)
{
    return spectral_radius(w) < 1.0;
}

namespace {

Matrix similarity(const Matrix& w, const Vector& log_d)
{
    Matrix m(w.rows(), w.cols());
    for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            m(i, j) = w(i, j) * std::exp(log_d[i] - log_d[j]);
    return m;
}

struct SingularTriple {
    double sigma = 0.0;
    Vector u;
    Vector v;
};

// Leading singular triple by power iteration, warm-started from v. The
// estimate approaches sigma_max from below; certificates are re-checked by SVD.
SingularTriple leading_triple(const Matrix& m, Vector v)
{
    SingularTriple t;
    double previous = -1.0;
    for (int it = 0; it < 300; ++it) {
        t.u = m * v;
        const double su = t.u.norm();
        if (su == 0.0) {
            t.sigma = 0.0;
            t.v = v;
            return t;
        }
        t.u /= su;
        v = m.transpose() * t.u;
        t.sigma = v.norm();
        v /= t.sigma;
        if (std::abs(t.sigma - previous) <= 1e-13 * t.sigma)
            break;
        previous = t.sigma;
    }
    t.v = std::move(v);
    return t;
}

// Right Perron vector of a nonnegative matrix, nudged to be irreducible so
// the vector is strictly positive.
Vector perron_vector(const Matrix& a)
{
    const double nudge = 1e-9 * std::max(a.mean(), std::numeric_limits<double>::min());
    const Matrix shifted = a + Matrix::Constant(a.rows(), a.cols(), nudge);
    Eigen::EigenSolver<Matrix> solver(shifted, true);
    if (solver.info() != Eigen::Success)
        return Vector::Ones(a.rows());
    Eigen::Index best = 0;
    solver.eigenvalues().real().maxCoeff(&best);
    Vector x = solver.eigenvectors().col(best).real().cwiseAbs();
    const double floor = 1e-300 + 1e-12 * x.maxCoeff();
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = std::max(x[i], floor);
    return x;
}

struct RunOutcome {
    Vector log_d;
    double sigma;
};

RunOutcome descend(const Matrix& w, Vector log_d, double step, int max_iters, double target)
{
    Matrix m = similarity(w, log_d);
    SingularTriple lead = leading_triple(m, Vector::Ones(w.cols()).normalized());
    double stalled_since = lead.sigma;
    for (int it = 0; it < max_iters && lead.sigma > target; ++it) {
        const Vector grad = lead.u.cwiseAbs2() - lead.v.cwiseAbs2();
        bool accepted = false;
        while (step > 1e-10) {
            Vector trial_d = log_d - step * grad;
            Matrix trial_m = similarity(w, trial_d);
            SingularTriple trial = leading_triple(trial_m, lead.v);
            if (trial.sigma < lead.sigma) {
                log_d = std::move(trial_d);
                lead = std::move(trial);
                accepted = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            break;
        if (it % 25 == 24) {
            if (lead.sigma > stalled_since * (1.0 - 1e-9))
                break;
            stalled_since = lead.sigma;
        }
    }
    return {std::move(log_d), lead.sigma};
}

} // namespace

double scaled_norm(const Matrix& w, const Vector& d)
{
    if (d.size() != w.rows() || w.rows() != w.cols())
        throw std::invalid_argument("scaled_norm: shape mismatch");
    if ((d.array() <= 0.0).any() || !d.allFinite())
        throw std::invalid_argument("scaled_norm: D must be positive and finite");
    return spectral_norm(similarity(w, d.array().log().matrix()));
}

SchurCertificate schur_certificate_search(const Matrix& w, const SchurSearchOptions& opts)
{
    if (w.rows() != w.cols())
        throw std::invalid_argument("schur_certificate_search: matrix is not square");
    if (!w.allFinite())
        throw std::invalid_argument("schur_certificate_search: matrix has non-finite entries");

    const Eigen::Index n = w.rows();
    const double target = 1.0 - opts.eps;
    SchurCertificate out;
    out.best_norm = spectral_norm(w);
    if (out.best_norm <= target) {
        out.status = SchurStatus::certified;
        out.d = Vector::Ones(n);
        return out;
    }
    if (spectral_radius(w) >= 1.0)
        return out;

    const Matrix abs_w = w.cwiseAbs();
    const Vector right = perron_vector(abs_w);
    const Vector left = perron_vector(abs_w.transpose());
    Vector perron_log = 0.5 * (left.array().log() - right.array().log()).matrix();
    perron_log.array() -= perron_log.mean();

    const std::array<Vector, 2> starts{Vector::Zero(n), perron_log};
    const std::array<double, 3> steps{1.0, 0.1, 0.01};

    Vector best_log = Vector::Zero(n);
    double best_estimate = out.best_norm;
    for (const Vector& start : starts) {
        for (double step : steps) {
            RunOutcome run = descend(w, start, step, opts.max_iters, target);
            if (run.sigma < best_estimate) {
                best_estimate = run.sigma;
                best_log = run.log_d;
            }
            if (run.sigma <= target) {
                const double verified = spectral_norm(similarity(w, run.log_d));
                if (verified <= target) {
                    out.status = SchurStatus::certified;
                    out.d = run.log_d.array().exp().matrix();
                    out.best_norm = verified;
                    return out;
                }
            }
        }
    }
    out.best_norm = std::min(out.best_norm, spectral_norm(similarity(w, best_log)));
    return out;
}

InputConditionReport input_dependent_sufficient(const ReservoirParams& p, const Signal& s, std::size_t horizon)
{
    if (horizon == 0)
        throw std::invalid_argument("input condition horizon must be positive");
    if (horizon > s.length())
        throw std::invalid_argument("input condition horizon " + std::to_string(horizon) +
                                    " exceeds signal length " + std::to_string(s.length()));
    if (s.dim() != p.n_u())
        throw std::invalid_argument("signal dimension does not match the reservoir input dimension");

    const double offset = 1.0 + std::numbers::ln2;
    InputConditionReport r;
    r.c_series.reserve(horizon);
    Vector drive(static_cast<Eigen::Index>(p.n_r()));
    double sum = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        drive.noalias() = p.w_in() * s.at(t).transpose();
        const double c = drive.cwiseAbs().minCoeff();
        r.c_series.push_back(c);
        if (c >= 2.0)
            sum += c - offset;
    }
    r.lhs = sum / static_cast<double>(horizon);
    const double norm = spectral_norm(p.w());
    r.rhs = norm > 0.0 ? std::log(norm) / 2.0 : -std::numeric_limits<double>::infinity();
    r.holds = r.lhs > r.rhs;
    return r;
}

ConditionReport evaluate_conditions(const ReservoirParams& p, const Signal& s, std::size_t horizon,
                                    const SchurSearchOptions& opts)
{
    ConditionReport r;
    r.necessary_holds = necessary_condition(p.w());
    r.schur = schur_certificate_search(p.w(), opts);
    r.input = input_dependent_sufficient(p, s, horizon);
    return r;
}

} // namespace esplab
