#pragma once

#include "esplab/reservoir.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace esplab {

enum class SchurStatus { certified, unknown };

std::string_view to_string(SchurStatus s) noexcept;
/// Throws std::invalid_argument for anything other than "certified" or "unknown".
SchurStatus parse_schur_status(std::string_view s);

/// spectral_radius(w) < 1, strictly.
bool necessary_condition(const Matrix& w);

struct SchurSearchOptions {
    int max_iters = 500;
    double eps = 1e-6;
};

struct SchurCertificate {
    SchurStatus status = SchurStatus::unknown;
    /// Positive diagonal of D, present only when certified.
    std::optional<Vector> d;
    /// Smallest ||D W D^-1||_2 reached by the search (verified by SVD).
    double best_norm = 0.0;
};

/// ||D W D^-1||_2 for the positive diagonal d.
double scaled_norm(const Matrix& w, const Vector& d);

/// One-sided search for a positive diagonal D with ||D W D^-1||_2 <= 1 - eps.
///
/// Starts are the identity and the Perron balancing of |W| (D = sqrt(y / x)
/// for the right and left Perron vectors x, y), each run with step sizes
/// 1, 1/10 and 1/100. A run takes multiplicative steps
/// d_k <- d_k * exp(-step * (u_k^2 - v_k^2)), where u, v are the leading
/// singular vectors of D W D^-1; this is the gradient of the norm in log d.
/// Matrices with spectral radius >= 1 are rejected without searching, since
/// the norm of any similarity transform bounds the spectral radius.
///
/// "unknown" does not prove that no certificate exists.
SchurCertificate schur_certificate_search(const Matrix& w, const SchurSearchOptions& opts = {});

struct InputConditionReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    std::vector<double> c_series;
};

/// Finite-horizon input-driven sufficient condition over u(1) .. u(horizon):
///   C(t) = min_i |(W_in u(t))_i|
///   lhs  = (1 / horizon) * sum_t (C(t) - (1 + ln 2)) * [C(t) >= 2]
///   rhs  = ln(||W||_2) / 2
/// and holds iff lhs > rhs.
InputConditionReport input_dependent_sufficient(const ReservoirParams& p, const Signal& s, std::size_t horizon);

struct ConditionReport {
    bool necessary_holds = false;
    SchurCertificate schur;
    InputConditionReport input;

    bool sufficient_holds() const noexcept
    {
        return schur.status == SchurStatus::certified || input.holds;
    }
};

ConditionReport evaluate_conditions(const ReservoirParams& p, const Signal& s, std::size_t horizon,
                                    const SchurSearchOptions& opts = {});

} // namespace esplab
