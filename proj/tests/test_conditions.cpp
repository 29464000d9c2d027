#include "esplab/conditions.hpp"

#include "oracles.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

using namespace esplab;
using namespace esplab::testing;

namespace {

Matrix mat2(double a, double b, double c, double d)
{
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

// Minimum over a log grid of r = d1 / d2 of ||diag(r, 1) W diag(1/r, 1)||_2.
double grid_scan_min_scaled_norm(const Matrix& w)
{
    double best = std::numeric_limits<double>::infinity();
    for (int k = -4000; k <= 4000; ++k) {
        const double r = std::pow(10.0, k / 1000.0);
        best = std::min(best, oracle::spectral_norm_2x2(w(0, 0), w(0, 1) * r, w(1, 0) / r, w(1, 1)));
    }
    return best;
}

} // namespace

TEST(SpectralNorm, MatchesOracle)
{
    EXPECT_DOUBLE_EQ(spectral_norm(Matrix::Identity(4, 4)), 1.0);
    EXPECT_NEAR(spectral_norm(mat2(3, 0, 0, -2)), 3.0, 1e-14);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto n = static_cast<Eigen::Index>(2 + seed % 5);
        const Matrix m = random_matrix(n, n, 500 + seed, 2.0);
        EXPECT_NEAR(spectral_norm(m), oracle::spectral_norm(m), 1e-9) << seed;
    }
}

TEST(NecessaryCondition, StrictInequality)
{
    EXPECT_TRUE(necessary_condition(mat2(0.5, 0, 0, -0.9)));
    EXPECT_FALSE(necessary_condition(mat2(1.0, 0, 0, 0.2)));
    EXPECT_FALSE(necessary_condition(init_reservoir(20, 1, 1.2, 1.0, 3).w()));
    EXPECT_TRUE(necessary_condition(init_reservoir(20, 1, 0.95, 1.0, 3).w()));
}

TEST(SchurStatus, RoundTrip)
{
    EXPECT_EQ(parse_schur_status(to_string(SchurStatus::certified)), SchurStatus::certified);
    EXPECT_EQ(parse_schur_status(to_string(SchurStatus::unknown)), SchurStatus::unknown);
    EXPECT_THROW(parse_schur_status("maybe"), std::invalid_argument);
}

TEST(SchurSearch, IdentityDiagonalWhenNormAlreadySmall)
{
    Matrix w = random_matrix(6, 6, 42);
    w *= 0.5 / oracle::spectral_norm(w);
    const SchurCertificate c = schur_certificate_search(w);
    ASSERT_EQ(c.status, SchurStatus::certified);
    ASSERT_TRUE(c.d.has_value());
    EXPECT_EQ(*c.d, Vector::Ones(6));
    EXPECT_NEAR(c.best_norm, 0.5, 1e-12);
}

TEST(SchurSearch, SkewedTwoByTwoNeedsScaling)
{
    // ||W|| = 4 but diag scaling reaches sqrt(0.4).
    const Matrix w = mat2(0, 4, 0.1, 0);
    const double scan = grid_scan_min_scaled_norm(w);
    EXPECT_NEAR(scan, std::sqrt(0.4), 1e-3);

    const SchurCertificate c = schur_certificate_search(w);
    ASSERT_EQ(c.status, SchurStatus::certified);
    const Vector& d = *c.d;
    const double r = d[0] / d[1];
    const double oracle_norm = oracle::spectral_norm_2x2(0, 4 * r, 0.1 / r, 0);
    EXPECT_LT(oracle_norm, 1.0 - 1e-6);
    EXPECT_NEAR(oracle_norm, c.best_norm, 1e-12);
    EXPECT_NEAR(scaled_norm(w, d), oracle_norm, 1e-12);
}

TEST(SchurSearch, TriangularWithLargeCoupling)
{
    // Spectral radius 0.5, norm about 100; scaling the off-diagonal away certifies.
    const Matrix w = mat2(0.5, 100, 0, 0.5);
    const SchurCertificate c = schur_certificate_search(w);
    ASSERT_EQ(c.status, SchurStatus::certified);
    const double r = (*c.d)[0] / (*c.d)[1];
    EXPECT_LT(oracle::spectral_norm_2x2(0.5, 100 * r, 0, 0.5), 1.0);
}

TEST(SchurSearch, UnknownWhenSpectralRadiusAtLeastOne)
{
    for (double rho : {1.0, 1.2, 3.0}) {
        const SchurCertificate c = schur_certificate_search(init_reservoir(10, 1, rho, 1.0, 5).w());
        EXPECT_EQ(c.status, SchurStatus::unknown) << rho;
        EXPECT_FALSE(c.d.has_value());
        EXPECT_GE(c.best_norm, rho - 1e-9);
    }
}

TEST(SchurSearch, RejectsBadInput)
{
    EXPECT_THROW(schur_certificate_search(Matrix::Zero(2, 3)), std::invalid_argument);
    Matrix w = Matrix::Zero(2, 2);
    w(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(schur_certificate_search(w), std::invalid_argument);
    EXPECT_THROW(scaled_norm(Matrix::Identity(2, 2), Vector::Constant(2, -1.0)), std::invalid_argument);
    EXPECT_THROW(scaled_norm(Matrix::Identity(2, 2), Vector::Ones(3)), std::invalid_argument);
}

// Property: every certificate is a genuine contraction under an independent
// norm computation, and a certificate implies the necessary condition.
TEST(SchurSearchProperty, CertificatesAreSound)
{
    int certified = 0;
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
        const double rho = 0.3 + 0.03 * static_cast<double>(seed);
        const Matrix w = init_reservoir(8, 1, rho, 1.0, 900 + seed).w();
        const SchurCertificate c = schur_certificate_search(w);
        if (c.status != SchurStatus::certified) {
            EXPECT_FALSE(c.d.has_value());
            continue;
        }
        ++certified;
        const Vector& d = *c.d;
        EXPECT_TRUE((d.array() > 0.0).all());
        const Matrix m = d.asDiagonal() * w * d.cwiseInverse().asDiagonal();
        EXPECT_LT(oracle::spectral_norm(m), 1.0) << seed;
        EXPECT_TRUE(necessary_condition(w));
        EXPECT_LT(oracle::spectral_radius(w), 1.0);
    }
    EXPECT_GT(certified, 0);
}

TEST(InputCondition, ScalarConstantDrive)
{
    const ReservoirParams p = scalar_reservoir(0.5, 5.0);
    const InputConditionReport r = input_dependent_sufficient(p, constant_signal(10, 1.0), 10);
    EXPECT_NEAR(r.lhs, 5.0 - (1.0 + std::numbers::ln2), 1e-15);
    EXPECT_NEAR(r.lhs, 3.3069, 1e-4);
    EXPECT_NEAR(r.rhs, std::log(0.5) / 2.0, 1e-15);
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(r.c_series, std::vector<double>(10, 5.0));
}

TEST(InputCondition, ThresholdAtTwo)
{
    // |5 u| = 1.9 contributes nothing, |5 u| = 2 contributes 1 - ln 2.
    RowMatrix u(2, 1);
    u << 0.38, -0.4;
    const ReservoirParams p = scalar_reservoir(2.0, 5.0);
    const InputConditionReport r = input_dependent_sufficient(p, Signal{u}, 2);
    EXPECT_NEAR(r.lhs, (2.0 - 1.0 - std::numbers::ln2) / 2.0, 1e-15);
    EXPECT_NEAR(r.rhs, std::log(2.0) / 2.0, 1e-15);
    EXPECT_FALSE(r.holds);
}

TEST(InputCondition, ZeroInputRowGivesZeroLhs)
{
    Matrix w_in = Matrix::Constant(4, 1, 10.0);
    w_in(2, 0) = 0.0;
    const ReservoirParams p = ReservoirParams::from_matrices(random_matrix(4, 4, 1), w_in);
    const InputConditionReport r = input_dependent_sufficient(p, noise_signal(50, 1, 2), 50);
    EXPECT_EQ(r.lhs, 0.0);
}

TEST(InputCondition, ZeroRecurrentMatrixAlwaysHolds)
{
    const ReservoirParams p = ReservoirParams::from_matrices(Matrix::Zero(3, 3), random_matrix(3, 1, 4));
    const InputConditionReport r = input_dependent_sufficient(p, zero_signal(5, 1), 5);
    EXPECT_EQ(r.rhs, -std::numeric_limits<double>::infinity());
    EXPECT_TRUE(r.holds);
}

TEST(InputCondition, LhsIgnoresTimeOrder)
{
    Matrix w_in(3, 1);
    w_in << 20.0, -15.0, 25.0;
    const ReservoirParams p = ReservoirParams::from_matrices(init_reservoir(3, 1, 1.5, 1.0, 3).w(), w_in);
    const Signal s = noise_signal(200, 1, 3);
    RowMatrix reversed = s.steps().colwise().reverse();
    const InputConditionReport a = input_dependent_sufficient(p, s, 200);
    const InputConditionReport b = input_dependent_sufficient(p, Signal{reversed}, 200);
    EXPECT_NEAR(a.lhs, b.lhs, 1e-12);
    EXPECT_GT(a.lhs, 0.0);
}

TEST(InputCondition, ArgumentErrors)
{
    const ReservoirParams p = init_reservoir(4, 1, 0.5, 1.0, 1);
    EXPECT_THROW(input_dependent_sufficient(p, zero_signal(5, 1), 0), std::invalid_argument);
    EXPECT_THROW(input_dependent_sufficient(p, zero_signal(5, 1), 6), std::invalid_argument);
    EXPECT_THROW(input_dependent_sufficient(p, zero_signal(5, 2), 5), std::invalid_argument);
}

// Property: with u = 0 the input condition reduces to ||W||_2 < 1.
TEST(InputConditionProperty, ZeroInputReducesToNormBelowOne)
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const double norm = 0.7 + 0.02 * static_cast<double>(seed);
        if (std::abs(norm - 1.0) < 1e-6)
            continue;
        const ReservoirParams p = contractive_reservoir(12, 1, norm, 40 + seed, 3.0);
        const InputConditionReport r = input_dependent_sufficient(p, zero_signal(20, 1), 20);
        EXPECT_EQ(r.lhs, 0.0);
        EXPECT_EQ(r.holds, norm < 1.0) << "norm " << norm;
    }
}

TEST(EvaluateConditions, CombinesTheThreeChecks)
{
    const ReservoirParams stable = contractive_reservoir(10, 1, 0.6, 8);
    const ConditionReport a = evaluate_conditions(stable, noise_signal(50, 1, 1), 50);
    EXPECT_TRUE(a.necessary_holds);
    EXPECT_EQ(a.schur.status, SchurStatus::certified);
    EXPECT_TRUE(a.sufficient_holds());

    const ReservoirParams unstable = init_reservoir(10, 1, 2.0, 0.1, 8);
    const ConditionReport b = evaluate_conditions(unstable, noise_signal(50, 1, 1), 50);
    EXPECT_FALSE(b.necessary_holds);
    EXPECT_EQ(b.schur.status, SchurStatus::unknown);
    EXPECT_FALSE(b.input.holds);
    EXPECT_FALSE(b.sufficient_holds());

    // A large constant drive satisfies the input condition despite rho > 1.
    const ReservoirParams driven = ReservoirParams::from_matrices(init_reservoir(5, 1, 1.5, 1.0, 2).w(),
                                                                  Matrix::Constant(5, 1, 30.0));
    const ConditionReport c = evaluate_conditions(driven, constant_signal(20, 1.0), 20);
    EXPECT_FALSE(c.necessary_holds);
    EXPECT_TRUE(c.input.holds);
    EXPECT_TRUE(c.sufficient_holds());
}
