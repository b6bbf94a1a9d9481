#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace psbrm;
using namespace testing_support;

TEST(WeightVector, Validation)
{
    EXPECT_THROW(WeightVector(Vector::Constant(3, 0.3)), ValidationError);
    Vector neg(2);
    neg << 1.5, -0.5;
    EXPECT_THROW(WeightVector{neg}, ValidationError);
    Vector zero(2);
    zero << 1.0, 0.0;
    EXPECT_THROW(WeightVector{zero}, ValidationError);
    EXPECT_THROW(WeightVector{Vector()}, ValidationError);

    Vector w(3);
    w << 0.2, 0.5, 0.3;
    const WeightVector wv(w);
    EXPECT_DOUBLE_EQ(wv.min(), 0.2);
    EXPECT_DOUBLE_EQ(wv.max(), 0.5);
    EXPECT_FALSE(wv.is_uniform());
    EXPECT_TRUE(WeightVector::uniform(7).is_uniform());
    EXPECT_NEAR(WeightVector::uniform(7).values().sum(), 1.0, 1e-15);
}

TEST(Exponents, Validation)
{
    EXPECT_THROW(PNorm(1.0), ValidationError);
    EXPECT_THROW(PNorm(std::nan("")), ValidationError);
    EXPECT_NO_THROW(PNorm(1.0001));
    EXPECT_THROW(EvenP(3), ValidationError);
    EXPECT_THROW(EvenP(0), ValidationError);
    EXPECT_THROW(EvenP(-2), ValidationError);
    EXPECT_EQ(EvenP(80).value(), 80);
    EXPECT_DOUBLE_EQ(PNorm(EvenP(8)).value(), 8.0);
}

TEST(WeightedNorm, HandValues)
{
    const WeightVector half = WeightVector::uniform(2);
    Vector x(2);
    x << 2.0, 0.0;
    EXPECT_NEAR(weighted_lp_norm(x, PNorm(2.0), half), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(weighted_lp_norm(x, PNorm(2.0), half), 1.414214, 1e-6);
    x << 1.0, 3.0;
    EXPECT_NEAR(weighted_lp_norm(x, EvenP(4), half), std::pow(41.0, 0.25), 1e-14);
    EXPECT_NEAR(weighted_lp_norm(x, EvenP(4), half), 2.530440, 1e-6);
}

TEST(WeightedNorm, OnesVectorHasUnitNorm)
{
    Xoshiro256 rng(1);
    for (int t = 0; t < 20; ++t) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(20));
        const WeightVector w = random_weights(rng, n);
        const double p = 1.01 + 200.0 * rng.uniform();
        EXPECT_NEAR(weighted_lp_norm(Vector::Ones(n), PNorm(p), w), 1.0, 1e-13);
    }
}

TEST(WeightedNorm, MatchesDefinitionAndIsZeroOnlyAtZero)
{
    Xoshiro256 rng(2);
    for (int t = 0; t < 100; ++t) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(15));
        const WeightVector w = random_weights(rng, n);
        const double p = 1.1 + 20.0 * rng.uniform();
        const Vector x = random_vector(rng, n);
        EXPECT_NEAR(weighted_lp_norm(x, PNorm(p), w), naive_weighted_norm(x, p, w.values()),
                    1e-12 * naive_weighted_norm(x, p, w.values()));
    }
    EXPECT_EQ(weighted_lp_norm(Vector::Zero(4), PNorm(3.0), WeightVector::uniform(4)), 0.0);
}

TEST(WeightedNorm, NoOverflowOrUnderflowAtLargeExponent)
{
    const WeightVector w = WeightVector::uniform(3);
    Vector big(3);
    big << 1e300, -5e299, 1.0;
    const double nb = weighted_lp_norm(big, EvenP(320), w);
    EXPECT_TRUE(std::isfinite(nb));
    EXPECT_NEAR(nb, 1e300 * std::pow(1.0 / 3.0 + std::pow(0.5, 320) / 3.0, 1.0 / 320), 1e286);
    Vector tiny(3);
    tiny << 1e-300, 1e-301, 0.0;
    EXPECT_GT(weighted_lp_norm(tiny, EvenP(320), w), 0.0);
}

TEST(WeightedNorm, NormAxioms)
{
    Xoshiro256 rng(3);
    for (int t = 0; t < 200; ++t) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(10));
        const WeightVector w = random_weights(rng, n);
        const PNorm p(1.05 + 100.0 * rng.uniform());
        const Vector x = random_vector(rng, n);
        const Vector y = random_vector(rng, n);
        const double c = rng.uniform(-5.0, 5.0);
        const double nx = weighted_lp_norm(x, p, w);
        EXPECT_LE(weighted_lp_norm(x + y, p, w), nx + weighted_lp_norm(y, p, w) + 1e-12);
        EXPECT_NEAR(weighted_lp_norm(c * x, p, w), std::fabs(c) * nx, 1e-12 * (1.0 + std::fabs(c) * nx));
    }
}

TEST(WeightedNorm, ComparisonInequalities)
{
    Xoshiro256 rng(4);
    for (int t = 0; t < 1000; ++t) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(23));
        const WeightVector w = random_weights(rng, n);
        const double p = 1.01 + std::exp(rng.uniform(0.0, std::log(500.0)));
        const Vector x = random_vector(rng, n, std::exp(rng.uniform(-5.0, 5.0)));
        const double wp = weighted_lp_norm(x, PNorm(p), w);
        const double up = lp_norm(x, PNorm(p));
        const double inf = sup_norm(x);
        const double ip = 1.0 / p;
        const double nn = static_cast<double>(n);
        const double tol = 1e-10;
        EXPECT_GE(wp - std::pow(w.min(), ip) * inf, -tol * wp);
        EXPECT_GE(std::pow(nn * w.max(), ip) * inf - wp, -tol * wp);
        EXPECT_GE(wp - std::pow(w.min(), ip) * up, -tol * wp);
        EXPECT_GE(std::pow(w.max(), ip) * up - wp, -tol * wp);
        EXPECT_GE(up - inf, -tol * up);
        EXPECT_GE(std::pow(nn, ip) * inf - up, -tol * up);
    }
}

TEST(WeightedNorm, LengthMismatchThrows)
{
    EXPECT_THROW(weighted_lp_norm(Vector::Ones(3), PNorm(2.0), WeightVector::uniform(4)), ValidationError);
}

TEST(AuxiliaryNorms, Values)
{
    Vector x(4);
    x << 1.0, -2.0, 2.0, 0.0;
    EXPECT_DOUBLE_EQ(sup_norm(x), 2.0);
    EXPECT_NEAR(uniform_l2_norm(x), std::sqrt(9.0 / 4.0), 1e-15);
    EXPECT_NEAR(lp_norm(x, PNorm(2.0)), 3.0, 1e-15);
}

TEST(ContractionRate, Values)
{
    const WeightVector u12 = WeightVector::uniform(12);
    EXPECT_NEAR(effective_contraction_rate(0.95, PNorm(80.0), 12, u12), 0.95 * std::pow(12.0, 1.0 / 80.0), 1e-15);
    EXPECT_NEAR(effective_contraction_rate(0.95, PNorm(80.0), 12, u12), 0.979972, 1e-6);
    EXPECT_DOUBLE_EQ(effective_contraction_rate(0.8, PNorm(3.0), 1, WeightVector::uniform(1)), 0.8);
    EXPECT_NEAR(effective_contraction_rate(0.95, PNorm(1e6), 12, u12), 0.95, 1e-5);
    EXPECT_GT(effective_contraction_rate(0.95, PNorm(32.0), 12, u12), 1.0);

    Vector w(2);
    w << 0.2, 0.8;
    EXPECT_NEAR(effective_contraction_rate(0.5, PNorm(2.0), 2, WeightVector(w)), 0.5 * std::sqrt(2.0 * 4.0), 1e-15);
}

TEST(ContractionThreshold, Values)
{
    const WeightVector u12 = WeightVector::uniform(12);
    const double pbar = contraction_threshold(0.95, 12, u12);
    EXPECT_NEAR(pbar, std::log(12.0) / std::log(1.0 / 0.95), 1e-12);
    EXPECT_NEAR(pbar, 48.446, 1e-3);
    EXPECT_NEAR(contraction_threshold(0.5, 2, WeightVector::uniform(2)), 1.0, 1e-15);
    EXPECT_EQ(contraction_threshold(0.0, 12, u12), 0.0);
    EXPECT_EQ(contraction_threshold(0.9, 1, WeightVector::uniform(1)), 0.0);

    EXPECT_LT(effective_contraction_rate(0.95, PNorm(pbar + 0.01), 12, u12), 1.0);
    EXPECT_GT(effective_contraction_rate(0.95, PNorm(pbar - 0.01), 12, u12), 1.0);

    Xoshiro256 rng(5);
    for (int t = 0; t < 50; ++t) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(20));
        const WeightVector w = random_weights(rng, n);
        const double gamma = rng.uniform(0.05, 0.99);
        const double pb = contraction_threshold(gamma, n, w);
        EXPECT_LT(effective_contraction_rate(gamma, PNorm(pb * 1.001 + 1.001), n, w), 1.0);
        if (pb * 0.999 > 1.0)
            EXPECT_GT(effective_contraction_rate(gamma, PNorm(pb * 0.999), n, w), 1.0);
    }
}

TEST(QuasiOptimality, Values)
{
    const WeightVector u12 = WeightVector::uniform(12);
    const auto c80 = quasi_optimality_constant(0.95, PNorm(80.0), 12, u12);
    ASSERT_TRUE(c80.has_value());
    const double g = 0.95 * std::pow(12.0, 1.0 / 80.0);
    EXPECT_NEAR(*c80, (1.0 + g) / (1.0 - g), 1e-10);
    EXPECT_NEAR(*c80, 98.87, 0.02);
    EXPECT_FALSE(quasi_optimality_constant(0.95, PNorm(32.0), 12, u12).has_value());
    EXPECT_NEAR(limiting_quasi_optimality_constant(0.95), 39.0, 1e-9);
    EXPECT_NEAR(*quasi_optimality_constant(0.95, PNorm(1e9), 12, u12), 39.0, 1e-4);
}

TEST(QuasiOptimality, DecreasesInExponent)
{
    const WeightVector u12 = WeightVector::uniform(12);
    double prev = std::numeric_limits<double>::infinity();
    for (double p = 49.0; p < 1e5; p *= 1.3) {
        const auto c = quasi_optimality_constant(0.95, PNorm(p), 12, u12);
        ASSERT_TRUE(c.has_value());
        EXPECT_LT(*c, prev);
        EXPECT_GT(*c, 39.0);
        prev = *c;
    }
}
