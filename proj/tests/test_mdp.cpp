#include "test_support.hpp"

#include <gtest/gtest.h>

#include <functional>

using namespace psbrm;
using namespace testing_support;

namespace {

TabularMDP two_state(double row_sum = 1.0, double gamma = 0.9)
{
    Matrix P0(2, 2), P1(2, 2), R(2, 2);
    P0 << 0.5, 0.5, 0.2, 0.8;
    P1 << 1.0, 0.0, 0.3, row_sum - 0.3;
    R << 1.0, 0.0, -1.0, 2.0;
    return build_mdp({P0, P1}, R, gamma);
}

std::string what_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(BuildMdp, BenchmarkModelIsValid)
{
    const TabularMDP mdp = benchmark_mdp();
    EXPECT_EQ(mdp.num_states(), 6);
    EXPECT_EQ(mdp.num_actions(), 2);
    EXPECT_EQ(mdp.size(), 12);
    EXPECT_DOUBLE_EQ(mdp.discount(), 0.95);
    EXPECT_DOUBLE_EQ(mdp.reward(0, 0), 0.8);
    EXPECT_DOUBLE_EQ(mdp.reward(0, 1), 1.2);
    EXPECT_DOUBLE_EQ(mdp.reward(5, 1), 0.3);
}

TEST(BuildMdp, RejectsShortRowAndNamesIt)
{
    const std::string msg = what_of([] { two_state(0.9); });
    ASSERT_FALSE(msg.empty());
    EXPECT_NE(msg.find("s=1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("a=1"), std::string::npos) << msg;
}

TEST(BuildMdp, RejectsDiscountOutsideUnitInterval)
{
    EXPECT_THROW(two_state(1.0, 1.0), ValidationError);
    EXPECT_THROW(two_state(1.0, -0.1), ValidationError);
    EXPECT_NO_THROW(two_state(1.0, 0.0));
}

TEST(BuildMdp, RejectsNegativeAndNonFiniteEntries)
{
    Matrix P(1, 1);
    P << 1.0;
    Matrix R(1, 1);
    R << std::nan("");
    EXPECT_THROW(build_mdp({P}, R, 0.5), ValidationError);
    Matrix Pn(2, 2);
    Pn << 1.2, -0.2, 0.0, 1.0;
    Matrix R2 = Matrix::Zero(2, 1);
    EXPECT_THROW(build_mdp({Pn}, R2, 0.5), ValidationError);
}

TEST(BuildMdp, RejectsShapeMismatch)
{
    Matrix P = Matrix::Identity(2, 2);
    EXPECT_THROW(build_mdp({P, P}, Matrix::Zero(2, 1), 0.5), ValidationError);
    EXPECT_THROW(build_mdp({P, Matrix::Identity(3, 3)}, Matrix::Zero(2, 2), 0.5), ValidationError);
    EXPECT_THROW(build_mdp({}, Matrix::Zero(2, 0), 0.5), ValidationError);
}

TEST(Temperature, MustBePositive)
{
    EXPECT_THROW(Temperature(0.0), ValidationError);
    EXPECT_THROW(Temperature(-1.0), ValidationError);
    EXPECT_THROW(Temperature(std::nan("")), ValidationError);
    EXPECT_DOUBLE_EQ(Temperature(0.25).value(), 0.25);
}

TEST(SoftBackup, SingleActionIsDiscountedValue)
{
    Matrix P(1, 1);
    P << 1.0;
    const TabularMDP mdp = build_mdp({P}, Matrix::Zero(1, 1), 0.7);
    const QTable out = soft_backup(mdp, Temperature(0.3), QTable::Constant(1, 5.0));
    EXPECT_NEAR(out(0), 0.7 * 5.0, 1e-14);
}

TEST(SoftBackup, EqualActionValuesAddLogOfActionCount)
{
    Xoshiro256 rng(7);
    const int S = 4, A = 3;
    std::vector<Matrix> P(A);
    for (auto& m : P) {
        m = Matrix::Zero(S, S);
        for (int s = 0; s < S; ++s)
            m(s, static_cast<int>(rng.below(S))) = 1.0;
    }
    const TabularMDP mdp = build_mdp(P, Matrix::Zero(S, A), 0.9);
    const double c = 2.5, lambda = 0.7;
    const QTable out = soft_backup(mdp, Temperature(lambda), QTable::Constant(S * A, c));
    for (Eigen::Index i = 0; i < out.size(); ++i)
        EXPECT_NEAR(out(i), 0.9 * (c + lambda * std::log(3.0)), 1e-13);
}

TEST(SoftBackup, BenchmarkModelAtZero)
{
    const TabularMDP mdp = benchmark_mdp();
    const QTable out = soft_backup(mdp, Temperature(1.0), QTable::Zero(12));
    EXPECT_NEAR(out(0), 1.458490, 1e-6);
    for (Eigen::Index s = 0; s < 6; ++s)
        for (Eigen::Index a = 0; a < 2; ++a)
            EXPECT_NEAR(out(flat_index(s, a, 2)), mdp.reward(s, a) + 0.95 * std::log(2.0), 1e-14);
}

TEST(SoftBackup, MatchesDirectSummation)
{
    Xoshiro256 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int S = 1 + static_cast<int>(rng.below(7));
        const int A = 1 + static_cast<int>(rng.below(4));
        const TabularMDP mdp = random_mdp(rng, S, A, rng.uniform(0.0, 0.99));
        const double lambda = rng.uniform(0.2, 3.0);
        const Vector q = random_vector(rng, S * A, 3.0);
        const QTable got = soft_backup(mdp, Temperature(lambda), q);
        const Vector want = naive_soft_backup(mdp, lambda, q);
        EXPECT_LT((got - want).lpNorm<Eigen::Infinity>(), 1e-12);
    }
}

TEST(SoftBackup, StableForLargeValuesAndSmallTemperature)
{
    const TabularMDP mdp = benchmark_mdp();
    QTable q = QTable::Zero(12);
    q(0) = 1e4;
    q(1) = -1e4;
    const QTable out = soft_backup(mdp, Temperature(1e-3), q);
    EXPECT_TRUE(out.allFinite());
}

TEST(SoftBackup, ContractionMonotonicityAndShift)
{
    Xoshiro256 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int S = 2 + static_cast<int>(rng.below(5));
        const int A = 1 + static_cast<int>(rng.below(3));
        const double gamma = rng.uniform(0.0, 0.99);
        const TabularMDP mdp = random_mdp(rng, S, A, gamma);
        const Temperature lambda(rng.uniform(0.1, 2.0));
        const Vector q1 = random_vector(rng, S * A, 5.0);
        const Vector q2 = random_vector(rng, S * A, 5.0);
        const QTable f1 = soft_backup(mdp, lambda, q1);
        const QTable f2 = soft_backup(mdp, lambda, q2);
        EXPECT_LE(sup_norm(f1 - f2), gamma * sup_norm(q1 - q2) + 1e-12);

        const Vector bump = random_vector(rng, S * A).cwiseAbs();
        const QTable f_up = soft_backup(mdp, lambda, q1 + bump);
        EXPECT_TRUE(((f_up - f1).array() >= -1e-12).all());

        const double c = rng.uniform(-10.0, 10.0);
        const QTable f_shift = soft_backup(mdp, lambda, q1 + Vector::Constant(S * A, c));
        EXPECT_LT(sup_norm(f_shift - f1 - Vector::Constant(S * A, gamma * c)), 1e-11);
    }
}

TEST(SoftBackup, RejectsWrongLength)
{
    EXPECT_THROW(soft_backup(benchmark_mdp(), Temperature(1.0), QTable::Zero(5)), ValidationError);
}

TEST(SoftStateValues, MatchesLogSumExp)
{
    Vector q(4);
    q << 1.0, 2.0, -3.0, 0.5;
    const Vector v = soft_state_values(q, Temperature(0.5), 2);
    EXPECT_NEAR(v(0), 0.5 * std::log(std::exp(2.0) + std::exp(4.0)), 1e-14);
    EXPECT_NEAR(v(1), 0.5 * std::log(std::exp(-6.0) + std::exp(1.0)), 1e-14);
}

TEST(BoltzmannPolicy, EqualValuesGiveUniformRow)
{
    const PolicyMatrix pi = boltzmann_policy(QTable::Constant(9, 3.0), Temperature(0.4), 3);
    for (Eigen::Index s = 0; s < 3; ++s)
        for (Eigen::Index a = 0; a < 3; ++a)
            EXPECT_NEAR(pi(s, a), 1.0 / 3.0, 1e-15);
}

TEST(BoltzmannPolicy, HandValues)
{
    Vector q(2);
    q << 1.0, 0.0;
    const PolicyMatrix warm = boltzmann_policy(q, Temperature(1.0), 2);
    EXPECT_NEAR(warm(0, 0), 0.731059, 1e-6);
    EXPECT_NEAR(warm(0, 1), 0.268941, 1e-6);
    const PolicyMatrix cold = boltzmann_policy(q, Temperature(0.1), 2);
    EXPECT_NEAR(cold(0, 0), 0.9999546, 1e-7);
    EXPECT_NEAR(cold(0, 1), 0.0000454, 1e-7);
}

TEST(BoltzmannPolicy, RowsSumToOneAtLargeMagnitude)
{
    Xoshiro256 rng(5);
    const Vector q = random_vector(rng, 40, 1e4);
    const PolicyMatrix pi = boltzmann_policy(q, Temperature(1.0), 4);
    for (Eigen::Index s = 0; s < pi.num_states(); ++s)
        EXPECT_NEAR(pi.probs().row(s).sum(), 1.0, 1e-12);
    EXPECT_TRUE(pi.probs().allFinite());
}

TEST(BoltzmannPolicy, RejectsNonFinite)
{
    QTable q = QTable::Zero(4);
    q(1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(boltzmann_policy(q, Temperature(1.0), 2), ValidationError);
}

TEST(PolicyMatrix, ValidatesRows)
{
    Matrix bad(1, 2);
    bad << 0.6, 0.6;
    EXPECT_THROW(PolicyMatrix{bad}, ValidationError);
    Matrix neg(1, 2);
    neg << 1.5, -0.5;
    EXPECT_THROW(PolicyMatrix{neg}, ValidationError);
}

TEST(TransitionOperator, StateMajorInterleaving)
{
    const Matrix P = transition_operator(benchmark_mdp());
    ASSERT_EQ(P.rows(), 12);
    ASSERT_EQ(P.cols(), 6);
    Vector e3 = Vector::Zero(6);
    e3(3) = 1.0;
    EXPECT_EQ(Vector(P.row(flat_index(0, 1, 2))), e3);
    for (Eigen::Index i = 0; i < 12; ++i) {
        EXPECT_DOUBLE_EQ(P.row(i).sum(), 1.0);
        EXPECT_DOUBLE_EQ(P.row(i).maxCoeff(), 1.0);
    }
}

TEST(PolicyAveraging, DeterministicAndUniform)
{
    Matrix det(3, 2);
    det << 1, 0, 0, 1, 1, 0;
    const Matrix Pi = policy_averaging_operator(PolicyMatrix(det));
    ASSERT_EQ(Pi.rows(), 3);
    ASSERT_EQ(Pi.cols(), 6);
    for (Eigen::Index s = 0; s < 3; ++s) {
        EXPECT_DOUBLE_EQ(Pi.row(s).sum(), 1.0);
        EXPECT_EQ((Pi.row(s).array() != 0.0).count(), 1);
    }
    EXPECT_DOUBLE_EQ(Pi(1, 3), 1.0);

    const Matrix U = policy_averaging_operator(PolicyMatrix(Matrix::Constant(3, 2, 0.5)));
    for (Eigen::Index s = 0; s < 3; ++s) {
        EXPECT_DOUBLE_EQ(U(s, 2 * s), 0.5);
        EXPECT_DOUBLE_EQ(U(s, 2 * s + 1), 0.5);
        EXPECT_DOUBLE_EQ(U.row(s).sum(), 1.0);
    }
}

TEST(PolicyAveraging, MatchesPerStateExpectation)
{
    Xoshiro256 rng(9);
    const Vector q = random_vector(rng, 15);
    const PolicyMatrix pi = boltzmann_policy(q, Temperature(0.8), 3);
    const Vector got = policy_averaging_operator(pi) * q;
    for (Eigen::Index s = 0; s < 5; ++s) {
        double want = 0.0;
        for (Eigen::Index a = 0; a < 3; ++a)
            want += pi(s, a) * q(s * 3 + a);
        EXPECT_NEAR(got(s), want, 1e-14);
    }
}

TEST(PolicyAveraging, CompositionIsRowStochastic)
{
    Xoshiro256 rng(13);
    const TabularMDP mdp = random_mdp(rng, 5, 3, 0.9);
    const PolicyMatrix pi = boltzmann_policy(random_vector(rng, 15), Temperature(1.0), 3);
    const Matrix PPi = transition_operator(mdp) * policy_averaging_operator(pi);
    for (Eigen::Index i = 0; i < PPi.rows(); ++i)
        EXPECT_NEAR(PPi.row(i).sum(), 1.0, 1e-12);
    EXPECT_GE(PPi.minCoeff(), 0.0);
}
