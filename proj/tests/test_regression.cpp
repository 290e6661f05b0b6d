#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rvar/regression.hpp"
#include "rvar/simulators.hpp"

using namespace rvar;

TEST(BuildDesign, EmptyModel) {
    const TimeSeriesSet ts(Eigen::MatrixXd::Random(2, 10));
    // Sample start 3 in 1-based time is offset 2.
    const auto d = build_design(ts, ExplanatoryVector(0), 2);
    EXPECT_EQ(d.regressors.cols(), 0);
    EXPECT_EQ(d.response.size(), 10 - 3 + 1);
}

TEST(BuildDesign, ShiftByOne) {
    Eigen::MatrixXd v(1, 4);
    v << 1, 2, 3, 4;
    const auto d = build_design(TimeSeriesSet(v), ExplanatoryVector(0, {{0, 1}}), 1);
    ASSERT_EQ(d.regressors.rows(), 3);
    EXPECT_EQ(d.regressors.col(0), Eigen::Vector3d(1, 2, 3));
    EXPECT_EQ(d.response, Eigen::Vector3d(2, 3, 4));
}

TEST(BuildDesign, HandIndexedTwoVariables) {
    Eigen::MatrixXd v(2, 6);
    v << 1, 2, 3, 4, 5, 6, 10, 20, 30, 40, 50, 60;
    const auto d = build_design(TimeSeriesSet(v), ExplanatoryVector(0, {{0, 1}, {1, 2}}), 2);
    ASSERT_EQ(d.regressors.rows(), 4);
    ASSERT_EQ(d.regressors.cols(), 2);
    // rows are t = 3..6 (1-based): X1(t-1) and X2(t-2)
    EXPECT_EQ(d.regressors.col(0), Eigen::Vector4d(2, 3, 4, 5));
    EXPECT_EQ(d.regressors.col(1), Eigen::Vector4d(10, 20, 30, 40));
    EXPECT_EQ(d.response, Eigen::Vector4d(3, 4, 5, 6));
}

TEST(BuildDesign, RejectsSampleWithoutRoomForLags) {
    const TimeSeriesSet ts(Eigen::MatrixXd::Random(2, 10));
    EXPECT_THROW(build_design(ts, ExplanatoryVector(0, {{1, 3}}), 2), invalid_sample);
    EXPECT_THROW(build_design(ts, ExplanatoryVector(0), 10), invalid_sample);
}

TEST(OlsFit, ExactFit) {
    Eigen::MatrixXd X(5, 1);
    X << 1, -2, 3, 0.5, 4;
    const auto fit = ols_fit(X, 2.0 * X.col(0));
    EXPECT_NEAR(fit.coefficients(0), 2.0, 1e-12);
    EXPECT_NEAR(fit.sse, 0.0, 1e-20);
    EXPECT_TRUE(is_perfect_fit_bic(fit.bic));
}

TEST(OlsFit, NullModel) {
    const Eigen::VectorXd y = Eigen::Vector4d(1, -2, 3, 0.5);
    const auto fit = ols_fit(Eigen::MatrixXd(4, 0), y);
    EXPECT_EQ(fit.coefficients.size(), 0);
    EXPECT_DOUBLE_EQ(fit.sse, y.squaredNorm());
}

TEST(OlsFit, MatchesNormalEquations) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd X(50, 3);
        Eigen::VectorXd y(50);
        for (Eigen::Index r = 0; r < 50; ++r) {
            for (Eigen::Index c = 0; c < 3; ++c) X(r, c) = z(rng);
            y(r) = z(rng);
        }
        const auto fit = ols_fit(X, y);
        const Eigen::VectorXd ref = oracle::normal_equations(X, y);
        EXPECT_LE((fit.coefficients - ref).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_NEAR(fit.sse, (y - X * ref).squaredNorm(), 1e-8);
        EXPECT_FALSE(fit.condition_flag);
    }
}

TEST(OlsFit, FlagsRankDeficiency) {
    Eigen::MatrixXd X(6, 2);
    X.col(0) << 1, 2, 3, 4, 5, 7;
    X.col(1) = 2.0 * X.col(0);
    EXPECT_TRUE(ols_fit(X, Eigen::VectorXd::Ones(6)).condition_flag);
}

TEST(Bic, Arithmetic) {
    EXPECT_DOUBLE_EQ(bic(1.0, 100, 0), 0.0);
    EXPECT_NEAR(bic(1.0, 100, 2), 9.2103, 1e-4);
}

TEST(Bic, UselessColumnRaisesBic) {
    // AR(1) with one extra noise regressor, 200 points, 100 seeds.
    std::vector<Eigen::MatrixXd> lags{Eigen::MatrixXd::Constant(1, 1, 0.6)};
    const VarSystemSpec spec(lags, Eigen::VectorXd::Ones(1));
    int raised = 0;
    for (std::uint64_t s = 1; s <= 100; ++s) {
        const auto ts = gen_var(spec, 200, s);
        const auto base = fit_model(ts, ExplanatoryVector(0, {{0, 1}}), 2);
        const auto more = fit_model(ts, ExplanatoryVector(0, {{0, 1}, {0, 2}}), 2);
        raised += bic(more, 2) > bic(base, 1) ? 1 : 0;
    }
    EXPECT_GT(raised, 50);
}

TEST(LaggedGram, SseMatchesDirectFit) {
    const auto ts = gen_var(make_s1().spec, 120, 3);
    const LaggedGram gram(ts, 4);
    EXPECT_EQ(gram.n_eff(), 116u);
    const std::vector<LaggedTerm> terms{{0, 1}, {4, 1}, {2, 3}, {1, 4}};
    for (std::size_t j = 0; j < ts.K(); ++j) {
        const auto fit = fit_model(ts, ExplanatoryVector(j, terms), 4);
        EXPECT_NEAR(gram.sse(j, terms), fit.sse, 1e-8 * fit.sse);
        EXPECT_NEAR(gram.bic(j, terms), oracle::subset_bic(ts, j, terms, 4), 1e-8);
    }
    EXPECT_NEAR(gram.sse(0, {}), gram.response_energy(0), 1e-12);
}

TEST(OlsFit, NestingResidualsAndRecovery) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> z;
    Eigen::MatrixXd X(80, 4);
    for (Eigen::Index r = 0; r < 80; ++r)
        for (Eigen::Index c = 0; c < 4; ++c) X(r, c) = z(rng);
    const Eigen::Vector4d beta(0.5, -1.25, 2.0, 0.125);
    const Eigen::VectorXd exact = X * beta;
    EXPECT_LE((ols_fit(X, exact).coefficients - beta).cwiseAbs().maxCoeff(), 1e-8);

    Eigen::VectorXd y = exact;
    for (Eigen::Index r = 0; r < 80; ++r) y(r) += z(rng);
    const auto big = ols_fit(X, y);
    const auto small = ols_fit(X.leftCols(2), y);
    EXPECT_LE(big.sse, small.sse + 1e-8 * small.sse);
    const Eigen::VectorXd dots = X.transpose() * big.residuals;
    EXPECT_LE(dots.cwiseAbs().maxCoeff(), 1e-6 * X.norm() * big.residuals.norm());
}

TEST(Bic, IncreasingInParameterCount) {
    for (std::size_t m = 0; m < 10; ++m) EXPECT_LT(bic(0.7, 120, m), bic(0.7, 120, m + 1));
}
