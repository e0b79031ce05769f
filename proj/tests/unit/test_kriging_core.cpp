#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "kspod/errors.hpp"
#include "kspod/kriging_core.hpp"
#include "oracles.hpp"

using namespace kspod;

TEST(Correlation, Examples) {
    const Eigen::VectorXd a = Eigen::VectorXd::Constant(1, 0.3);
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(1, 1.3);
    const std::vector<double> one = {1.0};
    EXPECT_EQ(correlation(a, a, one), 1.0);
    EXPECT_NEAR(correlation(a, b, one), 0.36787944117144233, 1e-15);
    const std::vector<double> huge = {1e6};
    EXPECT_LT(correlation(a, b, huge), 1e-300);
    EXPECT_THROW(correlation(a, Eigen::VectorXd::Zero(2), one), std::invalid_argument);
}

TEST(Kriging, ConstantDataPredictsConstant) {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd X = oracle::uniform_matrix(rng, 10, 2);
    const KrigingModel m = KrigingModel::fit(X, Eigen::VectorXd::Constant(10, 3.25));
    for (int i = 0; i < 20; ++i) EXPECT_NEAR(m.predict(oracle::uniform_matrix(rng, 2, 1)), 3.25, 1e-12);
}

TEST(Kriging, InterpolatesTrainingData) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5 + trial;
        const int d = 1 + trial % 4;
        const Eigen::MatrixXd X = oracle::uniform_matrix(rng, n, d);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = std::sin(3.0 * X.row(i).sum()) + X(i, 0) * X(i, 0);
        const KrigingModel m = KrigingModel::fit(X, y);
        const double range = y.maxCoeff() - y.minCoeff();
        for (int i = 0; i < n; ++i) EXPECT_LE(std::abs(m.predict(X.row(i).transpose()) - y[i]), 1e-6 * range);
    }
}

TEST(Kriging, SineMidpoints) {
    Eigen::MatrixXd X(8, 1);
    Eigen::VectorXd y(8);
    for (int i = 0; i < 8; ++i) {
        X(i, 0) = i / 7.0;
        y[i] = std::sin(2.0 * std::numbers::pi * X(i, 0));
    }
    const KrigingModel m = KrigingModel::fit(X, y);
    double sse = 0.0;
    for (int i = 0; i < 7; ++i) {
        const double x = (i + 0.5) / 7.0;
        const double e = m.predict(Eigen::VectorXd::Constant(1, x)) - std::sin(2.0 * std::numbers::pi * x);
        sse += e * e;
    }
    EXPECT_LT(std::sqrt(sse / 7.0), 0.05);
}

TEST(Kriging, SinglePointAndSymmetry) {
    const Eigen::MatrixXd X1 = Eigen::MatrixXd::Constant(1, 2, 0.4);
    const KrigingModel one = KrigingModel::fit(X1, Eigen::VectorXd::Constant(1, -2.0));
    EXPECT_EQ(one.predict(Eigen::Vector2d(0.9, 0.1)), -2.0);

    Eigen::MatrixXd X(2, 1);
    X << 0.0, 1.0;
    for (double theta : {0.01, 1.0, 30.0}) {
        const KrigingModel m = KrigingModel::with_params(X, Eigen::Vector2d(0.0, 1.0), {{theta}, 1e-8});
        EXPECT_NEAR(m.predict(Eigen::VectorXd::Constant(1, 0.5)), 0.5, 1e-10);
    }
}

TEST(Kriging, GlsMeanIdentityAndDenseOracle) {
    std::mt19937_64 rng(3);
    for (int n : {3, 12, 50}) {
        const Eigen::MatrixXd X = oracle::uniform_matrix(rng, n, 3);
        const Eigen::VectorXd y = oracle::uniform_matrix(rng, n, 1);
        const std::vector<double> theta = {2.0, 0.5, 4.0};
        const KrigingModel m = KrigingModel::with_params(X, y, {theta, 1e-8});
        Eigen::MatrixXd R = correlation_matrix(X, theta);
        R.diagonal().array() += 1e-8;
        const Eigen::VectorXd Ri1 = R.fullPivLu().solve(Eigen::VectorXd::Ones(n));
        EXPECT_NEAR(m.mu_hat(), Ri1.dot(y) / Ri1.sum(), 1e-10 * std::max(1.0, std::abs(m.mu_hat())));
        for (int t = 0; t < 10; ++t) {
            const Eigen::VectorXd x = oracle::uniform_matrix(rng, 3, 1);
            const double dense = oracle::kriging_predict(X, y, theta, 1e-8, x);
            EXPECT_NEAR(m.predict(x), dense, 1e-10 * std::max(1.0, std::abs(dense)));
        }
    }
}

TEST(Kriging, MleBeatsRandomProbes) {
    std::mt19937_64 rng(4);
    const Eigen::MatrixXd X = oracle::uniform_matrix(rng, 15, 2);
    Eigen::VectorXd y(15);
    for (int i = 0; i < 15; ++i) y[i] = std::exp(X(i, 0)) * std::cos(4.0 * X(i, 1));
    const KrigingModel m = KrigingModel::fit(X, y);
    std::uniform_real_distribution<double> lt(-6.0, 6.0);
    // The search only accepts theta where the nugget still lets the model
    // interpolate, so compare against probes that do too.
    const double range = y.maxCoeff() - y.minCoeff();
    int feasible = 0;
    for (int p = 0; p < 256 && feasible < 32; ++p) {
        const CorrelationParams probe{{std::exp(lt(rng)), std::exp(lt(rng))}, 1e-8};
        const KrigingModel pm = KrigingModel::with_params(X, y, probe);
        double miss = 0.0;
        for (int i = 0; i < 15; ++i) miss = std::max(miss, std::abs(pm.predict(X.row(i).transpose()) - y[i]));
        if (miss > 1e-7 * range) continue;
        ++feasible;
        EXPECT_GE(m.log_likelihood(), profile_log_likelihood(X, y, probe) - 1e-9);
    }
    EXPECT_EQ(feasible, 32);
}

TEST(Kriging, DuplicatesWithoutNuggetAreIllConditioned) {
    Eigen::MatrixXd X(3, 1);
    X << 0.1, 0.1, 0.7;
    KrigingOptions opt;
    opt.nugget = 0.0;
    EXPECT_THROW(KrigingModel::fit(X, Eigen::Vector3d(1, 2, 3), opt), IllConditionedError);
}

TEST(Kriging, ThetaOverride) {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd X = oracle::uniform_matrix(rng, 6, 2);
    KrigingOptions opt;
    opt.theta = std::vector<double>{3.0, 7.0};
    const KrigingModel m = KrigingModel::fit(X, oracle::uniform_matrix(rng, 6, 1), opt);
    EXPECT_EQ(m.params().theta, (std::vector<double>{3.0, 7.0}));
}

TEST(Kriging, SharedFitUsesOneTheta) {
    std::mt19937_64 rng(6);
    const Eigen::MatrixXd X = oracle::uniform_matrix(rng, 10, 2);
    const Eigen::MatrixXd Y = oracle::uniform_matrix(rng, 10, 4);
    const auto models = fit_shared(X, Y);
    ASSERT_EQ(models.size(), 4u);
    for (const auto& m : models) EXPECT_EQ(m.params().theta, models[0].params().theta);
}

TEST(Kgsp1, RoundTrip) {
    std::mt19937_64 rng(7);
    const Eigen::MatrixXd X = oracle::uniform_matrix(rng, 9, 3);
    const KrigingModel m = KrigingModel::fit(X, oracle::uniform_matrix(rng, 9, 1));
    const auto bytes = encode_kriging(m);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 6), "KSGP1\n");
    const KrigingModel back = decode_kriging(bytes);
    EXPECT_EQ(encode_kriging(back), bytes);
    const Eigen::VectorXd x = oracle::uniform_matrix(rng, 3, 1);
    EXPECT_EQ(back.predict(x), m.predict(x));
}

TEST(IndicatorWeights, UnitVectorsAtTrainingPoints) {
    std::mt19937_64 rng(8);
    const Eigen::MatrixXd X = oracle::uniform_matrix(rng, 12, 3);
    const CorrelationParams p{{5.0, 5.0, 5.0}, 1e-8};
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd w = indicator_weights(X, p, X.row(i).transpose());
        Eigen::VectorXd e = Eigen::VectorXd::Zero(12);
        e[i] = 1.0;
        EXPECT_LT((w - e).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(IndicatorWeights, SumToOneAndMatchBorderedSystem) {
    std::mt19937_64 rng(9);
    const Eigen::MatrixXd X = oracle::uniform_matrix(rng, 15, 2);
    const CorrelationParams p{{3.0, 3.0}, 1e-8};
    bool negative = false;
    for (int t = 0; t < 200; ++t) {
        const Eigen::VectorXd x = (oracle::uniform_matrix(rng, 2, 1).array() * 2.0 - 0.5).matrix();
        const Eigen::VectorXd w = indicator_weights(X, p, x);
        EXPECT_NEAR(w.sum(), 1.0, 1e-8);
        EXPECT_LT((w - oracle::kriging_weights(X, p.theta, p.nugget, x)).cwiseAbs().maxCoeff(), 1e-8);
        negative = negative || w.minCoeff() < 0.0;
    }
    EXPECT_TRUE(negative);
}

TEST(IndicatorWeights, TwoPointHandValues) {
    // X = {0, 1}, theta = 50, x = 0.1. With c = exp(-50) and
    // r = (exp(-0.5), exp(-40.5)) the bordered system gives
    //   w1 = 1/2 + (r1 - r2) / (2 (1 - c)).
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 1.0;
    const CorrelationParams p{{50.0}, 0.0};
    const Eigen::VectorXd w = indicator_weights(X, p, Eigen::VectorXd::Constant(1, 0.1));
    const double c = std::exp(-50.0);
    const double r1 = std::exp(-0.5);
    const double r2 = std::exp(-40.5);
    const double w1 = 0.5 + (r1 - r2) / (2.0 * (1.0 - c));
    EXPECT_NEAR(w[0], w1, 1e-12);
    EXPECT_NEAR(w[1], 1.0 - w1, 1e-12);
    EXPECT_NEAR(w[0], 0.8032653298563167, 1e-12);
}

TEST(IndicatorKriging, FitIsSharedAndIsotropic) {
    std::mt19937_64 rng(10);
    const Eigen::MatrixXd X = oracle::uniform_matrix(rng, 10, 3);
    const IndicatorKriging k = IndicatorKriging::fit(X);
    ASSERT_EQ(k.params().theta.size(), 3u);
    EXPECT_EQ(k.params().theta[0], k.params().theta[1]);
    EXPECT_EQ(k.params().theta[1], k.params().theta[2]);
    KrigingOptions opt;
    opt.theta = std::vector<double>{2.5};
    EXPECT_EQ(IndicatorKriging::fit(X, opt).params().theta, (std::vector<double>{2.5, 2.5, 2.5}));
}
