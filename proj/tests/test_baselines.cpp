#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "breadlearn/baselines.hpp"

using namespace breadlearn;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd x(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) x(i, j) = z(rng);
    }
    return x;
}

// Gauss-Jordan elimination with partial pivoting on a dense copy.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        }
        std::swap(a[c], a[p]);
        std::swap(b[c], b[p]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t c = 0; c < n; ++c) b[c] /= a[c][c];
    return b;
}

}  // namespace

TEST(Features, ArityAndLayout) {
    auto data = simulate(40, VolatilityLevel::Low, 1, SimulationSetup{});
    ASSERT_FALSE(data.runs.empty());
    const auto& run = data.runs.front();
    auto f = featurize(run);
    ASSERT_EQ(static_cast<std::size_t>(f.size()), kFeatureCount);
    EXPECT_EQ(f[0], run.stock_history[0]);
    EXPECT_EQ(f[96], run.costs[0]);
    EXPECT_EQ(f[278], static_cast<double>(run.periods_since_last));
    EXPECT_EQ(target_hours(run), run.chosen_offset * 0.25);
    auto x = feature_matrix(data.runs);
    EXPECT_EQ(x.rows(), static_cast<Eigen::Index>(data.runs.size()));
    EXPECT_EQ(x.cols(), static_cast<Eigen::Index>(kFeatureCount));
    SimRun bad = run;
    bad.costs.pop_back();
    EXPECT_THROW((void)featurize(bad), std::invalid_argument);
}

TEST(Metrics, MaeExamples) {
    double p[] = {1.0, 2.0, 4.0}, a[] = {1.5, 2.0, 3.0};
    EXPECT_DOUBLE_EQ(mae_hours(p, a), 0.5);
    int po[] = {30, 40}, ao[] = {34, 40};
    EXPECT_DOUBLE_EQ(mae_offsets(po, ao), 0.5);
    double one[] = {1.0};
    EXPECT_THROW((void)mae_hours(p, one), std::invalid_argument);
    EXPECT_THROW((void)mae_hours(std::span<const double>{}, std::span<const double>{}), std::invalid_argument);
}

TEST(Standardizer, ZeroMeanUnitSpreadAndConstantColumns) {
    std::mt19937_64 rng(1);
    Eigen::MatrixXd x = random_matrix(rng, 30, 4);
    x.col(2).setConstant(7.0);
    auto s = Standardizer::fit(x);
    auto z = s.transform(x);
    for (int j = 0; j < 4; ++j) {
        EXPECT_NEAR(z.col(j).mean(), 0.0, 1e-12);
        if (j != 2) {
            EXPECT_NEAR(std::sqrt(z.col(j).squaredNorm() / 30.0), 1.0, 1e-12);
        }
    }
    EXPECT_EQ(s.scale()[2], 1.0);
    auto again = Standardizer::fit(z).transform(z);
    EXPECT_LT((again - z).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Regressor, MeanAndKnnWithAllNeighbours) {
    Eigen::MatrixXd x(2, 1);
    x << 0.0, 1.0;
    Eigen::VectorXd t(2);
    t << 4.0, 6.0;
    auto mean = Regressor::fit({RegressorKind::Mean}, x, t);
    Eigen::RowVectorXd q(1);
    q << 10.0;
    EXPECT_EQ(mean.predict(q), 5.0);
    RegressorSpec knn{RegressorKind::Knn};
    knn.k = 50;  // clamped to the two training rows
    EXPECT_EQ(Regressor::fit(knn, x, t).predict(q), 5.0);
    knn.k = 1;
    EXPECT_EQ(Regressor::fit(knn, x, t).predict(q), 6.0);
}

TEST(Regressor, OlsRecoversExactLinearTarget) {
    std::mt19937_64 rng(2);
    auto x = random_matrix(rng, 40, 5);
    Eigen::VectorXd b(5);
    b << 1.0, -2.0, 0.5, 0.0, 3.0;
    Eigen::VectorXd t = (x * b).array() + 4.0;
    for (bool standardize : {true, false}) {
        RegressorSpec spec{RegressorKind::Ols};
        spec.standardize = standardize;
        auto m = Regressor::fit(spec, x, t);
        EXPECT_LT((m.predict(x) - t).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Regressor, OlsSingularDesign) {
    std::mt19937_64 rng(3);
    auto x = random_matrix(rng, 10, 3);
    Eigen::MatrixXd wide(10, 4);
    wide << x, x.col(0) + x.col(1);
    Eigen::VectorXd t = x.col(0) + 1.0 * x.col(2);
    EXPECT_THROW((void)Regressor::fit({RegressorKind::Ols}, wide, t), std::runtime_error);
    RegressorSpec dropping{RegressorKind::Ols};
    dropping.drop_aliased = true;
    auto m = Regressor::fit(dropping, wide, t);
    EXPECT_LT((m.predict(wide) - t).cwiseAbs().maxCoeff(), 1e-9);
    // More columns than rows is singular too.
    auto fat = random_matrix(rng, 5, 8);
    EXPECT_THROW((void)Regressor::fit({RegressorKind::Ols}, fat, Eigen::VectorXd::Ones(5)), std::runtime_error);
}

TEST(Regressor, RidgeMatchesNormalEquations) {
    std::mt19937_64 rng(4);
    auto x = random_matrix(rng, 10, 5);
    Eigen::VectorXd t = random_matrix(rng, 10, 1);
    const double lambda = 0.7;
    RegressorSpec spec{RegressorKind::Ridge, lambda};
    spec.standardize = false;
    auto m = Regressor::fit(spec, x, t);

    // Centred normal equations (Xc'Xc + lambda I) b = Xc'tc.
    std::vector<double> mx(5, 0.0);
    double mt = 0.0;
    for (int i = 0; i < 10; ++i) {
        mt += t[i] / 10.0;
        for (int j = 0; j < 5; ++j) mx[static_cast<std::size_t>(j)] += x(i, j) / 10.0;
    }
    std::vector<std::vector<double>> a(5, std::vector<double>(5, 0.0));
    std::vector<double> rhs(5, 0.0);
    for (int i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            double xj = x(i, static_cast<int>(j)) - mx[j];
            rhs[j] += xj * (t[i] - mt);
            for (std::size_t k = 0; k < 5; ++k) a[j][k] += xj * (x(i, static_cast<int>(k)) - mx[k]);
        }
    }
    for (std::size_t j = 0; j < 5; ++j) a[j][j] += lambda;
    auto b = solve(a, rhs);
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(m.coefficients()[j], b[static_cast<std::size_t>(j)], 1e-10);
    double b0 = mt;
    for (std::size_t j = 0; j < 5; ++j) b0 -= b[j] * mx[j];
    EXPECT_NEAR(m.intercept(), b0, 1e-10);
}

TEST(Regressor, HugeRidgePenaltyPredictsTheMean) {
    std::mt19937_64 rng(5);
    auto x = random_matrix(rng, 20, 3);
    Eigen::VectorXd t = random_matrix(rng, 20, 1);
    auto m = Regressor::fit({RegressorKind::Ridge, 1e12}, x, t);
    EXPECT_LT((m.predict(x).array() - t.mean()).abs().maxCoeff(), 1e-9);
}

TEST(Regressor, LassoSatisfiesOptimalityConditions) {
    std::mt19937_64 rng(6);
    auto x = random_matrix(rng, 50, 6);
    Eigen::VectorXd b(6);
    b << 2.0, 0.0, 0.0, -1.0, 0.0, 0.3;
    Eigen::VectorXd t = x * b + 0.1 * random_matrix(rng, 50, 1);
    Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
    Eigen::VectorXd tc = t.array() - t.mean();
    const double lambda = 0.2;
    auto coef = lasso_coordinate_descent(xc, tc, lambda, 1e-12, 100000);
    Eigen::VectorXd grad = xc.transpose() * (tc - xc * coef) / 50.0;
    int zeros = 0;
    for (int j = 0; j < 6; ++j) {
        if (coef[j] == 0.0) {
            ++zeros;
            EXPECT_LE(std::abs(grad[j]), lambda + 1e-8);
        } else {
            EXPECT_NEAR(grad[j], lambda * (coef[j] > 0 ? 1.0 : -1.0), 1e-8);
        }
    }
    EXPECT_GE(zeros, 1);
    auto large = lasso_coordinate_descent(xc, tc, 100.0, 1e-12, 1000);
    EXPECT_EQ(large.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Regressor, ParsesNames) {
    for (auto k : {RegressorKind::Mean, RegressorKind::Ols, RegressorKind::Ridge, RegressorKind::Lasso, RegressorKind::Knn}) {
        EXPECT_EQ(parse_regressor(to_string(k)), k);
    }
    EXPECT_THROW((void)parse_regressor("forest"), std::invalid_argument);
    RegressorSpec bad{RegressorKind::Ridge, -1.0};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Selection, PicksLowestFoldError) {
    std::mt19937_64 rng(7);
    auto x = random_matrix(rng, 40, 3);
    Eigen::VectorXd t = 3.0 * x.col(0);
    std::vector<std::vector<std::size_t>> folds(4);
    for (std::size_t i = 0; i < 40; ++i) folds[i / 10].push_back(i);
    std::vector<RegressorSpec> candidates{{RegressorKind::Mean}, {RegressorKind::Ridge, 1e-6}, {RegressorKind::Ridge, 1e3}};
    auto result = select_by_folds(candidates, x, t, folds);
    EXPECT_EQ(result.spec.kind, RegressorKind::Ridge);
    EXPECT_EQ(result.spec.lambda, 1e-6);
    ASSERT_EQ(result.fold_mae.size(), 3u);
    EXPECT_LT(result.fold_mae[1], result.fold_mae[0]);
}

TEST(Regressor, LassoConvergesWithMoreFeaturesThanRows) {
    std::mt19937_64 rng(8);
    auto x = random_matrix(rng, 21, 279);
    Eigen::VectorXd t = 2.0 * x.col(3) + random_matrix(rng, 21, 1);
    auto m = Regressor::fit({RegressorKind::Lasso, 1e-3}, x, t);
    // Nearly unpenalized with p > n: the fit almost interpolates.
    EXPECT_LT((m.predict(x) - t).cwiseAbs().maxCoeff(), 0.1);
}
