#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "breadlearn/consumer.hpp"

namespace breadlearn {

// Stock history (96) + cost vector (182) + periods since the last use (1).
inline constexpr std::size_t kFeatureCount = 279;

[[nodiscard]] Eigen::VectorXd featurize(const SimRun& run);
[[nodiscard]] double target_hours(const SimRun& run);

// Rows in run order.
[[nodiscard]] Eigen::MatrixXd feature_matrix(std::span<const SimRun> runs);
[[nodiscard]] Eigen::VectorXd target_vector(std::span<const SimRun> runs);

[[nodiscard]] double mae_hours(std::span<const double> predicted, std::span<const double> actual);
[[nodiscard]] double mae_offsets(std::span<const int> predicted, std::span<const int> actual);

// Column-wise z-scores with population stddev; constant columns keep scale 1.
class Standardizer {
public:
    static Standardizer fit(const Eigen::MatrixXd& x);
    [[nodiscard]] Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
    [[nodiscard]] Eigen::RowVectorXd transform_row(const Eigen::RowVectorXd& x) const;
    [[nodiscard]] const Eigen::RowVectorXd& mean() const noexcept { return mean_; }
    [[nodiscard]] const Eigen::RowVectorXd& scale() const noexcept { return scale_; }

private:
    Eigen::RowVectorXd mean_;
    Eigen::RowVectorXd scale_;
};

enum class RegressorKind { Mean, Ols, Ridge, Lasso, Knn };

[[nodiscard]] std::string_view to_string(RegressorKind kind) noexcept;
[[nodiscard]] RegressorKind parse_regressor(std::string_view name);

struct RegressorSpec {
    RegressorKind kind = RegressorKind::Mean;
    double lambda = 0.0;  // ridge and lasso
    int k = 5;            // kNN; clamped to the training size
    bool standardize = true;
    // OLS only: drop columns aliased by earlier pivots instead of failing.
    bool drop_aliased = false;
    double lasso_tolerance = 1e-7;  // largest squared step relative to the null objective
    int lasso_max_sweeps = 100000;

    void validate() const;
};

class Regressor {
public:
    static Regressor fit(const RegressorSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& t);

    [[nodiscard]] double predict(const Eigen::RowVectorXd& x) const;
    [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

    [[nodiscard]] const RegressorSpec& spec() const noexcept { return spec_; }
    // Linear models, in standardized units when standardization is on.
    [[nodiscard]] const Eigen::VectorXd& coefficients() const noexcept { return coef_; }
    [[nodiscard]] double intercept() const noexcept { return intercept_; }

private:
    RegressorSpec spec_;
    std::size_t arity_ = 0;
    bool scaled_ = false;
    Standardizer scaler_;
    double intercept_ = 0.0;
    Eigen::VectorXd coef_;
    Eigen::MatrixXd train_x_;  // kNN
    Eigen::VectorXd train_t_;
};

// Lasso by coordinate descent on (1/2n)|t - b0 - X b|^2 + lambda |b|_1 with X already centred.
// Stops once the largest weighted squared coordinate step falls below tolerance times the objective at b = 0.
[[nodiscard]] Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                                                       double lambda, double tolerance, int max_sweeps);

// Picks the candidate with the lowest mean validation MAE over the folds; earliest wins ties.
// folds[i] holds row indices into x.
struct SelectionResult {
    RegressorSpec spec;
    std::vector<double> fold_mae;  // per candidate
};
[[nodiscard]] SelectionResult select_by_folds(std::span<const RegressorSpec> candidates, const Eigen::MatrixXd& x,
                                              const Eigen::VectorXd& t,
                                              std::span<const std::vector<std::size_t>> folds);

}  // namespace breadlearn
