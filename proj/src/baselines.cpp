#include "breadlearn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace breadlearn {

Eigen::VectorXd featurize(const SimRun& run) {
    if (run.stock_history.size() != static_cast<std::size_t>(kPeriodsPerDay) ||
        run.costs.size() + kPeriodsPerDay + 1 != kFeatureCount) {
        throw std::invalid_argument("run " + std::to_string(run.run_id) + " lacks the full predictor set");
    }
    Eigen::VectorXd v(kFeatureCount);
    std::size_t j = 0;
    for (double h : run.stock_history) v[static_cast<Eigen::Index>(j++)] = h;
    for (double c : run.costs) v[static_cast<Eigen::Index>(j++)] = c;
    v[static_cast<Eigen::Index>(j)] = static_cast<double>(run.periods_since_last);
    if (!v.allFinite()) throw std::invalid_argument("run " + std::to_string(run.run_id) + " has non-finite features");
    return v;
}

double target_hours(const SimRun& run) { return offset_to_hours(run.chosen_offset); }

Eigen::MatrixXd feature_matrix(std::span<const SimRun> runs) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(runs.size()), static_cast<Eigen::Index>(kFeatureCount));
    for (std::size_t i = 0; i < runs.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = featurize(runs[i]).transpose();
    return x;
}

Eigen::VectorXd target_vector(std::span<const SimRun> runs) {
    Eigen::VectorXd t(static_cast<Eigen::Index>(runs.size()));
    for (std::size_t i = 0; i < runs.size(); ++i) t[static_cast<Eigen::Index>(i)] = target_hours(runs[i]);
    return t;
}

double mae_hours(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size()) throw std::invalid_argument("MAE needs equal-length vectors");
    if (predicted.empty()) throw std::invalid_argument("MAE of an empty set");
    double total = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) total += std::abs(predicted[i] - actual[i]);
    return total / static_cast<double>(predicted.size());
}

double mae_offsets(std::span<const int> predicted, std::span<const int> actual) {
    if (predicted.size() != actual.size()) throw std::invalid_argument("MAE needs equal-length vectors");
    if (predicted.empty()) throw std::invalid_argument("MAE of an empty set");
    long long total = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) total += std::abs(predicted[i] - actual[i]);
    return static_cast<double>(total) * kPeriodHours / static_cast<double>(predicted.size());
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
    if (x.rows() == 0) throw std::invalid_argument("cannot standardize an empty matrix");
    Standardizer s;
    s.mean_ = x.colwise().mean();
    Eigen::MatrixXd centred = x.rowwise() - s.mean_;
    s.scale_ = (centred.colwise().squaredNorm() / static_cast<double>(x.rows())).cwiseSqrt();
    for (Eigen::Index j = 0; j < s.scale_.size(); ++j) {
        if (!(s.scale_[j] > 1e-12 * std::max(1.0, std::abs(s.mean_[j])))) s.scale_[j] = 1.0;
    }
    return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& x) const {
    if (x.cols() != mean_.size()) throw std::invalid_argument("feature arity mismatch");
    return (x.rowwise() - mean_).array().rowwise() / scale_.array();
}

Eigen::RowVectorXd Standardizer::transform_row(const Eigen::RowVectorXd& x) const {
    if (x.size() != mean_.size()) throw std::invalid_argument("feature arity mismatch");
    return (x - mean_).array() / scale_.array();
}

std::string_view to_string(RegressorKind kind) noexcept {
    switch (kind) {
        case RegressorKind::Mean: return "mean";
        case RegressorKind::Ols: return "ols";
        case RegressorKind::Ridge: return "ridge";
        case RegressorKind::Lasso: return "lasso";
        case RegressorKind::Knn: return "knn";
    }
    return "?";
}

RegressorKind parse_regressor(std::string_view name) {
    for (auto k : {RegressorKind::Mean, RegressorKind::Ols, RegressorKind::Ridge, RegressorKind::Lasso,
                   RegressorKind::Knn}) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown regressor '" + std::string(name) + "'");
}

void RegressorSpec::validate() const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("penalty lambda must be non-negative");
    if (k < 1) throw std::invalid_argument("kNN k must be at least 1");
    if (!(lasso_tolerance > 0.0) || lasso_max_sweeps < 1) throw std::invalid_argument("bad lasso stopping rule");
}

namespace {

// Coordinate descent from a warm start until no coordinate moves the fit by more
// than `tolerance` times the objective at b = 0. Returns false when the sweep budget runs out.
bool lasso_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, const Eigen::VectorXd& norm, double lambda,
                 double tolerance, int& sweeps_left, Eigen::VectorXd& beta, Eigen::VectorXd& residual) {
    const auto n = static_cast<double>(x.rows());
    const double threshold = tolerance * 0.5 * t.squaredNorm() / n;
    while (sweeps_left-- > 0) {
        double largest = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (norm[j] == 0.0) continue;
            double rho = x.col(j).dot(residual) / n + norm[j] * beta[j];
            double updated = std::copysign(std::max(0.0, std::abs(rho) - lambda), rho) / norm[j];
            double change = updated - beta[j];
            if (change != 0.0) {
                residual -= change * x.col(j);
                beta[j] = updated;
                largest = std::max(largest, norm[j] * change * change);
            }
        }
        if (largest < threshold) return true;
    }
    return false;
}

}  // namespace

Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, double lambda,
                                         double tolerance, int max_sweeps) {
    const auto n = static_cast<double>(x.rows());
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
    Eigen::VectorXd residual = t;
    if (t.squaredNorm() == 0.0) return beta;
    Eigen::VectorXd norm = x.colwise().squaredNorm().transpose() / n;
    // Small penalties are reached along a decreasing path of warm starts.
    const double lambda_max = (x.transpose() * t).cwiseAbs().maxCoeff() / n;
    int sweeps_left = max_sweeps;
    for (double step = lambda_max * 0.5; step > lambda; step *= 0.5) {
        if (!lasso_solve(x, t, norm, step, std::max(tolerance, 1e-4), sweeps_left, beta, residual)) break;
    }
    if (lasso_solve(x, t, norm, lambda, tolerance, sweeps_left, beta, residual)) return beta;
    throw std::runtime_error("lasso did not converge");
}

Regressor Regressor::fit(const RegressorSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& t) {
    spec.validate();
    if (x.rows() == 0 || x.rows() != t.size()) throw std::invalid_argument("fit needs matching, non-empty X and t");
    if (!x.allFinite() || !t.allFinite()) throw std::invalid_argument("fit data must be finite");

    Regressor m;
    m.spec_ = spec;
    m.arity_ = static_cast<std::size_t>(x.cols());
    const double t_mean = t.mean();
    if (spec.kind == RegressorKind::Mean) {
        m.intercept_ = t_mean;
        return m;
    }

    m.scaled_ = spec.standardize;
    Eigen::MatrixXd z;
    if (m.scaled_) {
        m.scaler_ = Standardizer::fit(x);
        z = m.scaler_.transform(x);
    } else {
        z = x;
    }

    if (spec.kind == RegressorKind::Knn) {
        m.train_x_ = std::move(z);
        m.train_t_ = t;
        return m;
    }

    // Linear models fit the centred problem; the intercept restores the means.
    Eigen::RowVectorXd z_mean = z.colwise().mean();
    Eigen::MatrixXd zc = z.rowwise() - z_mean;
    Eigen::VectorXd tc = t.array() - t_mean;

    switch (spec.kind) {
        case RegressorKind::Ols: {
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(zc);
            qr.setThreshold(1e-10);
            const Eigen::Index rank = qr.rank();
            if (rank < zc.cols()) {
                if (!spec.drop_aliased) {
                    throw std::runtime_error("OLS normal equations are singular (rank " + std::to_string(rank) +
                                             " of " + std::to_string(zc.cols()) + "); use ridge instead");
                }
                m.coef_ = Eigen::VectorXd::Zero(zc.cols());
                if (rank > 0) {
                    auto kept = qr.colsPermutation().indices().head(rank);
                    Eigen::MatrixXd sub(zc.rows(), rank);
                    for (Eigen::Index j = 0; j < rank; ++j) sub.col(j) = zc.col(kept[j]);
                    Eigen::VectorXd b = sub.colPivHouseholderQr().solve(tc);
                    for (Eigen::Index j = 0; j < rank; ++j) m.coef_[kept[j]] = b[j];
                }
            } else {
                m.coef_ = qr.solve(tc);
            }
            break;
        }
        case RegressorKind::Ridge: {
            Eigen::MatrixXd gram = zc.transpose() * zc;
            gram.diagonal().array() += spec.lambda;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
            if (ldlt.info() != Eigen::Success) throw std::runtime_error("ridge system could not be factorized");
            m.coef_ = ldlt.solve(zc.transpose() * tc);
            break;
        }
        case RegressorKind::Lasso:
            m.coef_ = lasso_coordinate_descent(zc, tc, spec.lambda, spec.lasso_tolerance, spec.lasso_max_sweeps);
            break;
        default:
            break;
    }
    m.intercept_ = t_mean - z_mean.dot(m.coef_);
    return m;
}

double Regressor::predict(const Eigen::RowVectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != arity_) throw std::invalid_argument("feature arity mismatch");
    if (spec_.kind == RegressorKind::Mean) return intercept_;
    Eigen::RowVectorXd z = scaled_ ? scaler_.transform_row(x) : x;
    if (spec_.kind != RegressorKind::Knn) return intercept_ + z.dot(coef_);

    const Eigen::Index n = train_x_.rows();
    std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) dist[static_cast<std::size_t>(i)] = {(train_x_.row(i) - z).squaredNorm(), i};
    auto k = static_cast<std::size_t>(std::min<Eigen::Index>(spec_.k, n));
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += train_t_[dist[i].second];
    return total / static_cast<double>(k);
}

Eigen::VectorXd Regressor::predict(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict(Eigen::RowVectorXd(x.row(i)));
    return out;
}

SelectionResult select_by_folds(std::span<const RegressorSpec> candidates, const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& t, std::span<const std::vector<std::size_t>> folds) {
    if (candidates.empty()) throw std::invalid_argument("no candidates to select from");
    if (folds.size() < 2) throw std::invalid_argument("selection needs at least two folds");

    auto rows = [&](const std::vector<std::size_t>& idx) {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
        for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
        return out;
    };
    auto values = [&](const std::vector<std::size_t>& idx) {
        Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = t[static_cast<Eigen::Index>(idx[i])];
        return out;
    };

    SelectionResult result;
    std::size_t best = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double total = 0.0;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            std::vector<std::size_t> train;
            for (std::size_t g = 0; g < folds.size(); ++g) {
                if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
            }
            auto model = Regressor::fit(candidates[c], rows(train), values(train));
            Eigen::VectorXd predicted = model.predict(rows(folds[f]));
            Eigen::VectorXd actual = values(folds[f]);
            total += mae_hours(std::span<const double>(predicted.data(), static_cast<std::size_t>(predicted.size())),
                               std::span<const double>(actual.data(), static_cast<std::size_t>(actual.size())));
        }
        result.fold_mae.push_back(total / static_cast<double>(folds.size()));
        if (result.fold_mae[c] < result.fold_mae[best]) best = c;
    }
    result.spec = candidates[best];
    return result;
}

}  // namespace breadlearn
