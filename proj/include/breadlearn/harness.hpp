#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "breadlearn/baselines.hpp"
#include "breadlearn/config.hpp"
#include "breadlearn/learner.hpp"

namespace breadlearn {

// Indices into a run list. The hold-out is the chronological tail; the training
// part is cut into contiguous folds whose sizes differ by at most one.
struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> holdout;
    std::vector<std::vector<std::size_t>> folds;

    void validate(std::size_t runs) const;
};

inline constexpr std::size_t kMinimumRuns = 10;

[[nodiscard]] Split chronological_split(std::size_t runs, double holdout_ratio, int folds);

// run_id,role with role in {train, fold1..foldF, holdout}; a training run has a
// train row and a fold row.
void write_split_csv(std::ostream& out, const Split& split, std::span<const SimRun> runs);
[[nodiscard]] Split read_split_csv(std::istream& in, std::span<const SimRun> runs);

struct ResultRow {
    std::string method;
    std::string dataset;
    std::string split;
    double mae_hours = 0.0;
    std::size_t n_train = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr const char* kResultsHeader = "method,dataset,split,mae_hours,n_train,seed";

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);
[[nodiscard]] std::vector<ResultRow> read_results_csv(std::istream& in);
// Appends `extra` after `base`; rows of `base` are never touched.
[[nodiscard]] std::vector<ResultRow> merge_results(std::vector<ResultRow> base, std::span<const ResultRow> extra);

struct PredictionRow {
    std::string method;
    std::string dataset;
    std::int64_t run_id = 0;
    double predicted_hours = 0.0;
    double actual_hours = 0.0;
};

inline constexpr const char* kPredictionsHeader = "method,dataset,run_id,predicted_hours,actual_hours";

void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows);
[[nodiscard]] std::vector<PredictionRow> read_predictions_csv(std::istream& in);
// MAE per (method, dataset), recomputed from stored predictions.
[[nodiscard]] std::map<std::pair<std::string, std::string>, double> rescore(std::span<const PredictionRow> rows);

// Name used in result rows: the volatility recorded with the data, else the file stem.
[[nodiscard]] std::string dataset_name(const Dataset& data, const std::filesystem::path& path);

struct BaselineChoice {
    RegressorSpec spec;
    double fold_mae = 0.0;
};

// Hyperparameters of each native baseline chosen on the training folds.
[[nodiscard]] std::vector<BaselineChoice> select_baselines(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                                                           const std::vector<std::vector<std::size_t>>& folds,
                                                           const HarnessSettings& settings);

struct CrossvalReport {
    Split split;
    LearnerParams bayes_params;
    std::vector<TuneCandidate> bayes_candidates;
    std::vector<BaselineChoice> baselines;
    std::vector<ResultRow> results;
    std::vector<PredictionRow> predictions;
};

[[nodiscard]] CrossvalReport run_crossval(const Dataset& data, const std::string& name, const ExperimentConfig& config,
                                          const HypothesisGrid& grid, std::uint64_t seed);

struct CurvePoint {
    std::size_t n = 0;
    std::vector<double> mae;  // one per repeat
    double mean = 0.0;
    double stddev = 0.0;  // sample stddev, 0 for a single repeat
};

struct CurveReport {
    LearnerParams params;
    std::size_t train_size = 0;
    std::size_t holdout_size = 0;
    std::vector<CurvePoint> points;
};

// Subsets of the training split are drawn without replacement and scored on the
// hold-out. The full training size is always the last point, with one repeat.
[[nodiscard]] CurveReport run_learning_curve(const Dataset& data, const ExperimentConfig& config,
                                             const HypothesisGrid& grid, std::uint64_t seed);

// True when each step from n to the next larger n does not rise by more than the
// pooled stddev of the two points.
[[nodiscard]] bool weakly_decreasing(std::span<const CurvePoint> points);

void write_curve_csv(std::ostream& out, const CurveReport& report);

struct NamedDataset {
    std::string name;
    Dataset data;
};

struct CompareReport {
    std::vector<ResultRow> results;
    std::vector<PredictionRow> predictions;
    LearnerParams bayes_params;
    std::vector<BaselineChoice> baselines;
};

// Every method is tuned and fitted on the training split of `reference` and then
// scored on the hold-out of each dataset.
[[nodiscard]] CompareReport run_compare(const NamedDataset& reference, std::span<const NamedDataset> datasets,
                                        const ExperimentConfig& config, const HypothesisGrid& grid,
                                        std::uint64_t seed);

// Methods as rows, datasets as columns.
void write_result_table(std::ostream& out, std::span<const ResultRow> rows);

void write_bar_chart_svg(std::ostream& out, std::span<const ResultRow> rows, const std::string& title);
void write_curve_svg(std::ostream& out, const CurveReport& report, const std::string& title);

}  // namespace breadlearn
