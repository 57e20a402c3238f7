#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "breadlearn/comfort.hpp"
#include "breadlearn/consumer.hpp"

namespace breadlearn {

// One recorded run as the learner sees it: r = (y, c(.), chosen offset).
struct Observation {
    std::int64_t run_id = 0;
    SituationCell cell;
    SituationFeatures features;
    ScenarioWindow window;
    std::vector<double> costs;
    int chosen_offset = 0;

    static Observation from_run(const SimRun& run, const StockBinning& bins = {});
    void validate() const;
};

[[nodiscard]] std::vector<Observation> observations_of(std::span<const SimRun> runs,
                                                       const StockBinning& bins = {});

enum class PriorKind : std::uint32_t { Uniform = 0, Quadratic = 1 };

struct LearnerParams {
    double gamma = 5.0;  // penalty sensitivity
    double beta = 5.0;   // kernel distance sensitivity
    double weight_stock = 1.0;    // per kg
    double weight_weekend = 0.3;  // kg-equivalent of a weekday/weekend mismatch
    double prior_weight = 0.0;    // K0
    PriorKind prior = PriorKind::Uniform;
    unsigned threads = 0;  // 0: hardware concurrency

    void validate() const;
};

// argmax over the window of comfort - cost; smallest offset on ties.
[[nodiscard]] int best_response(const ComfortParams& omega, std::span<const double> costs,
                                const ScenarioWindow& window);

// A consumer whose comfort is exactly `omega` on every day; it picks best_response.
[[nodiscard]] ChoicePolicy comfort_policy(const ComfortParams& omega);

// Sum over offsets of the positive utility regret of the observed choice under omega.
[[nodiscard]] double raw_regret(const ComfortParams& omega, const Observation& r);

// Weighted L1 distance; features and weights must share one arity.
[[nodiscard]] double situation_distance(std::span<const double> y, std::span<const double> y2,
                                        std::span<const double> weights);
[[nodiscard]] double situation_distance(const SituationFeatures& y, const SituationFeatures& y2,
                                        const LearnerParams& params);

[[nodiscard]] double kernel(const SituationFeatures& y, const SituationFeatures& y2,
                            const LearnerParams& params);

// Kernel between the situation cells, on their representative features.
using KernelMatrix = std::array<std::array<double, kSituationCells>, kSituationCells>;
[[nodiscard]] KernelMatrix kernel_matrix(const LearnerParams& params, const StockBinning& bins = {});

// Penalty of hypothesis (y, omega) for the observation: K(y_r, y) * raw_regret.
[[nodiscard]] double penalty(SituationCell y, const ComfortParams& omega, const Observation& r,
                             const LearnerParams& params, const StockBinning& bins = {});

// Prior penalty: squared normalized distance of omega's axis levels from the grid centre.
[[nodiscard]] double prior_penalty(const HypothesisGrid& grid, std::size_t omega_index);

// Accumulated penalties P[omega][y], stored omega-major.
class PenaltyTable {
public:
    PenaltyTable(const HypothesisGrid& grid, const LearnerParams& params);

    [[nodiscard]] std::size_t omega_count() const noexcept { return omega_count_; }
    [[nodiscard]] std::uint64_t observations() const noexcept { return observations_; }
    [[nodiscard]] std::uint64_t grid_hash() const noexcept { return grid_hash_; }
    [[nodiscard]] const LearnerParams& params() const noexcept { return params_; }

    [[nodiscard]] double at(std::size_t omega, SituationCell y) const noexcept {
        return values_[omega * kSituationCells + static_cast<std::size_t>(y.index())];
    }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> mutable_values() noexcept { return values_; }
    void count_observation() noexcept { ++observations_; }

    // Little-endian snapshot: header then float32 body in omega-major order.
    void save(std::ostream& out) const;
    static PenaltyTable load(std::istream& in, const HypothesisGrid& grid);

    friend bool operator==(const PenaltyTable&, const PenaltyTable&) = default;

private:
    PenaltyTable() = default;

    std::size_t omega_count_ = 0;
    std::uint64_t observations_ = 0;
    std::uint64_t grid_hash_ = 0;
    LearnerParams params_;
    std::vector<double> values_;
};

// Per-observation sweep over a contiguous omega range: raw regret and best response
// (as an index into the window) for every hypothesis. Either output may be empty.
void sweep_grid(const HypothesisGrid& grid, const Observation& r, std::size_t begin, std::size_t end,
                std::span<double> regret, std::span<std::uint16_t> response);

// Same sweep over the whole grid, split across `threads` workers.
void sweep_grid_parallel(const HypothesisGrid& grid, const Observation& r, std::span<double> regret,
                         std::span<std::uint16_t> response, unsigned threads);

void update(PenaltyTable& table, const Observation& r, const HypothesisGrid& grid,
            const StockBinning& bins = {});
void update(PenaltyTable& table, std::span<const Observation> batch, const HypothesisGrid& grid,
            const StockBinning& bins = {});

// Adds a precomputed regret row scaled by the kernel column of the observation's cell.
void accumulate_regret(PenaltyTable& table, SituationCell observed, std::span<const double> regret,
                       const KernelMatrix& kernels);
void accumulate_regret(PenaltyTable& table, SituationCell observed, std::span<const float> regret,
                       const KernelMatrix& kernels);

[[nodiscard]] std::vector<double> posterior(const PenaltyTable& table, SituationCell y, double gamma);

// Smallest offset whose cumulative mass reaches half of the total.
[[nodiscard]] int weighted_median(std::span<const std::uint16_t> response_index,
                                  std::span<const double> weights, int first_offset, int count);

[[nodiscard]] int predict(const PenaltyTable& table, const Observation& r, const HypothesisGrid& grid);

[[nodiscard]] std::vector<int> predict_all(const PenaltyTable& table, std::span<const Observation> rs,
                                           const HypothesisGrid& grid);

struct TuneCandidate {
    double beta;
    double gamma;
    double mae_hours;
};

struct TuneResult {
    LearnerParams params;
    std::vector<TuneCandidate> candidates;
    // Table trained on every observation with the chosen beta.
    PenaltyTable table;
};

// Prequential grid search: observation i is predicted from observations before it.
[[nodiscard]] TuneResult tune(std::span<const Observation> train, const HypothesisGrid& grid,
                              std::span<const double> betas, std::span<const double> gammas,
                              const LearnerParams& base, const StockBinning& bins = {});

class ObservationCache;

// Same search over cached sweeps; `train` lists cache indices in chronological order.
[[nodiscard]] TuneResult tune(const ObservationCache& cache, std::span<const std::size_t> train,
                              const HypothesisGrid& grid, std::span<const double> betas,
                              std::span<const double> gammas, const LearnerParams& base,
                              const StockBinning& bins = {});

inline constexpr double kDefaultBetas[] = {1.0, 5.0, 25.0, 100.0, 400.0};
inline constexpr double kDefaultGammas[] = {1.0, 5.0, 25.0, 100.0};

// Raw regrets and responses of a fixed observation list over the grid, kept for
// repeated training on subsets.
class ObservationCache {
public:
    ObservationCache(std::span<const Observation> observations, const HypothesisGrid& grid, unsigned threads);

    [[nodiscard]] std::size_t size() const noexcept { return cells_.size(); }
    [[nodiscard]] std::size_t omega_count() const noexcept { return omega_count_; }
    [[nodiscard]] SituationCell cell(std::size_t i) const { return cells_.at(i); }
    [[nodiscard]] const ScenarioWindow& window(std::size_t i) const { return windows_.at(i); }
    [[nodiscard]] int chosen(std::size_t i) const { return chosen_.at(i); }
    [[nodiscard]] std::span<const float> regret(std::size_t i) const noexcept {
        return {regret_.data() + i * omega_count_, omega_count_};
    }
    [[nodiscard]] std::span<const std::uint16_t> response(std::size_t i) const noexcept {
        return {response_.data() + i * omega_count_, omega_count_};
    }

    [[nodiscard]] PenaltyTable train(std::span<const std::size_t> subset, const HypothesisGrid& grid,
                                     const LearnerParams& params, const StockBinning& bins = {}) const;
    [[nodiscard]] std::vector<int> predict(const PenaltyTable& table,
                                           std::span<const std::size_t> subset) const;

private:
    std::size_t omega_count_ = 0;
    std::vector<SituationCell> cells_;
    std::vector<ScenarioWindow> windows_;
    std::vector<int> chosen_;
    std::vector<float> regret_;
    std::vector<std::uint16_t> response_;
};

}  // namespace breadlearn
