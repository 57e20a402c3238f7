#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "breadlearn/periods.hpp"

namespace breadlearn {

// Saw-tooth daily comfort curve: three meal peaks with heights and
// period-of-day locations, approached from the left at a common slope.
struct ComfortParams {
    std::array<double, 3> heights{};
    std::array<int, 3> locations{};  // period-of-day, strictly increasing
    double slope = 0.0;               // comfort units per period

    void validate() const;
    friend bool operator==(const ComfortParams&, const ComfortParams&) = default;
};

// Where the scenario offsets sit on the clock. Offset o finishes at clock period
// run_period_of_day + o, counted from midnight of the run day.
struct ScenarioWindow {
    int run_period_of_day = 0;
    int first_offset = 0;
    int count = 0;
};

// Peaks recur on the run day and the following day; later offsets see no peak.
inline constexpr int kPeakDays = 2;

// Peak instances (offset, height) falling inside the window, in time order.
struct PeakInstance {
    int offset;
    double height;
};

std::vector<PeakInstance> peak_instances(const ComfortParams& omega, const ScenarioWindow& window);

// max(0, max over in-window peak instances at or after `offset` of h - slope * (t - offset)).
[[nodiscard]] double comfort_eval(int offset, const ComfortParams& omega, const ScenarioWindow& window);

// Same values for every offset of the window: out[j] = comfort_eval(first_offset + j).
void comfort_row(const ComfortParams& omega, const ScenarioWindow& window, std::span<double> out);

// Observable situation: discretized bread stock and the weekend flag.
struct SituationCell {
    int stock_bucket = 0;
    int weekend = 0;

    [[nodiscard]] int index() const noexcept { return weekend * 4 + stock_bucket; }
    static SituationCell from_index(int index);
    friend bool operator==(const SituationCell&, const SituationCell&) = default;
};

inline constexpr int kSituationCells = 8;

struct SituationFeatures {
    double stock_kg = 0.0;
    double weekend = 0.0;
};

struct StockBinning {
    double bucket_width_kg = 0.15;
    int buckets = 4;
};

[[nodiscard]] SituationCell situation_of(double stock_kg, bool weekend, const StockBinning& bins = {});
// Representative features of a cell: bucket midpoint and the flag.
[[nodiscard]] SituationFeatures cell_features(SituationCell cell, const StockBinning& bins = {});

// One grid axis: levels min, min + step, ... up to max, then every `stride`-th level kept.
struct GridAxis {
    double min = 0.0;
    double max = 0.0;
    double step = 1.0;
    int stride = 1;

    [[nodiscard]] int full_levels() const;
    [[nodiscard]] int levels() const;
    [[nodiscard]] double value(int level) const;
};

struct GridSpec {
    std::array<GridAxis, 3> locations{
        GridAxis{30, 38, 2, 1},   // 07:30 .. 09:30
        GridAxis{50, 58, 2, 1},   // 12:30 .. 14:30
        GridAxis{78, 86, 2, 1}};  // 19:30 .. 21:30
    GridAxis heights{9.0, 14.7, 0.3, 2};
    GridAxis slopes{0.5, 0.9, 0.1, 1};

    static GridSpec full_grid();
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] std::uint64_t hash() const;
};

class HypothesisGrid {
public:
    explicit HypothesisGrid(GridSpec spec);

    [[nodiscard]] const GridSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] std::size_t hypothesis_count() const noexcept { return size_ * kSituationCells; }

    [[nodiscard]] ComfortParams params(std::size_t index) const;
    [[nodiscard]] std::size_t index_of(const ComfortParams& omega) const;

    // Level index per axis, in enumeration order (l1, l2, l3, h1, h2, h3, slope).
    [[nodiscard]] std::array<int, 7> levels_of(std::size_t index) const;
    [[nodiscard]] const std::array<int, 7>& dims() const noexcept { return dims_; }
    [[nodiscard]] std::span<const double> axis_values(std::size_t axis) const { return values_.at(axis); }

private:
    GridSpec spec_;
    std::array<int, 7> dims_{};
    std::array<std::vector<double>, 7> values_;
    std::size_t size_ = 0;
};

[[nodiscard]] HypothesisGrid build_grid(const GridSpec& spec);

}  // namespace breadlearn
