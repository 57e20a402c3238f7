#pragma once

#include <span>
#include <utility>
#include <vector>

#include "breadlearn/periods.hpp"
#include "breadlearn/price_model.hpp"

namespace breadlearn {

// Power draw indexed backwards from the finish: kw[0] is the last period of the program.
class PowerProfile {
public:
    PowerProfile() = default;
    explicit PowerProfile(std::vector<double> kw_before_finish, bool allow_all_zero = false);

    // Phases in chronological order, each (periods, kW).
    static PowerProfile from_phases(std::span<const std::pair<int, double>> phases);

    [[nodiscard]] int duration() const noexcept { return static_cast<int>(kw_.size()); }
    [[nodiscard]] double kw(int tau) const noexcept { return kw_[static_cast<std::size_t>(tau)]; }
    [[nodiscard]] std::span<const double> kw() const noexcept { return kw_; }
    [[nodiscard]] double energy_kwh() const noexcept;

private:
    std::vector<double> kw_;
};

// Knead 2 x 0.10 kW, rise 4 x 0.05 kW, bake 4 x 0.90 kW: 10 periods, 1.0 kWh.
[[nodiscard]] PowerProfile default_profile();

// Finish offsets reachable from a run moment: [first_offset, first_offset + count).
struct ScenarioSpace {
    Period now = 0;
    int first_offset = 0;
    int count = 0;

    [[nodiscard]] int last_offset() const noexcept { return first_offset + count - 1; }
    [[nodiscard]] bool contains(int offset) const noexcept {
        return offset >= first_offset && offset < first_offset + count;
    }
};

inline constexpr int kDefaultScenarioHorizon = 2 * kPeriodsPerDay;

[[nodiscard]] ScenarioSpace scenario_space(const PowerProfile& profile, Period now,
                                           int horizon = kDefaultScenarioHorizon);

// Cost of finishing the program `offset` periods after `now`; prices are
// absolute-period indexed (PriceSeries::at).
[[nodiscard]] double scenario_cost(const PowerProfile& profile, const PriceSeries& prices, Period now,
                                   int offset);

// Element j is the cost of finishing at offset K + j; length horizon - K.
[[nodiscard]] std::vector<double> cost_vector(const PowerProfile& profile, const PriceSeries& prices,
                                              Period now, int horizon = kDefaultScenarioHorizon);

}  // namespace breadlearn
