#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "breadlearn/appliance.hpp"
#include "breadlearn/comfort.hpp"
#include "breadlearn/periods.hpp"
#include "breadlearn/price_model.hpp"

namespace breadlearn {

// Amounts are mean + jitter * z with one standard normal z per day shared by
// all of that day's meals, truncated at zero.
struct MealSlot {
    int period_of_day = 0;
    double mean_kg = 0.0;
    double jitter_kg = 0.0;
};

// How the fresh-bread premium fades: exponentially with the half-life, or
// linearly to zero over two half-lives.
enum class FreshnessShape { Exponential, Linear };

struct ConsumerProfile {
    double satisfaction_per_kg = 60.0;
    double half_life_hours = 1.9;
    double stale_fraction = 0.12;  // freshness floor of old bread
    FreshnessShape freshness_shape = FreshnessShape::Linear;
    double loaf_kg = 0.75;
    double trigger_kg = 0.2;
    double initial_stock_kg = 0.5;
    int planning_period = clock_to_period(21);
    // From 21:00 to the end of the next day; bread eaten later does not enter F.
    int goal_horizon = 2 * kPeriodsPerDay - clock_to_period(21) - 1;
    int scenario_horizon = kDefaultScenarioHorizon;
    std::vector<MealSlot> weekday_meals{
        {clock_to_period(8), 0.15, 0.03},
        {clock_to_period(13), 0.15, 0.03},
        {clock_to_period(19, 30), 0.15, 0.03}};
    std::vector<MealSlot> weekend_meals{
        {clock_to_period(9), 0.195, 0.039},
        {clock_to_period(13), 0.195, 0.039},
        {clock_to_period(19, 30), 0.195, 0.039}};

    void validate() const;
    [[nodiscard]] double half_life_periods() const noexcept { return half_life_hours / kPeriodHours; }
};

// Realized eating schedule e(t) over absolute periods [0, size()).
class MealSchedule {
public:
    MealSchedule() = default;
    explicit MealSchedule(std::vector<double> amounts) : amounts_(std::move(amounts)) {}

    // Draws every day's amounts from the profile's templates.
    static MealSchedule draw(std::size_t days, const ConsumerProfile& profile, std::uint64_t seed);

    [[nodiscard]] double at(Period t) const noexcept {
        return t >= 0 && static_cast<std::size_t>(t) < amounts_.size()
                   ? amounts_[static_cast<std::size_t>(t)]
                   : 0.0;
    }
    [[nodiscard]] std::size_t size() const noexcept { return amounts_.size(); }

private:
    std::vector<double> amounts_;
};

struct HouseholdState {
    double stock_kg = 0.0;
    Period bake_time = 0;  // finish period of the loaf the stock came from
    Period now = 0;
};

// Fraction in (0,1]: stale + (1 - stale) * premium, premium = 1 at bake time and 1/2 after one half-life.
[[nodiscard]] double freshness(Period periods_since_bake, const ConsumerProfile& profile);

// Everything a finish-time decision may look at.
struct PlanningContext {
    const HouseholdState& state;
    const ConsumerProfile& consumer;
    const PowerProfile& appliance;
    const PriceSeries& prices;
    const MealSchedule& meals;
    std::span<const double> costs;  // cost_vector at state.now
    ScenarioWindow window;
    SituationCell cell;
};

using ChoicePolicy = std::function<int(const PlanningContext&)>;

// Comfort minus energy cost of finishing `offset` periods after state.now,
// simulated over consumer.goal_horizon periods.
[[nodiscard]] double goal_value(int offset, const HouseholdState& state, const ConsumerProfile& consumer,
                                const PowerProfile& appliance, const PriceSeries& prices,
                                const MealSchedule& meals);

// Exhaustive argmax of goal_value; smallest offset on ties.
[[nodiscard]] int optimal_finish(const HouseholdState& state, const ConsumerProfile& consumer,
                                 const PowerProfile& appliance, const PriceSeries& prices,
                                 const MealSchedule& meals);

[[nodiscard]] ChoicePolicy goal_policy();

struct SimRun {
    std::int64_t run_id = 0;
    std::int64_t day = 0;
    bool weekend = false;
    Period run_period = 0;
    double stock_kg = 0.0;
    std::int64_t periods_since_last = 0;
    std::vector<double> stock_history;  // 96 periods ending at the run moment
    std::vector<double> costs;
    int first_offset = 0;
    int chosen_offset = 0;

    [[nodiscard]] int finish_period_of_day() const noexcept {
        return period_of_day(run_period + chosen_offset);
    }
    [[nodiscard]] ScenarioWindow window() const noexcept {
        return ScenarioWindow{period_of_day(run_period), first_offset, static_cast<int>(costs.size())};
    }
};

struct DatasetMeta {
    std::string volatility;
    std::uint64_t seed = 0;
    std::int64_t days = 0;
    std::string consumer_model = "goal";
    int first_offset = 0;  // K, the smallest feasible finish offset
    std::vector<std::pair<std::string, std::string>> config;  // snapshot of the effective settings
};

struct Dataset {
    std::vector<SimRun> runs;
    DatasetMeta meta;
};

struct SimulationSetup {
    ConsumerProfile consumer;
    PowerProfile appliance = default_profile();
    TariffZones tariff;
    VolatilityConfig volatility;
    StockBinning binning;
};

// Derived stage seeds; one user seed fans out to every stochastic stage.
struct SeedPlan {
    std::uint64_t prices;
    std::uint64_t meals;
    static SeedPlan from(std::uint64_t seed) noexcept;
};

[[nodiscard]] Dataset simulate(std::size_t days, VolatilityLevel level, std::uint64_t seed,
                               const SimulationSetup& setup, const ChoicePolicy& policy = {});

// Same loop over caller-provided prices and meals.
[[nodiscard]] Dataset simulate_with(std::size_t days, const PriceSeries& prices, const MealSchedule& meals,
                                    const SimulationSetup& setup, const ChoicePolicy& policy = {});

}  // namespace breadlearn
