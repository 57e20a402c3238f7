#include "breadlearn/consumer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace breadlearn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

void validate_meals(const std::vector<MealSlot>& meals) {
    for (const auto& m : meals) {
        if (m.period_of_day < 0 || m.period_of_day >= kPeriodsPerDay) {
            throw std::invalid_argument("meal period outside the day");
        }
        if (m.mean_kg < 0.0 || m.jitter_kg < 0.0) {
            throw std::invalid_argument("meal amounts must be non-negative");
        }
    }
}

}  // namespace

void ConsumerProfile::validate() const {
    if (!(satisfaction_per_kg >= 0.0)) throw std::invalid_argument("satisfaction must be non-negative");
    if (!(half_life_hours > 0.0)) throw std::invalid_argument("freshness half-life must be positive");
    if (!(stale_fraction >= 0.0 && stale_fraction < 1.0)) {
        throw std::invalid_argument("stale fraction must lie in [0,1)");
    }
    if (!(trigger_kg >= 0.0 && loaf_kg > trigger_kg)) {
        throw std::invalid_argument("loaf mass must exceed the scarcity trigger");
    }
    if (initial_stock_kg < 0.0) throw std::invalid_argument("initial stock must be non-negative");
    if (planning_period < 0 || planning_period >= kPeriodsPerDay) {
        throw std::invalid_argument("planning period outside the day");
    }
    if (goal_horizon < 1 || scenario_horizon < 2) throw std::invalid_argument("horizon too short");
    validate_meals(weekday_meals);
    validate_meals(weekend_meals);
}

SeedPlan SeedPlan::from(std::uint64_t seed) noexcept {
    return SeedPlan{splitmix64(seed ^ 0x7072696365ULL), splitmix64(seed ^ 0x6d65616c73ULL)};
}

MealSchedule MealSchedule::draw(std::size_t days, const ConsumerProfile& profile, std::uint64_t seed) {
    std::vector<double> amounts(days * kPeriodsPerDay, 0.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t day = 0; day < days; ++day) {
        const auto& slots = is_weekend_day(static_cast<std::int64_t>(day)) ? profile.weekend_meals
                                                                           : profile.weekday_meals;
        // One appetite draw per day keeps the relative size of the day's meals.
        double appetite = unit(rng);
        for (const auto& slot : slots) {
            double amount = std::max(0.0, slot.mean_kg + slot.jitter_kg * appetite);
            amounts[day * kPeriodsPerDay + static_cast<std::size_t>(slot.period_of_day)] += amount;
        }
    }
    return MealSchedule(std::move(amounts));
}

double freshness(Period periods_since_bake, const ConsumerProfile& profile) {
    if (periods_since_bake < 0) throw std::invalid_argument("negative bread age");
    double age = static_cast<double>(periods_since_bake) / profile.half_life_periods();
    double fresh = profile.freshness_shape == FreshnessShape::Exponential
                       ? std::exp(-std::numbers::ln2 * age)
                       : std::max(0.0, 1.0 - 0.5 * age);
    return profile.stale_fraction + (1.0 - profile.stale_fraction) * fresh;
}

double goal_value(int offset, const HouseholdState& state, const ConsumerProfile& consumer,
                  const PowerProfile& appliance, const PriceSeries& prices, const MealSchedule& meals) {
    auto space = scenario_space(appliance, state.now, consumer.scenario_horizon);
    if (!space.contains(offset)) throw std::invalid_argument("infeasible finish offset");

    double stock = state.stock_kg;
    Period bake = state.bake_time;
    double comfort = 0.0;
    for (int s = 1; s <= consumer.goal_horizon; ++s) {
        Period t = state.now + s;
        if (s == offset) {
            stock += consumer.loaf_kg;
            bake = t;
        }
        double e = meals.at(t);
        if (e > 0.0) {
            double eaten = std::min(stock, e);
            comfort += consumer.satisfaction_per_kg * freshness(t - bake, consumer) * eaten;
            stock -= eaten;
        }
    }
    return comfort - scenario_cost(appliance, prices, state.now, offset);
}

int optimal_finish(const HouseholdState& state, const ConsumerProfile& consumer,
                   const PowerProfile& appliance, const PriceSeries& prices, const MealSchedule& meals) {
    auto space = scenario_space(appliance, state.now, consumer.scenario_horizon);
    if (space.count <= 0) throw std::invalid_argument("empty scenario space");
    int best = space.first_offset;
    double best_value = goal_value(best, state, consumer, appliance, prices, meals);
    for (int o = space.first_offset + 1; o <= space.last_offset(); ++o) {
        double v = goal_value(o, state, consumer, appliance, prices, meals);
        if (v > best_value) {
            best_value = v;
            best = o;
        }
    }
    return best;
}

ChoicePolicy goal_policy() {
    return [](const PlanningContext& ctx) {
        return optimal_finish(ctx.state, ctx.consumer, ctx.appliance, ctx.prices, ctx.meals);
    };
}

Dataset simulate(std::size_t days, VolatilityLevel level, std::uint64_t seed, const SimulationSetup& setup,
                 const ChoicePolicy& policy) {
    if (days == 0) throw std::invalid_argument("simulation needs at least one day");
    setup.consumer.validate();
    // Planning on the last day looks up to two days ahead.
    std::size_t horizon_days = days + static_cast<std::size_t>(
        (setup.consumer.scenario_horizon + setup.consumer.goal_horizon) / kPeriodsPerDay + 2);
    auto seeds = SeedPlan::from(seed);
    auto prices = generate_price_horizon(horizon_days, level, setup.tariff, setup.volatility, seeds.prices);
    auto meals = MealSchedule::draw(horizon_days, setup.consumer, seeds.meals);
    auto data = simulate_with(days, prices, meals, setup, policy);
    data.meta.volatility = std::string(to_string(level));
    data.meta.seed = seed;
    return data;
}

Dataset simulate_with(std::size_t days, const PriceSeries& prices, const MealSchedule& meals,
                      const SimulationSetup& setup, const ChoicePolicy& policy) {
    const auto& consumer = setup.consumer;
    consumer.validate();
    const Period end = static_cast<Period>(days) * kPeriodsPerDay;

    HouseholdState state{consumer.initial_stock_kg, -12, 0};
    Period last_finish = state.bake_time;
    Period pending = -1;  // finish period of the scheduled bake, -1 when none
    std::vector<double> stock_at(static_cast<std::size_t>(end), 0.0);

    Dataset data;
    data.meta.days = static_cast<std::int64_t>(days);
    data.meta.first_offset = setup.appliance.duration();
    for (Period t = 0; t < end; ++t) {
        if (pending == t) {
            state.stock_kg += consumer.loaf_kg;
            state.bake_time = t;
            last_finish = t;
            pending = -1;
        }
        if (double e = meals.at(t); e > 0.0) state.stock_kg -= std::min(state.stock_kg, e);
        stock_at[static_cast<std::size_t>(t)] = state.stock_kg;

        if (period_of_day(t) != consumer.planning_period || pending >= 0 || !(state.stock_kg < consumer.trigger_kg)) {
            continue;
        }
        state.now = t;
        bool weekend = is_weekend_day(day_of(t) + 1);
        auto costs = cost_vector(setup.appliance, prices, t, consumer.scenario_horizon);
        ScenarioWindow window{period_of_day(t), setup.appliance.duration(), static_cast<int>(costs.size())};
        PlanningContext ctx{state, consumer, setup.appliance, prices, meals, costs, window,
                            situation_of(state.stock_kg, weekend, setup.binning)};
        int offset = policy ? policy(ctx) : optimal_finish(state, consumer, setup.appliance, prices, meals);
        if (offset < window.first_offset || offset >= window.first_offset + window.count) {
            throw std::logic_error("choice policy returned an infeasible offset");
        }

        SimRun run;
        run.run_id = static_cast<std::int64_t>(data.runs.size()) + 1;
        run.day = day_of(t);
        run.weekend = weekend;
        run.run_period = t;
        run.stock_kg = state.stock_kg;
        run.periods_since_last = t - last_finish;
        run.stock_history.resize(kPeriodsPerDay);
        for (int k = 0; k < kPeriodsPerDay; ++k) {
            Period s = t - (kPeriodsPerDay - 1) + k;
            run.stock_history[static_cast<std::size_t>(k)] =
                s >= 0 ? stock_at[static_cast<std::size_t>(s)] : consumer.initial_stock_kg;
        }
        run.costs = std::move(costs);
        run.first_offset = window.first_offset;
        run.chosen_offset = offset;
        data.runs.push_back(std::move(run));
        pending = t + offset;
    }
    return data;
}

}  // namespace breadlearn
