#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "breadlearn/consumer.hpp"

using namespace breadlearn;

namespace {

struct Meal {
    Period t;
    double kg;
};

// Event-driven re-simulation: walks the meals only and inserts the bake before
// the first meal at or after the finish.
double naive_goal(int offset, double stock, Period bake, Period now, const ConsumerProfile& c,
                  const PowerProfile& a, const PriceSeries& prices, const std::vector<Meal>& meals) {
    auto fresh = [&](Period age) {
        double hl = c.half_life_hours * 4.0;
        double premium = c.freshness_shape == FreshnessShape::Linear ? std::max(0.0, 1.0 - age / (2.0 * hl))
                                                                     : std::pow(0.5, age / hl);
        return c.stale_fraction + (1.0 - c.stale_fraction) * premium;
    };
    Period finish = now + offset;
    bool baked = false;
    double comfort = 0.0;
    for (const auto& m : meals) {
        if (m.t <= now || m.t > now + c.goal_horizon) continue;
        if (!baked && finish <= m.t && offset <= c.goal_horizon) {
            stock += c.loaf_kg;
            bake = finish;
            baked = true;
        }
        double eaten = std::min(stock, m.kg);
        comfort += c.satisfaction_per_kg * fresh(m.t - bake) * eaten;
        stock -= eaten;
    }
    double cost = 0.0;
    for (int tau = 0; tau < a.duration(); ++tau) cost += a.kw(tau) * prices.at(finish - tau) * 0.25;
    return comfort - cost;
}

MealSchedule schedule_of(std::size_t days, const std::vector<Meal>& meals) {
    std::vector<double> amounts(days * kPeriodsPerDay, 0.0);
    for (const auto& m : meals) amounts[static_cast<std::size_t>(m.t)] += m.kg;
    return MealSchedule(amounts);
}

ConsumerProfile exponential_profile() {
    ConsumerProfile c;
    c.freshness_shape = FreshnessShape::Exponential;
    c.half_life_hours = 3.0;
    c.stale_fraction = 0.0;
    return c;
}

}  // namespace

TEST(Freshness, ZeroAgeIsOne) {
    EXPECT_DOUBLE_EQ(freshness(0, ConsumerProfile{}), 1.0);
    EXPECT_DOUBLE_EQ(freshness(0, exponential_profile()), 1.0);
}

TEST(Freshness, HalfAfterOneHalfLife) {
    auto c = exponential_profile();
    EXPECT_NEAR(freshness(12, c), 0.5, 1e-15);
    c.freshness_shape = FreshnessShape::Linear;
    EXPECT_NEAR(freshness(12, c), 0.5, 1e-15);
}

TEST(Freshness, ExponentialStrictlyDecreasing) {
    auto c = exponential_profile();
    for (Period t = 0; t < 400; ++t) EXPECT_LT(freshness(t + 1, c), freshness(t, c));
    EXPECT_GT(freshness(400, c), 0.0);
}

TEST(Freshness, LinearFallsToStaleFloor) {
    ConsumerProfile c;
    for (Period t = 0; t < 200; ++t) EXPECT_LE(freshness(t + 1, c), freshness(t, c));
    double hl = c.half_life_periods();
    EXPECT_DOUBLE_EQ(freshness(static_cast<Period>(std::ceil(2 * hl)), c), c.stale_fraction);
    EXPECT_THROW((void)freshness(-1, c), std::invalid_argument);
}

TEST(GoalValue, NoMealsZeroPricesIsZero) {
    ConsumerProfile c;
    PriceSeries zero(0, std::vector<double>(4 * 96, 0.0));
    MealSchedule none(std::vector<double>(4 * 96, 0.0));
    HouseholdState s{0.1, 0, 84};
    for (int o = 10; o < 192; ++o) EXPECT_EQ(goal_value(o, s, c, default_profile(), zero, none), 0.0);
}

TEST(GoalValue, AmpleStockLeavesOnlyCostDifferences) {
    ConsumerProfile c;
    auto prices = generate_price_horizon(4, VolatilityLevel::Medium, {}, {}, 3);
    std::vector<Meal> meals{{96 + 32, 0.2}};
    auto sched = schedule_of(4, meals);
    HouseholdState s{5.0, 60, 84};
    auto a = default_profile();
    // Old stock covers the meal whenever the new loaf arrives after it.
    for (int o = 60; o < 192; ++o) {
        double diff = goal_value(o, s, c, a, prices, sched) - goal_value(190, s, c, a, prices, sched);
        EXPECT_NEAR(diff, scenario_cost(a, prices, 84, 190) - scenario_cost(a, prices, 84, o), 1e-9) << o;
    }
}

TEST(GoalValue, MatchesEventDrivenResimulation) {
    for (auto c : {ConsumerProfile{}, exponential_profile()}) {
        auto prices = generate_price_horizon(4, VolatilityLevel::High, {}, {}, 17);
        std::vector<Meal> meals{{96 + 32, 0.17}, {96 + 52, 0.21}};
        auto sched = schedule_of(4, meals);
        HouseholdState s{0.1, 84 - 40, 84};
        auto a = default_profile();
        for (int o = 10; o < 192; ++o) {
            EXPECT_NEAR(goal_value(o, s, c, a, prices, sched), naive_goal(o, 0.1, 44, 84, c, a, prices, meals), 1e-9)
                << o;
        }
    }
}

TEST(GoalValue, InfeasibleOffsetThrows) {
    auto prices = generate_price_horizon(4, VolatilityLevel::Low, {}, {}, 1);
    MealSchedule none(std::vector<double>(4 * 96, 0.0));
    HouseholdState s{0.1, 0, 84};
    EXPECT_THROW((void)goal_value(9, s, ConsumerProfile{}, default_profile(), prices, none), std::invalid_argument);
    EXPECT_THROW((void)goal_value(192, s, ConsumerProfile{}, default_profile(), prices, none), std::invalid_argument);
}

TEST(OptimalFinish, AllEqualPicksSmallest) {
    PriceSeries flat(0, std::vector<double>(4 * 96, 2.0));
    MealSchedule none(std::vector<double>(4 * 96, 0.0));
    HouseholdState s{0.1, 0, 84};
    EXPECT_EQ(optimal_finish(s, ConsumerProfile{}, default_profile(), flat, none), 10);
}

TEST(OptimalFinish, NoComfortMinimizesCost) {
    ConsumerProfile c;
    c.satisfaction_per_kg = 0.0;
    auto prices = generate_price_horizon(4, VolatilityLevel::High, {}, {}, 21);
    std::vector<Meal> meals{{96 + 32, 0.2}};
    auto sched = schedule_of(4, meals);
    HouseholdState s{0.0, 0, 84};
    auto costs = cost_vector(default_profile(), prices, 84);
    int cheapest = static_cast<int>(std::min_element(costs.begin(), costs.end()) - costs.begin()) + 10;
    EXPECT_EQ(optimal_finish(s, c, default_profile(), prices, sched), cheapest);
}

TEST(OptimalFinish, MatchesValueTableArgmax) {
    ConsumerProfile c;
    auto prices = generate_price_horizon(5, VolatilityLevel::Medium, {}, {}, 5);
    std::vector<Meal> meals{{96 + 32, 0.15}, {96 + 52, 0.15}, {96 + 78, 0.15}, {192 + 32, 0.15}};
    auto sched = schedule_of(5, meals);
    HouseholdState s{0.05, 30, 84};
    std::vector<double> values;
    for (int o = 10; o < 192; ++o) values.push_back(naive_goal(o, 0.05, 30, 84, c, default_profile(), prices, meals));
    int oracle = static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin()) + 10;
    EXPECT_EQ(optimal_finish(s, c, default_profile(), prices, sched), oracle);
}

TEST(Simulate, NoEatingNoRuns) {
    SimulationSetup setup;
    setup.consumer.initial_stock_kg = 1e6;
    setup.consumer.weekday_meals.clear();
    setup.consumer.weekend_meals.clear();
    EXPECT_TRUE(simulate(60, VolatilityLevel::Medium, 1, setup).runs.empty());
}

TEST(Simulate, BreakfastHeavyUnperturbedNeverFinishesInEvening) {
    SimulationSetup setup;
    setup.consumer.weekday_meals = {{32, 0.25, 0.03}, {52, 0.12, 0.03}, {78, 0.08, 0.03}};
    const std::size_t days = 160;
    auto prices = tile_base_tariff(days + 5, setup.tariff);
    auto meals = MealSchedule::draw(days + 5, setup.consumer, 12);
    auto data = simulate_with(days, prices, meals, setup);
    ASSERT_GE(data.runs.size(), 50u);
    for (const auto& r : data.runs) EXPECT_FALSE(setup.tariff.in_evening(r.finish_period_of_day()));
}

TEST(Simulate, DefaultsGiveRunCountAndMorningMode) {
    auto data = simulate(400, VolatilityLevel::Medium, 42, SimulationSetup{});
    EXPECT_GE(data.runs.size(), 120u);
    EXPECT_LE(data.runs.size(), 260u);
    std::map<int, int> hist;
    for (const auto& r : data.runs) ++hist[r.finish_period_of_day()];
    auto mode = std::max_element(hist.begin(), hist.end(), [](auto& a, auto& b) { return a.second < b.second; });
    EXPECT_GE(mode->first, clock_to_period(6));
    EXPECT_LE(mode->first, clock_to_period(7));
    for (const auto& r : data.runs) EXPECT_FALSE(TariffZones{}.in_evening(r.finish_period_of_day()));
}

TEST(Simulate, DeterministicForSeed) {
    auto a = simulate(120, VolatilityLevel::High, 9, SimulationSetup{});
    auto b = simulate(120, VolatilityLevel::High, 9, SimulationSetup{});
    ASSERT_EQ(a.runs.size(), b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        EXPECT_EQ(a.runs[i].costs, b.runs[i].costs);
        EXPECT_EQ(a.runs[i].stock_history, b.runs[i].stock_history);
        EXPECT_EQ(a.runs[i].chosen_offset, b.runs[i].chosen_offset);
    }
}

TEST(Simulate, RunsAreShapedAndRational) {
    SimulationSetup setup;
    const std::size_t days = 150;
    auto seeds = SeedPlan::from(31);
    auto prices = generate_price_horizon(days + 5, VolatilityLevel::High, setup.tariff, setup.volatility, seeds.prices);
    auto meals = MealSchedule::draw(days + 5, setup.consumer, seeds.meals);
    auto data = simulate_with(days, prices, meals, setup);
    ASSERT_FALSE(data.runs.empty());
    for (const auto& r : data.runs) {
        ASSERT_EQ(r.costs.size(), 182u);
        ASSERT_EQ(r.stock_history.size(), 96u);
        EXPECT_GE(r.chosen_offset, 10);
        EXPECT_LT(r.chosen_offset, 192);
        EXPECT_EQ(r.weekend, is_weekend_day(r.day + 1));
        HouseholdState s{r.stock_kg, r.run_period - r.periods_since_last, r.run_period};
        double chosen = goal_value(r.chosen_offset, s, setup.consumer, setup.appliance, prices, meals);
        for (int o = 10; o < 192; ++o) {
            EXPECT_LE(goal_value(o, s, setup.consumer, setup.appliance, prices, meals), chosen) << r.run_id;
        }
    }
}

TEST(Simulate, StockIsConserved) {
    SimulationSetup setup;
    const std::size_t days = 120;
    auto seeds = SeedPlan::from(8);
    auto prices = generate_price_horizon(days + 5, VolatilityLevel::Medium, setup.tariff, setup.volatility, seeds.prices);
    auto meals = MealSchedule::draw(days + 5, setup.consumer, seeds.meals);
    auto data = simulate_with(days, prices, meals, setup);
    std::set<Period> bakes;
    for (const auto& r : data.runs) bakes.insert(r.run_period + r.chosen_offset);
    for (const auto& r : data.runs) {
        EXPECT_DOUBLE_EQ(r.stock_history.back(), r.stock_kg);
        for (int k = 1; k < 96; ++k) {
            Period t = r.run_period - 95 + k;
            if (t <= 0) continue;
            double before = r.stock_history[static_cast<std::size_t>(k - 1)];
            if (bakes.count(t)) before += setup.consumer.loaf_kg;
            double expected = before - std::min(before, meals.at(t));
            EXPECT_NEAR(r.stock_history[static_cast<std::size_t>(k)], expected, 1e-12);
            EXPECT_GE(r.stock_history[static_cast<std::size_t>(k)], 0.0);
        }
    }
}

TEST(MealSchedule, WeekendTemplateAndSharedDraw) {
    ConsumerProfile c;
    auto m = MealSchedule::draw(14, c, 4);
    for (std::int64_t day = 0; day < 14; ++day) {
        const auto& slots = is_weekend_day(day) ? c.weekend_meals : c.weekday_meals;
        double z0 = (m.at(day * 96 + slots[0].period_of_day) - slots[0].mean_kg) / slots[0].jitter_kg;
        for (const auto& s : slots) {
            double amount = m.at(day * 96 + s.period_of_day);
            EXPECT_GE(amount, 0.0);
            if (amount > 0.0) {
                EXPECT_NEAR((amount - s.mean_kg) / s.jitter_kg, z0, 1e-9);
            }
        }
    }
    EXPECT_EQ(m.at(3 * 96 + clock_to_period(9)), 0.0);
    EXPECT_GT(m.at(5 * 96 + clock_to_period(9)), 0.0);
}
