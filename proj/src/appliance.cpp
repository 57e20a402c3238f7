#include "breadlearn/appliance.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace breadlearn {

PowerProfile::PowerProfile(std::vector<double> kw_before_finish, bool allow_all_zero)
    : kw_(std::move(kw_before_finish)) {
    if (kw_.empty()) throw std::invalid_argument("power profile must last at least one period");
    if (std::any_of(kw_.begin(), kw_.end(), [](double a) { return !(a >= 0.0); })) {
        throw std::invalid_argument("power draw must be non-negative");
    }
    if (!allow_all_zero && std::none_of(kw_.begin(), kw_.end(), [](double a) { return a > 0.0; })) {
        throw std::invalid_argument("power profile draws no power");
    }
}

PowerProfile PowerProfile::from_phases(std::span<const std::pair<int, double>> phases) {
    std::vector<double> chronological;
    for (auto [periods, kw] : phases) {
        if (periods <= 0) throw std::invalid_argument("profile phase must last at least one period");
        chronological.insert(chronological.end(), static_cast<std::size_t>(periods), kw);
    }
    std::reverse(chronological.begin(), chronological.end());
    return PowerProfile(std::move(chronological));
}

double PowerProfile::energy_kwh() const noexcept {
    return std::accumulate(kw_.begin(), kw_.end(), 0.0) * kPeriodHours;
}

PowerProfile default_profile() {
    static constexpr std::pair<int, double> phases[] = {{2, 0.10}, {4, 0.05}, {4, 0.90}};
    return PowerProfile::from_phases(phases);
}

ScenarioSpace scenario_space(const PowerProfile& profile, Period now, int horizon) {
    if (horizon <= profile.duration()) {
        throw std::invalid_argument("scenario horizon shorter than the program");
    }
    return ScenarioSpace{now, profile.duration(), horizon - profile.duration()};
}

double scenario_cost(const PowerProfile& profile, const PriceSeries& prices, Period now, int offset) {
    if (offset < profile.duration()) throw std::invalid_argument("program does not fit");
    double cost = 0.0;
    for (int tau = 0; tau < profile.duration(); ++tau) {
        cost += profile.kw(tau) * prices.at(now + offset - tau);
    }
    return cost * kPeriodHours;
}

std::vector<double> cost_vector(const PowerProfile& profile, const PriceSeries& prices, Period now,
                                int horizon) {
    auto space = scenario_space(profile, now, horizon);
    std::vector<double> costs(static_cast<std::size_t>(space.count));
    for (int j = 0; j < space.count; ++j) {
        costs[static_cast<std::size_t>(j)] = scenario_cost(profile, prices, now, space.first_offset + j);
    }
    return costs;
}

}  // namespace breadlearn
