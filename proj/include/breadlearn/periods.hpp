#pragma once

#include <cstdint>

namespace breadlearn {

// Time is quantized into 15-minute periods; absolute period = day * 96 + period_of_day.
inline constexpr int kPeriodsPerDay = 96;
inline constexpr double kPeriodHours = 0.25;

using Period = std::int64_t;

constexpr int period_of_day(Period t) noexcept {
    auto r = static_cast<int>(t % kPeriodsPerDay);
    return r < 0 ? r + kPeriodsPerDay : r;
}

constexpr std::int64_t day_of(Period t) noexcept {
    return (t - period_of_day(t)) / kPeriodsPerDay;
}

// Day 0 is a Monday.
constexpr bool is_weekend_day(std::int64_t day) noexcept {
    auto wd = day % 7;
    return wd == 5 || wd == 6;
}

constexpr int clock_to_period(int hours, int minutes = 0) noexcept {
    return hours * 4 + minutes / 15;
}

constexpr double offset_to_hours(int offset) noexcept { return offset * kPeriodHours; }

}  // namespace breadlearn
