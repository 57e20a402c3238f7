#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "breadlearn/periods.hpp"

namespace breadlearn {

// Three-zone base tariff. Zone boundaries are period-of-day indices; the night
// zone may wrap around midnight (start > end). Everything outside night and
// evening is billed at the day price.
struct TariffZones {
    double night_price = 1.5;
    double day_price = 5.5;
    double evening_price = 10.0;
    int night_start = clock_to_period(23);
    int night_end = clock_to_period(7);
    int evening_start = clock_to_period(17);
    int evening_end = clock_to_period(21);

    void validate() const;
    [[nodiscard]] bool in_night(int period_of_day) const noexcept;
    [[nodiscard]] bool in_evening(int period_of_day) const noexcept;
    [[nodiscard]] double daily_mean() const;
};

enum class VolatilityLevel { Low, Medium, High };

[[nodiscard]] std::string_view to_string(VolatilityLevel level) noexcept;
[[nodiscard]] VolatilityLevel parse_volatility(std::string_view name);

// Random-walk perturbation settings. The walk is w(t) = (1 - reversion) * w(t-1) + eps(t)
// with eps ~ N(0, stddev(level)); reversion = 0 gives the plain additive walk.
struct VolatilityConfig {
    std::array<double, 3> step_stddev{0.05, 0.15, 0.35};
    double reversion = 0.02;
    double floor = 0.2;

    void validate() const;
    [[nodiscard]] double stddev(VolatilityLevel level) const noexcept {
        return step_stddev[static_cast<std::size_t>(level)];
    }
};

class PriceSeries {
public:
    PriceSeries() = default;
    PriceSeries(std::int64_t start_day, std::vector<double> prices);

    [[nodiscard]] std::int64_t start_day() const noexcept { return start_day_; }
    [[nodiscard]] std::size_t size() const noexcept { return prices_.size(); }
    [[nodiscard]] std::size_t days() const noexcept { return prices_.size() / kPeriodsPerDay; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return prices_[i]; }
    [[nodiscard]] double at(Period t) const;
    [[nodiscard]] std::span<const double> values() const noexcept { return prices_; }

    friend bool operator==(const PriceSeries&, const PriceSeries&) = default;

private:
    std::int64_t start_day_ = 0;
    std::vector<double> prices_;
};

[[nodiscard]] double base_price(int period_of_day, const TariffZones& zones);

// Base tariff tiled over `days` days.
[[nodiscard]] PriceSeries tile_base_tariff(std::size_t days, const TariffZones& zones,
                                           std::int64_t start_day = 0);

[[nodiscard]] PriceSeries perturb_random_walk(const PriceSeries& base, double step_stddev,
                                              double reversion, double floor, std::uint64_t seed);
[[nodiscard]] PriceSeries perturb_random_walk(const PriceSeries& base, VolatilityLevel level,
                                              const VolatilityConfig& config, std::uint64_t seed);

[[nodiscard]] PriceSeries generate_price_horizon(std::size_t days, VolatilityLevel level,
                                                 const TariffZones& zones,
                                                 const VolatilityConfig& config,
                                                 std::uint64_t seed);

// CSV with header `day,period,price`.
void write_price_csv(std::ostream& out, const PriceSeries& series);

}  // namespace breadlearn
