#include "breadlearn/price_model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "breadlearn/format.hpp"

namespace breadlearn {

namespace {

bool in_range_wrapping(int p, int start, int end) noexcept {
    if (start <= end) return p >= start && p < end;
    return p >= start || p < end;
}

}  // namespace

void TariffZones::validate() const {
    auto valid_index = [](int p) { return p >= 0 && p < kPeriodsPerDay; };
    if (!valid_index(night_start) || !valid_index(night_end) || !valid_index(evening_start) ||
        !valid_index(evening_end)) {
        throw std::invalid_argument("tariff zone boundary outside [0,96)");
    }
    if (night_start == night_end || evening_start >= evening_end) {
        throw std::invalid_argument("tariff zone is empty");
    }
    for (int p = 0; p < kPeriodsPerDay; ++p) {
        if (in_night(p) && in_evening(p)) {
            throw std::invalid_argument("night and evening tariff zones overlap");
        }
    }
    if (!(night_price > 0.0 && day_price > 0.0 && evening_price > 0.0)) {
        throw std::invalid_argument("tariff prices must be positive");
    }
}

bool TariffZones::in_night(int p) const noexcept { return in_range_wrapping(p, night_start, night_end); }

bool TariffZones::in_evening(int p) const noexcept {
    return in_range_wrapping(p, evening_start, evening_end);
}

double TariffZones::daily_mean() const {
    double sum = 0.0;
    for (int p = 0; p < kPeriodsPerDay; ++p) sum += base_price(p, *this);
    return sum / kPeriodsPerDay;
}

std::string_view to_string(VolatilityLevel level) noexcept {
    switch (level) {
        case VolatilityLevel::Low: return "low";
        case VolatilityLevel::Medium: return "medium";
        case VolatilityLevel::High: return "high";
    }
    return "unknown";
}

VolatilityLevel parse_volatility(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "low") return VolatilityLevel::Low;
    if (lower == "medium") return VolatilityLevel::Medium;
    if (lower == "high") return VolatilityLevel::High;
    throw std::invalid_argument("unknown volatility level '" + std::string(name) + "'");
}

void VolatilityConfig::validate() const {
    if (step_stddev[0] < 0.0 || !(step_stddev[0] < step_stddev[1] && step_stddev[1] < step_stddev[2])) {
        throw std::invalid_argument("volatility stddevs must satisfy 0 <= low < medium < high");
    }
    if (reversion < 0.0 || reversion >= 1.0) {
        throw std::invalid_argument("random-walk reversion must lie in [0,1)");
    }
    if (!(floor > 0.0)) throw std::invalid_argument("price floor must be positive");
}

PriceSeries::PriceSeries(std::int64_t start_day, std::vector<double> prices)
    : start_day_(start_day), prices_(std::move(prices)) {
    if (prices_.size() % kPeriodsPerDay != 0) {
        throw std::invalid_argument("price series length must be a multiple of 96");
    }
}

double PriceSeries::at(Period t) const {
    auto local = t - start_day_ * kPeriodsPerDay;
    if (local < 0 || static_cast<std::size_t>(local) >= prices_.size()) {
        throw std::out_of_range("scenario beyond price horizon");
    }
    return prices_[static_cast<std::size_t>(local)];
}

double base_price(int period_of_day, const TariffZones& zones) {
    if (zones.in_night(period_of_day)) return zones.night_price;
    if (zones.in_evening(period_of_day)) return zones.evening_price;
    return zones.day_price;
}

PriceSeries tile_base_tariff(std::size_t days, const TariffZones& zones, std::int64_t start_day) {
    std::vector<double> prices(days * kPeriodsPerDay);
    for (std::size_t i = 0; i < prices.size(); ++i) {
        prices[i] = base_price(static_cast<int>(i % kPeriodsPerDay), zones);
    }
    return PriceSeries(start_day, std::move(prices));
}

PriceSeries perturb_random_walk(const PriceSeries& base, double step_stddev, double reversion,
                                double floor, std::uint64_t seed) {
    std::vector<double> out(base.size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> step(0.0, 1.0);
    double walk = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i > 0) walk = (1.0 - reversion) * walk + step_stddev * step(rng);
        out[i] = std::max(floor, base[i] + walk);
    }
    return PriceSeries(base.start_day(), std::move(out));
}

PriceSeries perturb_random_walk(const PriceSeries& base, VolatilityLevel level,
                                const VolatilityConfig& config, std::uint64_t seed) {
    return perturb_random_walk(base, config.stddev(level), config.reversion, config.floor, seed);
}

PriceSeries generate_price_horizon(std::size_t days, VolatilityLevel level, const TariffZones& zones,
                                   const VolatilityConfig& config, std::uint64_t seed) {
    if (days == 0) throw std::invalid_argument("price horizon needs at least one day");
    zones.validate();
    config.validate();
    return perturb_random_walk(tile_base_tariff(days, zones), level, config, seed);
}

void write_price_csv(std::ostream& out, const PriceSeries& series) {
    out << "day,period,price\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << series.start_day() + static_cast<std::int64_t>(i / kPeriodsPerDay) << ','
            << i % kPeriodsPerDay << ',' << exact(series[i]) << '\n';
    }
}

}  // namespace breadlearn
