#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "breadlearn/consumer.hpp"
#include "breadlearn/learner.hpp"

namespace breadlearn {

struct HarnessSettings {
    std::size_t days = 400;
    double holdout_ratio = 0.2;
    int folds = 5;
    std::vector<std::size_t> curve_sizes{10, 20, 50, 100};
    int curve_repeats = 10;
    std::vector<double> lambdas{1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0};
    std::vector<int> knn_ks{3, 5, 7};

    void validate() const;
};

struct ExperimentConfig {
    SimulationSetup setup;
    GridSpec grid;
    LearnerParams learner;
    std::vector<double> betas{std::begin(kDefaultBetas), std::end(kDefaultBetas)};
    std::vector<double> gammas{std::begin(kDefaultGammas), std::end(kDefaultGammas)};
    HarnessSettings harness;

    void validate() const;
};

// INI sections: [tariff] [volatility] [profile] [consumer] [binning] [grid] [learner] [harness].
// Grid axes are written as "min,max,step,stride"; locations are period-of-day indices.
// Keys not present keep their defaults; unknown sections or keys are errors.
[[nodiscard]] ExperimentConfig parse_config(std::istream& in);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

// Effective settings flattened to "section.key" = value, in a fixed order.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config);
void write_config(std::ostream& out, const ExperimentConfig& config);

// "HH:MM" to a period-of-day index; the minutes must fall on a period boundary.
[[nodiscard]] int parse_clock(const std::string& text);
[[nodiscard]] std::string format_clock(int period_of_day);

}  // namespace breadlearn
