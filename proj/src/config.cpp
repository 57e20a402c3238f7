#include "breadlearn/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdio>
#include <fstream>
#include <map>

#include <sstream>
#include <stdexcept>

#include "breadlearn/format.hpp"

namespace breadlearn {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::string out;
    for (const auto& v : values) {
        if (!out.empty()) out += ',';
        if constexpr (std::is_floating_point_v<T>) {
            out += to_exact_string(v);
        } else {
            out += std::to_string(v);
        }
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    for (const auto& s : split(text, ',')) out.push_back(parse_double(s));
    return out;
}

// "HH:MM amount jitter; ..."
std::vector<MealSlot> parse_meals(const std::string& text) {
    std::vector<MealSlot> out;
    for (const auto& item : split(text, ';')) {
        std::stringstream ss(item);
        std::string clock, amount, jitter;
        if (!(ss >> clock >> amount >> jitter)) throw std::invalid_argument("meal entry needs 'HH:MM kg jitter': " + item);
        out.push_back({parse_clock(clock), parse_double(amount), parse_double(jitter)});
    }
    return out;
}

std::string format_meals(const std::vector<MealSlot>& meals) {
    std::string out;
    for (const auto& m : meals) {
        if (!out.empty()) out += "; ";
        out += format_clock(m.period_of_day) + ' ' + to_exact_string(m.mean_kg) + ' ' + to_exact_string(m.jitter_kg);
    }
    return out;
}

// "periods x kW, ..." in chronological order.
PowerProfile parse_phases(const std::string& text) {
    std::vector<std::pair<int, double>> phases;
    for (const auto& item : split(text, ',')) {
        auto x = item.find('x');
        if (x == std::string::npos) throw std::invalid_argument("phase needs 'periods x kW': " + item);
        phases.emplace_back(static_cast<int>(parse_int(trim(item.substr(0, x)))), parse_double(trim(item.substr(x + 1))));
    }
    return PowerProfile::from_phases(phases);
}

std::string format_phases(const PowerProfile& profile) {
    // Collapse runs of equal power back into phases, chronological order.
    std::string out;
    auto kw = profile.kw();
    int i = profile.duration() - 1;
    while (i >= 0) {
        int j = i;
        while (j - 1 >= 0 && kw[static_cast<std::size_t>(j - 1)] == kw[static_cast<std::size_t>(i)]) --j;
        if (!out.empty()) out += ", ";
        out += std::to_string(i - j + 1) + 'x' + to_exact_string(kw[static_cast<std::size_t>(i)]);
        i = j - 1;
    }
    return out;
}

// "min,max,step,stride"
GridAxis parse_axis(const std::string& text) {
    auto parts = split(text, ',');
    if (parts.size() != 4) throw std::invalid_argument("grid axis needs 'min,max,step,stride': " + text);
    return GridAxis{parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2]),
                    static_cast<int>(parse_int(parts[3]))};
}

std::string format_axis(const GridAxis& a) {
    return to_exact_string(a.min) + ',' + to_exact_string(a.max) + ',' + to_exact_string(a.step) + ',' +
           std::to_string(a.stride);
}

std::string freshness_name(FreshnessShape shape) {
    return shape == FreshnessShape::Linear ? "linear" : "exponential";
}

FreshnessShape parse_freshness(const std::string& text) {
    if (text == "linear") return FreshnessShape::Linear;
    if (text == "exponential") return FreshnessShape::Exponential;
    throw std::invalid_argument("freshness must be linear or exponential, got '" + text + "'");
}

std::string prior_name(PriorKind kind) { return kind == PriorKind::Uniform ? "uniform" : "quadratic"; }

PriorKind parse_prior(const std::string& text) {
    if (text == "uniform") return PriorKind::Uniform;
    if (text == "quadratic") return PriorKind::Quadratic;
    throw std::invalid_argument("prior must be uniform or quadratic, got '" + text + "'");
}

using Setter = void (*)(ExperimentConfig&, const std::string&);
using Getter = std::string (*)(const ExperimentConfig&);
struct Key {
    const char* name;
    Getter get;
    Setter set;
};

#define BL_KEY(name, getter, setter) \
    Key { name, [](const ExperimentConfig& c) -> std::string { return getter; }, [](ExperimentConfig& c, const std::string& v) { setter; } }

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        BL_KEY("tariff.night_price", to_exact_string(c.setup.tariff.night_price), c.setup.tariff.night_price = parse_double(v)),
        BL_KEY("tariff.day_price", to_exact_string(c.setup.tariff.day_price), c.setup.tariff.day_price = parse_double(v)),
        BL_KEY("tariff.evening_price", to_exact_string(c.setup.tariff.evening_price), c.setup.tariff.evening_price = parse_double(v)),
        BL_KEY("tariff.night_start", format_clock(c.setup.tariff.night_start), c.setup.tariff.night_start = parse_clock(v)),
        BL_KEY("tariff.night_end", format_clock(c.setup.tariff.night_end), c.setup.tariff.night_end = parse_clock(v)),
        BL_KEY("tariff.evening_start", format_clock(c.setup.tariff.evening_start), c.setup.tariff.evening_start = parse_clock(v)),
        BL_KEY("tariff.evening_end", format_clock(c.setup.tariff.evening_end), c.setup.tariff.evening_end = parse_clock(v)),
        BL_KEY("volatility.low", to_exact_string(c.setup.volatility.step_stddev[0]), c.setup.volatility.step_stddev[0] = parse_double(v)),
        BL_KEY("volatility.medium", to_exact_string(c.setup.volatility.step_stddev[1]), c.setup.volatility.step_stddev[1] = parse_double(v)),
        BL_KEY("volatility.high", to_exact_string(c.setup.volatility.step_stddev[2]), c.setup.volatility.step_stddev[2] = parse_double(v)),
        BL_KEY("volatility.reversion", to_exact_string(c.setup.volatility.reversion), c.setup.volatility.reversion = parse_double(v)),
        BL_KEY("volatility.floor", to_exact_string(c.setup.volatility.floor), c.setup.volatility.floor = parse_double(v)),
        BL_KEY("profile.phases", format_phases(c.setup.appliance), c.setup.appliance = parse_phases(v)),
        BL_KEY("consumer.satisfaction_per_kg", to_exact_string(c.setup.consumer.satisfaction_per_kg), c.setup.consumer.satisfaction_per_kg = parse_double(v)),
        BL_KEY("consumer.half_life_hours", to_exact_string(c.setup.consumer.half_life_hours), c.setup.consumer.half_life_hours = parse_double(v)),
        BL_KEY("consumer.stale_fraction", to_exact_string(c.setup.consumer.stale_fraction), c.setup.consumer.stale_fraction = parse_double(v)),
        BL_KEY("consumer.freshness", freshness_name(c.setup.consumer.freshness_shape), c.setup.consumer.freshness_shape = parse_freshness(v)),
        BL_KEY("consumer.loaf_kg", to_exact_string(c.setup.consumer.loaf_kg), c.setup.consumer.loaf_kg = parse_double(v)),
        BL_KEY("consumer.trigger_kg", to_exact_string(c.setup.consumer.trigger_kg), c.setup.consumer.trigger_kg = parse_double(v)),
        BL_KEY("consumer.initial_stock_kg", to_exact_string(c.setup.consumer.initial_stock_kg), c.setup.consumer.initial_stock_kg = parse_double(v)),
        BL_KEY("consumer.planning_time", format_clock(c.setup.consumer.planning_period), c.setup.consumer.planning_period = parse_clock(v)),
        BL_KEY("consumer.goal_horizon", std::to_string(c.setup.consumer.goal_horizon), c.setup.consumer.goal_horizon = static_cast<int>(parse_int(v))),
        BL_KEY("consumer.scenario_horizon", std::to_string(c.setup.consumer.scenario_horizon), c.setup.consumer.scenario_horizon = static_cast<int>(parse_int(v))),
        BL_KEY("consumer.weekday_meals", format_meals(c.setup.consumer.weekday_meals), c.setup.consumer.weekday_meals = parse_meals(v)),
        BL_KEY("consumer.weekend_meals", format_meals(c.setup.consumer.weekend_meals), c.setup.consumer.weekend_meals = parse_meals(v)),
        BL_KEY("binning.bucket_width_kg", to_exact_string(c.setup.binning.bucket_width_kg), c.setup.binning.bucket_width_kg = parse_double(v)),
        BL_KEY("binning.buckets", std::to_string(c.setup.binning.buckets), c.setup.binning.buckets = static_cast<int>(parse_int(v))),
        BL_KEY("grid.loc1", format_axis(c.grid.locations[0]), c.grid.locations[0] = parse_axis(v)),
        BL_KEY("grid.loc2", format_axis(c.grid.locations[1]), c.grid.locations[1] = parse_axis(v)),
        BL_KEY("grid.loc3", format_axis(c.grid.locations[2]), c.grid.locations[2] = parse_axis(v)),
        BL_KEY("grid.height", format_axis(c.grid.heights), c.grid.heights = parse_axis(v)),
        BL_KEY("grid.slope", format_axis(c.grid.slopes), c.grid.slopes = parse_axis(v)),
        BL_KEY("learner.gamma", to_exact_string(c.learner.gamma), c.learner.gamma = parse_double(v)),
        BL_KEY("learner.beta", to_exact_string(c.learner.beta), c.learner.beta = parse_double(v)),
        BL_KEY("learner.weight_stock", to_exact_string(c.learner.weight_stock), c.learner.weight_stock = parse_double(v)),
        BL_KEY("learner.weight_weekend", to_exact_string(c.learner.weight_weekend), c.learner.weight_weekend = parse_double(v)),
        BL_KEY("learner.prior_weight", to_exact_string(c.learner.prior_weight), c.learner.prior_weight = parse_double(v)),
        BL_KEY("learner.prior", prior_name(c.learner.prior), c.learner.prior = parse_prior(v)),
        BL_KEY("learner.threads", std::to_string(c.learner.threads), c.learner.threads = static_cast<unsigned>(parse_int(v))),
        BL_KEY("learner.betas", join(c.betas), c.betas = parse_doubles(v)),
        BL_KEY("learner.gammas", join(c.gammas), c.gammas = parse_doubles(v)),
        BL_KEY("harness.days", std::to_string(c.harness.days), c.harness.days = static_cast<std::size_t>(parse_int(v))),
        BL_KEY("harness.holdout_ratio", to_exact_string(c.harness.holdout_ratio), c.harness.holdout_ratio = parse_double(v)),
        BL_KEY("harness.folds", std::to_string(c.harness.folds), c.harness.folds = static_cast<int>(parse_int(v))),
        BL_KEY("harness.curve_sizes", join(c.harness.curve_sizes), {
            c.harness.curve_sizes.clear();
            for (auto x : parse_doubles(v)) c.harness.curve_sizes.push_back(static_cast<std::size_t>(x));
        }),
        BL_KEY("harness.curve_repeats", std::to_string(c.harness.curve_repeats), c.harness.curve_repeats = static_cast<int>(parse_int(v))),
        BL_KEY("harness.lambdas", join(c.harness.lambdas), c.harness.lambdas = parse_doubles(v)),
        BL_KEY("harness.knn_ks", join(c.harness.knn_ks), {
            c.harness.knn_ks.clear();
            for (auto x : parse_doubles(v)) c.harness.knn_ks.push_back(static_cast<int>(x));
        }),
    };
    return table;
}

#undef BL_KEY

}  // namespace

int parse_clock(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("clock time must be HH:MM, got '" + text + "'");
    auto h = parse_int(text.substr(0, colon));
    auto m = parse_int(text.substr(colon + 1));
    if (h < 0 || h > 23 || m < 0 || m > 59 || m % 15 != 0) {
        throw std::invalid_argument("clock time must be a 15-minute boundary, got '" + text + "'");
    }
    return clock_to_period(static_cast<int>(h), static_cast<int>(m));
}

std::string format_clock(int period_of_day) {
    int minutes = period_of_day * 15;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
    return buf;
}

void HarnessSettings::validate() const {
    if (days == 0) throw std::invalid_argument("harness.days must be positive");
    if (!(holdout_ratio > 0.0 && holdout_ratio < 1.0)) throw std::invalid_argument("holdout ratio must be in (0,1)");
    if (folds < 2) throw std::invalid_argument("fold count must be at least 2");
    if (curve_repeats < 1) throw std::invalid_argument("curve repeats must be at least 1");
    for (auto n : curve_sizes) {
        if (n == 0) throw std::invalid_argument("learning-curve sizes must be positive");
    }
    for (double l : lambdas) {
        if (!(l >= 0.0)) throw std::invalid_argument("penalty lambda must be non-negative");
    }
    for (int k : knn_ks) {
        if (k < 1) throw std::invalid_argument("kNN k must be at least 1");
    }
}

void ExperimentConfig::validate() const {
    setup.tariff.validate();
    setup.volatility.validate();
    setup.consumer.validate();
    learner.validate();
    harness.validate();
    if (betas.empty() || gammas.empty()) throw std::invalid_argument("tuning candidate lists must not be empty");
    for (double b : betas) {
        if (!(b >= 0.0)) throw std::invalid_argument("beta candidates must be non-negative");
    }
    for (double g : gammas) {
        if (!(g > 0.0)) throw std::invalid_argument("gamma candidates must be positive");
    }
    HypothesisGrid check(grid);
    (void)check;
}

ExperimentConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    std::map<std::string, const Key*> by_name;
    for (const auto& k : keys()) by_name.emplace(k.name, &k);

    ExperimentConfig config;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw std::invalid_argument("config: key '" + section + "' outside a section");
        }
        for (const auto& [key, value] : body) {
            std::string name = section + "." + key;
            auto it = by_name.find(name);
            if (it == by_name.end()) throw std::invalid_argument("config: unknown key '" + name + "'");
            try {
                it->second->set(config, trim(value.data()));
            } catch (const std::exception& e) {
                throw std::invalid_argument("config: " + name + ": " + e.what());
            }
        }
    }
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path.string());
    return parse_config(in);
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : keys()) out.emplace_back(k.name, k.get(config));
    return out;
}

void write_config(std::ostream& out, const ExperimentConfig& config) {
    std::string current;
    for (const auto& [name, value] : config_entries(config)) {
        auto dot = name.find('.');
        auto section = name.substr(0, dot);
        if (section != current) {
            if (!current.empty()) out << '\n';
            out << '[' << section << "]\n";
            current = section;
        }
        out << name.substr(dot + 1) << " = " << value << '\n';
    }
}

}  // namespace breadlearn
