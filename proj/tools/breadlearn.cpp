#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "breadlearn/config.hpp"
#include "breadlearn/dataset_io.hpp"
#include "breadlearn/format.hpp"
#include "breadlearn/harness.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace breadlearn;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::uint64_t seed = 42;
    std::optional<int> grid_stride;
    bool full_grid = false;
    fs::path out = "out";
};

ExperimentConfig load(const GlobalOptions& g) {
    ExperimentConfig config = g.config_path.empty() ? ExperimentConfig{} : load_config(g.config_path);
    if (g.full_grid) {
        config.grid = GridSpec::full_grid();
    } else if (g.grid_stride) {
        if (*g.grid_stride < 1) throw std::invalid_argument("--grid-stride must be at least 1");
        config.grid.heights.stride = *g.grid_stride;
    }
    config.validate();
    return config;
}

Dataset load_data(const fs::path& path) {
    if (!fs::exists(path)) throw std::runtime_error("missing dataset " + path.string());
    return load_dataset(path);
}

std::vector<SimRun> select(const std::vector<SimRun>& runs, const std::vector<std::size_t>& idx) {
    std::vector<SimRun> out;
    for (auto i : idx) out.push_back(runs[i]);
    return out;
}

// Training runs: the split's train rows when given, else every run.
std::vector<SimRun> training_runs(const Dataset& data, const std::string& splits) {
    if (splits.empty()) return data.runs;
    std::ifstream in(splits);
    if (!in) throw std::runtime_error("cannot read split file " + splits);
    return select(data.runs, read_split_csv(in, data.runs).train);
}

std::vector<SimRun> evaluation_runs(const Dataset& data, const std::string& splits) {
    if (splits.empty()) return data.runs;
    std::ifstream in(splits);
    if (!in) throw std::runtime_error("cannot read split file " + splits);
    return select(data.runs, read_split_csv(in, data.runs).holdout);
}

void print_histogram(const Dataset& data) {
    std::map<int, int> counts;
    for (const auto& r : data.runs) ++counts[r.finish_period_of_day()];
    for (const auto& [p, c] : counts) std::cout << "  " << format_clock(p) << "  " << c << '\n';
}

json params_json(const LearnerParams& p) {
    return {{"beta", p.beta}, {"gamma", p.gamma}, {"weight_stock", p.weight_stock},
            {"weight_weekend", p.weight_weekend}};
}

json baselines_json(const std::vector<BaselineChoice>& choices) {
    json out = json::array();
    for (const auto& c : choices) {
        json row = {{"method", std::string(to_string(c.spec.kind))}, {"fold_mae_hours", c.fold_mae},
                    {"standardized", c.spec.standardize}};
        if (c.spec.kind == RegressorKind::Ridge || c.spec.kind == RegressorKind::Lasso) row["lambda"] = c.spec.lambda;
        if (c.spec.kind == RegressorKind::Knn) row["k"] = c.spec.k;
        out.push_back(row);
    }
    return out;
}

void write_json(const fs::path& path, const json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
    auto out = open_output(path);
    fn(out);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

void print_results(const std::vector<ResultRow>& rows) {
    for (const auto& r : rows) {
        std::cout << "  " << r.method << " / " << r.dataset << ": MAE " << r.mae_hours << " h (n_train " << r.n_train
                  << ")\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learn household comfort from breadmaker finish times and predict the next finish"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config_path, "INI file overriding the built-in settings")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Seed for every stochastic stage");
    app.add_option("--grid-stride", g.grid_stride, "Keep every k-th height level of the hypothesis grid");
    app.add_flag("--full-grid", g.full_grid, "Use the full 5e6-curve hypothesis grid");
    app.add_option("--out", g.out, "Output directory");

    std::string command;

    auto* generate = app.add_subcommand("generate", "Simulate a household and write dataset CSVs");
    std::optional<std::size_t> days;
    std::string level = "all";
    generate->add_option("--days", days, "Simulated days");
    generate->add_option("--volatility", level, "low, medium, high or all")
        ->check(CLI::IsMember({"low", "medium", "high", "all"}));

    std::string data_path, splits_path, model_path;
    auto* tune_cmd = app.add_subcommand("tune", "Pick beta and gamma by sequential prediction");
    tune_cmd->add_option("--data", data_path, "Dataset CSV")->required();
    tune_cmd->add_option("--splits", splits_path, "Split CSV; only its training runs are used");

    std::optional<double> beta, gamma;
    auto* train = app.add_subcommand("train", "Accumulate the penalty table and save it");
    train->add_option("--data", data_path, "Dataset CSV")->required();
    train->add_option("--splits", splits_path, "Split CSV; only its training runs are used");
    train->add_option("--beta", beta, "Kernel sensitivity");
    train->add_option("--gamma", gamma, "Penalty sensitivity");

    auto* predict_cmd = app.add_subcommand("predict", "Predict finish times with a saved table");
    predict_cmd->add_option("--data", data_path, "Dataset CSV")->required();
    predict_cmd->add_option("--model", model_path, "Saved penalty table")->required();
    predict_cmd->add_option("--splits", splits_path, "Split CSV; only its hold-out runs are predicted");

    auto* crossval = app.add_subcommand("crossval", "Chronological hold-out evaluation of every method");
    crossval->add_option("--data", data_path, "Dataset CSV")->required();

    auto* curve = app.add_subcommand("learning-curve", "Hold-out MAE against training size");
    curve->add_option("--data", data_path, "Dataset CSV")->required();
    std::vector<std::size_t> sizes;
    curve->add_option("--sizes", sizes, "Training sizes; the full training size is always added");
    std::optional<int> repeats;
    curve->add_option("--repeats", repeats, "Random subsets per size");

    auto* compare = app.add_subcommand("compare", "Train on one volatility and test on all of them");
    std::vector<std::string> compare_data, merge_paths;
    std::string reference = "medium";
    compare->add_option("--data", compare_data, "Dataset CSVs, one per volatility")->required();
    compare->add_option("--reference", reference, "Dataset name to train on");
    compare->add_option("--merge", merge_paths, "Results CSVs to append, for example from the external baselines");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << json{{"error", e.what()}, {"command", "parse"}}.dump() << '\n';
        return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
    }

    for (auto* sub : app.get_subcommands()) command = sub->get_name();
    try {
        auto config = load(g);
        if (beta) config.learner.beta = *beta;
        if (gamma) config.learner.gamma = *gamma;
        if (sizes.size()) config.harness.curve_sizes = sizes;
        if (repeats) config.harness.curve_repeats = *repeats;
        if (days) config.harness.days = *days;
        config.validate();
        HypothesisGrid grid(config.grid);
        auto started = std::chrono::steady_clock::now();

        if (command == "generate") {
            std::vector<VolatilityLevel> levels;
            if (level == "all") {
                levels = {VolatilityLevel::Low, VolatilityLevel::Medium, VolatilityLevel::High};
            } else {
                levels = {parse_volatility(level)};
            }
            for (auto lv : levels) {
                auto data = simulate(config.harness.days, lv, g.seed, config.setup);
                data.meta.config = config_entries(config);
                auto path = g.out / (std::string(to_string(lv)) + ".csv");
                save_dataset(path, data);
                auto prices = generate_price_horizon(config.harness.days, lv, config.setup.tariff,
                                                     config.setup.volatility, SeedPlan::from(g.seed).prices);
                write_file(g.out / (std::string(to_string(lv)) + "_prices.csv"),
                           [&](std::ostream& out) { write_price_csv(out, prices); });
                std::cout << path.string() << ": " << data.runs.size() << " runs over " << config.harness.days
                          << " days\n";
                print_histogram(data);
            }
        } else if (command == "tune") {
            auto data = load_data(data_path);
            auto runs = training_runs(data, splits_path);
            auto obs = observations_of(runs, config.setup.binning);
            auto result = breadlearn::tune(obs, grid, config.betas, config.gammas, config.learner,
                                           config.setup.binning);
            write_file(g.out / "tune.csv", [&](std::ostream& out) {
                out << "beta,gamma,mae_hours\n";
                for (const auto& c : result.candidates) {
                    out << exact(c.beta) << ',' << exact(c.gamma) << ',' << exact(c.mae_hours) << '\n';
                }
            });
            write_file(g.out / "model.bin", [&](std::ostream& out) { result.table.save(out); });
            std::cout << "chosen beta " << result.params.beta << " gamma " << result.params.gamma << " on "
                      << runs.size() << " runs\n";
        } else if (command == "train") {
            auto data = load_data(data_path);
            auto obs = observations_of(training_runs(data, splits_path), config.setup.binning);
            PenaltyTable table(grid, config.learner);
            update(table, obs, grid, config.setup.binning);
            write_file(g.out / "model.bin", [&](std::ostream& out) { table.save(out); });
            std::cout << "trained on " << obs.size() << " runs over " << grid.size() << " curves\n";
        } else if (command == "predict") {
            auto data = load_data(data_path);
            std::ifstream in(model_path, std::ios::binary);
            if (!in) throw std::runtime_error("cannot read model " + model_path);
            auto table = PenaltyTable::load(in, grid);
            auto runs = evaluation_runs(data, splits_path);
            auto obs = observations_of(runs, config.setup.binning);
            auto predicted = predict_all(table, obs, grid);
            std::vector<PredictionRow> rows;
            std::vector<int> actual;
            auto name = dataset_name(data, data_path);
            for (std::size_t i = 0; i < runs.size(); ++i) {
                rows.push_back({"bayes", name, runs[i].run_id, offset_to_hours(predicted[i]), target_hours(runs[i])});
                actual.push_back(runs[i].chosen_offset);
            }
            write_file(g.out / "predictions.csv", [&](std::ostream& out) { write_predictions_csv(out, rows); });
            std::cout << "predicted " << runs.size() << " runs, MAE " << mae_offsets(predicted, actual) << " h\n";
        } else if (command == "crossval") {
            auto data = load_data(data_path);
            auto name = dataset_name(data, data_path);
            auto report = run_crossval(data, name, config, grid, g.seed);
            write_file(g.out / "results.csv", [&](std::ostream& out) { write_results_csv(out, report.results); });
            write_file(g.out / "splits.csv", [&](std::ostream& out) { write_split_csv(out, report.split, data.runs); });
            write_file(g.out / "predictions.csv",
                       [&](std::ostream& out) { write_predictions_csv(out, report.predictions); });
            json candidates = json::array();
            for (const auto& c : report.bayes_candidates) {
                candidates.push_back({{"beta", c.beta}, {"gamma", c.gamma}, {"mae_hours", c.mae_hours}});
            }
            write_json(g.out / "crossval.json",
                       {{"dataset", name},
                        {"seed", g.seed},
                        {"grid", grid.spec().canonical()},
                        {"grid_hash", grid.spec().hash()},
                        {"n_train", report.split.train.size()},
                        {"n_holdout", report.split.holdout.size()},
                        {"bayes", params_json(report.bayes_params)},
                        {"bayes_candidates", candidates},
                        {"baselines", baselines_json(report.baselines)}});
            print_results(report.results);
        } else if (command == "learning-curve") {
            auto data = load_data(data_path);
            auto report = run_learning_curve(data, config, grid, g.seed);
            write_file(g.out / "curve.csv", [&](std::ostream& out) { write_curve_csv(out, report); });
            write_file(g.out / "curve.svg", [&](std::ostream& out) {
                write_curve_svg(out, report, "Hold-out MAE by training size (" + dataset_name(data, data_path) + ")");
            });
            for (const auto& p : report.points) {
                std::cout << "  n=" << p.n << "  mean " << p.mean << " h  stddev " << p.stddev << " h\n";
            }
        } else if (command == "compare") {
            std::vector<NamedDataset> sets;
            for (const auto& p : compare_data) {
                auto data = load_data(p);
                auto name = dataset_name(data, p);
                sets.push_back({name, std::move(data)});
            }
            auto ref = std::find_if(sets.begin(), sets.end(), [&](const auto& s) { return s.name == reference; });
            if (ref == sets.end()) throw std::runtime_error("missing dataset '" + reference + "' to train on");
            auto report = run_compare(*ref, sets, config, grid, g.seed);
            auto rows = report.results;
            for (const auto& p : merge_paths) {
                std::ifstream in(p);
                if (!in) throw std::runtime_error("cannot read results " + p);
                rows = merge_results(std::move(rows), read_results_csv(in));
            }
            write_file(g.out / "results.csv", [&](std::ostream& out) { write_results_csv(out, rows); });
            write_file(g.out / "predictions.csv",
                       [&](std::ostream& out) { write_predictions_csv(out, report.predictions); });
            write_file(g.out / "compare.md", [&](std::ostream& out) { write_result_table(out, rows); });
            write_file(g.out / "compare.svg", [&](std::ostream& out) {
                write_bar_chart_svg(out, rows, "Hold-out MAE, trained on " + reference);
            });
            write_json(g.out / "compare.json", {{"reference", reference},
                                                {"seed", g.seed},
                                                {"grid_hash", grid.spec().hash()},
                                                {"bayes", params_json(report.bayes_params)},
                                                {"baselines", baselines_json(report.baselines)}});
            write_result_table(std::cout, rows);
        }
        auto seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::cout << command << " finished in " << seconds << " s\n";
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}, {"command", command}}.dump() << '\n';
        return 1;
    }
    return 0;
}
