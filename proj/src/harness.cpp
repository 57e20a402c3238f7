#include "breadlearn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "breadlearn/format.hpp"

namespace breadlearn {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool next_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return true;
    }
    return false;
}

void expect_header(std::istream& in, const std::string& header, const char* what) {
    std::string line;
    if (!next_line(in, line)) throw std::runtime_error(std::string(what) + " is empty");
    if (line != header) {
        throw std::runtime_error(std::string(what) + " header must be '" + header + "', got '" + line + "'");
    }
}

std::string cell_error(const char* what, std::size_t line_no, const std::string& message) {
    return std::string(what) + " line " + std::to_string(line_no) + ": " + message;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& all, std::span<const std::size_t> idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(all.at(i));
    return out;
}

Eigen::MatrixXd pick_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

Eigen::VectorXd pick_values(const Eigen::VectorXd& t, std::span<const std::size_t> idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = t[static_cast<Eigen::Index>(idx[i])];
    return out;
}

// Folds re-expressed as positions inside the training list.
std::vector<std::vector<std::size_t>> fold_positions(const Split& split) {
    std::unordered_map<std::size_t, std::size_t> position;
    for (std::size_t p = 0; p < split.train.size(); ++p) position.emplace(split.train[p], p);
    std::vector<std::vector<std::size_t>> out;
    for (const auto& fold : split.folds) {
        auto& f = out.emplace_back();
        for (auto i : fold) f.push_back(position.at(i));
    }
    return out;
}

struct FittedBaselines {
    std::vector<BaselineChoice> choices;
    std::vector<Regressor> models;
};

FittedBaselines fit_baselines(const Dataset& data, const Split& split, const HarnessSettings& settings) {
    auto x = feature_matrix(data.runs);
    auto t = target_vector(data.runs);
    auto xtr = pick_rows(x, split.train);
    auto ttr = pick_values(t, split.train);
    FittedBaselines out;
    out.choices = select_baselines(xtr, ttr, fold_positions(split), settings);
    for (const auto& c : out.choices) out.models.push_back(Regressor::fit(c.spec, xtr, ttr));
    return out;
}

std::vector<PredictionRow> prediction_rows(const std::string& method, const std::string& dataset,
                                           std::span<const SimRun> runs, std::span<const double> predicted) {
    std::vector<PredictionRow> out;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        out.push_back({method, dataset, runs[i].run_id, predicted[i], target_hours(runs[i])});
    }
    return out;
}

ResultRow score(const std::string& method, const std::string& dataset, std::span<const PredictionRow> rows,
                std::size_t n_train, std::uint64_t seed) {
    std::vector<double> p, a;
    for (const auto& r : rows) {
        p.push_back(r.predicted_hours);
        a.push_back(r.actual_hours);
    }
    return ResultRow{method, dataset, "holdout", mae_hours(p, a), n_train, seed};
}

std::vector<double> offsets_to_hours(std::span<const int> offsets) {
    std::vector<double> out;
    for (int o : offsets) out.push_back(offset_to_hours(o));
    return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1"};

}  // namespace

void Split::validate(std::size_t runs) const {
    std::set<std::size_t> seen_train(train.begin(), train.end());
    std::set<std::size_t> seen_holdout(holdout.begin(), holdout.end());
    if (seen_train.size() != train.size() || seen_holdout.size() != holdout.size()) {
        throw std::invalid_argument("split lists a run twice");
    }
    for (auto i : train) {
        if (i >= runs) throw std::invalid_argument("split refers to a run outside the dataset");
        if (seen_holdout.count(i)) throw std::invalid_argument("hold-out run also used for training");
    }
    for (auto i : holdout) {
        if (i >= runs) throw std::invalid_argument("split refers to a run outside the dataset");
    }
    std::set<std::size_t> in_folds;
    for (const auto& f : folds) {
        for (auto i : f) {
            if (!in_folds.insert(i).second) throw std::invalid_argument("run appears in two folds");
        }
    }
    if (in_folds != seen_train) throw std::invalid_argument("folds do not partition the training runs");
}

Split chronological_split(std::size_t runs, double holdout_ratio, int folds) {
    if (!(holdout_ratio > 0.0 && holdout_ratio < 1.0)) throw std::invalid_argument("hold-out ratio must be in (0,1)");
    if (folds < 2) throw std::invalid_argument("fold count must be at least 2");
    if (runs < kMinimumRuns) {
        throw std::invalid_argument("dataset has " + std::to_string(runs) + " runs; at least " +
                                    std::to_string(kMinimumRuns) + " are needed");
    }
    auto f = static_cast<std::size_t>(folds);
    auto hold = static_cast<std::size_t>(std::llround(static_cast<double>(runs) * holdout_ratio));
    hold = std::clamp<std::size_t>(hold, 1, runs - 1);
    std::size_t train = runs - hold;
    if (train < f) throw std::invalid_argument("training part is smaller than the fold count");

    Split s;
    for (std::size_t i = 0; i < train; ++i) s.train.push_back(i);
    for (std::size_t i = train; i < runs; ++i) s.holdout.push_back(i);
    std::size_t next = 0;
    for (std::size_t k = 0; k < f; ++k) {
        std::size_t size = train / f + (k < train % f ? 1 : 0);
        auto& fold = s.folds.emplace_back();
        for (std::size_t j = 0; j < size; ++j) fold.push_back(next++);
    }
    return s;
}

void write_split_csv(std::ostream& out, const Split& split, std::span<const SimRun> runs) {
    split.validate(runs.size());
    std::vector<int> fold_of(runs.size(), 0);
    for (std::size_t k = 0; k < split.folds.size(); ++k) {
        for (auto i : split.folds[k]) fold_of[i] = static_cast<int>(k) + 1;
    }
    out << "run_id,role\n";
    for (auto i : split.train) {
        out << runs[i].run_id << ",train\n";
        out << runs[i].run_id << ",fold" << fold_of[i] << '\n';
    }
    for (auto i : split.holdout) out << runs[i].run_id << ",holdout\n";
}

Split read_split_csv(std::istream& in, std::span<const SimRun> runs) {
    std::unordered_map<std::int64_t, std::size_t> index;
    for (std::size_t i = 0; i < runs.size(); ++i) index.emplace(runs[i].run_id, i);
    expect_header(in, "run_id,role", "split CSV");

    Split s;
    std::map<std::size_t, std::vector<std::size_t>> folds;
    std::string line;
    std::size_t line_no = 1;
    while (next_line(in, line)) {
        ++line_no;
        auto cells = split_commas(line);
        if (cells.size() != 2) throw std::runtime_error(cell_error("split CSV", line_no, "expected 2 columns"));
        std::int64_t id = 0;
        try {
            id = parse_int(cells[0]);
        } catch (const std::exception& e) {
            throw std::runtime_error(cell_error("split CSV", line_no, e.what()));
        }
        auto it = index.find(id);
        if (it == index.end()) {
            throw std::runtime_error(cell_error("split CSV", line_no, "run id " + cells[0] + " not in the dataset"));
        }
        const auto& role = cells[1];
        if (role == "train") {
            s.train.push_back(it->second);
        } else if (role == "holdout") {
            s.holdout.push_back(it->second);
        } else if (role.rfind("fold", 0) == 0 && role.size() > 4) {
            long long k = 0;
            try {
                k = parse_int(role.substr(4));
            } catch (const std::exception&) {
                k = 0;
            }
            if (k < 1) throw std::runtime_error(cell_error("split CSV", line_no, "bad role '" + role + "'"));
            folds[static_cast<std::size_t>(k)].push_back(it->second);
        } else {
            throw std::runtime_error(cell_error("split CSV", line_no, "bad role '" + role + "'"));
        }
    }
    std::size_t expected = 1;
    for (auto& [k, members] : folds) {
        if (k != expected++) throw std::runtime_error("split CSV fold numbers are not consecutive from 1");
        std::sort(members.begin(), members.end());
        s.folds.push_back(std::move(members));
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.holdout.begin(), s.holdout.end());
    s.validate(runs.size());
    return s;
}

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows) {
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
        out << r.method << ',' << r.dataset << ',' << r.split << ',' << exact(r.mae_hours) << ',' << r.n_train << ','
            << r.seed << '\n';
    }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
    expect_header(in, kResultsHeader, "results CSV");
    std::vector<ResultRow> rows;
    std::string line;
    std::size_t line_no = 1;
    while (next_line(in, line)) {
        ++line_no;
        auto cells = split_commas(line);
        if (cells.size() != 6) throw std::runtime_error(cell_error("results CSV", line_no, "expected 6 columns"));
        try {
            ResultRow r{cells[0], cells[1], cells[2], parse_double(cells[3]),
                        static_cast<std::size_t>(parse_int(cells[4])), std::stoull(cells[5])};
            if (r.method.empty() || r.dataset.empty()) throw std::invalid_argument("empty method or dataset");
            if (!(r.mae_hours >= 0.0)) throw std::invalid_argument("MAE must be non-negative");
            rows.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw std::runtime_error(cell_error("results CSV", line_no, e.what()));
        }
    }
    return rows;
}

std::vector<ResultRow> merge_results(std::vector<ResultRow> base, std::span<const ResultRow> extra) {
    base.insert(base.end(), extra.begin(), extra.end());
    return base;
}

void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows) {
    out << kPredictionsHeader << '\n';
    for (const auto& r : rows) {
        out << r.method << ',' << r.dataset << ',' << r.run_id << ',' << exact(r.predicted_hours) << ','
            << exact(r.actual_hours) << '\n';
    }
}

std::vector<PredictionRow> read_predictions_csv(std::istream& in) {
    expect_header(in, kPredictionsHeader, "predictions CSV");
    std::vector<PredictionRow> rows;
    std::string line;
    std::size_t line_no = 1;
    while (next_line(in, line)) {
        ++line_no;
        auto cells = split_commas(line);
        if (cells.size() != 5) throw std::runtime_error(cell_error("predictions CSV", line_no, "expected 5 columns"));
        try {
            rows.push_back({cells[0], cells[1], parse_int(cells[2]), parse_double(cells[3]), parse_double(cells[4])});
        } catch (const std::exception& e) {
            throw std::runtime_error(cell_error("predictions CSV", line_no, e.what()));
        }
    }
    return rows;
}

std::map<std::pair<std::string, std::string>, double> rescore(std::span<const PredictionRow> rows) {
    std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> sums;
    for (const auto& r : rows) {
        auto& [total, count] = sums[{r.method, r.dataset}];
        total += std::abs(r.predicted_hours - r.actual_hours);
        ++count;
    }
    std::map<std::pair<std::string, std::string>, double> out;
    for (const auto& [key, v] : sums) out[key] = v.first / static_cast<double>(v.second);
    return out;
}

std::string dataset_name(const Dataset& data, const std::filesystem::path& path) {
    return data.meta.volatility.empty() ? path.stem().string() : data.meta.volatility;
}

std::vector<BaselineChoice> select_baselines(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                                             const std::vector<std::vector<std::size_t>>& folds,
                                             const HarnessSettings& settings) {
    std::vector<std::vector<RegressorSpec>> groups(5);
    groups[0].push_back({.kind = RegressorKind::Mean});
    groups[1].push_back({.kind = RegressorKind::Ols, .drop_aliased = true});
    for (double l : settings.lambdas) {
        groups[2].push_back({.kind = RegressorKind::Ridge, .lambda = l});
        groups[3].push_back({.kind = RegressorKind::Lasso, .lambda = l});
    }
    for (int k : settings.knn_ks) groups[4].push_back({.kind = RegressorKind::Knn, .k = k});

    std::vector<BaselineChoice> out;
    for (const auto& g : groups) {
        auto sel = select_by_folds(g, x, t, folds);
        out.push_back({sel.spec, *std::min_element(sel.fold_mae.begin(), sel.fold_mae.end())});
    }
    return out;
}

CrossvalReport run_crossval(const Dataset& data, const std::string& name, const ExperimentConfig& config,
                            const HypothesisGrid& grid, std::uint64_t seed) {
    config.validate();
    CrossvalReport report;
    report.split = chronological_split(data.runs.size(), config.harness.holdout_ratio, config.harness.folds);
    const auto& split = report.split;
    const std::size_t n_train = split.train.size();
    auto holdout_runs = pick(data.runs, split.holdout);

    auto fitted = fit_baselines(data, split, config.harness);
    report.baselines = fitted.choices;
    auto xho = pick_rows(feature_matrix(data.runs), split.holdout);
    for (const auto& model : fitted.models) {
        auto method = std::string(to_string(model.spec().kind));
        auto rows = prediction_rows(method, name, holdout_runs, to_std(model.predict(xho)));
        report.results.push_back(score(method, name, rows, n_train, seed));
        report.predictions.insert(report.predictions.end(), rows.begin(), rows.end());
    }

    auto obs = observations_of(data.runs, config.setup.binning);
    ObservationCache cache(obs, grid, config.learner.threads);
    auto tuned = tune(cache, split.train, grid, config.betas, config.gammas, config.learner, config.setup.binning);
    report.bayes_params = tuned.params;
    report.bayes_candidates = tuned.candidates;
    auto predicted = cache.predict(tuned.table, split.holdout);
    auto rows = prediction_rows("bayes", name, holdout_runs, offsets_to_hours(predicted));
    report.results.push_back(score("bayes", name, rows, n_train, seed));
    report.predictions.insert(report.predictions.end(), rows.begin(), rows.end());
    return report;
}

CurveReport run_learning_curve(const Dataset& data, const ExperimentConfig& config, const HypothesisGrid& grid,
                               std::uint64_t seed) {
    config.validate();
    auto split = chronological_split(data.runs.size(), config.harness.holdout_ratio, config.harness.folds);
    const std::size_t m = split.train.size();
    std::vector<std::size_t> sizes;
    for (auto n : config.harness.curve_sizes) {
        if (n > m) {
            throw std::invalid_argument("learning-curve size " + std::to_string(n) + " exceeds the " +
                                        std::to_string(m) + " training runs");
        }
        sizes.push_back(n);
    }
    sizes.push_back(m);
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

    auto obs = observations_of(data.runs, config.setup.binning);
    ObservationCache cache(obs, grid, config.learner.threads);
    auto tuned = tune(cache, split.train, grid, config.betas, config.gammas, config.learner, config.setup.binning);

    std::vector<int> actual;
    for (auto i : split.holdout) actual.push_back(data.runs[i].chosen_offset);

    CurveReport report;
    report.params = tuned.params;
    report.train_size = m;
    report.holdout_size = split.holdout.size();
    for (auto n : sizes) {
        CurvePoint point;
        point.n = n;
        int repeats = n == m ? 1 : config.harness.curve_repeats;
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(n)};
        std::mt19937_64 rng(seq);
        for (int r = 0; r < repeats; ++r) {
            std::vector<std::size_t> subset;
            std::sample(split.train.begin(), split.train.end(), std::back_inserter(subset), n, rng);
            auto table = cache.train(subset, grid, tuned.params, config.setup.binning);
            auto predicted = cache.predict(table, split.holdout);
            point.mae.push_back(mae_offsets(predicted, actual));
        }
        point.mean = std::accumulate(point.mae.begin(), point.mae.end(), 0.0) / static_cast<double>(point.mae.size());
        if (point.mae.size() > 1) {
            double ss = 0.0;
            for (double v : point.mae) ss += (v - point.mean) * (v - point.mean);
            point.stddev = std::sqrt(ss / static_cast<double>(point.mae.size() - 1));
        }
        report.points.push_back(std::move(point));
    }
    return report;
}

bool weakly_decreasing(std::span<const CurvePoint> points) {
    for (std::size_t i = 1; i < points.size(); ++i) {
        double pooled = std::sqrt(0.5 * (points[i - 1].stddev * points[i - 1].stddev + points[i].stddev * points[i].stddev));
        if (points[i].mean > points[i - 1].mean + pooled) return false;
    }
    return true;
}

void write_curve_csv(std::ostream& out, const CurveReport& report) {
    out << "n,repeats,mean_mae_hours,stddev_hours\n";
    for (const auto& p : report.points) {
        out << p.n << ',' << p.mae.size() << ',' << exact(p.mean) << ',' << exact(p.stddev) << '\n';
    }
}

CompareReport run_compare(const NamedDataset& reference, std::span<const NamedDataset> datasets,
                          const ExperimentConfig& config, const HypothesisGrid& grid, std::uint64_t seed) {
    config.validate();
    if (datasets.empty()) throw std::invalid_argument("compare needs at least one evaluation dataset");
    const auto& h = config.harness;
    auto split = chronological_split(reference.data.runs.size(), h.holdout_ratio, h.folds);
    const std::size_t n_train = split.train.size();

    CompareReport report;
    auto fitted = fit_baselines(reference.data, split, h);
    report.baselines = fitted.choices;

    auto obs = observations_of(reference.data.runs, config.setup.binning);
    ObservationCache cache(obs, grid, config.learner.threads);
    auto tuned = tune(cache, split.train, grid, config.betas, config.gammas, config.learner, config.setup.binning);
    report.bayes_params = tuned.params;

    std::vector<ResultRow> bayes_rows;
    for (const auto& d : datasets) {
        auto holdout = chronological_split(d.data.runs.size(), h.holdout_ratio, h.folds).holdout;
        auto runs = pick(d.data.runs, holdout);
        auto x = feature_matrix(runs);
        for (const auto& model : fitted.models) {
            auto method = std::string(to_string(model.spec().kind));
            auto rows = prediction_rows(method, d.name, runs, to_std(model.predict(x)));
            report.results.push_back(score(method, d.name, rows, n_train, seed));
            report.predictions.insert(report.predictions.end(), rows.begin(), rows.end());
        }
        auto ho_obs = observations_of(runs, config.setup.binning);
        auto predicted = predict_all(tuned.table, ho_obs, grid);
        auto rows = prediction_rows("bayes", d.name, runs, offsets_to_hours(predicted));
        bayes_rows.push_back(score("bayes", d.name, rows, n_train, seed));
        report.predictions.insert(report.predictions.end(), rows.begin(), rows.end());
    }
    report.results.insert(report.results.end(), bayes_rows.begin(), bayes_rows.end());
    return report;
}

namespace {

struct Grid2 {
    std::vector<std::string> methods;
    std::vector<std::string> datasets;
    std::map<std::pair<std::string, std::string>, double> cells;
};

Grid2 tabulate(std::span<const ResultRow> rows) {
    Grid2 g;
    for (const auto& r : rows) {
        if (std::find(g.methods.begin(), g.methods.end(), r.method) == g.methods.end()) g.methods.push_back(r.method);
        if (std::find(g.datasets.begin(), g.datasets.end(), r.dataset) == g.datasets.end()) g.datasets.push_back(r.dataset);
        g.cells.emplace(std::make_pair(r.method, r.dataset), r.mae_hours);
    }
    return g;
}

}  // namespace

void write_result_table(std::ostream& out, std::span<const ResultRow> rows) {
    auto g = tabulate(rows);
    out << "| method |";
    for (const auto& d : g.datasets) out << ' ' << d << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < g.datasets.size(); ++i) out << "---:|";
    out << '\n';
    for (const auto& m : g.methods) {
        out << "| " << m << " |";
        for (const auto& d : g.datasets) {
            auto it = g.cells.find({m, d});
            out << ' ' << (it == g.cells.end() ? std::string("-") : fixed(it->second, 2)) << " |";
        }
        out << '\n';
    }
}

void write_bar_chart_svg(std::ostream& out, std::span<const ResultRow> rows, const std::string& title) {
    auto g = tabulate(rows);
    const double width = 760, height = 420, left = 60, right = 130, top = 40, bottom = 60;
    double top_value = 0.0;
    for (const auto& [k, v] : g.cells) top_value = std::max(top_value, v);
    top_value = top_value > 0.0 ? std::ceil(top_value * 2.0) / 2.0 : 1.0;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    auto y_of = [&](double v) { return top + plot_h * (1.0 - std::min(v, top_value) / top_value); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
        << "</text>\n";
    for (int i = 0; i <= 5; ++i) {
        double v = top_value * i / 5.0;
        double y = y_of(v);
        out << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << y << "\" y2=\"" << y
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << fixed(v, 2)
            << "</text>\n";
    }
    out << "<text transform=\"translate(16," << top + plot_h / 2 << ") rotate(-90)\" text-anchor=\"middle\">MAE, hours</text>\n";

    const double group_w = plot_w / static_cast<double>(std::max<std::size_t>(g.methods.size(), 1));
    const double bar_w = 0.8 * group_w / static_cast<double>(std::max<std::size_t>(g.datasets.size(), 1));
    for (std::size_t m = 0; m < g.methods.size(); ++m) {
        double x0 = left + group_w * static_cast<double>(m) + 0.1 * group_w;
        for (std::size_t d = 0; d < g.datasets.size(); ++d) {
            auto it = g.cells.find({g.methods[m], g.datasets[d]});
            if (it == g.cells.end()) continue;
            double y = y_of(it->second);
            out << "<rect x=\"" << x0 + bar_w * static_cast<double>(d) << "\" y=\"" << y << "\" width=\"" << bar_w
                << "\" height=\"" << top + plot_h - y << "\" fill=\"" << kPalette[d % std::size(kPalette)]
                << "\"><title>" << xml_escape(g.methods[m] + " / " + g.datasets[d]) << ": "
                << fixed(it->second, 3) << "</title></rect>\n";
        }
        out << "<text x=\"" << left + group_w * (static_cast<double>(m) + 0.5) << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\">" << xml_escape(g.methods[m]) << "</text>\n";
    }
    out << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << top + plot_h << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    for (std::size_t d = 0; d < g.datasets.size(); ++d) {
        double y = top + 10 + 20.0 * static_cast<double>(d);
        out << "<rect x=\"" << width - right + 15 << "\" y=\"" << y << "\" width=\"12\" height=\"12\" fill=\""
            << kPalette[d % std::size(kPalette)] << "\"/>\n";
        out << "<text x=\"" << width - right + 33 << "\" y=\"" << y + 11 << "\">" << xml_escape(g.datasets[d])
            << "</text>\n";
    }
    out << "</svg>\n";
}

void write_curve_svg(std::ostream& out, const CurveReport& report, const std::string& title) {
    const double width = 640, height = 400, left = 60, right = 20, top = 40, bottom = 50;
    const double plot_w = width - left - right, plot_h = height - top - bottom;
    double max_n = 1.0, max_y = 0.0;
    for (const auto& p : report.points) {
        max_n = std::max(max_n, static_cast<double>(p.n));
        max_y = std::max(max_y, p.mean + p.stddev);
    }
    max_y = max_y > 0.0 ? std::ceil(max_y * 4.0) / 4.0 : 1.0;
    auto x_of = [&](double n) { return left + plot_w * n / max_n; };
    auto y_of = [&](double v) { return top + plot_h * (1.0 - v / max_y); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
        << "</text>\n";
    for (int i = 0; i <= 5; ++i) {
        double v = max_y * i / 5.0;
        out << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << y_of(v) << "\" y2=\"" << y_of(v)
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << y_of(v) + 4 << "\" text-anchor=\"end\">" << fixed(v, 2)
            << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\">training runs n</text>\n";
    out << "<text transform=\"translate(16," << top + plot_h / 2 << ") rotate(-90)\" text-anchor=\"middle\">MAE, hours</text>\n";
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[0] << "\" stroke-width=\"2\" points=\"";
    for (const auto& p : report.points) out << x_of(static_cast<double>(p.n)) << ',' << y_of(p.mean) << ' ';
    out << "\"/>\n";
    for (const auto& p : report.points) {
        double x = x_of(static_cast<double>(p.n));
        out << "<line x1=\"" << x << "\" x2=\"" << x << "\" y1=\"" << y_of(std::max(0.0, p.mean - p.stddev))
            << "\" y2=\"" << y_of(p.mean + p.stddev) << "\" stroke=\"" << kPalette[0] << "\"/>\n";
        out << "<circle cx=\"" << x << "\" cy=\"" << y_of(p.mean) << "\" r=\"4\" fill=\"" << kPalette[0]
            << "\"><title>n=" << p.n << ": " << fixed(p.mean, 3) << " +/- " << fixed(p.stddev, 3)
            << "</title></circle>\n";
        out << "<text x=\"" << x << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">" << p.n
            << "</text>\n";
    }
    out << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\"" << top + plot_h << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    out << "</svg>\n";
}

}  // namespace breadlearn
