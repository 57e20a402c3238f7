#include "breadlearn/learner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace breadlearn {

namespace {

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(begin, end) over contiguous chunks of [0, n).
template <typename Fn>
void parallel_ranges(std::size_t n, unsigned threads, Fn&& fn) {
    threads = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::jthread> workers;
    std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        std::size_t b = std::min(n, w * chunk);
        std::size_t e = std::min(n, b + chunk);
        if (b < e) workers.emplace_back([&fn, b, e] { fn(b, e); });
    }
}

std::size_t window_index(const ScenarioWindow& window, int offset) {
    return static_cast<std::size_t>(offset - window.first_offset);
}

template <typename Regret>
void accumulate_impl(PenaltyTable& table, SituationCell observed, std::span<const Regret> regret,
                     const KernelMatrix& kernels) {
    if (regret.size() != table.omega_count()) throw std::invalid_argument("regret row does not match table");
    const auto& k = kernels[static_cast<std::size_t>(observed.index())];
    auto values = table.mutable_values();
    for (std::size_t w = 0; w < regret.size(); ++w) {
        double s = regret[w];
        if (s == 0.0) continue;
        double* row = values.data() + w * kSituationCells;
        for (std::size_t y = 0; y < kSituationCells; ++y) row[y] += k[y] * s;
    }
    table.count_observation();
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in, int bytes = 8) {
    unsigned char b[8] = {};
    if (!in.read(reinterpret_cast<char*>(b), bytes)) throw std::runtime_error("truncated penalty snapshot");
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

constexpr char kMagic[8] = {'B', 'L', 'P', 'T', '0', '0', '0', '1'};

}  // namespace

Observation Observation::from_run(const SimRun& run, const StockBinning& bins) {
    Observation r;
    r.run_id = run.run_id;
    r.cell = situation_of(run.stock_kg, run.weekend, bins);
    r.features = SituationFeatures{run.stock_kg, run.weekend ? 1.0 : 0.0};
    r.window = run.window();
    r.costs = run.costs;
    r.chosen_offset = run.chosen_offset;
    r.validate();
    return r;
}

void Observation::validate() const {
    if (static_cast<int>(costs.size()) != window.count || window.count <= 0) {
        throw std::invalid_argument("cost vector does not match the scenario window");
    }
    if (chosen_offset < window.first_offset || chosen_offset >= window.first_offset + window.count) {
        throw std::invalid_argument("chosen offset outside the scenario window");
    }
}

std::vector<Observation> observations_of(std::span<const SimRun> runs, const StockBinning& bins) {
    std::vector<Observation> out;
    out.reserve(runs.size());
    for (const auto& run : runs) out.push_back(Observation::from_run(run, bins));
    return out;
}

void LearnerParams::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
    if (!(prior_weight >= 0.0)) throw std::invalid_argument("prior weight must be non-negative");
    if (!(weight_stock >= 0.0 && weight_weekend >= 0.0)) {
        throw std::invalid_argument("kernel metric weights must be non-negative");
    }
}

int best_response(const ComfortParams& omega, std::span<const double> costs, const ScenarioWindow& window) {
    if (static_cast<int>(costs.size()) != window.count) {
        throw std::invalid_argument("cost vector does not match the scenario window");
    }
    std::vector<double> row(costs.size());
    comfort_row(omega, window, row);
    std::size_t best = 0;
    double best_u = row[0] - costs[0];
    for (std::size_t j = 1; j < row.size(); ++j) {
        double u = row[j] - costs[j];
        if (u > best_u) {
            best_u = u;
            best = j;
        }
    }
    return window.first_offset + static_cast<int>(best);
}

ChoicePolicy comfort_policy(const ComfortParams& omega) {
    omega.validate();
    return [omega](const PlanningContext& ctx) { return best_response(omega, ctx.costs, ctx.window); };
}

double raw_regret(const ComfortParams& omega, const Observation& r) {
    std::vector<double> row(r.costs.size());
    comfort_row(omega, r.window, row);
    auto ch = window_index(r.window, r.chosen_offset);
    double chosen = row[ch] - r.costs[ch];
    double total = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        double excess = (row[j] - r.costs[j]) - chosen;
        if (excess > 0.0) total += excess;
    }
    return total;
}

double situation_distance(std::span<const double> y, std::span<const double> y2,
                          std::span<const double> weights) {
    if (y.size() != y2.size() || y.size() != weights.size()) {
        throw std::invalid_argument("situation feature arity mismatch");
    }
    double d = 0.0;
    for (std::size_t f = 0; f < y.size(); ++f) d += weights[f] * std::abs(y[f] - y2[f]);
    return d;
}

double situation_distance(const SituationFeatures& y, const SituationFeatures& y2, const LearnerParams& params) {
    const double a[] = {y.stock_kg, y.weekend};
    const double b[] = {y2.stock_kg, y2.weekend};
    const double w[] = {params.weight_stock, params.weight_weekend};
    return situation_distance(a, b, w);
}

double kernel(const SituationFeatures& y, const SituationFeatures& y2, const LearnerParams& params) {
    double rho = situation_distance(y, y2, params);
    return std::exp(-params.beta * rho * rho);
}

KernelMatrix kernel_matrix(const LearnerParams& params, const StockBinning& bins) {
    KernelMatrix k{};
    for (int a = 0; a < kSituationCells; ++a) {
        for (int b = 0; b < kSituationCells; ++b) {
            k[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                kernel(cell_features(SituationCell::from_index(a), bins),
                       cell_features(SituationCell::from_index(b), bins), params);
        }
    }
    return k;
}

double penalty(SituationCell y, const ComfortParams& omega, const Observation& r, const LearnerParams& params,
               const StockBinning& bins) {
    double k = kernel(cell_features(r.cell, bins), cell_features(y, bins), params);
    return k * raw_regret(omega, r);
}

double prior_penalty(const HypothesisGrid& grid, std::size_t omega_index) {
    auto levels = grid.levels_of(omega_index);
    double total = 0.0;
    for (std::size_t a = 0; a < levels.size(); ++a) {
        int n = grid.dims()[a];
        if (n <= 1) continue;
        double centred = (levels[a] - (n - 1) / 2.0) / (n - 1);
        total += centred * centred;
    }
    return total;
}

PenaltyTable::PenaltyTable(const HypothesisGrid& grid, const LearnerParams& params)
    : omega_count_(grid.size()), grid_hash_(grid.spec().hash()), params_(params),
      values_(grid.size() * kSituationCells, 0.0) {
    params.validate();
    if (params.prior == PriorKind::Quadratic && params.prior_weight > 0.0) {
        for (std::size_t w = 0; w < omega_count_; ++w) {
            double p = params.prior_weight * prior_penalty(grid, w);
            std::fill_n(values_.begin() + static_cast<std::ptrdiff_t>(w * kSituationCells), kSituationCells, p);
        }
    }
}

void PenaltyTable::save(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    put_u64(out, grid_hash_);
    put_u64(out, observations_);
    put_u64(out, omega_count_);
    put_u32(out, kSituationCells);
    put_f64(out, params_.beta);
    put_f64(out, params_.gamma);
    put_f64(out, params_.weight_stock);
    put_f64(out, params_.weight_weekend);
    put_f64(out, params_.prior_weight);
    put_u32(out, static_cast<std::uint32_t>(params_.prior));
    for (double v : values_) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    if (!out) throw std::runtime_error("failed to write penalty snapshot");
}

PenaltyTable PenaltyTable::load(std::istream& in, const HypothesisGrid& grid) {
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kMagic)) {
        throw std::runtime_error("not a penalty snapshot");
    }
    PenaltyTable t;
    t.grid_hash_ = get_u64(in);
    t.observations_ = get_u64(in);
    t.omega_count_ = get_u64(in);
    auto cells = get_u64(in, 4);
    if (t.grid_hash_ != grid.spec().hash() || t.omega_count_ != grid.size() || cells != kSituationCells) {
        throw std::invalid_argument("penalty snapshot was built for a different hypothesis grid");
    }
    t.params_.beta = get_f64(in);
    t.params_.gamma = get_f64(in);
    t.params_.weight_stock = get_f64(in);
    t.params_.weight_weekend = get_f64(in);
    t.params_.prior_weight = get_f64(in);
    t.params_.prior = static_cast<PriorKind>(get_u64(in, 4));
    t.values_.resize(t.omega_count_ * kSituationCells);
    for (auto& v : t.values_) v = std::bit_cast<float>(static_cast<std::uint32_t>(get_u64(in, 4)));
    return t;
}

void sweep_grid(const HypothesisGrid& grid, const Observation& r, std::size_t begin, std::size_t end,
                std::span<double> regret, std::span<std::uint16_t> response) {
    if (begin >= end) return;
    const std::size_t n = end - begin;
    if ((!regret.empty() && regret.size() < n) || (!response.empty() && response.size() < n)) {
        throw std::invalid_argument("sweep output buffer too small");
    }
    const std::size_t count = r.costs.size();
    const auto ch = window_index(r.window, r.chosen_offset);
    const double* cost = r.costs.data();
    const int first = r.window.first_offset;
    const int last = first + static_cast<int>(count) - 1;

    // Away from the ramps utility is just -cost, so those offsets are handled
    // through costs sorted once per observation (ties keep the smaller offset).
    std::vector<std::uint16_t> order(count);
    for (std::size_t j = 0; j < count; ++j) order[j] = static_cast<std::uint16_t>(j);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return cost[a] < cost[b]; });
    std::vector<double> sorted(count), prefix(count + 1, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
        sorted[i] = cost[order[i]];
        prefix[i + 1] = prefix[i] + sorted[i];
    }

    std::vector<double> row(count, 0.0);
    std::vector<std::uint16_t> touched;
    touched.reserve(count);

    std::array<std::span<const double>, 7> axis;
    for (std::size_t a = 0; a < 7; ++a) axis[a] = grid.axis_values(a);
    const auto& dims = grid.dims();
    auto lv = grid.levels_of(begin);

    for (std::size_t i = 0; i < n; ++i) {
        const double slope = axis[6][static_cast<std::size_t>(lv[6])];
        for (int day = 0; day < kPeakDays; ++day) {
            for (std::size_t k = 0; k < 3; ++k) {
                int t = day * kPeriodsPerDay + static_cast<int>(axis[k][static_cast<std::size_t>(lv[k])]) -
                        r.window.run_period_of_day;
                if (t < first || t > last) continue;
                const double h = axis[3 + k][static_cast<std::size_t>(lv[3 + k])];
                for (int o = t; o >= first; --o) {
                    double v = h - slope * (t - o);
                    if (v <= 0.0) break;
                    auto j = static_cast<std::size_t>(o - first);
                    if (row[j] == 0.0) touched.push_back(static_cast<std::uint16_t>(j));
                    if (v > row[j]) row[j] = v;
                }
            }
        }

        if (!response.empty()) {
            std::size_t best = count;
            double best_u = 0.0;
            for (auto j : touched) {
                double u = row[j] - cost[j];
                if (best == count || u > best_u || (u == best_u && j < best)) {
                    best_u = u;
                    best = j;
                }
            }
            for (auto j : order) {
                if (row[j] != 0.0) continue;
                double u = 0.0 - cost[j];
                if (best == count || u > best_u || (u == best_u && j < best)) best = j;
                break;
            }
            response[i] = static_cast<std::uint16_t>(best);
        }
        if (!regret.empty()) {
            const double chosen = row[ch] - cost[ch];
            const double bar = -chosen;
            double total = 0.0;
            // Offsets off the ramps beat the choice when their cost is below -chosen.
            auto below = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), bar) - sorted.begin());
            std::size_t outside = below;
            double ramp_share = 0.0;
            for (auto j : touched) {
                double excess = (row[j] - cost[j]) - chosen;
                if (excess > 0.0) total += excess;
                if (cost[j] < bar) {
                    --outside;
                    ramp_share += bar - cost[j];
                }
            }
            if (outside > 0) {
                total += std::max(0.0, static_cast<double>(below) * bar - prefix[below] - ramp_share);
            }
            regret[i] = total;
        }

        for (auto j : touched) row[j] = 0.0;
        touched.clear();

        for (int a = 6; a >= 0; --a) {
            auto ua = static_cast<std::size_t>(a);
            if (++lv[ua] < dims[ua]) break;
            lv[ua] = 0;
        }
    }
}

void sweep_grid_parallel(const HypothesisGrid& grid, const Observation& r, std::span<double> regret,
                         std::span<std::uint16_t> response, unsigned threads) {
    const std::size_t n = grid.size();
    parallel_ranges(n, threads, [&](std::size_t b, std::size_t e) {
        sweep_grid(grid, r, b, e, regret.empty() ? regret : regret.subspan(b, e - b),
                   response.empty() ? response : response.subspan(b, e - b));
    });
}

void accumulate_regret(PenaltyTable& table, SituationCell observed, std::span<const double> regret,
                       const KernelMatrix& kernels) {
    accumulate_impl(table, observed, regret, kernels);
}

void accumulate_regret(PenaltyTable& table, SituationCell observed, std::span<const float> regret,
                       const KernelMatrix& kernels) {
    accumulate_impl(table, observed, regret, kernels);
}

void update(PenaltyTable& table, const Observation& r, const HypothesisGrid& grid, const StockBinning& bins) {
    if (table.omega_count() != grid.size() || table.grid_hash() != grid.spec().hash()) {
        throw std::invalid_argument("penalty table does not match the hypothesis grid");
    }
    r.validate();
    std::vector<double> regret(grid.size());
    sweep_grid_parallel(grid, r, regret, {}, table.params().threads);
    accumulate_regret(table, r.cell, std::span<const double>(regret), kernel_matrix(table.params(), bins));
}

void update(PenaltyTable& table, std::span<const Observation> batch, const HypothesisGrid& grid,
            const StockBinning& bins) {
    for (const auto& r : batch) update(table, r, grid, bins);
}

std::vector<double> posterior(const PenaltyTable& table, SituationCell y, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    const std::size_t n = table.omega_count();
    std::vector<double> p(n);
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < n; ++w) lowest = std::min(lowest, table.at(w, y));
    double total = 0.0;
    for (std::size_t w = 0; w < n; ++w) {
        p[w] = std::exp(-gamma * (table.at(w, y) - lowest));
        total += p[w];
    }
    for (auto& v : p) v /= total;
    return p;
}

int weighted_median(std::span<const std::uint16_t> response_index, std::span<const double> weights,
                    int first_offset, int count) {
    if (response_index.size() != weights.size()) throw std::invalid_argument("weights do not match responses");
    std::vector<double> mass(static_cast<std::size_t>(count), 0.0);
    double total = 0.0;
    for (std::size_t w = 0; w < weights.size(); ++w) {
        mass[response_index[w]] += weights[w];
        total += weights[w];
    }
    if (!(total > 0.0)) throw std::invalid_argument("posterior has no mass");
    double cumulative = 0.0;
    for (std::size_t j = 0; j < mass.size(); ++j) {
        cumulative += mass[j];
        if (cumulative >= 0.5 * total) return first_offset + static_cast<int>(j);
    }
    return first_offset + count - 1;
}

int predict(const PenaltyTable& table, const Observation& r, const HypothesisGrid& grid) {
    std::vector<std::uint16_t> response(grid.size());
    sweep_grid_parallel(grid, r, {}, response, table.params().threads);
    auto p = posterior(table, r.cell, table.params().gamma);
    return weighted_median(response, p, r.window.first_offset, r.window.count);
}

std::vector<int> predict_all(const PenaltyTable& table, std::span<const Observation> rs,
                             const HypothesisGrid& grid) {
    std::array<std::vector<double>, kSituationCells> posteriors;
    std::vector<std::uint16_t> response(grid.size());
    std::vector<int> out;
    out.reserve(rs.size());
    for (const auto& r : rs) {
        auto& p = posteriors[static_cast<std::size_t>(r.cell.index())];
        if (p.empty()) p = posterior(table, r.cell, table.params().gamma);
        sweep_grid_parallel(grid, r, {}, response, table.params().threads);
        out.push_back(weighted_median(response, p, r.window.first_offset, r.window.count));
    }
    return out;
}

namespace {

// Prequential search shared by the direct and cached paths. visit(i, fn) calls
// fn(cell, window, chosen, regret, response) for training observation i.
template <typename Visit>
TuneResult tune_impl(std::size_t n, Visit&& visit, const HypothesisGrid& grid, std::span<const double> betas,
                     std::span<const double> gammas, const LearnerParams& base, const StockBinning& bins) {
    if (n == 0) throw std::invalid_argument("cannot tune on an empty training set");
    if (betas.empty() || gammas.empty()) throw std::invalid_argument("empty tuning candidate set");

    std::vector<PenaltyTable> tables;
    std::vector<KernelMatrix> kernels;
    for (double beta : betas) {
        LearnerParams p = base;
        p.beta = beta;
        tables.emplace_back(grid, p);
        kernels.push_back(kernel_matrix(p, bins));
    }
    std::vector<double> abs_error(betas.size() * gammas.size(), 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        visit(i, [&](SituationCell cell, const ScenarioWindow& window, int chosen, auto regret,
                     std::span<const std::uint16_t> response) {
            for (std::size_t b = 0; b < betas.size(); ++b) {
                for (std::size_t g = 0; g < gammas.size(); ++g) {
                    auto p = posterior(tables[b], cell, gammas[g]);
                    int predicted = weighted_median(response, p, window.first_offset, window.count);
                    abs_error[b * gammas.size() + g] += std::abs(predicted - chosen) * kPeriodHours;
                }
                accumulate_regret(tables[b], cell, regret, kernels[b]);
            }
        });
    }

    std::vector<TuneCandidate> candidates;
    std::size_t best = 0;
    for (std::size_t b = 0; b < betas.size(); ++b) {
        for (std::size_t g = 0; g < gammas.size(); ++g) {
            std::size_t k = b * gammas.size() + g;
            candidates.push_back({betas[b], gammas[g], abs_error[k] / static_cast<double>(n)});
            if (abs_error[k] < abs_error[best]) best = k;
        }
    }
    LearnerParams chosen = base;
    chosen.beta = candidates[best].beta;
    chosen.gamma = candidates[best].gamma;
    PenaltyTable table = std::move(tables[best / gammas.size()]);
    // The accumulated table carries the gamma it was tuned with.
    PenaltyTable retagged(grid, chosen);
    std::copy(table.values().begin(), table.values().end(), retagged.mutable_values().begin());
    for (std::uint64_t i = 0; i < table.observations(); ++i) retagged.count_observation();
    return TuneResult{chosen, std::move(candidates), std::move(retagged)};
}

}  // namespace

TuneResult tune(std::span<const Observation> train, const HypothesisGrid& grid, std::span<const double> betas,
                std::span<const double> gammas, const LearnerParams& base, const StockBinning& bins) {
    std::vector<double> regret(grid.size());
    std::vector<std::uint16_t> response(grid.size());
    auto visit = [&](std::size_t i, auto&& fn) {
        const auto& r = train[i];
        r.validate();
        sweep_grid_parallel(grid, r, regret, response, base.threads);
        fn(r.cell, r.window, r.chosen_offset, std::span<const double>(regret),
           std::span<const std::uint16_t>(response));
    };
    return tune_impl(train.size(), visit, grid, betas, gammas, base, bins);
}

TuneResult tune(const ObservationCache& cache, std::span<const std::size_t> train, const HypothesisGrid& grid,
                std::span<const double> betas, std::span<const double> gammas, const LearnerParams& base,
                const StockBinning& bins) {
    if (cache.omega_count() != grid.size()) throw std::invalid_argument("cache was built on another grid");
    auto visit = [&](std::size_t i, auto&& fn) {
        std::size_t k = train[i];
        if (k >= cache.size()) throw std::out_of_range("training index outside the cache");
        fn(cache.cell(k), cache.window(k), cache.chosen(k), cache.regret(k), cache.response(k));
    };
    return tune_impl(train.size(), visit, grid, betas, gammas, base, bins);
}

ObservationCache::ObservationCache(std::span<const Observation> observations, const HypothesisGrid& grid,
                                   unsigned threads)
    : omega_count_(grid.size()) {
    regret_.resize(observations.size() * omega_count_);
    response_.resize(observations.size() * omega_count_);
    std::vector<double> regret(omega_count_);
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& r = observations[i];
        r.validate();
        cells_.push_back(r.cell);
        windows_.push_back(r.window);
        chosen_.push_back(r.chosen_offset);
        sweep_grid_parallel(grid, r, regret, std::span(response_).subspan(i * omega_count_, omega_count_),
                            threads);
        std::transform(regret.begin(), regret.end(), regret_.begin() + static_cast<std::ptrdiff_t>(i * omega_count_),
                       [](double v) { return static_cast<float>(v); });
    }
}

PenaltyTable ObservationCache::train(std::span<const std::size_t> subset, const HypothesisGrid& grid,
                                     const LearnerParams& params, const StockBinning& bins) const {
    PenaltyTable table(grid, params);
    auto kernels = kernel_matrix(params, bins);
    for (auto i : subset) accumulate_regret(table, cells_.at(i), regret(i), kernels);
    return table;
}

std::vector<int> ObservationCache::predict(const PenaltyTable& table, std::span<const std::size_t> subset) const {
    std::array<std::vector<double>, kSituationCells> posteriors;
    std::vector<int> out;
    out.reserve(subset.size());
    for (auto i : subset) {
        auto& p = posteriors[static_cast<std::size_t>(cells_.at(i).index())];
        if (p.empty()) p = breadlearn::posterior(table, cells_[i], table.params().gamma);
        out.push_back(weighted_median(response(i), p, windows_[i].first_offset, windows_[i].count));
    }
    return out;
}

}  // namespace breadlearn
