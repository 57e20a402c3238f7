#include "breadlearn/comfort.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "breadlearn/format.hpp"

namespace breadlearn {

void ComfortParams::validate() const {
    for (double h : heights) {
        if (!(h > 0.0)) throw std::invalid_argument("peak heights must be positive");
    }
    if (!(locations[0] < locations[1] && locations[1] < locations[2])) {
        throw std::invalid_argument("peak locations must be strictly increasing");
    }
    if (locations[0] < 0 || locations[2] >= kPeriodsPerDay) {
        throw std::invalid_argument("peak locations must be periods of the day");
    }
    if (!(slope > 0.0)) throw std::invalid_argument("slope must be positive");
}

std::vector<PeakInstance> peak_instances(const ComfortParams& omega, const ScenarioWindow& window) {
    std::vector<PeakInstance> out;
    int end = window.first_offset + window.count;
    for (int day = 0; day < kPeakDays; ++day) {
        for (int k = 0; k < 3; ++k) {
            int t = day * kPeriodsPerDay + omega.locations[static_cast<std::size_t>(k)] -
                    window.run_period_of_day;
            if (t >= window.first_offset && t < end) {
                out.push_back({t, omega.heights[static_cast<std::size_t>(k)]});
            }
        }
    }
    return out;
}

double comfort_eval(int offset, const ComfortParams& omega, const ScenarioWindow& window) {
    double best = 0.0;
    for (const auto& peak : peak_instances(omega, window)) {
        if (peak.offset < offset) continue;
        best = std::max(best, peak.height - omega.slope * (peak.offset - offset));
    }
    return best;
}

void comfort_row(const ComfortParams& omega, const ScenarioWindow& window, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    int end = window.first_offset + window.count;
    for (int day = 0; day < kPeakDays; ++day) {
        for (int k = 0; k < 3; ++k) {
            int t = day * kPeriodsPerDay + omega.locations[static_cast<std::size_t>(k)] -
                    window.run_period_of_day;
            if (t < window.first_offset || t >= end) continue;
            double h = omega.heights[static_cast<std::size_t>(k)];
            // Walk left from the peak until the ramp hits zero.
            for (int o = t; o >= window.first_offset; --o) {
                double v = h - omega.slope * (t - o);
                if (v <= 0.0) break;
                double& slot = out[static_cast<std::size_t>(o - window.first_offset)];
                if (v > slot) slot = v;
            }
        }
    }
}

SituationCell SituationCell::from_index(int index) {
    if (index < 0 || index >= kSituationCells) throw std::out_of_range("situation cell index");
    return SituationCell{index % 4, index / 4};
}

SituationCell situation_of(double stock_kg, bool weekend, const StockBinning& bins) {
    if (!(stock_kg >= 0.0)) throw std::invalid_argument("stock must be non-negative");
    int bucket = static_cast<int>(std::floor(stock_kg / bins.bucket_width_kg));
    bucket = std::clamp(bucket, 0, bins.buckets - 1);
    return SituationCell{bucket, weekend ? 1 : 0};
}

SituationFeatures cell_features(SituationCell cell, const StockBinning& bins) {
    return SituationFeatures{(cell.stock_bucket + 0.5) * bins.bucket_width_kg,
                             static_cast<double>(cell.weekend)};
}

int GridAxis::full_levels() const {
    if (!(step > 0.0)) throw std::invalid_argument("grid axis step must be positive");
    if (max < min) throw std::invalid_argument("grid axis range is empty");
    return static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1;
}

int GridAxis::levels() const {
    if (stride < 1) throw std::invalid_argument("grid axis stride must be >= 1");
    return (full_levels() + stride - 1) / stride;
}

double GridAxis::value(int level) const { return min + step * (level * stride); }

GridSpec GridSpec::full_grid() {
    GridSpec spec;
    spec.heights.stride = 1;
    return spec;
}

std::string GridSpec::canonical() const {
    std::ostringstream os;
    auto axis = [&os](const char* name, const GridAxis& a) {
        os << name << ':' << exact(a.min) << ',' << exact(a.max) << ',' << exact(a.step) << ','
           << a.stride << ';';
    };
    axis("loc1", locations[0]);
    axis("loc2", locations[1]);
    axis("loc3", locations[2]);
    axis("height", heights);
    axis("slope", slopes);
    return os.str();
}

std::uint64_t GridSpec::hash() const {
    // FNV-1a
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

HypothesisGrid::HypothesisGrid(GridSpec spec) : spec_(std::move(spec)) {
    const GridAxis* axes[7] = {&spec_.locations[0], &spec_.locations[1], &spec_.locations[2],
                               &spec_.heights,      &spec_.heights,      &spec_.heights,
                               &spec_.slopes};
    size_ = 1;
    for (std::size_t a = 0; a < 7; ++a) {
        dims_[a] = axes[a]->levels();
        for (int l = 0; l < dims_[a]; ++l) {
            double v = axes[a]->value(l);
            values_[a].push_back(a < 3 ? std::round(v) : v);
        }
        size_ *= static_cast<std::size_t>(dims_[a]);
    }
    if (!(values_[0].back() < values_[1].front() && values_[1].back() < values_[2].front())) {
        throw std::invalid_argument("peak location ranges must be disjoint and ordered");
    }
}

std::array<int, 7> HypothesisGrid::levels_of(std::size_t index) const {
    if (index >= size_) throw std::out_of_range("hypothesis index beyond grid");
    std::array<int, 7> lv{};
    for (int a = 6; a >= 0; --a) {
        auto d = static_cast<std::size_t>(dims_[static_cast<std::size_t>(a)]);
        lv[static_cast<std::size_t>(a)] = static_cast<int>(index % d);
        index /= d;
    }
    return lv;
}

ComfortParams HypothesisGrid::params(std::size_t index) const {
    auto lv = levels_of(index);
    ComfortParams p;
    for (std::size_t k = 0; k < 3; ++k) {
        p.locations[k] = static_cast<int>(values_[k][static_cast<std::size_t>(lv[k])]);
        p.heights[k] = values_[3 + k][static_cast<std::size_t>(lv[3 + k])];
    }
    p.slope = values_[6][static_cast<std::size_t>(lv[6])];
    return p;
}

std::size_t HypothesisGrid::index_of(const ComfortParams& omega) const {
    auto find = [this](std::size_t axis, double v) {
        const auto& vals = values_[axis];
        for (std::size_t l = 0; l < vals.size(); ++l) {
            if (std::abs(vals[l] - v) < 1e-9) return l;
        }
        throw std::invalid_argument("parameter value not on the hypothesis grid");
    };
    std::size_t index = 0;
    double coords[7] = {static_cast<double>(omega.locations[0]),
                        static_cast<double>(omega.locations[1]),
                        static_cast<double>(omega.locations[2]),
                        omega.heights[0],
                        omega.heights[1],
                        omega.heights[2],
                        omega.slope};
    for (std::size_t a = 0; a < 7; ++a) {
        index = index * static_cast<std::size_t>(dims_[a]) + find(a, coords[a]);
    }
    return index;
}

HypothesisGrid build_grid(const GridSpec& spec) { return HypothesisGrid(spec); }

}  // namespace breadlearn
