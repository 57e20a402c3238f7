#include "breadlearn/dataset_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "breadlearn/format.hpp"

namespace breadlearn {

namespace {

constexpr std::size_t kLeadingColumns = 6;

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string_view trim_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace

std::string dataset_header(std::size_t cost_columns) {
    std::string h = "run_id,day,weekend,run_period,stock_kg,periods_since_last";
    for (int k = 0; k < kHistoryColumns; ++k) h += ",hist_" + std::to_string(k);
    for (std::size_t j = 0; j < cost_columns; ++j) h += ",cost_" + std::to_string(j);
    h += ",chosen_delta";
    return h;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
    std::size_t cost_columns = data.runs.empty() ? 0 : data.runs.front().costs.size();
    out << dataset_header(cost_columns) << '\n';
    for (const auto& r : data.runs) {
        if (r.costs.size() != cost_columns || r.stock_history.size() != kHistoryColumns) {
            throw std::invalid_argument("run " + std::to_string(r.run_id) + " has the wrong column count");
        }
        out << r.run_id << ',' << r.day << ',' << (r.weekend ? 1 : 0) << ',' << r.run_period << ','
            << exact(r.stock_kg) << ',' << r.periods_since_last;
        for (double h : r.stock_history) out << ',' << exact(h);
        for (double c : r.costs) out << ',' << exact(c);
        out << ',' << r.chosen_offset << '\n';
    }
}

std::vector<SimRun> read_dataset_csv(std::istream& in, int first_offset) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("dataset CSV is empty");
    auto header = split_commas(trim_cr(line));
    if (header.size() < kLeadingColumns + kHistoryColumns + 1) throw std::runtime_error("dataset CSV header too short");
    std::size_t cost_columns = header.size() - kLeadingColumns - kHistoryColumns - 1;
    if (std::string(trim_cr(line)) != dataset_header(cost_columns)) {
        throw std::runtime_error("dataset CSV header does not match the expected schema");
    }

    std::vector<SimRun> runs;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = trim_cr(line);
        if (text.empty()) continue;
        auto cells = split_commas(text);
        if (cells.size() != header.size()) {
            throw std::runtime_error("dataset CSV line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
        }
        try {
            SimRun r;
            r.run_id = parse_int(cells[0]);
            r.day = parse_int(cells[1]);
            r.weekend = parse_int(cells[2]) != 0;
            r.run_period = parse_int(cells[3]);
            r.stock_kg = parse_double(cells[4]);
            r.periods_since_last = parse_int(cells[5]);
            r.stock_history.reserve(kHistoryColumns);
            for (int k = 0; k < kHistoryColumns; ++k) r.stock_history.push_back(parse_double(cells[kLeadingColumns + k]));
            r.costs.reserve(cost_columns);
            for (std::size_t j = 0; j < cost_columns; ++j) {
                r.costs.push_back(parse_double(cells[kLeadingColumns + kHistoryColumns + j]));
            }
            r.first_offset = first_offset;
            r.chosen_offset = static_cast<int>(parse_int(cells.back()));
            runs.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("dataset CSV line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return runs;
}

void write_meta(std::ostream& out, const DatasetMeta& meta, std::size_t runs) {
    out << "volatility=" << meta.volatility << '\n'
        << "seed=" << meta.seed << '\n'
        << "days=" << meta.days << '\n'
        << "runs=" << runs << '\n'
        << "consumer_model=" << meta.consumer_model << '\n'
        << "first_offset=" << meta.first_offset << '\n';
    for (const auto& [k, v] : meta.config) out << "config." << k << '=' << v << '\n';
}

DatasetMeta read_meta(std::istream& in) {
    DatasetMeta meta;
    std::string line;
    while (std::getline(in, line)) {
        auto text = trim_cr(line);
        if (text.empty() || text.front() == '#') continue;
        auto eq = text.find('=');
        if (eq == std::string_view::npos) throw std::runtime_error("metadata line without '=': " + std::string(text));
        std::string key(text.substr(0, eq));
        std::string value(text.substr(eq + 1));
        if (key == "volatility") {
            meta.volatility = value;
        } else if (key == "seed") {
            meta.seed = static_cast<std::uint64_t>(std::stoull(value));
        } else if (key == "days") {
            meta.days = parse_int(value);
        } else if (key == "consumer_model") {
            meta.consumer_model = value;
        } else if (key == "first_offset") {
            meta.first_offset = static_cast<int>(parse_int(value));
        } else if (key.starts_with("config.")) {
            meta.config.emplace_back(key.substr(7), value);
        }
    }
    return meta;
}

std::filesystem::path meta_path(const std::filesystem::path& csv) {
    auto p = csv;
    p += ".meta";
    return p;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void save_dataset(const std::filesystem::path& csv, const Dataset& data) {
    {
        auto out = open_output(csv);
        write_dataset_csv(out, data);
        if (!out) throw std::runtime_error("write failed: " + csv.string());
    }
    auto out = open_output(meta_path(csv));
    write_meta(out, data.meta, data.runs.size());
    if (!out) throw std::runtime_error("write failed: " + meta_path(csv).string());
}

Dataset load_dataset(const std::filesystem::path& csv) {
    std::ifstream meta_in(meta_path(csv));
    if (!meta_in) throw std::runtime_error("missing metadata sidecar " + meta_path(csv).string());
    Dataset data;
    data.meta = read_meta(meta_in);
    if (data.meta.first_offset <= 0) throw std::runtime_error("metadata sidecar lacks first_offset");
    std::ifstream in(csv);
    if (!in) throw std::runtime_error("cannot read " + csv.string());
    data.runs = read_dataset_csv(in, data.meta.first_offset);
    return data;
}

}  // namespace breadlearn
