#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include "breadlearn/consumer.hpp"

namespace breadlearn {

inline constexpr int kHistoryColumns = kPeriodsPerDay;

// Dataset CSV, one row per run:
// run_id,day,weekend,run_period,stock_kg,periods_since_last,hist_0..hist_95,cost_0..cost_181,chosen_delta
[[nodiscard]] std::string dataset_header(std::size_t cost_columns);
void write_dataset_csv(std::ostream& out, const Dataset& data);
// first_offset is not a CSV column; it comes from the metadata sidecar.
[[nodiscard]] std::vector<SimRun> read_dataset_csv(std::istream& in, int first_offset);

// key=value lines, config entries prefixed with "config.".
void write_meta(std::ostream& out, const DatasetMeta& meta, std::size_t runs);
[[nodiscard]] DatasetMeta read_meta(std::istream& in);

[[nodiscard]] std::filesystem::path meta_path(const std::filesystem::path& csv);

// Writes <csv> and <csv>.meta.
void save_dataset(const std::filesystem::path& csv, const Dataset& data);
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& csv);

// Opens for writing, creating parent directories, or throws.
[[nodiscard]] std::ofstream open_output(const std::filesystem::path& path);

}  // namespace breadlearn
