#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "breadlearn/dataset_io.hpp"

using namespace breadlearn;

namespace {

Dataset small_dataset() {
    return simulate(60, VolatilityLevel::High, 5, SimulationSetup{});
}

void expect_same_runs(const std::vector<SimRun>& a, const std::vector<SimRun>& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].run_id, b[i].run_id);
        EXPECT_EQ(a[i].day, b[i].day);
        EXPECT_EQ(a[i].weekend, b[i].weekend);
        EXPECT_EQ(a[i].run_period, b[i].run_period);
        EXPECT_EQ(a[i].stock_kg, b[i].stock_kg);
        EXPECT_EQ(a[i].periods_since_last, b[i].periods_since_last);
        EXPECT_EQ(a[i].stock_history, b[i].stock_history);
        EXPECT_EQ(a[i].costs, b[i].costs);
        EXPECT_EQ(a[i].first_offset, b[i].first_offset);
        EXPECT_EQ(a[i].chosen_offset, b[i].chosen_offset);
    }
}

}  // namespace

TEST(DatasetCsv, HeaderLayout) {
    auto header = dataset_header(182);
    EXPECT_EQ(header.rfind("run_id,day,weekend,run_period,stock_kg,periods_since_last,hist_0,", 0), 0u);
    EXPECT_NE(header.find(",hist_95,cost_0,"), std::string::npos);
    EXPECT_NE(header.find(",cost_181,chosen_delta"), std::string::npos);
    EXPECT_EQ(std::count(header.begin(), header.end(), ','), 6 + 96 + 182 - 1 + 1);
}

TEST(DatasetCsv, ExactRoundTrip) {
    auto data = small_dataset();
    ASSERT_FALSE(data.runs.empty());
    std::stringstream buf;
    write_dataset_csv(buf, data);
    auto back = read_dataset_csv(buf, data.meta.first_offset);
    expect_same_runs(data.runs, back);
}

TEST(DatasetCsv, RejectsMalformedInput) {
    std::stringstream wrong_header("a,b,c\n1,2,3\n");
    EXPECT_THROW((void)read_dataset_csv(wrong_header, 10), std::runtime_error);

    auto data = small_dataset();
    std::stringstream buf;
    write_dataset_csv(buf, data);
    std::string text = buf.str();
    text.erase(text.rfind(','));  // drop the last column of the last row
    std::stringstream truncated(text + "\n");
    EXPECT_THROW((void)read_dataset_csv(truncated, data.meta.first_offset), std::runtime_error);
}

TEST(DatasetMeta, RoundTrip) {
    DatasetMeta meta;
    meta.volatility = "medium";
    meta.seed = 1234567890123ULL;
    meta.days = 400;
    meta.first_offset = 10;
    meta.config = {{"tariff.night_price", "1.5"}, {"consumer.freshness", "linear"}};
    std::stringstream buf;
    write_meta(buf, meta, 7);
    auto back = read_meta(buf);
    EXPECT_EQ(back.volatility, meta.volatility);
    EXPECT_EQ(back.seed, meta.seed);
    EXPECT_EQ(back.days, meta.days);
    EXPECT_EQ(back.consumer_model, meta.consumer_model);
    EXPECT_EQ(back.first_offset, meta.first_offset);
    EXPECT_EQ(back.config, meta.config);
}

TEST(DatasetFiles, SaveAndLoad) {
    auto dir = std::filesystem::temp_directory_path() / "breadlearn_io_test";
    std::filesystem::remove_all(dir);
    auto csv = dir / "nested" / "high.csv";
    auto data = small_dataset();
    save_dataset(csv, data);
    EXPECT_TRUE(std::filesystem::exists(meta_path(csv)));
    auto back = load_dataset(csv);
    expect_same_runs(data.runs, back.runs);
    EXPECT_EQ(back.meta.volatility, "high");
    EXPECT_EQ(back.meta.seed, 5u);
    EXPECT_THROW((void)load_dataset(dir / "missing.csv"), std::runtime_error);
    std::filesystem::remove_all(dir);
}
