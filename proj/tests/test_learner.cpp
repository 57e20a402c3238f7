#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "breadlearn/learner.hpp"
#include "test_support.hpp"

using namespace breadlearn;
using breadlearn::fixtures::random_observation;
using breadlearn::fixtures::random_omega;
using breadlearn::fixtures::small_grid;

namespace {

// Two passes: the maximum utility first, then the first offset reaching it.
int scan_best(const ComfortParams& w, const Observation& r) {
    double top = -1e300;
    for (int j = 0; j < r.window.count; ++j) {
        top = std::max(top, comfort_eval(r.window.first_offset + j, w, r.window) - r.costs[static_cast<std::size_t>(j)]);
    }
    for (int j = 0; j < r.window.count; ++j) {
        if (comfort_eval(r.window.first_offset + j, w, r.window) - r.costs[static_cast<std::size_t>(j)] == top) {
            return r.window.first_offset + j;
        }
    }
    return -1;
}

double naive_regret(const ComfortParams& w, const Observation& r) {
    auto u = [&](int o) { return comfort_eval(o, w, r.window) - r.costs[static_cast<std::size_t>(o - r.window.first_offset)]; };
    double total = 0.0;
    for (int o = r.window.first_offset; o < r.window.first_offset + r.window.count; ++o) {
        total += std::max(0.0, u(o) - u(r.chosen_offset));
    }
    return total;
}

// Every hypothesis best-responds to the chosen offset when it is free and the rest is dear.
Observation dominant_observation(int chosen) {
    Observation r;
    r.window = ScenarioWindow{84, 10, 182};
    r.costs.assign(182, 1e6);
    r.costs[static_cast<std::size_t>(chosen - 10)] = 0.0;
    r.chosen_offset = chosen;
    r.cell = situation_of(0.1, false);
    r.features = {0.1, 0.0};
    return r;
}

LearnerParams serial(LearnerParams p = {}) {
    p.threads = 1;
    return p;
}

}  // namespace

TEST(BestResponse, ZeroCostsPickHighestPeak) {
    ComfortParams w;
    w.heights = {10.0, 12.0, 9.0};
    w.locations = {32, 52, 80};
    w.slope = 0.5;
    ScenarioWindow win{84, 10, 182};
    std::vector<double> zero(182, 0.0);
    EXPECT_EQ(best_response(w, zero, win), 96 + 52 - 84);
}

TEST(BestResponse, ShiftInvariantAndMatchesScan) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 1000; ++i) {
        auto r = random_observation(rng);
        auto w = random_omega(rng);
        int b = best_response(w, r.costs, r.window);
        EXPECT_EQ(b, scan_best(w, r));
        auto shifted = r.costs;
        for (auto& c : shifted) c += 3.25;
        EXPECT_EQ(best_response(w, shifted, r.window), b);
    }
}

TEST(Penalty, ZeroAtBestResponse) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        auto r = random_observation(rng);
        auto w = random_omega(rng);
        r.chosen_offset = best_response(w, r.costs, r.window);
        EXPECT_EQ(raw_regret(w, r), 0.0);
    }
}

TEST(Penalty, SingleBetterOffsetGivesItsMargin) {
    std::mt19937_64 rng(3);
    auto w = random_omega(rng);
    Observation r;
    r.window = ScenarioWindow{84, 10, 182};
    r.chosen_offset = 40;
    r.cell = situation_of(0.2, false);
    r.features = {0.2, 0.0};
    // Utility is 0 everywhere except 0.75 at offset 100.
    for (int o = 10; o < 192; ++o) r.costs.push_back(comfort_eval(o, w, r.window) + 50.0 - (o == 100 ? 0.75 : 0.0));
    LearnerParams p;
    EXPECT_NEAR(penalty(r.cell, w, r, p), 0.75, 1e-12);
}

TEST(Penalty, MatchesNaiveDoubleLoop) {
    std::mt19937_64 rng(4);
    LearnerParams p;
    for (int i = 0; i < 300; ++i) {
        auto r = random_observation(rng);
        auto w = random_omega(rng);
        auto y = SituationCell::from_index(i % kSituationCells);
        double expected = kernel(cell_features(r.cell), cell_features(y), p) * naive_regret(w, r);
        EXPECT_NEAR(penalty(y, w, r, p), expected, 1e-9 * std::max(1.0, expected));
        EXPECT_NEAR(raw_regret(w, r), naive_regret(w, r), 1e-9 * std::max(1.0, expected));
    }
}

TEST(Distance, Examples) {
    LearnerParams p;
    SituationFeatures a{0.1, 0.0}, b{0.3, 0.0}, c{0.3, 1.0};
    EXPECT_EQ(situation_distance(a, a, p), 0.0);
    EXPECT_NEAR(situation_distance(a, b, p), 0.2, 1e-15);
    EXPECT_EQ(situation_distance(a, c, p), situation_distance(c, a, p));
    EXPECT_NEAR(situation_distance(a, c, p), 0.2 + 0.3, 1e-15);
    std::vector<double> x{1.0, 2.0}, y{1.0}, wts{1.0, 1.0};
    EXPECT_THROW((void)situation_distance(x, y, wts), std::invalid_argument);
}

TEST(Kernel, Examples) {
    LearnerParams p;
    SituationFeatures a{0.1, 0.0}, b{0.3, 0.0};
    EXPECT_EQ(kernel(a, a, p), 1.0);
    p.beta = 5.0;
    EXPECT_NEAR(kernel(a, b, p), std::exp(-0.2), 1e-12);
    EXPECT_NEAR(kernel(a, b, p), 0.8187, 1e-4);
    p.beta = 0.0;
    EXPECT_EQ(kernel(a, b, p), 1.0);
}

TEST(Update, OptimalEverywhereLeavesTableUnchanged) {
    HypothesisGrid grid(small_grid());
    PenaltyTable table(grid, serial());
    PenaltyTable before = table;
    update(table, dominant_observation(60), grid);
    EXPECT_TRUE(std::equal(table.values().begin(), table.values().end(), before.values().begin()));
    EXPECT_EQ(table.observations(), 1u);
}

TEST(Update, AdditiveAndBatchEqualsSequential) {
    HypothesisGrid grid(small_grid());
    std::mt19937_64 rng(9);
    std::vector<Observation> batch;
    for (int i = 0; i < 6; ++i) batch.push_back(random_observation(rng, i + 1));

    PenaltyTable once(grid, serial()), twice(grid, serial());
    update(once, batch[0], grid);
    update(twice, batch[0], grid);
    update(twice, batch[0], grid);
    for (std::size_t i = 0; i < once.values().size(); ++i) EXPECT_NEAR(twice.values()[i], 2 * once.values()[i], 1e-12);

    PenaltyTable seq(grid, serial()), all(grid, serial());
    for (const auto& r : batch) update(seq, r, grid);
    update(all, batch, grid);
    for (std::size_t i = 0; i < seq.values().size(); ++i) {
        EXPECT_NEAR(all.values()[i], seq.values()[i], 1e-9 * std::max(1.0, std::abs(seq.values()[i])));
        EXPECT_GE(seq.values()[i], 0.0);
    }
}

TEST(Update, ParallelEqualsSerial) {
    HypothesisGrid grid(small_grid());
    std::mt19937_64 rng(10);
    std::vector<Observation> batch;
    for (int i = 0; i < 5; ++i) batch.push_back(random_observation(rng, i + 1));
    LearnerParams four;
    four.threads = 4;
    PenaltyTable a(grid, serial()), b(grid, four);
    update(a, batch, grid);
    update(b, batch, grid);
    for (std::size_t i = 0; i < a.values().size(); ++i) EXPECT_EQ(a.values()[i], b.values()[i]);
}

TEST(Update, LargeBetaIsLocal) {
    HypothesisGrid grid(small_grid());
    LearnerParams p = serial();
    p.beta = 1e6;
    PenaltyTable table(grid, p);
    std::mt19937_64 rng(12);
    auto r = random_observation(rng);
    r.features = cell_features(r.cell);
    update(table, r, grid);
    double moved = 0.0;
    for (std::size_t w = 0; w < table.omega_count(); ++w) {
        for (int y = 0; y < kSituationCells; ++y) {
            if (y == r.cell.index()) {
                moved = std::max(moved, table.at(w, SituationCell::from_index(y)));
            } else {
                EXPECT_LT(table.at(w, SituationCell::from_index(y)), 1e-12);
            }
        }
    }
    EXPECT_GT(moved, 0.0);
}

TEST(Sweep, MatchesDirectEvaluation) {
    HypothesisGrid grid(small_grid());
    std::mt19937_64 rng(13);
    for (int i = 0; i < 20; ++i) {
        auto r = random_observation(rng);
        std::vector<double> regret(grid.size());
        std::vector<std::uint16_t> response(grid.size());
        sweep_grid(grid, r, 0, grid.size(), regret, response);
        for (std::size_t w = 0; w < grid.size(); ++w) {
            auto omega = grid.params(w);
            double direct = raw_regret(omega, r);
            EXPECT_NEAR(regret[w], direct, 1e-9 * std::max(1.0, direct));
            EXPECT_EQ(regret[w] == 0.0, direct == 0.0);
            EXPECT_EQ(response[w] + r.window.first_offset, best_response(omega, r.costs, r.window));
        }
    }
}

TEST(Posterior, UniformWhenEmptyAndNormalized) {
    HypothesisGrid grid(small_grid());
    PenaltyTable table(grid, serial());
    auto p = posterior(table, SituationCell{0, 0}, 5.0);
    for (double v : p) EXPECT_NEAR(v, 1.0 / static_cast<double>(grid.size()), 1e-15);

    std::mt19937_64 rng(14);
    for (int i = 0; i < 8; ++i) update(table, random_observation(rng, i + 1), grid);
    for (int y = 0; y < kSituationCells; ++y) {
        for (double gamma : {0.1, 5.0, 400.0}) {
            auto q = posterior(table, SituationCell::from_index(y), gamma);
            double total = 0.0;
            for (double v : q) total += v;
            EXPECT_NEAR(total, 1.0, 1e-9);
        }
    }
    EXPECT_THROW((void)posterior(table, SituationCell{}, 0.0), std::invalid_argument);
}

TEST(Posterior, OrderingFollowsPenalties) {
    HypothesisGrid grid(small_grid());
    PenaltyTable table(grid, serial());
    std::mt19937_64 rng(15);
    for (int i = 0; i < 4; ++i) update(table, random_observation(rng, i + 1), grid);
    SituationCell y{1, 0};
    auto p5 = posterior(table, y, 5.0);
    auto p10 = posterior(table, y, 10.0);
    for (std::size_t a = 0; a + 1 < grid.size(); a += 7) {
        std::size_t b = a + 1;
        if (table.at(a, y) <= table.at(b, y)) {
            EXPECT_GE(p5[a], p5[b]);
            EXPECT_GE(p10[a], p10[b]);
        }
    }
}

TEST(WeightedMedian, Examples) {
    std::vector<std::uint16_t> responses{14, 50};
    std::vector<double> weights{0.6, 0.4};
    EXPECT_EQ(weighted_median(responses, weights, 10, 182), 24);
    std::vector<std::uint16_t> one{37};
    std::vector<double> w1{1.0};
    EXPECT_EQ(weighted_median(one, w1, 10, 182), 47);
    std::vector<double> none{0.0};
    EXPECT_THROW((void)weighted_median(one, none, 10, 182), std::invalid_argument);
}

TEST(Predict, SingleHypothesisReturnsItsBestResponse) {
    GridSpec single;
    single.locations = {GridAxis{32, 32, 2, 1}, GridAxis{52, 52, 2, 1}, GridAxis{80, 80, 2, 1}};
    single.heights = GridAxis{11, 11, 0.3, 1};
    single.slopes = GridAxis{0.6, 0.6, 0.1, 1};
    HypothesisGrid grid(single);
    PenaltyTable table(grid, serial());
    std::mt19937_64 rng(16);
    auto r = random_observation(rng);
    EXPECT_EQ(predict(table, r, grid), best_response(grid.params(0), r.costs, r.window));
}

TEST(Predict, MinimizesExpectedAbsoluteError) {
    HypothesisGrid grid(small_grid());
    LearnerParams lp = serial();
    lp.gamma = 2.0;
    PenaltyTable table(grid, lp);
    std::mt19937_64 rng(18);
    for (int i = 0; i < 10; ++i) update(table, random_observation(rng, i + 1), grid);
    for (int trial = 0; trial < 20; ++trial) {
        auto r = random_observation(rng);
        auto p = posterior(table, r.cell, lp.gamma);
        std::vector<int> responses;
        for (std::size_t w = 0; w < grid.size(); ++w) responses.push_back(best_response(grid.params(w), r.costs, r.window));
        auto loss = [&](int o) {
            double total = 0.0;
            for (std::size_t w = 0; w < grid.size(); ++w) total += p[w] * std::abs(o - responses[w]);
            return total;
        };
        double best_loss = 1e300;
        for (int o = 10; o < 192; ++o) best_loss = std::min(best_loss, loss(o));
        EXPECT_LE(loss(predict(table, r, grid)), best_loss + 1e-9);
    }
}

TEST(Tune, SingleCandidateAndRecomputedOptimum) {
    HypothesisGrid grid(small_grid());
    auto data = simulate(160, VolatilityLevel::Medium, 3, SimulationSetup{});
    auto obs = observations_of(data.runs);
    obs.resize(40);
    double b1[] = {5.0}, g1[] = {5.0};
    auto single = tune(obs, grid, b1, g1, serial());
    EXPECT_EQ(single.params.beta, 5.0);
    EXPECT_EQ(single.params.gamma, 5.0);

    double betas[] = {1.0, 25.0, 400.0}, gammas[] = {1.0, 25.0};
    auto result = tune(obs, grid, betas, gammas, serial());
    ASSERT_EQ(result.candidates.size(), 6u);
    for (const auto& c : result.candidates) {
        // Prequential MAE recomputed from scratch.
        LearnerParams p = serial();
        p.beta = c.beta;
        p.gamma = c.gamma;
        PenaltyTable t(grid, p);
        double total = 0.0;
        for (const auto& r : obs) {
            total += std::abs(predict(t, r, grid) - r.chosen_offset) * 0.25;
            update(t, r, grid);
        }
        EXPECT_NEAR(c.mae_hours, total / static_cast<double>(obs.size()), 1e-12);
    }
    for (const auto& c : result.candidates) {
        auto chosen = std::find_if(result.candidates.begin(), result.candidates.end(), [&](const auto& x) {
            return x.beta == result.params.beta && x.gamma == result.params.gamma;
        });
        EXPECT_LE(chosen->mae_hours, c.mae_hours);
    }
    EXPECT_EQ(result.table.observations(), obs.size());
    EXPECT_THROW((void)tune(std::span<const Observation>{}, grid, b1, g1, serial()), std::invalid_argument);
}

TEST(Tune, DefaultsContainOperatingPoint) {
    EXPECT_NE(std::find(std::begin(kDefaultBetas), std::end(kDefaultBetas), 5.0), std::end(kDefaultBetas));
    EXPECT_NE(std::find(std::begin(kDefaultGammas), std::end(kDefaultGammas), 5.0), std::end(kDefaultGammas));
}

TEST(Tune, CachedSearchMatchesDirect) {
    HypothesisGrid grid(small_grid());
    auto data = simulate(120, VolatilityLevel::High, 4, SimulationSetup{});
    auto obs = observations_of(data.runs);
    ObservationCache cache(obs, grid, 1);
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < obs.size(); ++i) train.push_back(i);
    auto direct = tune(obs, grid, kDefaultBetas, kDefaultGammas, serial());
    auto cached = tune(cache, train, grid, kDefaultBetas, kDefaultGammas, serial());
    EXPECT_EQ(direct.params.beta, cached.params.beta);
    EXPECT_EQ(direct.params.gamma, cached.params.gamma);
    for (std::size_t i = 0; i < direct.candidates.size(); ++i) {
        EXPECT_NEAR(direct.candidates[i].mae_hours, cached.candidates[i].mae_hours, 0.02);
    }
    auto from_cache = cache.train(train, grid, direct.params);
    EXPECT_EQ(cache.predict(from_cache, train), predict_all(direct.table, obs, grid));
}

TEST(Recovery, GridConsumerKeepsZeroPenaltyCurve) {
    GridSpec spec = small_grid();
    HypothesisGrid grid(spec);
    auto truth = grid.params(grid.size() / 3);
    auto data = simulate(150, VolatilityLevel::Medium, 6, SimulationSetup{}, comfort_policy(truth));
    ASSERT_GT(data.runs.size(), 20u);
    PenaltyTable table(grid, serial());
    update(table, observations_of(data.runs), grid);
    auto t = grid.index_of(truth);
    for (int y = 0; y < kSituationCells; ++y) EXPECT_EQ(table.at(t, SituationCell::from_index(y)), 0.0);
}

TEST(Snapshot, RoundTripAndGridCheck) {
    HypothesisGrid grid(small_grid());
    LearnerParams p = serial();
    p.beta = 25.0;
    p.gamma = 1.5;
    PenaltyTable table(grid, p);
    std::mt19937_64 rng(19);
    for (int i = 0; i < 3; ++i) update(table, random_observation(rng, i + 1), grid);
    std::stringstream buf;
    table.save(buf);
    auto back = PenaltyTable::load(buf, grid);
    EXPECT_EQ(back.observations(), 3u);
    EXPECT_EQ(back.params().beta, 25.0);
    EXPECT_EQ(back.params().gamma, 1.5);
    for (std::size_t i = 0; i < table.values().size(); ++i) {
        EXPECT_EQ(back.values()[i], static_cast<double>(static_cast<float>(table.values()[i])));
    }
    std::stringstream again;
    table.save(again);
    GridSpec other = small_grid();
    other.slopes.stride = 2;
    EXPECT_THROW((void)PenaltyTable::load(again, HypothesisGrid(other)), std::invalid_argument);
    std::stringstream junk("not a table");
    EXPECT_THROW((void)PenaltyTable::load(junk, grid), std::runtime_error);
}

TEST(Prior, QuadraticPriorSeedsEveryCell) {
    HypothesisGrid grid(small_grid());
    LearnerParams p = serial();
    p.prior = PriorKind::Quadratic;
    p.prior_weight = 2.0;
    PenaltyTable table(grid, p);
    for (std::size_t w = 0; w < grid.size(); ++w) {
        EXPECT_GE(prior_penalty(grid, w), 0.0);
        for (int y = 0; y < kSituationCells; ++y) {
            EXPECT_NEAR(table.at(w, SituationCell::from_index(y)), 2.0 * prior_penalty(grid, w), 1e-12);
        }
    }
}
