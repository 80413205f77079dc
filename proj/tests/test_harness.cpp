/*
 * Copyright 2026 The mfcv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include <gtest/gtest.h>

#include <cmath>

#include "mfcv/harness.hpp"

using namespace mfcv;

namespace {

ExperimentConfig quick_config(const std::string& bench = "multimodal", std::vector<double> levels = {})
{
    ExperimentConfig c;
    c.benchmark = bench;
    c.levels = std::move(levels);
    c.strategies = {Strategy::mfcv, Strategy::hf, Strategy::sobol};
    c.iterations = 3;
    c.seed = 21;
    c.gp.restarts = 2;
    c.gp.max_iterations = 50;
    c.acquisition.fantasy_samples = 16;
    c.acquisition.inner_opt_restarts = 2;
    c.acquisition.candidate_grid_size = 32;
    c.acquisition.local_search_evaluations = 40;
    c.validate();
    c.resolve();
    return c;
}

bool same_rows(const RunRecord& a, const RunRecord& b)
{
    if (a.rows.size() != b.rows.size())
        return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto &r = a.rows[i], &s = b.rows[i];
        if (r.iteration != s.iteration || r.batch_index != s.batch_index || r.x != s.x || r.s != s.s ||
            r.y != s.y || r.query_cost != s.query_cost || r.cumulative_cost != s.cumulative_cost ||
            r.rmse != s.rmse || r.fallback != s.fallback)
            return false;
    }
    return true;
}

} // namespace

TEST(Config, DefaultsResolveFromDimension)
{
    ExperimentConfig c;
    c.benchmark = "hartmann6";
    c.resolve();
    EXPECT_EQ(c.n_seed, 60);
    EXPECT_EQ(c.n_test, 180);
    EXPECT_EQ(c.iterations, 50);
    EXPECT_EQ(c.batch_size, 1);
    EXPECT_EQ(c.acquisition.fantasy_samples, 64);
    EXPECT_EQ(c.gp.restarts, 10);
}

TEST(Config, ValidationNamesField)
{
    auto expect_field = [](ExperimentConfig c, const std::string& field) {
        try {
            c.validate();
            ADD_FAILURE() << "expected rejection of " << field;
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.field(), field);
        }
    };
    ExperimentConfig c;
    c.benchmark = "branin";
    expect_field(c, "benchmark");
    c = ExperimentConfig{};
    c.batch_size = 0;
    expect_field(c, "batch_size");
    c = ExperimentConfig{};
    c.levels = {0.0, 0.5};
    expect_field(c, "levels");
    c = ExperimentConfig{};
    c.strategies.clear();
    expect_field(c, "strategy");
    c = ExperimentConfig{};
    c.iterations = 0;
    expect_field(c, "iterations");
}

TEST(Config, BatchOfFourForThirteenIterationsAccepted)
{
    ExperimentConfig c;
    c.batch_size = 4;
    c.iterations = 13;
    EXPECT_NO_THROW(c.validate());
}

TEST(Harness, StrategiesShareSeedAndTestSets)
{
    const ExperimentConfig c = quick_config();
    const auto f = c.make_function();
    const RepetitionPlan a = plan_repetition(c, f, 0);
    const RepetitionPlan b = plan_repetition(c, f, 0);
    const RepetitionPlan other = plan_repetition(c, f, 1);
    EXPECT_EQ(a.seed_data.X, b.seed_data.X);
    EXPECT_EQ(a.test_points, b.test_points);
    EXPECT_NE(a.seed_data.X, other.seed_data.X);
    EXPECT_EQ(a.seed_data.size(), 20);
    EXPECT_EQ(a.test_points.rows(), 60);

    const RunRecord m = run_strategy(c, Strategy::mfcv, 0);
    const RunRecord h = run_strategy(c, Strategy::hf, 0);
    for (int i = 0; i < 20; ++i) {
        EXPECT_EQ(m.rows[static_cast<std::size_t>(i)].x, h.rows[static_cast<std::size_t>(i)].x);
        EXPECT_EQ(m.rows[static_cast<std::size_t>(i)].iteration, 0);
    }
    EXPECT_EQ(m.iteration_rmse[0], h.iteration_rmse[0]);
}

TEST(Harness, TraceShapeAndCostAccounting)
{
    ExperimentConfig c = quick_config();
    c.batch_size = 2;
    for (Strategy s : c.strategies) {
        const RunRecord r = run_strategy(c, s, 0);
        ASSERT_FALSE(r.failed);
        EXPECT_EQ(r.rows.size(), static_cast<std::size_t>(c.n_seed + c.iterations * c.batch_size));
        EXPECT_EQ(r.acquisitions().size(), static_cast<std::size_t>(c.iterations * c.batch_size));
        EXPECT_EQ(r.iteration_cost.size(), static_cast<std::size_t>(c.iterations + 1));
        double total = 0.0;
        for (const auto* row : r.acquisitions()) {
            EXPECT_DOUBLE_EQ(row->query_cost, cost(row->s, c.cost));
            total += row->query_cost;
            EXPECT_DOUBLE_EQ(row->cumulative_cost, total);
            EXPECT_TRUE(std::isfinite(row->rmse));
        }
        for (std::size_t k = 1; k < r.iteration_cost.size(); ++k)
            EXPECT_GT(r.iteration_cost[k], r.iteration_cost[k - 1]);
        if (s == Strategy::hf) {
            for (const auto* row : r.acquisitions())
                EXPECT_EQ(row->s, 1.0);
        }
    }
}

TEST(Harness, RmseMatchesDirectComputation)
{
    const ExperimentConfig c = quick_config();
    const auto f = c.make_function();
    const RepetitionPlan plan = plan_repetition(c, f, 0);
    const PosteriorGP gp = detail::train_and_fit(plan.seed_data, c.gp, 1, std::nullopt);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < plan.test_points.rows(); ++i) {
        const Eigen::VectorXd x = plan.test_points.row(i).transpose();
        acc += std::pow(gp.predict(x, 1.0).mean - f(x, 1.0), 2);
    }
    EXPECT_NEAR(rmse(gp, plan.test_points, f), std::sqrt(acc / static_cast<double>(plan.test_points.rows())), 1e-10);
}

TEST(Harness, RerunIsIdentical)
{
    const ExperimentConfig c = quick_config();
    for (Strategy s : c.strategies)
        EXPECT_TRUE(same_rows(run_strategy(c, s, 1), run_strategy(c, s, 1)));
}

TEST(Harness, SobolDiscreteTargetFrequency)
{
    ExperimentConfig c = quick_config("ishigami", {0.0, 0.5, 1.0});
    c.strategies = {Strategy::sobol};
    c.iterations = 60;
    c.gp.restarts = 1;
    c.gp.max_iterations = 5;
    c.n_test = 3;
    const RunRecord r = run_strategy(c, Strategy::sobol, 0);
    int hits = 0;
    for (const auto* row : r.acquisitions()) {
        EXPECT_TRUE(c.make_function().fidelity_space().contains(row->s));
        hits += row->s == 1.0;
    }
    EXPECT_NEAR(hits / 60.0, 1.0 / 3.0, 0.05);
}

TEST(Harness, StepInterpolation)
{
    const std::vector<double> costs{0.0, 10.0, 25.0};
    const std::vector<double> vals{3.0, 2.0, 1.0};
    const auto out = step_interpolate(costs, vals, {0.0, 5.0, 10.0, 24.9, 25.0, 100.0});
    EXPECT_EQ(out, (std::vector<double>{3.0, 3.0, 2.0, 2.0, 1.0, 1.0}));
    EXPECT_THROW(step_interpolate({}, {}, {0.0}), std::invalid_argument);
}

TEST(Harness, SummaryUsesPopulationStd)
{
    SuiteReport rep;
    rep.config = quick_config();
    rep.config.strategies = {Strategy::sobol};
    for (int k = 0; k < 2; ++k) {
        RunRecord r;
        r.strategy = Strategy::sobol;
        r.repetition = k;
        r.iteration_cost = {0.0, 100.0};
        r.iteration_rmse = {1.0 + k, 0.5 + k};
        rep.runs.push_back(r);
    }
    RunRecord failed;
    failed.strategy = Strategy::sobol;
    failed.failed = true;
    rep.runs.push_back(failed);
    summarize(rep, 11);
    ASSERT_EQ(rep.cost_grid.size(), 11u);
    EXPECT_EQ(rep.cost_grid.back(), 100.0);
    const auto& s = rep.summaries.at(0);
    EXPECT_EQ(s.completed, 2);
    EXPECT_EQ(s.failed, 1);
    EXPECT_DOUBLE_EQ(s.mean[0], 1.5);
    EXPECT_DOUBLE_EQ(s.stddev[0], 0.5);
    EXPECT_DOUBLE_EQ(s.mean[10], 1.0);
}

TEST(Harness, FidelityHistogramBins)
{
    RunRecord r;
    for (double s : {0.05, 0.15, 0.95, 1.0, 1.0})
        r.rows.push_back({1, 0, Eigen::VectorXd::Zero(2), s, 0.0, 0.0, 0.0, 0.0, false});
    r.rows.push_back({0, 0, Eigen::VectorXd::Zero(2), 0.5, 0.0, 0.0, 0.0, 0.0, false});
    const auto cont = fidelity_histogram({&r}, FidelitySpace::continuous());
    ASSERT_EQ(cont.size(), 10u);
    EXPECT_EQ(cont[0].count, 1);
    EXPECT_EQ(cont[1].count, 1);
    EXPECT_EQ(cont[5].count, 0);
    EXPECT_EQ(cont[9].count, 3);
    const auto disc = fidelity_histogram({&r}, FidelitySpace::finite({0.0, 1.0}));
    ASSERT_EQ(disc.size(), 2u);
    EXPECT_EQ(disc[1].count, 2);
}

TEST(Harness, SuiteRunsEveryJob)
{
    ExperimentConfig c = quick_config();
    c.iterations = 2;
    c.repetitions = 2;
    c.threads = 2;
    const SuiteReport rep = run_suite(c);
    EXPECT_EQ(rep.runs.size(), 6u);
    for (const auto& r : rep.runs)
        EXPECT_FALSE(r.failed) << r.error;
    EXPECT_EQ(rep.summaries.size(), 3u);
    ExperimentConfig serial = c;
    serial.threads = 1;
    const SuiteReport again = run_suite(serial);
    for (std::size_t i = 0; i < rep.runs.size(); ++i)
        EXPECT_TRUE(same_rows(rep.runs[i], again.runs[i]));
}
