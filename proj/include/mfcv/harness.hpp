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

#ifndef MFCV_HARNESS_HPP
#define MFCV_HARNESS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mfcv/acquisition.hpp"
#include "mfcv/benchmarks.hpp"
#include "mfcv/cost_model.hpp"
#include "mfcv/gp.hpp"
#include "mfcv/loocv.hpp"
#include "mfcv/sampling.hpp"

namespace mfcv {

enum class Strategy { mfcv, hf, sobol };

inline std::string to_string(Strategy s)
{
    switch (s) {
    case Strategy::mfcv:
        return "mfcv";
    case Strategy::hf:
        return "hf";
    case Strategy::sobol:
        return "sobol";
    }
    return "unknown";
}

inline Strategy strategy_from_string(const std::string& name)
{
    if (name == "mfcv")
        return Strategy::mfcv;
    if (name == "hf")
        return Strategy::hf;
    if (name == "sobol")
        return Strategy::sobol;
    throw std::invalid_argument("unknown strategy '" + name + "' (expected mfcv, hf or sobol)");
}

/// Invalid experiment configuration; `field` names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field))
    {
    }

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct GpSettings {
    int restarts = 10;
    int max_iterations = 200;
    HyperBounds bounds;
};

struct AcquisitionSettings {
    int fantasy_samples = 64;
    int inner_opt_restarts = 4;
    int candidate_grid_size = 256;
    int local_search_evaluations = 400;
};

struct ExperimentConfig {
    std::string benchmark = "multimodal";
    std::vector<double> levels; // empty: continuous fidelity
    std::vector<Strategy> strategies{Strategy::mfcv};
    int batch_size = 1;
    int iterations = 50;
    int repetitions = 1;
    std::uint64_t seed = 0;
    CostParams cost;
    GpSettings gp;
    AcquisitionSettings acquisition;
    int n_seed = 0; // 0 resolves to 10 d
    int n_test = 0; // 0 resolves to 30 d
    double cost_cap = 0.0; // 0 disables; otherwise stop once cumulative cost reaches it
    int threads = 1;
    std::string output_dir = "mfcv_out";

    BenchmarkFunction make_function() const { return make_benchmark(benchmark, levels); }

    void validate() const
    {
        const auto& names = benchmark_names();
        if (std::find(names.begin(), names.end(), benchmark) == names.end())
            throw ConfigError("benchmark", "unknown benchmark '" + benchmark + "'");
        if (!levels.empty()) {
            try {
                FidelitySpace::finite(levels).validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError("levels", e.what());
            }
        }
        if (strategies.empty())
            throw ConfigError("strategy", "at least one strategy is required");
        if (batch_size < 1)
            throw ConfigError("batch_size", "must be >= 1");
        if (batch_size > static_cast<int>(SobolSequence::max_dim))
            throw ConfigError("batch_size", "must be <= " + std::to_string(SobolSequence::max_dim));
        if (iterations < 1)
            throw ConfigError("iterations", "must be >= 1");
        if (repetitions < 1)
            throw ConfigError("repetitions", "must be >= 1");
        try {
            cost.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("cost", e.what());
        }
        if (gp.restarts < 1)
            throw ConfigError("gp.restarts", "must be >= 1");
        if (gp.max_iterations < 1)
            throw ConfigError("gp.max_iterations", "must be >= 1");
        if (acquisition.fantasy_samples < 1)
            throw ConfigError("acquisition.fantasy_samples", "must be >= 1");
        if (acquisition.inner_opt_restarts < 1)
            throw ConfigError("acquisition.inner_opt_restarts", "must be >= 1");
        if (acquisition.candidate_grid_size < 1)
            throw ConfigError("acquisition.candidate_grid_size", "must be >= 1");
        if (acquisition.local_search_evaluations < 0)
            throw ConfigError("acquisition.local_search_evaluations", "must be >= 0");
        if (n_seed != 0 && n_seed < 2)
            throw ConfigError("n_seed", "must be >= 2");
        if (n_test < 0)
            throw ConfigError("n_test", "must be >= 1");
        if (cost_cap < 0.0)
            throw ConfigError("cost_cap", "must be >= 0");
        if (threads < 1)
            throw ConfigError("threads", "must be >= 1");
    }

    /// Fill defaults that depend on the benchmark.
    void resolve()
    {
        const auto d = static_cast<int>(make_function().input_dim());
        if (n_seed == 0)
            n_seed = 10 * d;
        if (n_test == 0)
            n_test = 30 * d;
    }
};

/// One acquisition (or seed, at iteration 0) in a run trace.
struct TraceRow {
    int iteration = 0;
    int batch_index = 0;
    Eigen::VectorXd x;
    double s = 1.0;
    double y = 0.0;
    double query_cost = 0.0;
    double cumulative_cost = 0.0;
    double rmse = 0.0;
    bool fallback = false;
};

struct RunRecord {
    Strategy strategy = Strategy::mfcv;
    int repetition = 0;
    int input_dim = 0;
    std::vector<TraceRow> rows;
    /// Per outer iteration (index 0 = seed-only model).
    std::vector<double> iteration_cost;
    std::vector<double> iteration_rmse;
    std::vector<double> wall_seconds;
    Hyperparameters final_hyper;
    int fallbacks = 0;
    bool failed = false;
    std::string error;

    std::vector<const TraceRow*> acquisitions() const
    {
        std::vector<const TraceRow*> out;
        for (const auto& r : rows)
            if (r.iteration > 0)
                out.push_back(&r);
        return out;
    }
};

/// sqrt(mean((mu(x,1) - f(x,1))^2)) over a fixed test set (rows of X, domain coordinates).
inline double rmse(const PosteriorGP& gp, const Eigen::MatrixXd& test_points, const BenchmarkFunction& truth)
{
    if (test_points.rows() < 1)
        throw std::invalid_argument("rmse: empty test set");
    Eigen::MatrixXd U = PosteriorGP::to_unit_rows(gp.dataset().domain, test_points);
    Eigen::VectorXd mu = gp.mean_unit(U, Eigen::VectorXd::Ones(U.rows()));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < test_points.rows(); ++i) {
        const double e = mu[i] - truth.evaluate(test_points.row(i).transpose(), 1.0);
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(test_points.rows()));
}

namespace detail {

enum : std::uint64_t {
    kSeedStream = 11,
    kTestStream = 12,
    kSobolStream = 13,
    kInitialFitStream = 14,
    kStrategyStream = 100,
};

} // namespace detail

/// Seed design and fixed test set for one repetition; identical for every strategy.
struct RepetitionPlan {
    Dataset seed_data;
    Eigen::MatrixXd test_points;
    std::uint64_t seed = 0;
};

inline RepetitionPlan plan_repetition(const ExperimentConfig& cfg, const BenchmarkFunction& f, int rep)
{
    RepetitionPlan plan;
    plan.seed = split_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    Rng seed_rng(split_seed(plan.seed, detail::kSeedStream));
    Eigen::MatrixXd Xs = uniform_points(static_cast<std::size_t>(cfg.n_seed), f.domain(), seed_rng);
    plan.seed_data = Dataset::empty(f.domain());
    for (Eigen::Index i = 0; i < Xs.rows(); ++i) {
        const double s = random_fidelity(f.fidelity_space(), seed_rng);
        plan.seed_data.append(Xs.row(i).transpose(), s, f.evaluate(Xs.row(i).transpose(), s));
    }
    Rng test_rng(split_seed(plan.seed, detail::kTestStream));
    plan.test_points = uniform_points(static_cast<std::size_t>(cfg.n_test), f.domain(), test_rng);
    return plan;
}

namespace detail {

/// Train and fit, retrying once with a stronger jitter policy.
inline PosteriorGP train_and_fit(const Dataset& data, const GpSettings& gs, std::uint64_t seed,
                                 const std::optional<Hyperparameters>& warm, TrainingResult* info = nullptr)
{
    TrainOptions opts;
    opts.restarts = gs.restarts;
    opts.max_iterations = gs.max_iterations;
    opts.seed = seed;
    opts.warm_start = warm;
    try {
        TrainingResult tr = train_detailed(data, gs.bounds, opts);
        if (info)
            *info = tr;
        return PosteriorGP::fit(data, tr.hyper, std::nullopt, opts.jitter);
    } catch (const std::runtime_error&) {
        opts.jitter = JitterPolicy{1e-6, 1e-2, 10.0};
        TrainingResult tr = train_detailed(data, gs.bounds, opts);
        if (info)
            *info = tr;
        return PosteriorGP::fit(data, tr.hyper, std::nullopt, opts.jitter);
    }
}

} // namespace detail

/**
 * One run of the active-learning loop for a strategy:
 * seed -> [fit outer GP -> LOO-CV -> inner GP -> acquire q points -> observe] x B.
 * RMSE at s = 1 is recorded after every retrain, starting from the seed-only model.
 */
inline RunRecord run_strategy(const ExperimentConfig& cfg, Strategy strategy, int rep)
{
    using clock = std::chrono::steady_clock;
    const BenchmarkFunction f = cfg.make_function();
    const Eigen::Index d = f.input_dim();
    const RepetitionPlan plan = plan_repetition(cfg, f, rep);
    const std::uint64_t strat_seed =
        split_seed(plan.seed, detail::kStrategyStream + static_cast<std::uint64_t>(strategy));
    Rng fallback_rng(split_seed(strat_seed, 7));
    const FidelitySpace space = strategy == Strategy::hf ? FidelitySpace::finite({1.0}) : f.fidelity_space();

    RunRecord rec;
    rec.strategy = strategy;
    rec.repetition = rep;
    rec.input_dim = static_cast<int>(d);

    Dataset data = plan.seed_data;
    auto t0 = clock::now();
    std::optional<Hyperparameters> warm;
    std::optional<Hyperparameters> inner_warm;
    // The seed-only model is shared by every strategy of a repetition.
    PosteriorGP gp = detail::train_and_fit(data, cfg.gp, split_seed(plan.seed, detail::kInitialFitStream), warm);
    warm = gp.hyper();
    double current_rmse = rmse(gp, plan.test_points, f);
    rec.iteration_cost.push_back(0.0);
    rec.iteration_rmse.push_back(current_rmse);
    rec.wall_seconds.push_back(std::chrono::duration<double>(clock::now() - t0).count());
    for (Eigen::Index i = 0; i < data.size(); ++i)
        rec.rows.push_back({0, static_cast<int>(i), data.X.row(i).transpose(), data.s[i], data.y[i], 0.0, 0.0,
                            current_rmse, false});

    const SobolSequence sobol_stream(static_cast<std::size_t>(d + 1), split_seed(plan.seed, detail::kSobolStream));
    double cumulative = 0.0;
    const int q = cfg.batch_size;

    for (int t = 1; t <= cfg.iterations; ++t) {
        auto it0 = clock::now();
        std::vector<Candidate> picks;
        bool fallback = false;
        if (strategy == Strategy::sobol) {
            for (int j = 0; j < q; ++j) {
                Eigen::VectorXd u = sobol_stream.point(static_cast<std::uint64_t>((t - 1) * q + j));
                Candidate c;
                c.x = f.domain().from_unit(u.head(d));
                c.s = fidelity_from_unit(u[d], space);
                picks.push_back(std::move(c));
            }
        } else {
            try {
                const auto records = cross_validation_records(gp);
                const Dataset log_cv = log_cv_observations(data, records);
                TrainOptions iopts;
                iopts.restarts = cfg.gp.restarts;
                iopts.max_iterations = cfg.gp.max_iterations;
                iopts.seed = split_seed(strat_seed, 2000 + static_cast<std::uint64_t>(t));
                iopts.warm_start = inner_warm;
                InnerGP inner = fit_inner_gp(log_cv, cfg.gp.bounds, iopts);
                inner_warm = inner.gp.hyper();
                AcquisitionConfig acfg;
                acfg.fantasy_samples = cfg.acquisition.fantasy_samples;
                acfg.inner_opt_restarts = cfg.acquisition.inner_opt_restarts;
                acfg.candidate_grid_size = cfg.acquisition.candidate_grid_size;
                acfg.local_search_evaluations = cfg.acquisition.local_search_evaluations;
                acfg.batch_size = q;
                acfg.fidelity_space = space;
                acfg.seed = split_seed(strat_seed, 3000 + static_cast<std::uint64_t>(t));
                MfcvAcquisition acq(inner.gp, acfg);
                picks = cost_aware_argmax(acq, cfg.cost);
            } catch (const std::runtime_error&) {
                fallback = true;
            }
            if (fallback) {
                picks.clear();
                Eigen::MatrixXd X = uniform_points(static_cast<std::size_t>(q), f.domain(), fallback_rng);
                for (int j = 0; j < q; ++j) {
                    Candidate c;
                    c.x = X.row(j).transpose();
                    c.s = random_fidelity(space, fallback_rng);
                    picks.push_back(std::move(c));
                }
                ++rec.fallbacks;
            }
        }

        std::vector<TraceRow> batch;
        for (int j = 0; j < q; ++j) {
            const auto& c = picks[static_cast<std::size_t>(j)];
            const double y = f.evaluate(c.x, c.s);
            const double qc = cost(c.s, cfg.cost);
            cumulative += qc;
            data.append(c.x, c.s, y);
            batch.push_back({t, j, c.x, c.s, y, qc, cumulative, 0.0, fallback});
        }

        gp = detail::train_and_fit(data, cfg.gp, split_seed(strat_seed, 1000 + static_cast<std::uint64_t>(t)), warm);
        warm = gp.hyper();
        current_rmse = rmse(gp, plan.test_points, f);
        for (auto& r : batch) {
            r.rmse = current_rmse;
            rec.rows.push_back(std::move(r));
        }
        rec.iteration_cost.push_back(cumulative);
        rec.iteration_rmse.push_back(current_rmse);
        rec.wall_seconds.push_back(std::chrono::duration<double>(clock::now() - it0).count());
        if (cfg.cost_cap > 0.0 && cumulative >= cfg.cost_cap)
            break;
    }
    rec.final_hyper = gp.hyper();
    return rec;
}

inline RunRecord run_mfcv(const ExperimentConfig& cfg, int rep = 0)
{
    return run_strategy(cfg, Strategy::mfcv, rep);
}

inline RunRecord run_hf(const ExperimentConfig& cfg, int rep = 0)
{
    return run_strategy(cfg, Strategy::hf, rep);
}

inline RunRecord run_sobol(const ExperimentConfig& cfg, int rep = 0)
{
    return run_strategy(cfg, Strategy::sobol, rep);
}

/// Previous-value interpolation of a step trace onto `grid`. Grid points before
/// the first event take the first value.
inline std::vector<double> step_interpolate(const std::vector<double>& costs, const std::vector<double>& values,
                                            const std::vector<double>& grid)
{
    if (costs.empty() || costs.size() != values.size())
        throw std::invalid_argument("step_interpolate: costs and values must be non-empty and equal length");
    std::vector<double> out(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        auto it = std::upper_bound(costs.begin(), costs.end(), grid[g]);
        const std::size_t idx = it == costs.begin() ? 0 : static_cast<std::size_t>(it - costs.begin()) - 1;
        out[g] = values[idx];
    }
    return out;
}

struct HistogramBin {
    double lower = 0.0;
    double upper = 0.0;
    int count = 0;
};

/// Selected-fidelity histogram over acquisitions (seeds excluded).
inline std::vector<HistogramBin> fidelity_histogram(const std::vector<const RunRecord*>& runs,
                                                    const FidelitySpace& space, int bins = 10)
{
    std::vector<HistogramBin> out;
    if (space.is_continuous()) {
        for (int b = 0; b < bins; ++b)
            out.push_back({static_cast<double>(b) / bins, static_cast<double>(b + 1) / bins, 0});
    } else {
        for (double l : space.levels)
            out.push_back({l, l, 0});
    }
    for (const auto* run : runs) {
        for (const auto* row : run->acquisitions()) {
            if (space.is_continuous()) {
                int b = static_cast<int>(row->s * bins);
                out[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))].count++;
            } else {
                for (auto& bin : out)
                    if (bin.lower == row->s)
                        bin.count++;
            }
        }
    }
    return out;
}

struct StrategySummary {
    Strategy strategy = Strategy::mfcv;
    std::vector<double> mean;
    std::vector<double> stddev;
    int completed = 0;
    int failed = 0;
    std::vector<HistogramBin> histogram;
};

struct SuiteReport {
    ExperimentConfig config;
    std::vector<RunRecord> runs;
    std::vector<double> cost_grid;
    std::vector<StrategySummary> summaries;
};

/// Mean and population standard deviation of step-interpolated RMSE per strategy
/// on a shared cost grid spanning [0, largest final cumulative cost].
inline void summarize(SuiteReport& report, int grid_points = 101)
{
    double max_cost = 0.0;
    for (const auto& r : report.runs)
        if (!r.failed && !r.iteration_cost.empty())
            max_cost = std::max(max_cost, r.iteration_cost.back());
    report.cost_grid.clear();
    if (max_cost <= 0.0 || grid_points < 2) {
        report.cost_grid.push_back(0.0);
    } else {
        for (int g = 0; g < grid_points; ++g)
            report.cost_grid.push_back(max_cost * g / (grid_points - 1));
    }
    const FidelitySpace space = report.config.make_function().fidelity_space();
    report.summaries.clear();
    for (Strategy s : report.config.strategies) {
        StrategySummary sum;
        sum.strategy = s;
        std::vector<std::vector<double>> curves;
        std::vector<const RunRecord*> ok;
        for (const auto& r : report.runs) {
            if (r.strategy != s)
                continue;
            if (r.failed) {
                sum.failed++;
                continue;
            }
            sum.completed++;
            ok.push_back(&r);
            curves.push_back(step_interpolate(r.iteration_cost, r.iteration_rmse, report.cost_grid));
        }
        const std::size_t G = report.cost_grid.size();
        sum.mean.assign(G, 0.0);
        sum.stddev.assign(G, 0.0);
        if (!curves.empty()) {
            const double n = static_cast<double>(curves.size());
            for (std::size_t g = 0; g < G; ++g) {
                double m = 0.0;
                for (const auto& c : curves)
                    m += c[g];
                m /= n;
                double v = 0.0;
                for (const auto& c : curves)
                    v += (c[g] - m) * (c[g] - m);
                sum.mean[g] = m;
                sum.stddev[g] = std::sqrt(v / n);
            }
        }
        sum.histogram = fidelity_histogram(ok, s == Strategy::hf ? FidelitySpace::finite({1.0}) : space);
        report.summaries.push_back(std::move(sum));
    }
}

/// All strategies x repetitions. A failing run is kept with its error and excluded
/// from the aggregates.
inline SuiteReport run_suite(const ExperimentConfig& cfg_in)
{
    ExperimentConfig cfg = cfg_in;
    cfg.validate();
    cfg.resolve();
    SuiteReport report;
    report.config = cfg;

    struct Job {
        Strategy strategy;
        int rep;
    };
    std::vector<Job> jobs;
    for (Strategy s : cfg.strategies)
        for (int r = 0; r < cfg.repetitions; ++r)
            jobs.push_back({s, r});
    report.runs.resize(jobs.size());

    auto run_job = [&](std::size_t i) {
        try {
            report.runs[i] = run_strategy(cfg, jobs[i].strategy, jobs[i].rep);
        } catch (const std::exception& e) {
            RunRecord failed;
            failed.strategy = jobs[i].strategy;
            failed.repetition = jobs[i].rep;
            failed.failed = true;
            failed.error = e.what();
            report.runs[i] = std::move(failed);
        }
    };
    const std::size_t workers = static_cast<std::size_t>(std::max(1, cfg.threads));
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i)
            run_job(i);
    } else {
        // Jobs write to their own slot; results do not depend on scheduling.
        for (std::size_t start = 0; start < jobs.size(); start += workers) {
            std::vector<std::future<void>> fut;
            for (std::size_t i = start; i < std::min(jobs.size(), start + workers); ++i)
                fut.push_back(std::async(std::launch::async, run_job, i));
            for (auto& fu : fut)
                fu.get();
        }
    }
    summarize(report);
    return report;
}

} // namespace mfcv

#endif // MFCV_HARNESS_HPP
