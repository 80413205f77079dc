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

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfcv/mfcv.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string strategy;
    std::string benchmark;
    std::optional<int> iterations;
    std::optional<int> batch;
    std::optional<int> reps;
    std::string out;
};

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config_path, "JSON experiment config");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--strategy", o.strategy, "comma separated list of mfcv, hf, sobol");
    cmd->add_option("--benchmark", o.benchmark, "multimodal | four_branches | ishigami | hartmann6");
    cmd->add_option("--iterations", o.iterations, "outer iterations B");
    cmd->add_option("--batch", o.batch, "batch size q");
    cmd->add_option("--reps", o.reps, "repetitions");
    cmd->add_option("--out", o.out, "output directory");
}

nlohmann::json load_json(const std::string& path)
{
    if (path.empty())
        return nlohmann::json::object();
    std::ifstream in(path);
    if (!in)
        throw mfcv::ConfigError("--config", "cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw mfcv::ConfigError("--config", std::string("malformed JSON: ") + e.what());
    }
}

mfcv::ExperimentConfig build_config(const Overrides& o)
{
    nlohmann::json j = load_json(o.config_path);
    if (!j.is_object())
        throw mfcv::ConfigError("<root>", "config must be a JSON object");
    if (o.seed)
        j["seed"] = *o.seed;
    if (!o.strategy.empty()) {
        auto list = nlohmann::json::array();
        std::stringstream ss(o.strategy);
        std::string item;
        while (std::getline(ss, item, ','))
            list.push_back(item);
        j["strategy"] = list;
    }
    if (!o.benchmark.empty())
        j["benchmark"] = o.benchmark;
    if (o.iterations)
        j["iterations"] = *o.iterations;
    if (o.batch)
        j["batch_size"] = *o.batch;
    if (o.reps)
        j["repetitions"] = *o.reps;
    if (!o.out.empty())
        j["output"] = o.out;
    return mfcv::parse_config(j);
}

std::vector<double> parse_list(const std::string& text, const char* field)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw mfcv::ConfigError(field, "not a number: '" + item + "'");
        }
    }
    return out;
}

int cmd_run(const Overrides& o)
{
    const mfcv::ExperimentConfig cfg = build_config(o);
    const mfcv::SuiteReport rep = mfcv::run_command(cfg);
    int failed = 0;
    for (const auto& r : rep.runs) {
        if (r.failed) {
            ++failed;
            std::cerr << "run " << mfcv::to_string(r.strategy) << " rep " << r.repetition << " failed: " << r.error
                      << '\n';
        }
    }
    for (const auto& s : rep.summaries)
        std::cout << mfcv::to_string(s.strategy) << ": " << s.completed << " runs, final mean RMSE "
                  << mfcv::fmt_num(s.mean.empty() ? 0.0 : s.mean.back()) << '\n';
    std::cout << "wrote " << cfg.output_dir << '\n';
    return failed == static_cast<int>(rep.runs.size()) ? kRuntimeError : kOk;
}

int cmd_validate(const Overrides& o)
{
    const mfcv::ExperimentConfig cfg = build_config(o);
    std::cout << mfcv::config_to_json(cfg).dump(2) << '\n';
    return kOk;
}

int cmd_bench(const std::string& name, const std::vector<std::string>& points, const std::string& fidelity,
              const std::string& levels)
{
    std::vector<double> lv;
    if (!levels.empty())
        lv = parse_list(levels, "--levels");
    mfcv::BenchmarkFunction f = [&] {
        try {
            return mfcv::make_benchmark(name, lv);
        } catch (const std::invalid_argument& e) {
            throw mfcv::ConfigError("--benchmark", e.what());
        }
    }();
    const std::vector<double> fids = fidelity.empty() ? std::vector<double>{1.0} : parse_list(fidelity, "--fidelity");
    for (const auto& p : points) {
        const std::vector<double> v = parse_list(p, "--point");
        if (static_cast<Eigen::Index>(v.size()) != f.input_dim())
            throw mfcv::ConfigError("--point", "expected " + std::to_string(f.input_dim()) + " coordinates");
        Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        for (double s : fids) {
            double y = 0.0;
            try {
                y = f.evaluate(x, s);
            } catch (const std::invalid_argument& e) {
                throw mfcv::ConfigError("--point", e.what());
            }
            std::cout << p << ',' << mfcv::fmt_num(s) << ',' << mfcv::fmt_num(y) << '\n';
        }
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"mfcv: multifidelity active learning driven by cross-validation error"};
    app.require_subcommand(1);

    Overrides run_opts;
    auto* run = app.add_subcommand("run", "run the experiment suite and write the output bundle");
    add_common(run, run_opts);

    Overrides val_opts;
    auto* validate = app.add_subcommand("validate", "check a config and print it with defaults filled in");
    add_common(validate, val_opts);

    std::string bench_name;
    std::vector<std::string> bench_points;
    std::string bench_fidelity;
    std::string bench_levels;
    auto* bench = app.add_subcommand("bench", "print benchmark values at given points");
    bench->add_option("--benchmark", bench_name, "benchmark name")->required();
    bench->add_option("--point", bench_points, "comma separated input point (repeatable)")->required();
    bench->add_option("--fidelity", bench_fidelity, "comma separated fidelities (default 1)");
    bench->add_option("--levels", bench_levels, "comma separated discrete fidelity levels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run)
            return cmd_run(run_opts);
        if (*validate)
            return cmd_validate(val_opts);
        return cmd_bench(bench_name, bench_points, bench_fidelity, bench_levels);
    } catch (const mfcv::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}
