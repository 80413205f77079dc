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

#ifndef MFCV_CONFIG_HPP
#define MFCV_CONFIG_HPP

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mfcv/harness.hpp"

namespace mfcv {

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& prefix)
{
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError(prefix + it.key(), "unknown key");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& prefix = "")
{
    if (!obj.contains(key) || obj.at(key).is_null())
        return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(prefix + key, "wrong type");
    }
}

inline void read_positive_int(const json& obj, const char* key, int& out, const std::string& prefix = "")
{
    if (!obj.contains(key) || obj.at(key).is_null())
        return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError(prefix + key, "expected an integer");
    out = v.get<int>();
}

} // namespace detail

/// Parse a JSON config object into a validated, fully resolved ExperimentConfig.
inline ExperimentConfig parse_config(const nlohmann::json& j)
{
    using detail::json;
    if (!j.is_object())
        throw ConfigError("<root>", "config must be a JSON object");
    detail::reject_unknown(j,
                           {"benchmark", "levels", "strategy", "batch_size", "iterations", "repetitions", "seed",
                            "cost", "gp", "acquisition", "n_seed", "n_test", "cost_cap", "threads", "output"},
                           "");
    ExperimentConfig c;
    if (!j.contains("benchmark"))
        throw ConfigError("benchmark", "missing (one of multimodal, four_branches, ishigami, hartmann6)");
    detail::read(j, "benchmark", c.benchmark);
    if (j.contains("levels") && !j.at("levels").is_null()) {
        if (!j.at("levels").is_array())
            throw ConfigError("levels", "expected a list of fidelities");
        detail::read(j, "levels", c.levels);
        if (c.levels.empty())
            throw ConfigError("levels", "empty level list (omit the key for continuous fidelity)");
    }
    if (j.contains("strategy")) {
        const auto& st = j.at("strategy");
        c.strategies.clear();
        try {
            if (st.is_string()) {
                c.strategies.push_back(strategy_from_string(st.get<std::string>()));
            } else if (st.is_array()) {
                for (const auto& e : st)
                    c.strategies.push_back(strategy_from_string(e.get<std::string>()));
            } else {
                throw ConfigError("strategy", "expected a name or a list of names");
            }
        } catch (const json::exception&) {
            throw ConfigError("strategy", "expected a name or a list of names");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError("strategy", e.what());
        }
    }
    detail::read_positive_int(j, "batch_size", c.batch_size);
    detail::read_positive_int(j, "iterations", c.iterations);
    detail::read_positive_int(j, "repetitions", c.repetitions);
    if (!j.contains("seed") || j.at("seed").is_null())
        throw ConfigError("seed", "missing (an unsigned integer is required)");
    const auto& seed = j.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0))
        throw ConfigError("seed", "expected a non-negative integer");
    c.seed = seed.get<std::uint64_t>();
    if (j.contains("cost")) {
        const auto& o = j.at("cost");
        if (!o.is_object())
            throw ConfigError("cost", "expected an object");
        detail::reject_unknown(o, {"c0", "c1", "c2"}, "cost.");
        detail::read(o, "c0", c.cost.c0, "cost.");
        detail::read(o, "c1", c.cost.c1, "cost.");
        detail::read(o, "c2", c.cost.c2, "cost.");
    }
    if (j.contains("gp")) {
        const auto& o = j.at("gp");
        if (!o.is_object())
            throw ConfigError("gp", "expected an object");
        detail::reject_unknown(o, {"restarts", "max_iterations", "bounds"}, "gp.");
        detail::read_positive_int(o, "restarts", c.gp.restarts, "gp.");
        detail::read_positive_int(o, "max_iterations", c.gp.max_iterations, "gp.");
        if (o.contains("bounds")) {
            const auto& b = o.at("bounds");
            if (!b.is_object())
                throw ConfigError("gp.bounds", "expected an object");
            detail::reject_unknown(b,
                                   {"lengthscale_lower", "lengthscale_upper", "signal_lower", "signal_upper",
                                    "noise_lower", "noise_upper"},
                                   "gp.bounds.");
            auto& hb = c.gp.bounds;
            detail::read(b, "lengthscale_lower", hb.lengthscale_lower, "gp.bounds.");
            detail::read(b, "lengthscale_upper", hb.lengthscale_upper, "gp.bounds.");
            detail::read(b, "signal_lower", hb.signal_lower, "gp.bounds.");
            detail::read(b, "signal_upper", hb.signal_upper, "gp.bounds.");
            detail::read(b, "noise_lower", hb.noise_lower, "gp.bounds.");
            detail::read(b, "noise_upper", hb.noise_upper, "gp.bounds.");
            if (!(hb.lengthscale_lower > 0 && hb.lengthscale_upper > hb.lengthscale_lower && hb.signal_lower > 0 &&
                  hb.signal_upper > hb.signal_lower && hb.noise_lower > 0 && hb.noise_upper > hb.noise_lower))
                throw ConfigError("gp.bounds", "each bound pair must satisfy 0 < lower < upper");
        }
    }
    if (j.contains("acquisition")) {
        const auto& o = j.at("acquisition");
        if (!o.is_object())
            throw ConfigError("acquisition", "expected an object");
        detail::reject_unknown(
            o, {"fantasy_samples", "inner_opt_restarts", "candidate_grid_size", "local_search_evaluations"},
            "acquisition.");
        detail::read_positive_int(o, "fantasy_samples", c.acquisition.fantasy_samples, "acquisition.");
        detail::read_positive_int(o, "inner_opt_restarts", c.acquisition.inner_opt_restarts, "acquisition.");
        detail::read_positive_int(o, "candidate_grid_size", c.acquisition.candidate_grid_size, "acquisition.");
        detail::read_positive_int(o, "local_search_evaluations", c.acquisition.local_search_evaluations,
                                  "acquisition.");
    }
    detail::read_positive_int(j, "n_seed", c.n_seed);
    detail::read_positive_int(j, "n_test", c.n_test);
    detail::read(j, "cost_cap", c.cost_cap);
    detail::read_positive_int(j, "threads", c.threads);
    detail::read(j, "output", c.output_dir);
    c.validate();
    c.resolve();
    return c;
}

inline ExperimentConfig parse_config_text(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

inline ExperimentConfig parse_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("--config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Fully resolved config as JSON; parse_config(config_to_json(c)) reproduces c.
inline nlohmann::json config_to_json(const ExperimentConfig& c)
{
    nlohmann::json j;
    j["benchmark"] = c.benchmark;
    j["levels"] = c.levels.empty() ? nlohmann::json(nullptr) : nlohmann::json(c.levels);
    auto strategies = nlohmann::json::array();
    for (Strategy s : c.strategies)
        strategies.push_back(to_string(s));
    j["strategy"] = strategies;
    j["batch_size"] = c.batch_size;
    j["iterations"] = c.iterations;
    j["repetitions"] = c.repetitions;
    j["seed"] = c.seed;
    j["cost"] = {{"c0", c.cost.c0}, {"c1", c.cost.c1}, {"c2", c.cost.c2}};
    const auto& b = c.gp.bounds;
    j["gp"] = {{"restarts", c.gp.restarts},
               {"max_iterations", c.gp.max_iterations},
               {"bounds",
                {{"lengthscale_lower", b.lengthscale_lower},
                 {"lengthscale_upper", b.lengthscale_upper},
                 {"signal_lower", b.signal_lower},
                 {"signal_upper", b.signal_upper},
                 {"noise_lower", b.noise_lower},
                 {"noise_upper", b.noise_upper}}}};
    j["acquisition"] = {{"fantasy_samples", c.acquisition.fantasy_samples},
                        {"inner_opt_restarts", c.acquisition.inner_opt_restarts},
                        {"candidate_grid_size", c.acquisition.candidate_grid_size},
                        {"local_search_evaluations", c.acquisition.local_search_evaluations}};
    j["n_seed"] = c.n_seed;
    j["n_test"] = c.n_test;
    j["cost_cap"] = c.cost_cap;
    j["threads"] = c.threads;
    j["output"] = c.output_dir;
    return j;
}

inline bool same_config(const ExperimentConfig& a, const ExperimentConfig& b)
{
    return config_to_json(a) == config_to_json(b);
}

} // namespace mfcv

#endif // MFCV_CONFIG_HPP
