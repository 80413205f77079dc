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

#ifndef MFCV_BENCHMARKS_HPP
#define MFCV_BENCHMARKS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mfcv/sampling.hpp"

namespace mfcv {

/// A multifidelity test function f(x, s); evaluate(x, 1) is the target.
class BenchmarkFunction {
public:
    using Fn = std::function<double(const Eigen::VectorXd&, double)>;

    BenchmarkFunction(std::string name, Box domain, Fn fn, FidelitySpace space = FidelitySpace::continuous())
        : name_(std::move(name)), domain_(std::move(domain)), fn_(std::move(fn)), space_(std::move(space))
    {
        domain_.validate();
        space_.validate();
    }

    const std::string& name() const { return name_; }
    Eigen::Index input_dim() const { return domain_.dim(); }
    const Box& domain() const { return domain_; }
    const FidelitySpace& fidelity_space() const { return space_; }

    double evaluate(const Eigen::VectorXd& x, double s) const
    {
        if (x.size() != input_dim())
            throw std::invalid_argument(name_ + ": expected " + std::to_string(input_dim()) + " inputs");
        if (!domain_.contains(x, 1e-12 * domain_.width().maxCoeff()))
            throw std::invalid_argument(name_ + ": input outside the domain");
        if (!(s >= 0.0 && s <= 1.0))
            throw std::invalid_argument(name_ + ": fidelity outside [0,1]");
        return fn_(x, s);
    }

    double operator()(const Eigen::VectorXd& x, double s) const { return evaluate(x, s); }

    /// Same function with the fidelity space restricted to a finite level set.
    BenchmarkFunction with_fidelity_space(FidelitySpace space) const
    {
        return BenchmarkFunction(name_, domain_, fn_, std::move(space));
    }

private:
    std::string name_;
    Box domain_;
    Fn fn_;
    FidelitySpace space_;
};

namespace bench {

inline Box make_box(std::initializer_list<double> lo, std::initializer_list<double> hi)
{
    Box b{Eigen::VectorXd(static_cast<Eigen::Index>(lo.size())), Eigen::VectorXd(static_cast<Eigen::Index>(hi.size()))};
    std::copy(lo.begin(), lo.end(), b.lower.data());
    std::copy(hi.begin(), hi.end(), b.upper.data());
    return b;
}

inline double multimodal(const Eigen::VectorXd& x, double s)
{
    return (x[0] * x[0] + 4.0) * (x[1] - 1.0) / 20.0 - s * std::sin(2.5 * x[0]) - 2.0;
}

inline double four_branches(const Eigen::VectorXd& x, double s)
{
    // Level sets translate with fidelity.
    const double a = x[0] - 5.0 * s;
    const double b = x[1] - 5.0 * s;
    const double r2 = std::numbers::sqrt2;
    const double quad = 3.0 + 0.1 * (a - b) * (a - b);
    return std::min({quad - (a + b) / r2, quad + (a + b) / r2, a - b + 7.0 / r2, b - a + 7.0 / r2});
}

inline double ishigami(const Eigen::VectorXd& x, double s)
{
    const double s1 = std::sin(x[0] - s);
    const double s2 = std::sin(x[1] - s);
    return s1 + 7.0 * s2 * s2 + 0.1 * std::pow(x[2], 4) * s1;
}

inline constexpr std::array<std::array<double, 6>, 4> kHartmannA{{
    {10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
    {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
    {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
    {17.0, 8.0, 0.05, 10.0, 0.1, 14.0},
}};

inline constexpr std::array<std::array<double, 6>, 4> kHartmannP{{
    {1312, 1696, 5569, 124, 8283, 5886},
    {2329, 4135, 8307, 3736, 1004, 9991},
    {2348, 1451, 3522, 2883, 3047, 6650},
    {4047, 8828, 8732, 5743, 1091, 381},
}};

inline constexpr std::array<double, 4> kHartmannBeta{1.0, 1.2, 3.0, 3.2};

inline double hartmann6(const Eigen::VectorXd& x, double s)
{
    double total = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double e = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            const double t = x[static_cast<Eigen::Index>(j)] - kHartmannP[i][j] * 1e-4;
            e += kHartmannA[i][j] * (t * t);
        }
        const double beta = i == 0 ? kHartmannBeta[0] - 0.1 * (1.0 - s) : kHartmannBeta[i];
        total -= beta * std::exp(-e);
    }
    return total;
}

} // namespace bench

inline BenchmarkFunction multimodal()
{
    return {"multimodal", bench::make_box({-4.0, -3.0}, {7.0, 8.0}), bench::multimodal};
}

inline BenchmarkFunction four_branches()
{
    return {"four_branches", bench::make_box({-8.0, -8.0}, {8.0, 8.0}), bench::four_branches};
}

inline BenchmarkFunction ishigami()
{
    const double pi = std::numbers::pi;
    return {"ishigami", bench::make_box({-pi, -pi, -pi}, {pi, pi, pi}), bench::ishigami};
}

inline BenchmarkFunction hartmann6()
{
    return {"hartmann6", Box::unit(6), bench::hartmann6};
}

/// Restrict a benchmark to a finite fidelity set (which must contain 1.0).
inline BenchmarkFunction discretize_fidelity(const BenchmarkFunction& f, std::vector<double> levels)
{
    if (levels.empty())
        throw std::invalid_argument("discretize_fidelity: empty level set");
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    return f.with_fidelity_space(FidelitySpace::finite(std::move(levels)));
}

inline const std::vector<std::string>& benchmark_names()
{
    static const std::vector<std::string> names{"multimodal", "four_branches", "ishigami", "hartmann6"};
    return names;
}

/// Look up a benchmark by name; an empty level list means continuous fidelity.
inline BenchmarkFunction make_benchmark(const std::string& name, const std::vector<double>& levels = {})
{
    BenchmarkFunction f = [&]() {
        if (name == "multimodal")
            return multimodal();
        if (name == "four_branches")
            return four_branches();
        if (name == "ishigami")
            return ishigami();
        if (name == "hartmann6")
            return hartmann6();
        throw std::invalid_argument("unknown benchmark '" + name + "'");
    }();
    return levels.empty() ? f : discretize_fidelity(f, levels);
}

} // namespace mfcv

#endif // MFCV_BENCHMARKS_HPP
