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

#include "mfcv/optimize.hpp"

using namespace mfcv::opt;

TEST(Lbfgs, RosenbrockInterior)
{
    auto fg = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g.resize(2);
        g[0] = -2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] * x[0]);
        g[1] = 200 * (x[1] - x[0] * x[0]);
        return (1 - x[0]) * (1 - x[0]) + 100 * std::pow(x[1] - x[0] * x[0], 2);
    };
    LbfgsOptions o;
    o.max_iterations = 500;
    const auto r = minimize_box(fg, Eigen::Vector2d(-1.2, 1.0), Eigen::Vector2d(-5, -5), Eigen::Vector2d(5, 5), o);
    EXPECT_TRUE(r.finite);
    EXPECT_NEAR(r.x[0], 1.0, 1e-4);
    EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(Lbfgs, ActiveBound)
{
    // Unconstrained minimum at (3, -2); the box caps both coordinates.
    auto fg = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = 2 * (x - Eigen::Vector2d(3, -2));
        return (x - Eigen::Vector2d(3, -2)).squaredNorm();
    };
    const auto r = minimize_box(fg, Eigen::Vector2d(0, 0), Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1));
    EXPECT_NEAR(r.x[0], 1.0, 1e-10);
    EXPECT_NEAR(r.x[1], -1.0, 1e-10);
    EXPECT_NEAR(r.value, 5.0, 1e-10);
}

TEST(Lbfgs, BacksOffFromNonFiniteRegion)
{
    auto fg = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g.resize(1);
        if (x[0] > 0.5)
            return std::numeric_limits<double>::infinity();
        g[0] = -1.0;
        return -x[0];
    };
    const auto r = minimize_box(fg, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, -1),
                                Eigen::VectorXd::Constant(1, 1));
    EXPECT_TRUE(r.finite);
    EXPECT_LE(r.x[0], 0.5);
}

TEST(Pattern, ContinuousMaximum)
{
    auto f = [](const Eigen::VectorXd& x) { return -std::pow(x[0] - 0.3, 2) - std::pow(x[1] - 0.8, 2); };
    PatternOptions o;
    o.min_step = 1e-6;
    o.max_evaluations = 5000;
    const auto r = maximize_pattern(f, Eigen::Vector2d(0.5, 0.5), {Coordinate{}, Coordinate{}}, o);
    EXPECT_NEAR(r.x[0], 0.3, 1e-5);
    EXPECT_NEAR(r.x[1], 0.8, 1e-5);
}

TEST(Pattern, DiscreteCoordinateMovesBetweenLevels)
{
    auto f = [](const Eigen::VectorXd& x) { return -std::pow(x[0] - 0.6, 2) - std::pow(x[1] - 3.0, 2); };
    const auto r = maximize_pattern(f, Eigen::Vector2d(0.5, 0.0), {Coordinate{}, Coordinate{5}});
    EXPECT_EQ(r.x[1], 3.0);
    EXPECT_NEAR(r.x[0], 0.6, 2e-3);
}

TEST(Pattern, RespectsBudgetAndNeverWorsens)
{
    int calls = 0;
    auto f = [&](const Eigen::VectorXd& x) {
        ++calls;
        return std::sin(10 * x[0]) + std::cos(7 * x[1]);
    };
    PatternOptions o;
    o.max_evaluations = 25;
    const Eigen::Vector2d x0(0.1, 0.9);
    const double start = std::sin(1.0) + std::cos(6.3);
    const auto r = maximize_pattern(f, x0, {Coordinate{}, Coordinate{}}, o);
    EXPECT_LE(calls, 25);
    EXPECT_GE(r.value, start);
}
