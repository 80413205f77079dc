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
#include <vector>

#include "mfcv/cost_model.hpp"

using namespace mfcv;

TEST(CostModel, EndpointValues)
{
    const CostParams p;
    EXPECT_EQ(cost(1.0, p), 550.0);
    EXPECT_EQ(cost(0.0, p), 500.0 * (0.1 + std::exp(-10.0)));
    EXPECT_NEAR(cost(0.0, p), 50.02269996488125, 1e-12);
    EXPECT_EQ(normalized_cost(1.0, p), 1.1);
}

TEST(CostModel, StrictlyIncreasingOnFineGrid)
{
    const CostParams p;
    double prev = cost(0.0, p);
    for (int i = 1; i < 1000; ++i) {
        const double c = cost(i / 999.0, p);
        ASSERT_GT(c, prev) << i;
        prev = c;
    }
}

TEST(CostModel, PositiveEverywhere)
{
    const CostParams p{500.0, 10.0, 0.1};
    for (int i = 0; i <= 100; ++i)
        EXPECT_GT(normalized_cost(i / 100.0, p), 0.0);
}

TEST(CostModel, FidelityOutsideUnitIntervalRejected)
{
    const CostParams p;
    EXPECT_THROW(cost(-0.01, p), std::invalid_argument);
    EXPECT_THROW(cost(1.01, p), std::invalid_argument);
    EXPECT_THROW(normalized_cost(std::nan(""), p), std::invalid_argument);
}

TEST(CostModel, InvalidParametersRejected)
{
    EXPECT_THROW((CostParams{0.0, 10.0, 0.1}.validate()), std::invalid_argument);
    EXPECT_THROW((CostParams{500.0, -1.0, 0.1}.validate()), std::invalid_argument);
    EXPECT_THROW((CostParams{500.0, 10.0, 0.0}.validate()), std::invalid_argument);
}

TEST(CostModel, CumulativeIsSum)
{
    const CostParams p;
    std::vector<double> s{0.0, 0.5, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(cumulative_cost(s, p), cost(0.0, p) + cost(0.5, p) + 2 * cost(1.0, p));
    EXPECT_EQ(cumulative_cost(std::vector<double>{}, p), 0.0);
}
