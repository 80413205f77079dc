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

#include "mfcv/loocv.hpp"
#include "test_util.hpp"

using namespace mfcv;
using namespace mfcv::testing;

namespace {

double rel_err(double a, double b)
{
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

} // namespace

TEST(LOO, ClosedFormMatchesRefit)
{
    Rng rng(31);
    const Eigen::Index dims[] = {2, 3, 6};
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index d = dims[trial % 3];
        const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.index(26));
        const Dataset data = random_dataset(rng, d, n, trial % 4 == 0);
        const Hyperparameters h = random_hyper(rng, d);
        const PosteriorGP gp = PosteriorGP::fit(data, h);
        const auto recs = loo_statistics(gp);
        ASSERT_EQ(static_cast<Eigen::Index>(recs.size()), n);
        const double sc2 = gp.transform().scale * gp.transform().scale;
        for (Eigen::Index i = 0; i < n; ++i) {
            const PosteriorGP refit = PosteriorGP::fit(data.without(i), h, gp.transform());
            const Prediction p = refit.predict(data.X.row(i).transpose(), data.s[i]);
            const double var = p.variance + sc2 * (h.noise_variance + refit.jitter());
            EXPECT_LT(rel_err(recs[static_cast<std::size_t>(i)].loo_mean, p.mean), 1e-6) << trial << "/" << i;
            EXPECT_LT(rel_err(recs[static_cast<std::size_t>(i)].loo_variance, var), 1e-6) << trial << "/" << i;
        }
    }
}

TEST(LOO, UsesAtMostNSolvesAgainstExistingFactor)
{
    Rng rng(32);
    const Dataset data = random_dataset(rng, 3, 20);
    const PosteriorGP gp = PosteriorGP::fit(data, random_hyper(rng, 3));
    const std::size_t before = gp.solve_count();
    loo_statistics(gp);
    EXPECT_LE(gp.solve_count() - before, 20u);
}

TEST(LOO, NeedsTwoPoints)
{
    Dataset data = Dataset::empty(Box::unit(1));
    data.append(Eigen::VectorXd::Constant(1, 0.5), 1.0, 1.0);
    Rng rng(33);
    const PosteriorGP gp = PosteriorGP::fit(data, random_hyper(rng, 1));
    EXPECT_THROW(loo_statistics(gp), std::invalid_argument);
}

TEST(LOO, DuplicatePointPredictsItsTwin)
{
    // With negligible noise, leaving out one of two coincident points predicts the other's value.
    Dataset data = Dataset::empty(Box::unit(1));
    data.append(Eigen::VectorXd::Constant(1, 0.2), 1.0, 0.0);
    data.append(Eigen::VectorXd::Constant(1, 0.7), 1.0, 3.0);
    data.append(Eigen::VectorXd::Constant(1, 0.7), 1.0, 3.0);
    Hyperparameters h;
    h.input.lengthscales = Eigen::VectorXd::Constant(1, 0.2);
    h.fidelity.lengthscale = 1.0;
    h.noise_variance = 1e-6;
    const PosteriorGP gp = PosteriorGP::fit(data, h);
    const auto recs = loo_statistics(gp);
    EXPECT_NEAR(recs[1].loo_mean, 3.0, 1e-3);
    EXPECT_NEAR(recs[2].loo_mean, 3.0, 1e-3);
}

TEST(ChiSquared, MomentIdentitiesExactOnDyadicResiduals)
{
    // Dyadic residuals keep every operation exact in binary floating point.
    std::vector<CVRecord> recs;
    Eigen::VectorXd y(64);
    for (int i = 0; i < 64; ++i) {
        CVRecord r;
        r.index = i;
        r.loo_mean = static_cast<double>(i - 32) / 16.0;
        recs.push_back(r);
        y[i] = 0.0;
    }
    const auto out = cv_error_moments(recs, y);
    for (const auto& r : out) {
        const double res = r.loo_mean;
        EXPECT_EQ(r.ecv_mean, 1.0 + res * res);
        EXPECT_EQ(r.ecv_variance, 2.0 * (1.0 + 2.0 * res * res));
        EXPECT_EQ(r.ecv_variance - 2.0, 4.0 * (r.ecv_mean - 1.0));
        EXPECT_EQ(r.log_ecv, std::log(r.ecv_mean));
    }
}

TEST(ChiSquared, MomentIdentitiesOnRandomResiduals)
{
    Rng rng(34);
    std::vector<CVRecord> recs;
    Eigen::VectorXd y(200);
    for (int i = 0; i < 200; ++i) {
        CVRecord r;
        r.index = i;
        r.loo_mean = rng.uniform(-10.0, 10.0);
        y[i] = rng.uniform(-10.0, 10.0);
        recs.push_back(r);
    }
    const auto out = cv_error_moments(recs, y, 2.5);
    for (const auto& r : out) {
        const double res = (r.loo_mean - y[r.index]) / 2.5;
        EXPECT_EQ(r.ecv_mean, 1.0 + res * res);
        EXPECT_EQ(r.ecv_variance, 2.0 * (1.0 + 2.0 * res * res));
        EXPECT_NEAR(r.ecv_variance - 2.0, 4.0 * (r.ecv_mean - 1.0), 1e-12 * r.ecv_variance);
        EXPECT_GE(r.ecv_mean, 1.0);
        EXPECT_GE(r.log_ecv, 0.0);
    }
}

TEST(ChiSquared, ZeroResidualGivesUnitMean)
{
    CVRecord r;
    r.index = 0;
    r.loo_mean = 4.0;
    const auto out = cv_error_moments({r}, Eigen::VectorXd::Constant(1, 4.0));
    EXPECT_EQ(out[0].ecv_mean, 1.0);
    EXPECT_EQ(out[0].ecv_variance, 2.0);
    EXPECT_EQ(out[0].log_ecv, 0.0);
}

TEST(LOO, LogCvObservationsKeepSites)
{
    Rng rng(35);
    const Dataset data = random_dataset(rng, 2, 10);
    const PosteriorGP gp = PosteriorGP::fit(data, random_hyper(rng, 2));
    const auto recs = cross_validation_records(gp);
    const Dataset obs = log_cv_observations(data, recs);
    EXPECT_EQ(obs.X, data.X);
    EXPECT_EQ(obs.s, data.s);
    for (const auto& r : recs)
        EXPECT_EQ(obs.y[r.index], r.log_ecv);
    EXPECT_THROW(log_cv_observations(data, std::vector<CVRecord>(3)), std::invalid_argument);
}
