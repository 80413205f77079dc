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

#ifndef MFCV_LOOCV_HPP
#define MFCV_LOOCV_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "mfcv/gp.hpp"

namespace mfcv {

/// Leave-one-out statistics for one observation. loo_mean / loo_variance are in
/// the GP's output units; the CV-error moments use the residual divided by the
/// response scale.
struct CVRecord {
    Eigen::Index index = 0;
    double loo_mean = 0.0;
    double loo_variance = 0.0;
    double ecv_mean = 1.0;
    double ecv_variance = 2.0;
    double log_ecv = 0.0;
};

/**
 * Closed-form LOO predictive mean and variance at every training site:
 *
 *   mu_{-i}    = y_i - [K^{-1} y]_i / [K^{-1}]_{ii}
 *   sigma2_{-i} = 1 / [K^{-1}]_{ii}
 *
 * with K = K_n + sigma_eps^2 I (plus jitter) and y the transformed responses.
 * Uses n solves against the existing factor and no refactorization.
 */
inline std::vector<CVRecord> loo_statistics(const PosteriorGP& gp)
{
    const Eigen::Index n = gp.size();
    if (n < 2)
        throw std::invalid_argument("loo_statistics: need at least two observations");
    const Eigen::VectorXd inv_diag = gp.inverse_diagonal();
    const auto& z = gp.internal_y();
    const auto& alpha = gp.alpha();
    const auto& tr = gp.transform();
    std::vector<CVRecord> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        CVRecord& r = out[static_cast<std::size_t>(i)];
        r.index = i;
        r.loo_mean = tr.inverse(z[i] - alpha[i] / inv_diag[i]);
        r.loo_variance = tr.scale * tr.scale / inv_diag[i];
    }
    return out;
}

/// Non-central chi-squared moments of the squared LOO residual:
/// E = 1 + r^2, V = 2(1 + 2 r^2), r = (mu_{-i} - y_i) / scale.
inline std::vector<CVRecord> cv_error_moments(std::vector<CVRecord> records, const Eigen::VectorXd& y,
                                              double scale = 1.0)
{
    for (auto& r : records) {
        const double res = (r.loo_mean - y[r.index]) / scale;
        const double r2 = res * res;
        r.ecv_mean = 1.0 + r2;
        r.ecv_variance = 2.0 * (1.0 + 2.0 * r2);
        r.log_ecv = std::log(r.ecv_mean);
    }
    return records;
}

/// LOO statistics plus CV-error moments, residuals scaled by the GP's response scale.
inline std::vector<CVRecord> cross_validation_records(const PosteriorGP& gp)
{
    return cv_error_moments(loo_statistics(gp), gp.dataset().y, gp.transform().scale);
}

/// Dataset of (x, s, log E[e_cv]) over the same sites and domain as the outer GP.
inline Dataset log_cv_observations(const Dataset& sites, const std::vector<CVRecord>& records)
{
    if (static_cast<Eigen::Index>(records.size()) != sites.size())
        throw std::invalid_argument("log_cv_observations: one record per observation required");
    Dataset out = sites;
    for (const auto& r : records) {
        if (!(r.ecv_mean >= 1.0))
            throw std::invalid_argument("log_cv_observations: CV error mean must be >= 1");
        out.y[r.index] = r.log_ecv;
    }
    return out;
}

} // namespace mfcv

#endif // MFCV_LOOCV_HPP
