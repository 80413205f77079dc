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

#ifndef MFCV_TESTS_TEST_UTIL_HPP
#define MFCV_TESTS_TEST_UTIL_HPP

#include <cmath>

#include <Eigen/Dense>

#include "mfcv/gp.hpp"
#include "mfcv/sampling.hpp"

namespace mfcv::testing {

/// Random box, sites, fidelities and a smooth response.
inline Dataset random_dataset(Rng& rng, Eigen::Index d, Eigen::Index n, bool discrete = false)
{
    Box box{Eigen::VectorXd(d), Eigen::VectorXd(d)};
    for (Eigen::Index j = 0; j < d; ++j) {
        box.lower[j] = -5.0 + 4.0 * rng.uniform();
        box.upper[j] = box.lower[j] + 1.0 + 6.0 * rng.uniform();
    }
    Dataset data = Dataset::empty(box);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd u(d);
        for (Eigen::Index j = 0; j < d; ++j)
            u[j] = rng.uniform();
        const double s = discrete ? 0.5 * static_cast<double>(rng.index(3)) : rng.uniform();
        double y = 3.0 * s;
        for (Eigen::Index j = 0; j < d; ++j)
            y += std::sin(3.0 * u[j] + static_cast<double>(j)) * (1.0 + 0.5 * s);
        data.append(box.from_unit(u), s, 10.0 + 4.0 * y + 0.01 * rng.uniform());
    }
    return data;
}

inline Hyperparameters random_hyper(Rng& rng, Eigen::Index d)
{
    Hyperparameters h;
    h.input.lengthscales.resize(d);
    for (Eigen::Index j = 0; j < d; ++j)
        h.input.lengthscales[j] = 0.2 + 0.8 * rng.uniform();
    h.input.signal_variance = 0.5 + 1.5 * rng.uniform();
    h.fidelity.lengthscale = 0.3 + rng.uniform();
    h.noise_variance = 1e-4 + 1e-2 * rng.uniform();
    return h;
}

/// Matern-5/2 product kernel evaluated from scratch in unit coordinates.
inline double oracle_kernel(const Eigen::VectorXd& u, double s, const Eigen::VectorXd& v, double t,
                            const Hyperparameters& h)
{
    auto m52 = [](double r) { return (1.0 + std::sqrt(5.0) * r + 5.0 * r * r / 3.0) * std::exp(-std::sqrt(5.0) * r); };
    double r2 = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j)
        r2 += std::pow((u[j] - v[j]) / h.input.lengthscales[j], 2);
    return h.input.signal_variance * m52(std::sqrt(r2)) * m52(std::abs(s - t) / h.fidelity.lengthscale);
}

inline Eigen::MatrixXd unit_rows(const Dataset& data)
{
    Eigen::MatrixXd U(data.size(), data.dim());
    for (Eigen::Index i = 0; i < data.size(); ++i)
        U.row(i) = data.domain.to_unit(data.X.row(i).transpose()).transpose();
    return U;
}

/// (K + (noise + jitter) I) built with the oracle kernel.
inline Eigen::MatrixXd oracle_gram(const Dataset& data, const Hyperparameters& h, double jitter)
{
    const Eigen::MatrixXd U = unit_rows(data);
    const Eigen::Index n = data.size();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            K(i, j) = oracle_kernel(U.row(i).transpose(), data.s[i], U.row(j).transpose(), data.s[j], h);
    K.diagonal().array() += h.noise_variance + jitter;
    return K;
}

} // namespace mfcv::testing

#endif // MFCV_TESTS_TEST_UTIL_HPP
