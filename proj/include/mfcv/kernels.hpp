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

#ifndef MFCV_KERNELS_HPP
#define MFCV_KERNELS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mfcv {

/// Anisotropic Matern-5/2 parameters for the input kernel. Lengthscales are in
/// unit-hypercube coordinates.
struct InputKernelParams {
    Eigen::VectorXd lengthscales;
    double signal_variance = 1.0;

    void validate(Eigen::Index d) const
    {
        if (lengthscales.size() != d)
            throw std::invalid_argument("InputKernelParams: expected " + std::to_string(d) +
                                        " lengthscales, got " + std::to_string(lengthscales.size()));
        for (Eigen::Index j = 0; j < d; ++j)
            if (!(lengthscales[j] > 0.0) || !std::isfinite(lengthscales[j]))
                throw std::invalid_argument("InputKernelParams: lengthscales must be positive");
        if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
            throw std::invalid_argument("InputKernelParams: signal_variance must be positive");
    }
};

/// Matern-5/2 over fidelity with unit variance.
struct FidelityKernelParams {
    double lengthscale = 1.0;

    void validate() const
    {
        if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
            throw std::invalid_argument("FidelityKernelParams: lengthscale must be positive");
    }
};

inline constexpr double kSqrt5 = 2.23606797749978969640917366873128;

/// Unit-variance Matern-5/2 profile as a function of the scaled distance r.
inline double matern52(double r)
{
    const double a = kSqrt5 * r;
    return (1.0 + a + a * a / 3.0) * std::exp(-a);
}

/// d/d(log l) of the Matern-5/2 profile, written in terms of r^2 so it stays
/// finite at r = 0.
inline double matern52_dlog_lengthscale(double r, double r2_component)
{
    const double a = kSqrt5 * r;
    return (5.0 / 3.0) * (1.0 + a) * std::exp(-a) * r2_component;
}

namespace detail {

template <typename A, typename B>
double scaled_distance(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& x2,
                       const Eigen::VectorXd& lengthscales)
{
    double r2 = 0.0;
    for (Eigen::Index j = 0; j < lengthscales.size(); ++j) {
        const double t = (x[j] - x2[j]) / lengthscales[j];
        r2 += t * t;
    }
    return std::sqrt(r2);
}

} // namespace detail

template <typename A, typename B>
double matern_input_kernel(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& x2,
                           const InputKernelParams& p)
{
    if (x.size() != x2.size() || x.size() != p.lengthscales.size())
        throw std::invalid_argument("matern_input_kernel: dimension mismatch");
    return p.signal_variance * matern52(detail::scaled_distance(x, x2, p.lengthscales));
}

inline double fidelity_kernel(double s, double s2, const FidelityKernelParams& p)
{
    if (!(s >= 0.0 && s <= 1.0) || !(s2 >= 0.0 && s2 <= 1.0))
        throw std::invalid_argument("fidelity_kernel: fidelity outside [0,1]");
    return matern52(std::abs(s - s2) / p.lengthscale);
}

template <typename A, typename B>
double joint_kernel(const Eigen::MatrixBase<A>& x, double s, const Eigen::MatrixBase<B>& x2, double s2,
                    const InputKernelParams& px, const FidelityKernelParams& ps)
{
    return matern_input_kernel(x, x2, px) * fidelity_kernel(s, s2, ps);
}

/// Cross-covariance between two sets of (x,s) points, rows are points.
/// Inputs are already in unit coordinates; no domain checks are made here.
inline Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& X1, const Eigen::VectorXd& S1,
                                    const Eigen::MatrixXd& X2, const Eigen::VectorXd& S2,
                                    const InputKernelParams& px, const FidelityKernelParams& ps)
{
    Eigen::MatrixXd K(X1.rows(), X2.rows());
    for (Eigen::Index j = 0; j < X2.rows(); ++j)
        for (Eigen::Index i = 0; i < X1.rows(); ++i)
            K(i, j) = px.signal_variance *
                      matern52(detail::scaled_distance(X1.row(i), X2.row(j), px.lengthscales)) *
                      matern52(std::abs(S1[i] - S2[j]) / ps.lengthscale);
    return K;
}

/// K_n over a training set. Filled from the lower triangle so the result is
/// exactly symmetric.
inline Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const Eigen::VectorXd& S,
                                     const InputKernelParams& px, const FidelityKernelParams& ps)
{
    const Eigen::Index n = X.rows();
    if (n < 1)
        throw std::invalid_argument("kernel_matrix: need at least one point");
    if (S.size() != n)
        throw std::invalid_argument("kernel_matrix: X and S lengths disagree");
    px.validate(X.cols());
    ps.validate();
    if (!X.allFinite() || !S.allFinite())
        throw std::invalid_argument("kernel_matrix: non-finite input");
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        K(j, j) = px.signal_variance;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v = px.signal_variance *
                             matern52(detail::scaled_distance(X.row(i), X.row(j), px.lengthscales)) *
                             matern52(std::abs(S[i] - S[j]) / ps.lengthscale);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

} // namespace mfcv

#endif // MFCV_KERNELS_HPP
