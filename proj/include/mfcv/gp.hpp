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

#ifndef MFCV_GP_HPP
#define MFCV_GP_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mfcv/kernels.hpp"
#include "mfcv/optimize.hpp"
#include "mfcv/sampling.hpp"

namespace mfcv {

class SingularModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Observation record over (x, s) with responses y. X is stored in domain
/// coordinates; the GP maps it to the unit hypercube internally.
struct Dataset {
    Box domain;
    Eigen::MatrixXd X;
    Eigen::VectorXd s;
    Eigen::VectorXd y;

    static Dataset empty(const Box& domain)
    {
        return Dataset{domain, Eigen::MatrixXd(0, domain.dim()), Eigen::VectorXd(0), Eigen::VectorXd(0)};
    }

    Eigen::Index size() const { return X.rows(); }
    Eigen::Index dim() const { return X.cols(); }

    void validate() const
    {
        domain.validate();
        if (X.rows() < 1)
            throw std::invalid_argument("Dataset: need at least one observation");
        if (X.cols() != domain.dim())
            throw std::invalid_argument("Dataset: input dimension does not match the domain");
        if (s.size() != X.rows() || y.size() != X.rows())
            throw std::invalid_argument("Dataset: X, s and y lengths disagree");
        if (!X.allFinite() || !s.allFinite() || !y.allFinite())
            throw std::invalid_argument("Dataset: non-finite entry");
        const double slack = 1e-12;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            if (!domain.contains(X.row(i).transpose(), slack * domain.width().maxCoeff()))
                throw std::invalid_argument("Dataset: row " + std::to_string(i) + " outside the domain box");
            if (!(s[i] >= 0.0 && s[i] <= 1.0))
                throw std::invalid_argument("Dataset: fidelity outside [0,1] at row " + std::to_string(i));
        }
    }

    void append(const Eigen::VectorXd& x, double fidelity, double value)
    {
        const Eigen::Index n = size();
        X.conservativeResize(n + 1, domain.dim());
        X.row(n) = x.transpose();
        s.conservativeResize(n + 1);
        s[n] = fidelity;
        y.conservativeResize(n + 1);
        y[n] = value;
    }

    /// Copy with observation i removed.
    Dataset without(Eigen::Index i) const
    {
        Dataset out = empty(domain);
        for (Eigen::Index k = 0; k < size(); ++k)
            if (k != i)
                out.append(X.row(k).transpose(), s[k], y[k]);
        return out;
    }
};

/// Kernel and noise parameters, in the GP's internal (transformed) response units.
struct Hyperparameters {
    InputKernelParams input;
    FidelityKernelParams fidelity;
    double noise_variance = 0.0;

    void validate(Eigen::Index d) const
    {
        input.validate(d);
        fidelity.validate();
        if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
            throw std::invalid_argument("Hyperparameters: noise_variance must be non-negative");
    }

    /// [log l_1..l_d, log l_s, log signal_variance, log noise_variance]
    Eigen::VectorXd to_log() const
    {
        const Eigen::Index d = input.lengthscales.size();
        Eigen::VectorXd v(d + 3);
        v.head(d) = input.lengthscales.array().log().matrix();
        v[d] = std::log(fidelity.lengthscale);
        v[d + 1] = std::log(input.signal_variance);
        v[d + 2] = std::log(noise_variance);
        return v;
    }

    static Hyperparameters from_log(const Eigen::VectorXd& v)
    {
        const Eigen::Index d = v.size() - 3;
        Hyperparameters h;
        h.input.lengthscales = v.head(d).array().exp().matrix();
        h.fidelity.lengthscale = std::exp(v[d]);
        h.input.signal_variance = std::exp(v[d + 1]);
        h.noise_variance = std::exp(v[d + 2]);
        return h;
    }
};

/// Affine response map: internal = (y - offset) / scale.
struct ResponseTransform {
    double offset = 0.0;
    double scale = 1.0;

    static ResponseTransform identity() { return {}; }

    /// Zero mean, unit (population) variance. Constant data keeps scale 1.
    static ResponseTransform standardize(const Eigen::VectorXd& y)
    {
        ResponseTransform t;
        if (y.size() == 0)
            return t;
        t.offset = y.mean();
        const double var = (y.array() - t.offset).square().mean();
        t.scale = var > 1e-24 ? std::sqrt(var) : 1.0;
        return t;
    }

    Eigen::VectorXd forward(const Eigen::VectorXd& y) const { return ((y.array() - offset) / scale).matrix(); }
    double forward(double y) const { return (y - offset) / scale; }
    double inverse(double z) const { return offset + scale * z; }
};

/// Diagonal jitter, relative to signal variance, escalated on factorization failure.
struct JitterPolicy {
    double initial = 1e-8;
    double max = 1e-4;
    double factor = 10.0;
};

struct JitteredFactor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

/// Cholesky of K + jitter*I under the escalation policy; nullopt if every level fails.
inline std::optional<JitteredFactor> factorize(const Eigen::MatrixXd& K, double signal_variance,
                                               const JitterPolicy& policy = {})
{
    for (double rel = policy.initial; rel <= policy.max * (1.0 + 1e-12); rel *= policy.factor) {
        JitteredFactor f;
        f.jitter = rel * signal_variance;
        Eigen::MatrixXd A = K;
        A.diagonal().array() += f.jitter;
        f.llt.compute(A);
        if (f.llt.info() == Eigen::Success && f.llt.matrixLLT().diagonal().minCoeff() > 0.0)
            return f;
    }
    return std::nullopt;
}

/// Solve (K + sigma^2 I) v = b against an existing factor.
inline Eigen::VectorXd solve_spd(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::VectorXd& b)
{
    if (b.size() != chol.rows())
        throw std::invalid_argument("solve_spd: right-hand side has wrong length");
    return chol.solve(b);
}

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/**
 * Posterior of the joint (x, s) Gaussian process given a dataset and fixed
 * hyperparameters. Immutable after construction.
 *
 * Responses are mapped through a ResponseTransform before fitting; predict()
 * returns values in the original units. Inputs are mapped to the unit box.
 */
class PosteriorGP {
public:
    static PosteriorGP fit(const Dataset& data, const Hyperparameters& hyper,
                           std::optional<ResponseTransform> transform = std::nullopt,
                           const JitterPolicy& jitter = {})
    {
        data.validate();
        hyper.validate(data.dim());
        PosteriorGP gp;
        gp.data_ = data;
        gp.hyper_ = hyper;
        gp.transform_ = transform ? *transform : ResponseTransform::standardize(data.y);
        gp.U_ = to_unit_rows(data.domain, data.X);
        gp.z_ = gp.transform_.forward(data.y);

        Eigen::MatrixXd K = kernel_matrix(gp.U_, data.s, hyper.input, hyper.fidelity);
        K.diagonal().array() += hyper.noise_variance;
        auto f = factorize(K, hyper.input.signal_variance, jitter);
        if (!f)
            throw SingularModelError("PosteriorGP::fit: kernel matrix not factorizable after jitter escalation");
        gp.factor_ = std::make_shared<const JitteredFactor>(std::move(*f));
        gp.alpha_ = gp.factor_->llt.solve(gp.z_);
        return gp;
    }

    Eigen::Index size() const { return U_.rows(); }
    Eigen::Index dim() const { return U_.cols(); }

    const Dataset& dataset() const { return data_; }
    const Hyperparameters& hyper() const { return hyper_; }
    const ResponseTransform& transform() const { return transform_; }
    const Eigen::LLT<Eigen::MatrixXd>& factor() const { return factor_->llt; }
    double jitter() const { return factor_->jitter; }

    /// Training inputs in unit coordinates, fidelities, and transformed responses.
    const Eigen::MatrixXd& unit_inputs() const { return U_; }
    const Eigen::VectorXd& fidelities() const { return data_.s; }
    const Eigen::VectorXd& internal_y() const { return z_; }
    /// (K_n + sigma^2 I)^{-1} z
    const Eigen::VectorXd& alpha() const { return alpha_; }

    /// Solve against the stored factor. Each call is counted.
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const
    {
        solves_->fetch_add(1, std::memory_order_relaxed);
        return solve_spd(factor_->llt, b);
    }

    std::size_t solve_count() const { return solves_->load(); }

    Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const
    {
        if (x.size() != dim())
            throw std::invalid_argument("PosteriorGP: query dimension " + std::to_string(x.size()) +
                                        " does not match " + std::to_string(dim()));
        return data_.domain.to_unit(x);
    }

    /// k((U,S), X_n) as an m x n matrix.
    Eigen::MatrixXd cross_covariance_unit(const Eigen::MatrixXd& U, const Eigen::VectorXd& S) const
    {
        return cross_kernel(U, S, U_, data_.s, hyper_.input, hyper_.fidelity);
    }

    /// Posterior mean/variance in internal units at unit-coordinate queries.
    Prediction predict_internal_unit(const Eigen::VectorXd& u, double s) const
    {
        if (!(s >= 0.0 && s <= 1.0))
            throw std::invalid_argument("PosteriorGP::predict: fidelity outside [0,1]");
        Eigen::MatrixXd Uq = u.transpose();
        Eigen::VectorXd Sq(1);
        Sq[0] = s;
        Eigen::VectorXd k = cross_covariance_unit(Uq, Sq).transpose();
        Prediction p;
        p.mean = k.dot(alpha_);
        Eigen::VectorXd v = factor_->llt.matrixL().solve(k);
        const double prior = hyper_.input.signal_variance;
        p.variance = std::clamp(prior - v.squaredNorm(), 0.0, prior);
        return p;
    }

    /// Posterior mean and variance in the original response units.
    Prediction predict(const Eigen::VectorXd& x, double s) const
    {
        Prediction p = predict_internal_unit(to_unit(x), s);
        p.mean = transform_.inverse(p.mean);
        p.variance *= transform_.scale * transform_.scale;
        return p;
    }

    /// Posterior means (original units) at many unit-coordinate points.
    Eigen::VectorXd mean_unit(const Eigen::MatrixXd& U, const Eigen::VectorXd& S) const
    {
        Eigen::VectorXd m = cross_covariance_unit(U, S) * alpha_;
        return ((m.array() * transform_.scale) + transform_.offset).matrix();
    }

    /// Diagonal of (K_n + sigma^2 I)^{-1} from n unit-vector solves.
    Eigen::VectorXd inverse_diagonal() const
    {
        const Eigen::Index n = size();
        Eigen::VectorXd diag(n);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            e[i] = 1.0;
            diag[i] = solve(e)[i];
            e[i] = 0.0;
        }
        return diag;
    }

    /// log p(z | X, S, hyper) in internal units.
    double log_marginal_likelihood() const
    {
        const double n = static_cast<double>(size());
        return -0.5 * z_.dot(alpha_) - factor_->llt.matrixLLT().diagonal().array().log().sum() -
               0.5 * n * std::log(2.0 * std::numbers::pi);
    }

    static Eigen::MatrixXd to_unit_rows(const Box& box, const Eigen::MatrixXd& X)
    {
        Eigen::MatrixXd U(X.rows(), X.cols());
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            U.row(i) = box.to_unit(X.row(i).transpose()).transpose();
        return U;
    }

private:
    PosteriorGP() : solves_(std::make_shared<std::atomic<std::size_t>>(0)) {}

    Dataset data_;
    Hyperparameters hyper_;
    ResponseTransform transform_;
    Eigen::MatrixXd U_;
    Eigen::VectorXd z_;
    Eigen::VectorXd alpha_;
    std::shared_ptr<const JitteredFactor> factor_;
    std::shared_ptr<std::atomic<std::size_t>> solves_;
};

inline PosteriorGP fit(const Dataset& data, const Hyperparameters& hyper,
                       std::optional<ResponseTransform> transform = std::nullopt)
{
    return PosteriorGP::fit(data, hyper, transform);
}

inline Prediction predict(const PosteriorGP& gp, const Eigen::VectorXd& x, double s)
{
    return gp.predict(x, s);
}

/// Log marginal likelihood; -inf when the kernel matrix cannot be factorized.
inline double log_marginal_likelihood(const Dataset& data, const Hyperparameters& hyper,
                                      std::optional<ResponseTransform> transform = std::nullopt,
                                      const JitterPolicy& jitter = {})
{
    try {
        return PosteriorGP::fit(data, hyper, transform, jitter).log_marginal_likelihood();
    } catch (const SingularModelError&) {
        return -std::numeric_limits<double>::infinity();
    }
}

/// Log-likelihood and its gradient with respect to the log-hyperparameters
/// (ordering as Hyperparameters::to_log). Inputs are unit coordinates, z the
/// transformed responses. Returns -inf on factorization failure.
inline double log_marginal_likelihood_gradient(const Eigen::MatrixXd& U, const Eigen::VectorXd& S,
                                               const Eigen::VectorXd& z, const Eigen::VectorXd& log_params,
                                               Eigen::VectorXd& grad, const JitterPolicy& jitter = {})
{
    const Eigen::Index n = U.rows();
    const Eigen::Index d = U.cols();
    const Hyperparameters h = Hyperparameters::from_log(log_params);
    grad.setZero(d + 3);

    // Correlation factors kept separately for the derivatives.
    Eigen::MatrixXd Cx(n, n), Cs(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Cx(j, j) = 1.0;
        Cs(j, j) = 1.0;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            Cx(i, j) = Cx(j, i) = matern52(detail::scaled_distance(U.row(i), U.row(j), h.input.lengthscales));
            Cs(i, j) = Cs(j, i) = matern52(std::abs(S[i] - S[j]) / h.fidelity.lengthscale);
        }
    }
    Eigen::MatrixXd Ksig = h.input.signal_variance * Cx.cwiseProduct(Cs);
    Eigen::MatrixXd K = Ksig;
    K.diagonal().array() += h.noise_variance;
    auto f = factorize(K, h.input.signal_variance, jitter);
    if (!f)
        return -std::numeric_limits<double>::infinity();
    const auto& llt = f->llt;
    const Eigen::VectorXd alpha = llt.solve(z);
    const double value = -0.5 * z.dot(alpha) - llt.matrixLLT().diagonal().array().log().sum() -
                         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

    // dL/dtheta = 0.5 * tr(W dK), W = alpha alpha^T - K^{-1}
    Eigen::MatrixXd W = alpha * alpha.transpose() - llt.solve(Eigen::MatrixXd::Identity(n, n));

    for (Eigen::Index k = 0; k < d; ++k) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = j + 1; i < n; ++i) {
                const double r = detail::scaled_distance(U.row(i), U.row(j), h.input.lengthscales);
                const double t = (U(i, k) - U(j, k)) / h.input.lengthscales[k];
                const double dk = h.input.signal_variance * matern52_dlog_lengthscale(r, t * t) * Cs(i, j);
                acc += 2.0 * W(i, j) * dk;
            }
        }
        grad[k] = 0.5 * acc;
    }
    {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = j + 1; i < n; ++i) {
                const double rs = std::abs(S[i] - S[j]) / h.fidelity.lengthscale;
                const double dk = h.input.signal_variance * Cx(i, j) * matern52_dlog_lengthscale(rs, rs * rs);
                acc += 2.0 * W(i, j) * dk;
            }
        }
        grad[d] = 0.5 * acc;
    }
    // The jitter is proportional to the signal variance, so it belongs to this derivative.
    grad[d + 1] = 0.5 * (W.cwiseProduct(Ksig).sum() + f->jitter * W.trace());
    grad[d + 2] = 0.5 * h.noise_variance * W.trace();
    return value;
}

/// Box bounds on hyperparameters. Variance bounds are relative to the variance
/// of the transformed responses.
struct HyperBounds {
    double lengthscale_lower = 1e-2;
    double lengthscale_upper = 1e2;
    double signal_lower = 1e-3;
    double signal_upper = 1e3;
    double noise_lower = 1e-8;
    double noise_upper = 1.0;
};

struct TrainOptions {
    int restarts = 10;
    std::uint64_t seed = 0;
    int max_iterations = 200;
    /// Used as the first start point when present.
    std::optional<Hyperparameters> warm_start;
    std::optional<ResponseTransform> transform;
    JitterPolicy jitter;
};

struct TrainingResult {
    Hyperparameters hyper;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    std::vector<double> start_log_likelihoods;
    std::vector<double> final_log_likelihoods;
    std::size_t best_restart = 0;
};

/// Multi-start maximum marginal likelihood in log-parameter space.
inline TrainingResult train_detailed(const Dataset& data, const HyperBounds& bounds, const TrainOptions& opts = {})
{
    data.validate();
    if (opts.restarts < 1)
        throw std::invalid_argument("train: restarts must be >= 1");
    const Eigen::Index d = data.dim();
    const ResponseTransform tr = opts.transform ? *opts.transform : ResponseTransform::standardize(data.y);
    const Eigen::MatrixXd U = PosteriorGP::to_unit_rows(data.domain, data.X);
    const Eigen::VectorXd z = tr.forward(data.y);
    double zvar = (z.array() - z.mean()).square().mean();
    if (!(zvar > 1e-24))
        zvar = 1.0;

    Eigen::VectorXd lo(d + 3), hi(d + 3);
    lo.head(d).setConstant(std::log(bounds.lengthscale_lower));
    hi.head(d).setConstant(std::log(bounds.lengthscale_upper));
    lo[d] = std::log(bounds.lengthscale_lower);
    hi[d] = std::log(bounds.lengthscale_upper);
    lo[d + 1] = std::log(bounds.signal_lower * zvar);
    hi[d + 1] = std::log(bounds.signal_upper * zvar);
    lo[d + 2] = std::log(bounds.noise_lower * zvar);
    hi[d + 2] = std::log(bounds.noise_upper * zvar);

    auto negative = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
        const double val = log_marginal_likelihood_gradient(U, data.s, z, v, g, opts.jitter);
        g = -g;
        return -val;
    };

    std::vector<Eigen::VectorXd> starts;
    if (opts.warm_start) {
        opts.warm_start->validate(d);
        starts.push_back(opts.warm_start->to_log().cwiseMax(lo).cwiseMin(hi));
    }
    SobolSequence seq(static_cast<std::size_t>(d + 3), opts.seed);
    for (std::uint64_t k = 0; static_cast<int>(starts.size()) < opts.restarts; ++k)
        starts.push_back((lo.array() + seq.point(k).array() * (hi - lo).array()).matrix());

    TrainingResult best;
    opt::LbfgsOptions lopts;
    lopts.max_iterations = opts.max_iterations;
    for (std::size_t r = 0; r < starts.size(); ++r) {
        Eigen::VectorXd g;
        const double start_val = -negative(starts[r], g);
        best.start_log_likelihoods.push_back(start_val);
        auto res = opt::minimize_box(negative, starts[r], lo, hi, lopts);
        const double val = res.finite ? -res.value : -std::numeric_limits<double>::infinity();
        best.final_log_likelihoods.push_back(val);
        // Ties keep the lowest restart index.
        if (std::isfinite(val) && val > best.log_likelihood) {
            best.log_likelihood = val;
            best.hyper = Hyperparameters::from_log(res.x);
            best.best_restart = r;
        }
    }
    if (!std::isfinite(best.log_likelihood))
        throw TrainingError("train: every restart failed to factorize the kernel matrix");
    return best;
}

inline Hyperparameters train(const Dataset& data, const HyperBounds& bounds, const TrainOptions& opts = {})
{
    return train_detailed(data, bounds, opts).hyper;
}

} // namespace mfcv

#endif // MFCV_GP_HPP
