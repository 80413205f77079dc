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

#ifndef MFCV_ACQUISITION_HPP
#define MFCV_ACQUISITION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mfcv/cost_model.hpp"
#include "mfcv/gp.hpp"
#include "mfcv/loocv.hpp"
#include "mfcv/optimize.hpp"
#include "mfcv/sampling.hpp"

namespace mfcv {

class AcquisitionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AcquisitionConfig {
    int fantasy_samples = 64;      // K
    int inner_opt_restarts = 4;    // R
    int candidate_grid_size = 256; // G
    int batch_size = 1;            // q
    /// Evaluation budget of each local search; 0 keeps the screened points as they are.
    int local_search_evaluations = 400;
    FidelitySpace fidelity_space;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (fantasy_samples < 1)
            throw std::invalid_argument("AcquisitionConfig: fantasy_samples must be >= 1");
        if (inner_opt_restarts < 1)
            throw std::invalid_argument("AcquisitionConfig: inner_opt_restarts must be >= 1");
        if (candidate_grid_size < 1)
            throw std::invalid_argument("AcquisitionConfig: candidate_grid_size must be >= 1");
        if (batch_size < 1 || batch_size > static_cast<int>(SobolSequence::max_dim))
            throw std::invalid_argument("AcquisitionConfig: batch_size must be in [1, " +
                                        std::to_string(SobolSequence::max_dim) + "]");
        if (local_search_evaluations < 0)
            throw std::invalid_argument("AcquisitionConfig: local_search_evaluations must be >= 0");
        fidelity_space.validate();
    }
};

/// GP over (x, s) fitted to log expected LOO-CV error.
struct InnerGP {
    PosteriorGP gp;
    TrainingResult training;
};

inline InnerGP fit_inner_gp(const Dataset& log_cv_obs, const HyperBounds& bounds, const TrainOptions& opts = {})
{
    if (log_cv_obs.size() < 2)
        throw std::invalid_argument("fit_inner_gp: need at least two observations");
    TrainingResult tr = train_detailed(log_cv_obs, bounds, opts);
    PosteriorGP gp = PosteriorGP::fit(log_cv_obs, tr.hyper, opts.transform, opts.jitter);
    return InnerGP{std::move(gp), std::move(tr)};
}

/**
 * Joint fantasy at q points (U, S) against a fitted GP. Conditioning on
 * fantasy values is a rank-q update of the posterior mean; the GP itself is
 * never refactorized and its hyperparameters are untouched.
 *
 * All values here are in the GP's internal (transformed) units.
 */
class FantasyModel {
public:
    FantasyModel(const PosteriorGP& gp, Eigen::MatrixXd U, Eigen::VectorXd S, const JitterPolicy& jitter = {})
        : gp_(&gp), U_(std::move(U)), S_(std::move(S))
    {
        const auto& h = gp.hyper();
        Kxq_ = gp.cross_covariance_unit(U_, S_).transpose(); // n x q
        V_ = gp.factor().solve(Kxq_);
        mean_ = Kxq_.transpose() * gp.alpha();
        // Predictive covariance of noisy fantasy observations, with the same diagonal
        // jitter the training factor carries so the update matches a refit exactly.
        Eigen::MatrixXd Sigma = cross_kernel(U_, S_, U_, S_, h.input, h.fidelity) - Kxq_.transpose() * V_;
        Sigma = 0.5 * (Sigma + Sigma.transpose());
        Sigma.diagonal().array() += h.noise_variance + gp.jitter();
        chol_.compute(Sigma);
        if (chol_.info() != Eigen::Success || !(chol_.matrixLLT().diagonal().minCoeff() > 0.0)) {
            auto f = factorize(Sigma, h.input.signal_variance, jitter);
            if (!f)
                throw AcquisitionError("FantasyModel: fantasy covariance not factorizable");
            chol_ = f->llt;
        }
    }

    Eigen::Index size() const { return U_.rows(); }

    /// Current posterior mean at the fantasy sites.
    const Eigen::VectorXd& mean() const { return mean_; }

    /// Lower Cholesky factor of the fantasy predictive covariance.
    Eigen::MatrixXd covariance_factor() const { return chol_.matrixL(); }

    /// Fantasy values from standard-normal draws z (length q).
    Eigen::VectorXd draw(const Eigen::VectorXd& z) const { return mean_ + chol_.matrixL() * z; }

    /// Posterior cross-covariance k_n((U', S'), fantasy sites), m x q.
    Eigen::MatrixXd posterior_cross_covariance(const Eigen::MatrixXd& Up, const Eigen::VectorXd& Sp) const
    {
        const auto& h = gp_->hyper();
        Eigen::MatrixXd Kpx = gp_->cross_covariance_unit(Up, Sp);
        return cross_kernel(Up, Sp, U_, S_, h.input, h.fidelity) - Kpx * V_;
    }

    /// Mean shift per unit standard-normal draw: rows of B with mu' = mu + B z.
    Eigen::MatrixXd update_directions(const Eigen::MatrixXd& posterior_cross) const
    {
        // B = k_n L^{-T}  <=>  L B^T = k_n^T
        return chol_.matrixL().solve(posterior_cross.transpose()).transpose();
    }

    /// Posterior mean (internal units) after conditioning on fantasy values.
    Eigen::VectorXd conditioned_mean(const Eigen::MatrixXd& Up, const Eigen::VectorXd& Sp,
                                     const Eigen::VectorXd& values) const
    {
        Eigen::VectorXd base = gp_->cross_covariance_unit(Up, Sp) * gp_->alpha();
        return base + posterior_cross_covariance(Up, Sp) * chol_.solve(values - mean_);
    }

private:
    const PosteriorGP* gp_;
    Eigen::MatrixXd U_;
    Eigen::VectorXd S_;
    Eigen::MatrixXd Kxq_;
    Eigen::MatrixXd V_;
    Eigen::VectorXd mean_;
    Eigen::LLT<Eigen::MatrixXd> chol_;
};

struct MonteCarloEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

/// Standard-normal quasi-random draws, K x q, one scrambled Sobol' dimension per
/// batch slot so the first column does not depend on q.
inline Eigen::MatrixXd fantasy_draws(int samples, int q, std::uint64_t seed)
{
    SobolSequence seq(static_cast<std::size_t>(q), seed);
    const boost::math::normal_distribution<double> normal;
    Eigen::MatrixXd Z(samples, q);
    for (int k = 0; k < samples; ++k) {
        Eigen::VectorXd u = seq.point(static_cast<std::uint64_t>(k));
        for (int j = 0; j < q; ++j)
            Z(k, j) = boost::math::quantile(normal, u[j]);
    }
    return Z;
}

/**
 * Two-step lookahead acquisition on the inner GP:
 *
 *   alpha(X, S) = E_l [ max_{x'} mu_l(x', 1) | D_n + {(X, S), l} ]
 *
 * The inner max runs over a fixed candidate set at s = 1 (G scrambled Sobol'
 * points plus R local maxima of the current mean) together with the batch's own
 * inputs lifted to s = 1. The expectation is a quasi-Monte-Carlo average over
 * K joint fantasies. Values are reported in the inner GP's output units.
 */
class MfcvAcquisition {
public:
    MfcvAcquisition(const PosteriorGP& inner, AcquisitionConfig cfg) : inner_(&inner), cfg_(std::move(cfg))
    {
        cfg_.validate();
        const Eigen::Index d = inner.dim();
        SobolSequence grid(static_cast<std::size_t>(d), split_seed(cfg_.seed, 1));
        Eigen::MatrixXd G = grid.points(static_cast<std::size_t>(cfg_.candidate_grid_size));
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(G.rows());
        Eigen::VectorXd mG = inner.cross_covariance_unit(G, ones) * inner.alpha();

        // Refine the best grid points as local maxima of the current mean at s = 1.
        std::vector<Eigen::Index> order(static_cast<std::size_t>(G.rows()));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return mG[a] > mG[b]; });
        const int R = std::min<int>(cfg_.inner_opt_restarts, static_cast<int>(G.rows()));
        Eigen::MatrixXd refined(R, d);
        std::vector<opt::Coordinate> coords(static_cast<std::size_t>(d));
        opt::PatternOptions popts;
        popts.max_evaluations = std::max(1, cfg_.local_search_evaluations);
        for (int r = 0; r < R; ++r) {
            Eigen::VectorXd start = G.row(order[static_cast<std::size_t>(r)]).transpose();
            if (cfg_.local_search_evaluations > 0) {
                auto mean_at = [&](const Eigen::VectorXd& u) {
                    Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
                    return (inner.cross_covariance_unit(u.transpose(), one) * inner.alpha())(0);
                };
                start = opt::maximize_pattern(mean_at, start, coords, popts).x;
            }
            refined.row(r) = start.transpose();
        }
        candidates_.resize(G.rows() + R, d);
        candidates_ << G, refined;
        Eigen::VectorXd cones = Eigen::VectorXd::Ones(candidates_.rows());
        Kcx_ = inner.cross_covariance_unit(candidates_, cones); // M x n
        candidate_mean_ = Kcx_ * inner.alpha();

        draws_ = fantasy_draws(cfg_.fantasy_samples, cfg_.batch_size, split_seed(cfg_.seed, 2));
    }

    const PosteriorGP& inner() const { return *inner_; }
    const AcquisitionConfig& config() const { return cfg_; }

    /// Candidate set for the inner max, unit coordinates at s = 1.
    const Eigen::MatrixXd& candidate_set() const { return candidates_; }

    const Eigen::MatrixXd& draws() const { return draws_; }

    /// max_{x'} of the current inner mean over the candidate set plus `U` lifted to s = 1.
    double current_max_unit(const Eigen::MatrixXd& U) const
    {
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(U.rows());
        Eigen::VectorXd m = inner_->cross_covariance_unit(U, ones) * inner_->alpha();
        const double best = std::max(candidate_mean_.maxCoeff(), U.rows() ? m.maxCoeff() : -INFINITY);
        return inner_->transform().inverse(best);
    }

    /// Estimate with explicit standard-normal draws Z (K x q). Unit coordinates.
    MonteCarloEstimate evaluate_unit_with_draws(const Eigen::MatrixXd& U, const Eigen::VectorXd& S,
                                                const Eigen::MatrixXd& Z) const
    {
        const Eigen::Index q = U.rows();
        if (S.size() != q || Z.cols() != q)
            throw std::invalid_argument("MfcvAcquisition: batch shape mismatch");
        FantasyModel fm(*inner_, U, S);
        const auto& h = inner_->hyper();

        // Base candidates: k_n(C, Q) = k(C, Q) - k(C, X) K^{-1} k(X, Q)
        Eigen::VectorXd cones = Eigen::VectorXd::Ones(candidates_.rows());
        Eigen::MatrixXd Kcq = cross_kernel(candidates_, cones, U, S, h.input, h.fidelity);
        Eigen::MatrixXd V = inner_->factor().solve(inner_->cross_covariance_unit(U, S).transpose());
        Eigen::MatrixXd kn_c = Kcq - Kcx_ * V;

        Eigen::VectorXd qones = Eigen::VectorXd::Ones(q);
        Eigen::MatrixXd kn_e = fm.posterior_cross_covariance(U, qones);
        Eigen::VectorXd mean_e = inner_->cross_covariance_unit(U, qones) * inner_->alpha();

        const Eigen::Index M = candidates_.rows();
        Eigen::MatrixXd kn(M + q, q);
        kn << kn_c, kn_e;
        Eigen::VectorXd mean(M + q);
        mean << candidate_mean_, mean_e;
        const Eigen::MatrixXd B = fm.update_directions(kn);

        const Eigen::Index K = Z.rows();
        Eigen::MatrixXd shifted = B * Z.transpose(); // (M+q) x K
        std::vector<double> vals(static_cast<std::size_t>(K));
        for (Eigen::Index k = 0; k < K; ++k) {
            const double v = (shifted.col(k) + mean).maxCoeff();
            if (!std::isfinite(v))
                throw AcquisitionError("MfcvAcquisition: non-finite fantasy value");
            vals[static_cast<std::size_t>(k)] = v;
        }
        double sum = 0.0;
        for (double v : vals)
            sum += v;
        const double avg = sum / static_cast<double>(K);
        double ss = 0.0;
        for (double v : vals)
            ss += (v - avg) * (v - avg);
        const double sd = K > 1 ? std::sqrt(ss / static_cast<double>(K - 1)) : 0.0;
        const auto& tr = inner_->transform();
        return {tr.inverse(avg), tr.scale * sd / std::sqrt(static_cast<double>(K))};
    }

    MonteCarloEstimate evaluate_unit(const Eigen::MatrixXd& U, const Eigen::VectorXd& S) const
    {
        const Eigen::Index q = U.rows();
        if (q > draws_.cols())
            throw std::invalid_argument("MfcvAcquisition: batch larger than the configured batch size");
        return evaluate_unit_with_draws(U, S, draws_.leftCols(q));
    }

    /// Single-point acquisition at (x, s), x in domain coordinates.
    double mfcv(const Eigen::VectorXd& x, double s) const
    {
        Eigen::MatrixXd U = inner_->to_unit(x).transpose();
        Eigen::VectorXd S(1);
        S[0] = s;
        return evaluate_unit(U, S).value;
    }

    /// Batch acquisition, one row of X per batch member (domain coordinates).
    double qmfcv(const Eigen::MatrixXd& X, const Eigen::VectorXd& S) const
    {
        Eigen::MatrixXd U(X.rows(), X.cols());
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            U.row(i) = inner_->to_unit(X.row(i).transpose()).transpose();
        return evaluate_unit(U, S).value;
    }

private:
    const PosteriorGP* inner_;
    AcquisitionConfig cfg_;
    Eigen::MatrixXd candidates_;
    Eigen::MatrixXd Kcx_;
    Eigen::VectorXd candidate_mean_;
    Eigen::MatrixXd draws_;
};

inline double mfcv_acquisition(const MfcvAcquisition& acq, const Eigen::VectorXd& x, double s)
{
    return acq.mfcv(x, s);
}

inline double qmfcv_acquisition(const MfcvAcquisition& acq, const Eigen::MatrixXd& X, const Eigen::VectorXd& S)
{
    return acq.qmfcv(X, S);
}

struct Candidate {
    Eigen::VectorXd x;
    double s = 1.0;
    double acquisition_value = 0.0; // batch value when q > 1
    double cost = 1.0;              // normalized cost of this member
    double score = 0.0;             // acquisition_value / (batch) normalized cost
};

/// Strictly higher score wins; ties keep the earlier candidate.
inline bool better(const Candidate& a, const Candidate& b)
{
    return a.score > b.score;
}

/**
 * Maximize alpha / c over X x S (or alpha_q / sum c over batches).
 *
 * Continuous fidelity is optimized jointly with x. A finite fidelity set is
 * enumerated for q = 1; for q > 1 batch members move between neighbouring levels
 * inside the joint search.
 */
inline std::vector<Candidate> cost_aware_argmax(const MfcvAcquisition& acq, const CostParams& costs)
{
    const auto& cfg = acq.config();
    const auto& space = cfg.fidelity_space;
    const Eigen::Index d = acq.inner().dim();
    const int q = cfg.batch_size;
    const Box& domain = acq.inner().dataset().domain;
    costs.validate();

    // Batch layout: q blocks of [u_1..u_d, s-coordinate].
    auto s_of = [&](double coord) {
        if (space.is_continuous())
            return std::clamp(coord, 0.0, 1.0);
        return space.levels[static_cast<std::size_t>(std::lround(coord))];
    };
    auto batch_score = [&](const Eigen::VectorXd& v, double* value_out = nullptr) {
        Eigen::MatrixXd U(q, d);
        Eigen::VectorXd S(q);
        double total_cost = 0.0;
        for (int j = 0; j < q; ++j) {
            U.row(j) = v.segment(j * (d + 1), d).transpose();
            S[j] = s_of(v[j * (d + 1) + d]);
            total_cost += normalized_cost(S[j], costs);
        }
        double val;
        try {
            val = acq.evaluate_unit(U, S).value;
        } catch (const AcquisitionError&) {
            return -std::numeric_limits<double>::infinity();
        }
        if (value_out)
            *value_out = val;
        return val / total_cost;
    };

    // Screening: single-point scores over a Sobol' design in (u, s).
    struct Screened {
        Eigen::VectorXd block; // [u, s-coordinate]
        double score;
    };
    std::vector<Screened> screened;
    const auto G = static_cast<std::size_t>(cfg.candidate_grid_size);
    const std::uint64_t screen_seed = split_seed(cfg.seed, 3);
    auto single = [&](const Eigen::VectorXd& block) {
        Eigen::VectorXd v = block;
        Eigen::MatrixXd U = v.head(d).transpose();
        Eigen::VectorXd S(1);
        S[0] = s_of(v[d]);
        try {
            return acq.evaluate_unit(U, S).value / normalized_cost(S[0], costs);
        } catch (const AcquisitionError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    if (space.is_continuous()) {
        SobolSequence seq(static_cast<std::size_t>(d + 1), screen_seed);
        for (std::size_t i = 0; i < G; ++i) {
            Eigen::VectorXd b = seq.point(i);
            screened.push_back({b, single(b)});
        }
    } else {
        SobolSequence seq(static_cast<std::size_t>(d), screen_seed);
        for (std::size_t i = 0; i < G; ++i) {
            Eigen::VectorXd u = seq.point(i);
            for (std::size_t l = 0; l < space.levels.size(); ++l) {
                Eigen::VectorXd b(d + 1);
                b << u, static_cast<double>(l);
                screened.push_back({b, single(b)});
            }
        }
    }

    std::vector<opt::Coordinate> block_coords(static_cast<std::size_t>(d + 1));
    if (!space.is_continuous())
        block_coords[static_cast<std::size_t>(d)].levels = space.levels.size();
    opt::PatternOptions popts;
    popts.max_evaluations = cfg.local_search_evaluations;

    auto sort_desc = [](std::vector<Screened>& v) {
        std::stable_sort(v.begin(), v.end(), [](const Screened& a, const Screened& b) { return a.score > b.score; });
    };

    Eigen::VectorXd best_v;
    double best_score = -std::numeric_limits<double>::infinity();
    const int R = cfg.inner_opt_restarts;

    if (q == 1) {
        // Continuous: joint search over (u, s). Finite set: one search per level with s fixed.
        std::vector<std::vector<Screened>> groups;
        if (space.is_continuous()) {
            groups.push_back(screened);
        } else {
            groups.resize(space.levels.size());
            for (auto& sc : screened)
                groups[static_cast<std::size_t>(std::lround(sc.block[d]))].push_back(sc);
        }
        for (auto& group : groups) {
            sort_desc(group);
            std::vector<opt::Coordinate> coords = block_coords;
            // Fidelity is held fixed within a level group.
            if (!space.is_continuous())
                coords[static_cast<std::size_t>(d)].levels = 1;
            for (int r = 0; r < R && r < static_cast<int>(group.size()); ++r) {
                Eigen::VectorXd v = group[static_cast<std::size_t>(r)].block;
                double sc = group[static_cast<std::size_t>(r)].score;
                if (cfg.local_search_evaluations > 0) {
                    if (!space.is_continuous()) {
                        const double level = v[d];
                        auto f = [&](const Eigen::VectorXd& w) {
                            Eigen::VectorXd full = w;
                            full[d] = level;
                            return single(full);
                        };
                        Eigen::VectorXd w = v;
                        w[d] = 0.0;
                        auto res = opt::maximize_pattern(f, w, coords, popts);
                        v = res.x;
                        v[d] = level;
                        sc = res.value;
                    } else {
                        auto res = opt::maximize_pattern(single, v, coords, popts);
                        v = res.x;
                        sc = res.value;
                    }
                }
                if (sc > best_score) {
                    best_score = sc;
                    best_v = v;
                }
            }
        }
    } else {
        sort_desc(screened);
        std::vector<opt::Coordinate> coords;
        for (int j = 0; j < q; ++j)
            coords.insert(coords.end(), block_coords.begin(), block_coords.end());
        const std::size_t total = screened.size();
        for (int r = 0; r < R; ++r) {
            Eigen::VectorXd v(q * (d + 1));
            for (int j = 0; j < q; ++j)
                v.segment(j * (d + 1), d + 1) = screened[(static_cast<std::size_t>(r * q + j)) % total].block;
            double sc = batch_score(v);
            if (cfg.local_search_evaluations > 0) {
                auto res = opt::maximize_pattern([&](const Eigen::VectorXd& w) { return batch_score(w); }, v,
                                                 coords, popts);
                v = res.x;
                sc = res.value;
            }
            if (sc > best_score) {
                best_score = sc;
                best_v = v;
            }
        }
    }

    if (!std::isfinite(best_score))
        throw AcquisitionError("cost_aware_argmax: no finite acquisition score found");

    double value = 0.0;
    const double score = batch_score(best_v, &value);
    std::vector<Candidate> out;
    for (int j = 0; j < q; ++j) {
        Candidate c;
        c.x = domain.from_unit(best_v.segment(j * (d + 1), d));
        c.s = s_of(best_v[j * (d + 1) + d]);
        c.acquisition_value = value;
        c.cost = normalized_cost(c.s, costs);
        c.score = score;
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace mfcv

#endif // MFCV_ACQUISITION_HPP
