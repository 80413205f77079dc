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

#ifndef MFCV_OPTIMIZE_HPP
#define MFCV_OPTIMIZE_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace mfcv::opt {

struct LbfgsOptions {
    int max_iterations = 200;
    int memory = 8;
    double gradient_tolerance = 1e-6;
    double relative_tolerance = 1e-10;
};

struct LocalResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool finite = false;
};

namespace detail {

inline Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi)
{
    return x.cwiseMax(lo).cwiseMin(hi);
}

} // namespace detail

/**
 * Minimize a smooth function over a box with a projected limited-memory BFGS.
 *
 * `fg(x, grad)` returns f(x) and writes the gradient. A non-finite return marks
 * the point infeasible; the line search backs off from it. Variables sitting
 * on a bound with the gradient pointing outward are frozen for the step.
 */
template <typename FG>
LocalResult minimize_box(FG&& fg, const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi, const LbfgsOptions& opts = {})
{
    const Eigen::Index p = x0.size();
    LocalResult res;
    Eigen::VectorXd x = detail::clamp(x0, lo, hi);
    Eigen::VectorXd g(p);
    double f = fg(x, g);
    res.x = x;
    res.value = f;
    if (!std::isfinite(f) || !g.allFinite())
        return res;
    res.finite = true;

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int it = 0; it < opts.max_iterations; ++it) {
        res.iterations = it + 1;
        Eigen::VectorXd pg = g;
        std::vector<bool> active(static_cast<std::size_t>(p), false);
        for (Eigen::Index i = 0; i < p; ++i) {
            if ((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)) {
                pg[i] = 0.0;
                active[static_cast<std::size_t>(i)] = true;
            }
        }
        if (pg.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance)
            break;

        // Two-loop recursion on the free subspace.
        Eigen::VectorXd q = pg;
        const std::size_t m = s_hist.size();
        std::vector<double> alpha(m);
        for (std::size_t k = m; k-- > 0;) {
            alpha[k] = rho_hist[k] * s_hist[k].dot(q);
            q -= alpha[k] * y_hist[k];
        }
        if (m > 0)
            q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        for (std::size_t k = 0; k < m; ++k) {
            const double beta = rho_hist[k] * y_hist[k].dot(q);
            q += (alpha[k] - beta) * s_hist[k];
        }
        Eigen::VectorXd d = -q;
        for (Eigen::Index i = 0; i < p; ++i)
            if (active[static_cast<std::size_t>(i)])
                d[i] = 0.0;
        if (d.dot(pg) >= 0.0) {
            d = -pg;
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        double t = m == 0 ? std::min(1.0, 1.0 / d.norm()) : 1.0;
        Eigen::VectorXd x_new, g_new(p);
        double f_new = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            x_new = detail::clamp(x + t * d, lo, hi);
            f_new = fg(x_new, g_new);
            if (std::isfinite(f_new) && g_new.allFinite() && f_new <= f + 1e-4 * g.dot(x_new - x)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted)
            break;

        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * std::max(1.0, s.squaredNorm())) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        const double change = f - f_new;
        x = x_new;
        f = f_new;
        g = g_new;
        if (change <= opts.relative_tolerance * (1.0 + std::abs(f)))
            break;
    }
    res.x = x;
    res.value = f;
    return res;
}

/// One coordinate of a pattern search: continuous in [0,1], or an index into a finite level set.
struct Coordinate {
    std::size_t levels = 0; // 0 means continuous

    bool continuous() const { return levels == 0; }
};

struct PatternOptions {
    double initial_step = 0.1;
    double min_step = 1e-3;
    int max_evaluations = 400;
};

struct PatternResult {
    Eigen::VectorXd x;
    double value = -std::numeric_limits<double>::infinity();
    int evaluations = 0;
};

/**
 * Derivative-free compass search maximizing `f` over mixed coordinates.
 * Continuous coordinates live in [0,1]; discrete ones hold a level index
 * (stored as a double) and move one level at a time.
 */
template <typename F>
PatternResult maximize_pattern(F&& f, const Eigen::VectorXd& x0, const std::vector<Coordinate>& coords,
                               const PatternOptions& opts = {})
{
    PatternResult res;
    res.x = x0;
    res.value = f(x0);
    res.evaluations = 1;
    double step = opts.initial_step;
    const Eigen::Index p = x0.size();
    while (step >= opts.min_step && res.evaluations < opts.max_evaluations) {
        bool improved = false;
        for (Eigen::Index i = 0; i < p && res.evaluations < opts.max_evaluations; ++i) {
            const auto& c = coords[static_cast<std::size_t>(i)];
            for (int dir : {+1, -1}) {
                Eigen::VectorXd trial = res.x;
                if (c.continuous()) {
                    trial[i] = std::clamp(trial[i] + dir * step, 0.0, 1.0);
                } else {
                    const double next = trial[i] + dir;
                    if (next < 0.0 || next > static_cast<double>(c.levels - 1))
                        continue;
                    trial[i] = next;
                }
                if (trial[i] == res.x[i])
                    continue;
                const double v = f(trial);
                ++res.evaluations;
                if (std::isfinite(v) && v > res.value) {
                    res.value = v;
                    res.x = trial;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved)
            step *= 0.5;
    }
    return res;
}

} // namespace mfcv::opt

#endif // MFCV_OPTIMIZE_HPP
