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

#ifndef MFCV_SAMPLING_HPP
#define MFCV_SAMPLING_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace mfcv {

/// Axis-aligned box [lower, upper] in R^d.
struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    static Box unit(Eigen::Index d)
    {
        return Box{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)};
    }

    Eigen::Index dim() const { return lower.size(); }

    Eigen::VectorXd width() const { return upper - lower; }

    bool contains(const Eigen::VectorXd& x, double slack = 0.0) const
    {
        if (x.size() != dim())
            return false;
        for (Eigen::Index j = 0; j < dim(); ++j)
            if (!(x[j] >= lower[j] - slack && x[j] <= upper[j] + slack))
                return false;
        return true;
    }

    Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const
    {
        return ((x - lower).array() / width().array()).matrix();
    }

    Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const
    {
        return (lower.array() + u.array() * width().array()).matrix();
    }

    void validate() const
    {
        if (lower.size() != upper.size() || lower.size() == 0)
            throw std::invalid_argument("Box: bounds must be non-empty and of equal size");
        for (Eigen::Index j = 0; j < dim(); ++j)
            if (!(upper[j] > lower[j]) || !std::isfinite(lower[j]) || !std::isfinite(upper[j]))
                throw std::invalid_argument("Box: degenerate or non-finite extent in dimension " +
                                            std::to_string(j));
    }

    friend bool operator==(const Box& a, const Box& b)
    {
        return a.lower == b.lower && a.upper == b.upper;
    }
};

/// Fidelity space: continuous [0,1] when `levels` is empty, else the finite set.
struct FidelitySpace {
    std::vector<double> levels;

    static FidelitySpace continuous() { return {}; }
    static FidelitySpace finite(std::vector<double> lv) { return {std::move(lv)}; }

    bool is_continuous() const { return levels.empty(); }

    bool contains(double s) const
    {
        if (is_continuous())
            return s >= 0.0 && s <= 1.0;
        for (double l : levels)
            if (l == s)
                return true;
        return false;
    }

    void validate() const
    {
        if (is_continuous())
            return;
        bool has_one = false;
        for (double l : levels) {
            if (!(l >= 0.0 && l <= 1.0))
                throw std::invalid_argument("FidelitySpace: level outside [0,1]");
            has_one = has_one || l == 1.0;
        }
        if (!has_one)
            throw std::invalid_argument("FidelitySpace: finite level set must contain 1.0");
    }

    friend bool operator==(const FidelitySpace&, const FidelitySpace&) = default;
};

// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive a child seed for a named stream. Streams with different ids never share state.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream)
{
    return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Seeded generator. Conversions to reals are done here rather than through
/// <random> distributions so streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0,1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n)
    {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n));
    }

    Rng split(std::uint64_t stream) { return Rng(split_seed(engine_(), stream)); }

private:
    std::mt19937_64 engine_;
};

/// i.i.d. uniform points over a box, one row per point.
inline Eigen::MatrixXd uniform_points(std::size_t count, const Box& box, Rng& rng)
{
    box.validate();
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(count), box.dim());
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        for (Eigen::Index j = 0; j < box.dim(); ++j)
            pts(i, j) = rng.uniform(box.lower[j], box.upper[j]);
    return pts;
}

namespace detail {

// Primitive polynomials and initial direction numbers (Joe & Kuo, new-joe-kuo-6.21201)
// for dimensions 2..21. Dimension 1 is the van der Corput sequence.
struct SobolPoly {
    unsigned degree;
    unsigned coeffs;
    std::array<std::uint32_t, 7> m;
};

inline constexpr std::array<SobolPoly, 20> kSobolPolys{{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
}};

inline constexpr unsigned kSobolBits = 32;

} // namespace detail

/// Sobol' sequence in up to 21 dimensions, optionally randomized with a
/// linear matrix scramble plus digital shift (per-dimension, seeded).
class SobolSequence {
public:
    static constexpr std::size_t max_dim = detail::kSobolPolys.size() + 1;

    /// Unscrambled base sequence.
    explicit SobolSequence(std::size_t dim) : SobolSequence(dim, 0, false) {}

    SobolSequence(std::size_t dim, std::uint64_t seed, bool scramble = true) : dim_(dim)
    {
        if (dim == 0 || dim > max_dim)
            throw std::invalid_argument("SobolSequence: dimension " + std::to_string(dim) +
                                        " outside the direction-number table (1.." +
                                        std::to_string(max_dim) + ")");
        directions_.assign(dim * detail::kSobolBits, 0);
        shift_.assign(dim, 0);
        for (std::size_t j = 0; j < dim; ++j) {
            auto v = base_directions(j);
            if (scramble) {
                Rng rng(split_seed(seed, 0x50b0100ULL + j));
                std::array<std::uint32_t, detail::kSobolBits> rows{};
                for (unsigned r = 0; r < detail::kSobolBits; ++r) {
                    // Row r mixes digits 0..r (MSB first); the diagonal is forced to 1.
                    std::uint32_t keep = r == 31 ? 0xffffffffu : ~((0xffffffffu) >> (r + 1));
                    rows[r] = (static_cast<std::uint32_t>(rng.next_u64()) & keep) | (1u << (31 - r));
                }
                for (auto& dir : v) {
                    std::uint32_t out = 0;
                    for (unsigned r = 0; r < detail::kSobolBits; ++r)
                        out |= static_cast<std::uint32_t>(std::popcount(rows[r] & dir) & 1) << (31 - r);
                    dir = out;
                }
                shift_[j] = static_cast<std::uint32_t>(rng.next_u64());
            }
            for (unsigned b = 0; b < detail::kSobolBits; ++b)
                directions_[j * detail::kSobolBits + b] = v[b];
        }
        scrambled_ = scramble;
    }

    std::size_t dim() const { return dim_; }

    /// Point with the given index (Gray-code ordering; index 0 is the origin when unscrambled).
    Eigen::VectorXd point(std::uint64_t index) const
    {
        std::uint64_t gray = index ^ (index >> 1);
        Eigen::VectorXd p(static_cast<Eigen::Index>(dim_));
        for (std::size_t j = 0; j < dim_; ++j) {
            std::uint32_t x = shift_[j];
            for (unsigned b = 0; b < detail::kSobolBits && (gray >> b) != 0; ++b)
                if ((gray >> b) & 1u)
                    x ^= directions_[j * detail::kSobolBits + b];
            // Scrambled points are centred in their dyadic cell so they never hit 0 or 1.
            p[static_cast<Eigen::Index>(j)] =
                scrambled_ ? (static_cast<double>(x) + 0.5) * 0x1.0p-32 : static_cast<double>(x) * 0x1.0p-32;
        }
        return p;
    }

    /// Points [first, first+count) as rows.
    Eigen::MatrixXd points(std::size_t count, std::uint64_t first = 0) const
    {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim_));
        for (std::size_t i = 0; i < count; ++i)
            out.row(static_cast<Eigen::Index>(i)) = point(first + i).transpose();
        return out;
    }

private:
    static std::array<std::uint32_t, detail::kSobolBits> base_directions(std::size_t j)
    {
        std::array<std::uint32_t, detail::kSobolBits> v{};
        if (j == 0) {
            for (unsigned k = 0; k < detail::kSobolBits; ++k)
                v[k] = 1u << (31 - k);
            return v;
        }
        const auto& poly = detail::kSobolPolys[j - 1];
        const unsigned s = poly.degree;
        for (unsigned k = 0; k < s; ++k)
            v[k] = poly.m[k] << (31 - k);
        for (unsigned k = s; k < detail::kSobolBits; ++k) {
            std::uint32_t x = v[k - s] ^ (v[k - s] >> s);
            for (unsigned l = 1; l < s; ++l)
                if ((poly.coeffs >> (s - 1 - l)) & 1u)
                    x ^= v[k - l];
            v[k] = x;
        }
        return v;
    }

    std::size_t dim_;
    bool scrambled_ = false;
    std::vector<std::uint32_t> directions_;
    std::vector<std::uint32_t> shift_;
};

/// First `count` points of a scrambled Sobol' sequence mapped into `box`.
inline Eigen::MatrixXd sobol_points(std::size_t count, const Box& box, std::uint64_t seed)
{
    box.validate();
    SobolSequence seq(static_cast<std::size_t>(box.dim()), seed);
    Eigen::MatrixXd pts = seq.points(count);
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        pts.row(i) = box.from_unit(pts.row(i).transpose()).transpose();
    return pts;
}

/// Map a unit coordinate onto a fidelity. Finite sets are split into equal-probability bins.
inline double fidelity_from_unit(double u, const FidelitySpace& space)
{
    if (space.is_continuous())
        return u;
    std::size_t k = static_cast<std::size_t>(u * static_cast<double>(space.levels.size()));
    if (k >= space.levels.size())
        k = space.levels.size() - 1;
    return space.levels[k];
}

inline double random_fidelity(const FidelitySpace& space, Rng& rng)
{
    return fidelity_from_unit(rng.uniform(), space);
}

} // namespace mfcv

#endif // MFCV_SAMPLING_HPP
