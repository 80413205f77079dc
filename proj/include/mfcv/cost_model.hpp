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

#ifndef MFCV_COST_MODEL_HPP
#define MFCV_COST_MODEL_HPP

#include <cmath>
#include <span>
#include <stdexcept>

namespace mfcv {

/// c(s) = c0 * (c2 + exp(-c1 * (1 - s)))
struct CostParams {
    double c0 = 500.0;
    double c1 = 10.0;
    double c2 = 0.1;

    void validate() const
    {
        if (!(c0 > 0.0) || !(c1 > 0.0) || !(c2 > 0.0))
            throw std::invalid_argument("CostParams: c0, c1 and c2 must all be positive");
    }

    friend bool operator==(const CostParams&, const CostParams&) = default;
};

/// c(s) / c0; this is what the acquisition divides by.
inline double normalized_cost(double s, const CostParams& p)
{
    if (!(s >= 0.0 && s <= 1.0))
        throw std::invalid_argument("cost: fidelity outside [0,1]");
    return p.c2 + std::exp(-p.c1 * (1.0 - s));
}

inline double cost(double s, const CostParams& p)
{
    return p.c0 * normalized_cost(s, p);
}

inline double cumulative_cost(std::span<const double> fidelities, const CostParams& p)
{
    double total = 0.0;
    for (double s : fidelities)
        total += cost(s, p);
    return total;
}

} // namespace mfcv

#endif // MFCV_COST_MODEL_HPP
