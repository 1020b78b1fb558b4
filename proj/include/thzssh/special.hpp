// SPDX-License-Identifier: Apache-2.0
//
// thzssh: spectrum-shaping link discovery toolkit for THz systems
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <span>
#include <vector>

namespace thzssh::special {

/// ln I0(x) - x for x >= 0, without overflow at large x.
double log_bessel_i0_scaled(double x);

/// ln I0(x) for x >= 0.
double log_bessel_i0(double x);

/// I1(x) / I0(x) for x >= 0.
double bessel_i1_i0_ratio(double x);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    static GaussLegendre make(std::size_t n);
    /// Shared 200-point rule.
    static const GaussLegendre &standard();

    template <typename F>
    double integrate(F &&f, double a, double b) const {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (b + a);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            acc += weights[i] * f(mid + half * nodes[i]);
        return acc * half;
    }
};

} // namespace thzssh::special
