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

#include "thzssh/special.hpp"

#include "thzssh/constants.hpp"
#include "thzssh/errors.hpp"

#include <cmath>

namespace thzssh::special {

namespace {

constexpr double direct_limit = 500.0;

// Large-argument series: I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)
double log_asymptotic_i0_scaled(double x) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 8; ++k) {
        const double m = 2.0 * k - 1.0;
        term *= m * m / (8.0 * x * k);
        sum += term;
    }
    return std::log(sum) - 0.5 * std::log(2.0 * pi * x);
}

} // namespace

double log_bessel_i0_scaled(double x) {
    if (!(x >= 0.0))
        throw numeric_error("log_bessel_i0: argument must be >= 0");
    if (x <= direct_limit)
        return std::log(std::cyl_bessel_i(0.0, x)) - x;
    return log_asymptotic_i0_scaled(x);
}

double log_bessel_i0(double x) { return log_bessel_i0_scaled(x) + x; }

double bessel_i1_i0_ratio(double x) {
    if (!(x >= 0.0))
        throw numeric_error("bessel_i1_i0_ratio: argument must be >= 0");
    if (x == 0.0)
        return 0.0;
    if (x > 50.0) {
        // Ratio of the large-argument series for I1 and I0; terms shrink by < 0.1 per step at x > 50
        const double r = 1.0 / (8.0 * x);
        double t0 = 1.0;
        double t1 = 1.0;
        double s0 = 1.0;
        double s1 = 1.0;
        for (int k = 1; k <= 24; ++k) {
            const double m = 2.0 * k - 1.0;
            t0 *= m * m * r / k;
            t1 *= -(4.0 - m * m) * r / k;
            s0 += t0;
            s1 += t1;
        }
        return s1 / s0;
    }
    // Backward continued fraction I1/I0 = x / (2 + x^2 / (4 + x^2 / (6 + ...)))
    const int depth = 40 + static_cast<int>(2.0 * x);
    const double x2 = x * x;
    double tail = 2.0 * depth;
    for (int k = depth - 1; k >= 1; --k)
        tail = 2.0 * k + x2 / tail;
    return x / tail;
}

GaussLegendre GaussLegendre::make(std::size_t n) {
    if (n < 1)
        throw numeric_error("gauss-legendre: need at least one node");
    GaussLegendre rule{std::vector<double>(n), std::vector<double>(n)};
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double dk = static_cast<double>(k);
                const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = dn * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

const GaussLegendre &GaussLegendre::standard() {
    static const GaussLegendre rule = make(200);
    return rule;
}

} // namespace thzssh::special
