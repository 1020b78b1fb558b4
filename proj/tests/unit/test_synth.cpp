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

#include "thzssh/constants.hpp"
#include "thzssh/errors.hpp"
#include "thzssh/synth.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <set>
#include <sstream>

using namespace thzssh;
using Catch::Approx;
using cplx = std::complex<double>;

namespace {

constexpr double c0 = 299792458.0;

Scenario flat_los(double theta, double d = 5e-3) {
    Scenario s;
    s.d_m = d;
    s.paths = {Path{theta}};
    s.channel = ChannelProfile::flat();
    return s;
}

cplx phasor(double f, double t) { return std::polar(1.0, -2.0 * M_PI * f * t); }

} // namespace

TEST_CASE("lag geometry", "[synth]") {
    const double d = 5e-3;
    CHECK(delta_t(60.0, d) == Approx(-d / c0 * 0.5));
    CHECK(shaper_zeta(0.0, d) == 0.0);
    CHECK(shaper_zeta(180.0, d) == Approx(2.0 * d / c0));
    CHECK(shaper_zeta(90.0, d) == Approx(d / c0));
    // derivative against a central difference
    for (double th : {10.0, 60.0, 135.0}) {
        const double h = 1e-5;
        const double num = (shaper_zeta(th + h, d) - shaper_zeta(th - h, d)) / (2.0 * deg_to_rad(h));
        CHECK(shaper_zeta_slope(th, d) == Approx(num).epsilon(1e-7));
    }
}

TEST_CASE("single path power is a cos^2 ripple", "[synth]") {
    for (double th = 1.0; th <= 179.0; th += 7.0) {
        const auto s = flat_los(th);
        const auto p = synthesize(s).power();
        const double zeta = 2.0 * s.d_m / c0 * std::pow(std::sin(deg_to_rad(th) / 2.0), 2);
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double expected = std::pow(std::cos(M_PI * s.grid.frequency(k) * zeta), 2);
            REQUIRE(std::abs(p[k] - expected) <= 1e-12 * std::max(expected, 1e-300) + 1e-15);
        }
    }
}

TEST_CASE("per-antenna power and noise level", "[synth]") {
    const auto m = synthesize(flat_los(60.0));
    CHECK(m.per_antenna_power == Approx(0.25));
    CHECK(noise_power_n0(0.25, 10.0) == Approx(0.05));
    CHECK(noise_power_n0(0.25, 0.0) == Approx(0.5));
}

TEST_CASE("multipath field is the sum of delayed shaped copies", "[synth]") {
    Scenario s = flat_los(60.0);
    s.paths.push_back({100.0, 0.5, 0.5});
    s.paths.push_back({140.0, 0.73, 0.3});
    const auto field = synthesize(s);
    for (std::size_t k = 0; k < field.values.size(); k += 37) {
        const double f = s.grid.frequency(k);
        cplx expected = 0.0;
        for (const auto &p : s.paths) {
            const double zeta = 2.0 * s.d_m / c0 * std::pow(std::sin(deg_to_rad(p.theta_deg) / 2.0), 2);
            expected += 0.5 * p.gain_linear * phasor(f, p.excess_length_m / c0) * (1.0 + phasor(f, zeta));
        }
        CHECK(std::norm(field.values[k]) == Approx(std::norm(expected)).epsilon(1e-10));
    }
}

TEST_CASE("transmitter pair field", "[synth]") {
    Scenario s = flat_los(50.0);
    s.tx_mode = TxMode::pair;
    s.paths.front().aod_deg = 125.0;
    const auto field = synthesize(s);
    const double tau = s.d_m / c0;
    const double beta = tau * (1.0 - std::cos(deg_to_rad(50.0)));
    const double alpha = tau * (3.0 - std::cos(deg_to_rad(125.0)));
    for (std::size_t k = 0; k < field.values.size(); k += 11) {
        const double f = s.grid.frequency(k);
        const auto expected = 0.25 * (1.0 + phasor(f, beta)) * (1.0 + phasor(f, alpha));
        CHECK(std::norm(field.values[k]) == Approx(std::norm(expected)).epsilon(1e-10).margin(1e-14));
    }
    const auto lags = pair_lags(50.0, 125.0, s.d_m);
    CHECK(lags.sum == Approx(alpha + beta));
    CHECK(lags.diff == Approx(alpha - beta));
}

TEST_CASE("harmonic lag ordering for random angle pairs", "[synth]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 180.0);
    for (int i = 0; i < 10000; ++i) {
        const auto l = pair_lags(u(rng), u(rng), 5e-3);
        REQUIRE(l.sum >= l.aod);
        REQUIRE(l.aod >= l.diff);
        REQUIRE(l.aod >= l.doa);
    }
}

TEST_CASE("delay line removes the front/back ambiguity", "[synth]") {
    const auto with = [](double th) { return synth_single(flat_los(th), ReceiverVariant::delay_line).power(); };
    const auto without = [](double th) { return synth_single(flat_los(th), ReceiverVariant::no_delay_line).power(); };
    const auto a = without(40.0), b = without(140.0);
    for (std::size_t k = 0; k < a.size(); ++k)
        CHECK(a[k] == Approx(b[k]).margin(1e-12));
    const auto c = with(40.0), d = with(140.0);
    double diff = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
        diff = std::max(diff, std::abs(c[k] - d[k]));
    CHECK(diff > 0.1);
}

TEST_CASE("channel attenuation scales the field", "[synth]") {
    Scenario s = flat_los(70.0);
    s.channel = ChannelProfile::humid(300.0);
    const auto a = channel_response(s.grid, s.channel);
    const auto p = synthesize(s).power();
    const double zeta = shaper_zeta(70.0, s.d_m);
    for (std::size_t k = 0; k < p.size(); k += 29)
        CHECK(p[k] == Approx(a[k] * a[k] * std::pow(std::cos(M_PI * s.grid.frequency(k) * zeta), 2))
                          .epsilon(1e-10)
                          .margin(1e-300));
}

TEST_CASE("noise-free observation is the mean magnitude", "[synth]") {
    const auto s = flat_los(30.0);
    const auto obs = observe(s);
    CHECK(obs.n0 == 0.0);
    for (std::size_t k = 0; k < obs.z.size(); ++k)
        CHECK(obs.z[k] == Approx(std::abs(obs.mean.values[k])).margin(1e-15));
}

TEST_CASE("noise draws are reproducible", "[synth]") {
    auto s = flat_los(60.0);
    s.snr_db = 3.0;
    s.seed = 99;
    CHECK(observe(s).z == observe(s).z);
    auto t = s;
    t.seed = 100;
    CHECK(observe(s).z != observe(t).z);

    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 10000; ++i)
        seeds.insert(derive_seed(5, i));
    CHECK(seeds.size() == 10000);
    CHECK(derive_seed(5, 0) != derive_seed(6, 0));
}

TEST_CASE("noise magnitude follows the Rice law", "[synth]") {
    Scenario s = flat_los(90.0);
    s.grid = FrequencyGrid::make(0.1e12, 1.0e12, 40);
    s.snr_db = 6.0;
    const auto mean = synthesize(s);
    const std::size_t bin = 3;
    const double nu = std::abs(mean.values[bin]);
    const double n0 = noise_power_n0(mean.per_antenna_power, *s.snr_db);
    const double sigma2 = n0 / 2.0;

    std::vector<double> draws;
    double second_moment = 0.0;
    for (std::uint64_t t = 0; t < 4000; ++t) {
        const auto obs = add_noise(mean, s.snr_db, derive_seed(11, t));
        draws.push_back(obs.z[bin]);
        second_moment += obs.z[bin] * obs.z[bin];
    }
    // E z^2 = nu^2 + N0
    CHECK(second_moment / draws.size() == Approx(nu * nu + n0).epsilon(0.03));

    // Rice CDF by Simpson integration of the density
    const auto density = [&](double x) {
        const double u = x * nu / sigma2;
        return x / sigma2 * std::exp(-(x - nu) * (x - nu) / (2.0 * sigma2)) * std::cyl_bessel_i(0.0, u) * std::exp(-u);
    };
    const auto cdf = [&](double x) {
        const int n = 2000;
        const double h = x / n;
        double acc = density(0.0) + density(x);
        for (int i = 1; i < n; ++i)
            acc += (i % 2 ? 4.0 : 2.0) * density(i * h);
        return acc * h / 3.0;
    };
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < draws.size(); i += 8) {
        const double f = cdf(draws[i]);
        ks = std::max({ks, std::abs(f - static_cast<double>(i) / draws.size()),
                       std::abs(f - static_cast<double>(i + 1) / draws.size())});
    }
    // 1% critical value of the one-sample KS statistic for n = 4000
    CHECK(ks < 1.63 / std::sqrt(4000.0));
}

TEST_CASE("spectrum CSV layout", "[synth]") {
    std::ostringstream out;
    write_spectrum_csv(out, observe(flat_los(60.0)));
    const auto text = out.str();
    CHECK(text.rfind("f_hz,z,mean_re,mean_im\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 601);
}
