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
#include "thzssh/crb.hpp"
#include "thzssh/errors.hpp"
#include "thzssh/synth.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

using namespace thzssh;
using Catch::Approx;

namespace {

double adaptive_simpson(const std::function<double(double)> &f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (b - a) / 12.0 * (fa + 4.0 * flm + fm);
    const double right = (b - a) / 12.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)> &f, double a, double b, double tol = 1e-12) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return adaptive_simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

// Unit-variance Rice density and its score in eta, with the Bessel functions from the standard library.
double rice_pdf(double u, double eta) {
    const double x = u * eta;
    return u * std::exp(-(u - eta) * (u - eta) / 2.0) * std::cyl_bessel_i(0.0, x) * std::exp(-x);
}

double rice_score(double u, double eta) {
    const double x = u * eta;
    const double ratio = x == 0.0 ? 0.0 : std::cyl_bessel_i(1.0, x) / std::cyl_bessel_i(0.0, x);
    return u * ratio - eta;
}

double info_oracle(double eta) {
    const double hi = eta + 14.0;
    return integrate([&](double u) { return rice_score(u, eta) * rice_score(u, eta) * rice_pdf(u, eta); }, 0.0, hi);
}

Scenario los(double theta, double snr, double d = 5e-3) {
    Scenario s;
    s.d_m = d;
    s.paths = {Path{theta}};
    s.snr_db = snr;
    return s;
}

// CRB from finite differences of the synthesized mean magnitude.
double crb_oracle(const Scenario &s, double theta) {
    const double h = 1e-4;
    auto lo = s, hi = s, mid = s;
    lo.paths[0].theta_deg = theta - h;
    hi.paths[0].theta_deg = theta + h;
    mid.paths[0].theta_deg = theta;
    const auto fl = synthesize(lo), fh = synthesize(hi), fm = synthesize(mid);
    const double sigma2 = noise_power_n0(fm.per_antenna_power, *s.snr_db) / 2.0;
    double j = 0.0;
    for (std::size_t k = 0; k < fm.values.size(); ++k) {
        const double dnu = (std::abs(fh.values[k]) - std::abs(fl.values[k])) / (2.0 * deg_to_rad(h));
        const double eta = std::abs(fm.values[k]) / std::sqrt(sigma2);
        j += rician_information(eta) / sigma2 * dnu * dnu;
    }
    return rad_to_deg(1.0 / std::sqrt(j));
}

} // namespace

TEST_CASE("Rice density integrates to one", "[crb]") {
    for (double eta : {0.0, 0.2, 1.0, 4.0, 12.0, 40.0, 120.0}) {
        INFO("eta = " << eta);
        CHECK(rician_mass(eta) == Approx(1.0).margin(1e-9));
        const double n0 = 0.37, nu = eta * std::sqrt(n0 / 2.0);
        const double sigma = std::sqrt(n0 / 2.0);
        const double lo = std::max(0.0, nu - 16.0 * sigma), hi = nu + 16.0 * sigma;
        CHECK(integrate([&](double z) { return std::exp(rice_log_density(z, nu, n0)); }, lo, hi) ==
              Approx(1.0).margin(1e-8));
    }
}

TEST_CASE("Rice density against the closed form", "[crb]") {
    for (double eta : {0.5, 3.0, 9.0})
        for (double u : {0.1, 1.0, 2.5, eta + 1.0})
            CHECK(std::exp(rice_log_density(u, eta, 2.0)) == Approx(rice_pdf(u, eta)).epsilon(1e-12));
}

TEST_CASE("Rician information against quadrature", "[crb]") {
    for (double eta : {0.05, 0.3, 1.0, 1.7, 3.0, 6.5, 10.0, 19.0}) {
        INFO("eta = " << eta);
        const double oracle = info_oracle(eta);
        CHECK(rician_information(eta) == Approx(oracle).epsilon(1e-6));
        CHECK(rician_information_direct(eta) == Approx(oracle).epsilon(1e-8));
    }
    CHECK(rician_information(0.0) == 0.0);
    CHECK(rician_information(1e-3) == Approx(1e-6).epsilon(1e-3));
    // Gaussian limit
    CHECK(rician_information(80.0) == Approx(1.0).margin(1e-3));
    CHECK(rician_information(500.0) == Approx(1.0).margin(1e-5));
}

TEST_CASE("score has zero mean", "[crb]") {
    for (double eta : {0.01, 0.5, 2.0, 8.0, 30.0, 70.0, 300.0})
        CHECK(std::abs(rician_score_mean(eta)) < 1e-9);
    CHECK(normalized_score_mean(los(60.0, 10.0), 60.0) < 1e-6);
    CHECK(normalized_score_mean(los(20.0, -5.0), 20.0) < 1e-6);
}

TEST_CASE("SSH CRB against a finite-difference oracle", "[crb]") {
    for (double snr : {-10.0, 0.0, 20.0})
        for (double th : {15.0, 60.0, 90.0, 160.0}) {
            const auto s = los(th, snr);
            INFO("snr = " << snr << ", theta = " << th);
            CHECK(crb_ssh_doa(s, th) == Approx(crb_oracle(s, th)).epsilon(1e-5));
        }
    auto humid = los(60.0, 5.0);
    humid.channel = ChannelProfile::humid(1000.0);
    CHECK(crb_ssh_doa(humid, 60.0) == Approx(crb_oracle(humid, 60.0)).epsilon(1e-5));
}

TEST_CASE("SSH CRB limits", "[crb]") {
    const auto s = los(90.0, 10.0);
    CHECK(std::isinf(crb_ssh_doa(s, 0.0)));
    CHECK(std::isinf(crb_ssh_doa(s, 180.0)));
    CHECK(crb_ssh_doa(s, 0.5) > 10.0 * crb_ssh_doa(s, 90.0));
    CHECK(crb_ssh_doa(los(90.0, 20.0), 90.0) < crb_ssh_doa(los(90.0, 10.0), 90.0));
    CHECK(crb_ssh_doa(los(90.0, 10.0, 10e-3), 90.0) < crb_ssh_doa(los(90.0, 10.0, 5e-3), 90.0));
    Scenario quiet = s;
    quiet.snr_db.reset();
    CHECK_THROWS_AS(crb_ssh_doa(quiet, 90.0), validation_error);
}

TEST_CASE("unknown gain costs information", "[crb]") {
    const auto s = los(60.0, 5.0);
    const auto known = fim_ssh_doa(s, 60.0, Nuisance::known_channel);
    const auto flat = fim_ssh_doa(s, 60.0, Nuisance::flat_gain);
    REQUIRE(known.dim() == 1);
    REQUIRE(flat.dim() == 2);
    CHECK(flat.at(0, 1) == flat.at(1, 0));
    CHECK(flat.crb_deg[0] >= known.crb_deg[0] * (1.0 - 1e-12));
}

TEST_CASE("joint AoD/DoA information", "[crb]") {
    Scenario s = los(60.0, 5.0);
    s.tx_mode = TxMode::pair;
    const auto fim = fim_joint(s, 60.0, 60.0);
    REQUIRE(fim.params == std::vector<std::string>{"theta_i", "theta_d"});
    CHECK(fim.at(0, 1) == Approx(fim.at(1, 0)));
    CHECK(fim.at(0, 0) * fim.at(1, 1) > fim.at(0, 1) * fim.at(0, 1));
    CHECK(fim.crb_deg[0] == Approx(fim.crb_deg[1]).epsilon(0.25));
}

TEST_CASE("ULA CRB against the steering-vector Fisher information", "[crb]") {
    for (std::size_t n : {2u, 7u, 60u, 111u})
        for (double th : {20.0, 60.0, 90.0})
            for (double snr : {-10.0, 10.0}) {
                // a_m = exp(j pi (m - (n-1)/2) cos theta), unknown complex amplitude
                const double rho = std::pow(10.0, snr / 10.0);
                std::vector<std::complex<double>> a(n), da(n);
                for (std::size_t m = 0; m < n; ++m) {
                    const double pos = static_cast<double>(m) - 0.5 * static_cast<double>(n - 1);
                    a[m] = std::polar(1.0, M_PI * pos * std::cos(deg_to_rad(th)));
                    da[m] = std::complex<double>(0.0, -M_PI * pos * std::sin(deg_to_rad(th))) * a[m];
                }
                std::complex<double> proj = 0.0;
                double aa = 0.0;
                for (std::size_t m = 0; m < n; ++m) {
                    proj += std::conj(a[m]) * da[m];
                    aa += std::norm(a[m]);
                }
                double fim = 0.0;
                for (std::size_t m = 0; m < n; ++m)
                    fim += std::norm(da[m] - proj / aa * a[m]);
                fim *= 2.0 * rho;
                CHECK(crb_ula(n, snr, th) == Approx(rad_to_deg(1.0 / std::sqrt(fim))).epsilon(1e-10));
            }
}

TEST_CASE("lens response slope and CRB", "[crb]") {
    const std::size_t m = 15;
    const double l = 7.5;
    for (double th : {30.0, 75.0, 120.0}) {
        const double h = 1e-6;
        const auto lo = lens_response(m, l, th - h), hi = lens_response(m, l, th + h);
        const auto g = lens_response(m, l, th);
        const auto dg = lens_response_slope(m, l, th);
        REQUIRE(g.size() == m);
        double gg = 0.0, gd = 0.0, dd = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(dg[i] == Approx((hi[i] - lo[i]) / (2.0 * deg_to_rad(h))).margin(1e-6));
            gg += g[i] * g[i];
            gd += g[i] * dg[i];
            dd += dg[i] * dg[i];
        }
        const double fim = 2.0 * 10.0 * (dd - gd * gd / gg);
        CHECK(crb_lens(m, l, 10.0, th) == Approx(rad_to_deg(1.0 / std::sqrt(fim))).epsilon(1e-10));
    }
    // element m centred on the beam
    const auto g = lens_response(5, 2.5, 90.0);
    CHECK(g[2] == Approx(1.0));
    CHECK(g[0] == Approx(0.0).margin(1e-15));
}
