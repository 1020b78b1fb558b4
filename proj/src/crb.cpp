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

#include "thzssh/crb.hpp"

#include "thzssh/channel.hpp"
#include "thzssh/constants.hpp"
#include "thzssh/errors.hpp"
#include "thzssh/special.hpp"
#include "thzssh/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thzssh {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Rician density of u for unit sigma: u exp(-(u - eta)^2 / 2) * I0e(u eta).
double unit_rice_pdf(double u, double eta) {
    return u * std::exp(-0.5 * (u - eta) * (u - eta) + special::log_bessel_i0_scaled(u * eta));
}

template <typename F>
double rice_expectation(double eta, F &&g) {
    const double lo = std::max(0.0, eta - 12.0);
    const double hi = eta + 12.0;
    return special::GaussLegendre::standard().integrate([&](double u) { return unit_rice_pdf(u, eta) * g(u); }, lo, hi);
}

double score(double u, double eta) { return u * special::bessel_i1_i0_ratio(u * eta) - eta; }

constexpr double table_step = 0.01;
constexpr double table_max = 60.0;

const std::vector<double> &information_table() {
    static const std::vector<double> table = [] {
        const auto n = static_cast<std::size_t>(table_max / table_step) + 3;
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i)
            t[i] = rician_information_direct(static_cast<double>(i) * table_step);
        return t;
    }();
    return table;
}

void require_snr(const Scenario &scenario) {
    if (!scenario.snr_db)
        throw validation_error("crb: scenario needs a finite snr_db");
}

// Per-bin amplitude |a(f)| g of the first path, and the noise level of the scenario.
struct BinModel {
    std::vector<double> amplitude;
    double sigma = 0.0;
};

BinModel bin_model(const Scenario &scenario, const MeanField &mean) {
    BinModel m;
    const auto response = channel_response(scenario.grid, scenario.channel);
    m.amplitude.resize(response.size());
    for (std::size_t k = 0; k < response.size(); ++k)
        m.amplitude[k] = scenario.paths.front().gain_linear * response[k];
    m.sigma = std::sqrt(noise_power_n0(mean.per_antenna_power, *scenario.snr_db) / 2.0);
    return m;
}

// Fills CRBs in degrees from a symmetric FIM, with singular directions mapped to +inf.
void finish(FisherInfo &fi, std::size_t n_angles) {
    const std::size_t n = fi.dim();
    fi.crb_deg.assign(n_angles, inf);
    if (n == 1) {
        if (fi.matrix[0] > 0.0)
            fi.crb_deg[0] = rad_to_deg(std::sqrt(1.0 / fi.matrix[0]));
        return;
    }
    const double a = fi.at(0, 0), b = fi.at(0, 1), d = fi.at(1, 1);
    const double det = a * d - b * b;
    if (a > 0.0 && d > 0.0 && det > 1e-12 * a * d) {
        if (n_angles > 0)
            fi.crb_deg[0] = rad_to_deg(std::sqrt(d / det));
        if (n_angles > 1)
            fi.crb_deg[1] = rad_to_deg(std::sqrt(a / det));
    } else if (n_angles == 2) {
        // One angle carries no information; the other decouples.
        if (a > 0.0 && d <= 0.0)
            fi.crb_deg[0] = rad_to_deg(std::sqrt(1.0 / a));
        if (d > 0.0 && a <= 0.0)
            fi.crb_deg[1] = rad_to_deg(std::sqrt(1.0 / d));
    }
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(pi * x) / (pi * x); }

double sinc_slope(double x) { return x == 0.0 ? 0.0 : (std::cos(pi * x) - sinc(x)) / x; }

} // namespace

double rice_log_density(double z, double nu, double n0) {
    if (!(n0 > 0.0) || nu < 0.0 || z < 0.0)
        throw numeric_error("rice_log_density: need z >= 0, nu >= 0, N0 > 0");
    if (z == 0.0)
        return -inf;
    const double half = n0 / 2.0;
    const double x = 2.0 * z * nu / n0;
    return std::log(z) - std::log(half) - (z * z + nu * nu) / n0 + special::log_bessel_i0(x);
}

double rician_information_direct(double eta) {
    return rice_expectation(eta, [eta](double u) {
        const double s = score(u, eta);
        return s * s;
    });
}

double rician_information(double eta) {
    eta = std::abs(eta);
    if (eta >= table_max)
        return rician_information_direct(eta);
    // Catmull-Rom on the even extension of the table.
    const auto &t = information_table();
    const double pos = eta / table_step;
    const auto i = static_cast<std::ptrdiff_t>(pos);
    const double s = pos - static_cast<double>(i);
    const auto at = [&](std::ptrdiff_t k) { return t[static_cast<std::size_t>(std::abs(k))]; };
    const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return p1 + 0.5 * s * (p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + s * (3.0 * (p1 - p2) + p3 - p0)));
}

double rician_score_mean(double eta) { return rice_expectation(eta, [eta](double u) { return score(u, eta); }); }

double rician_mass(double eta) { return rice_expectation(eta, [](double) { return 1.0; }); }

FisherInfo fim_ssh_doa(const Scenario &scenario, double theta_deg, Nuisance nuisance) {
    require_snr(scenario);
    Scenario s = scenario;
    s.paths = {Path{theta_deg, 0.0, scenario.paths.front().gain_linear}};
    s.tx_mode = TxMode::single;
    const auto mean = synth_single(s);
    const auto model = bin_model(s, mean);

    const double slope = shaper_zeta_slope(theta_deg, s.d_m);
    const double zeta = shaper_zeta(theta_deg, s.d_m);
    const bool with_gain = nuisance == Nuisance::flat_gain;
    FisherInfo fi;
    fi.params = with_gain ? std::vector<std::string>{"theta", "gain"} : std::vector<std::string>{"theta"};
    fi.matrix.assign(fi.dim() * fi.dim(), 0.0);
    const double var = model.sigma * model.sigma;
    for (std::size_t k = 0; k < mean.values.size(); ++k) {
        const double f = s.grid.frequency(k);
        const double c = std::cos(pi * f * zeta);
        const double nu = model.amplitude[k] * std::abs(c);
        const double d_theta = -model.amplitude[k] * std::copysign(1.0, c) * std::sin(pi * f * zeta) * pi * f * slope;
        const double w = rician_information(nu / model.sigma) / var;
        fi.matrix[0] += w * d_theta * d_theta;
        if (with_gain) {
            const double d_gain = nu / s.paths.front().gain_linear;
            fi.matrix[1] += w * d_theta * d_gain;
            fi.matrix[3] += w * d_gain * d_gain;
        }
    }
    if (with_gain)
        fi.matrix[2] = fi.matrix[1];
    finish(fi, 1);
    return fi;
}

double crb_ssh_doa(const Scenario &scenario, double theta_deg) { return fim_ssh_doa(scenario, theta_deg).crb_deg[0]; }

double normalized_score_mean(const Scenario &scenario, double theta_deg) {
    require_snr(scenario);
    Scenario s = scenario;
    s.paths = {Path{theta_deg, 0.0, scenario.paths.front().gain_linear}};
    s.tx_mode = TxMode::single;
    const auto mean = synth_single(s);
    const auto model = bin_model(s, mean);
    const double slope = shaper_zeta_slope(theta_deg, s.d_m);
    const double zeta = shaper_zeta(theta_deg, s.d_m);
    double total = 0.0, info = 0.0;
    for (std::size_t k = 0; k < mean.values.size(); ++k) {
        const double f = s.grid.frequency(k);
        const double c = std::cos(pi * f * zeta);
        const double eta = model.amplitude[k] * std::abs(c) / model.sigma;
        const double d_theta = -model.amplitude[k] * std::copysign(1.0, c) * std::sin(pi * f * zeta) * pi * f * slope;
        total += d_theta / model.sigma * rician_score_mean(eta);
        info += d_theta * d_theta / (model.sigma * model.sigma) * rician_information_direct(eta);
    }
    return info > 0.0 ? std::abs(total) / std::sqrt(info) : 0.0;
}

FisherInfo fim_joint(const Scenario &scenario, double theta_i_deg, double theta_d_deg) {
    require_snr(scenario);
    Scenario s = scenario;
    s.paths = {Path{theta_i_deg, 0.0, scenario.paths.front().gain_linear, theta_d_deg}};
    s.tx_mode = TxMode::pair;
    const auto mean = synth_aod(s);
    const auto model = bin_model(s, mean);

    const double tau = s.d_m / speed_of_light;
    const auto lags = pair_lags(theta_i_deg, theta_d_deg, s.d_m);
    const double slope_i = tau * std::sin(deg_to_rad(theta_i_deg));
    const double slope_d = tau * std::sin(deg_to_rad(theta_d_deg));

    FisherInfo fi;
    fi.params = {"theta_i", "theta_d"};
    fi.matrix.assign(4, 0.0);
    const double var = model.sigma * model.sigma;
    for (std::size_t k = 0; k < mean.values.size(); ++k) {
        const double f = s.grid.frequency(k);
        const double ci = std::cos(pi * f * lags.doa);
        const double cd = std::cos(pi * f * lags.aod);
        const double a = model.amplitude[k];
        const double nu = a * std::abs(ci) * std::abs(cd);
        const double di = -a * std::abs(cd) * std::copysign(1.0, ci) * std::sin(pi * f * lags.doa) * pi * f * slope_i;
        const double dd = -a * std::abs(ci) * std::copysign(1.0, cd) * std::sin(pi * f * lags.aod) * pi * f * slope_d;
        const double w = rician_information(nu / model.sigma) / var;
        fi.matrix[0] += w * di * di;
        fi.matrix[1] += w * di * dd;
        fi.matrix[3] += w * dd * dd;
    }
    fi.matrix[2] = fi.matrix[1];
    finish(fi, 2);
    return fi;
}

double crb_ula(std::size_t n_elements, double snr_db, double theta_deg) {
    if (n_elements < 2)
        throw validation_error("crb_ula: need at least 2 elements");
    const double n = static_cast<double>(n_elements);
    const double s = std::sin(deg_to_rad(theta_deg));
    const double fisher = db_to_power(snr_db) * pi * pi * n * (n * n - 1.0) * s * s / 6.0;
    return fisher > 0.0 ? rad_to_deg(std::sqrt(1.0 / fisher)) : inf;
}

std::vector<double> lens_response(std::size_t m_elements, double aperture_over_lambda, double theta_deg) {
    std::vector<double> g(m_elements);
    const double centre = 0.5 * static_cast<double>(m_elements - 1);
    const double shift = aperture_over_lambda * std::cos(deg_to_rad(theta_deg));
    for (std::size_t i = 0; i < m_elements; ++i)
        g[i] = sinc(static_cast<double>(i) - centre - shift);
    return g;
}

std::vector<double> lens_response_slope(std::size_t m_elements, double aperture_over_lambda, double theta_deg) {
    std::vector<double> g(m_elements);
    const double centre = 0.5 * static_cast<double>(m_elements - 1);
    const double shift = aperture_over_lambda * std::cos(deg_to_rad(theta_deg));
    const double du = aperture_over_lambda * std::sin(deg_to_rad(theta_deg));
    for (std::size_t i = 0; i < m_elements; ++i)
        g[i] = sinc_slope(static_cast<double>(i) - centre - shift) * du;
    return g;
}

double crb_lens(std::size_t m_elements, double aperture_over_lambda, double snr_db, double theta_deg) {
    if (m_elements < 2)
        throw validation_error("crb_lens: need at least 2 elements");
    const auto g = lens_response(m_elements, aperture_over_lambda, theta_deg);
    const auto dg = lens_response_slope(m_elements, aperture_over_lambda, theta_deg);
    double gg = 0.0, dd = 0.0, gd = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        gg += g[i] * g[i];
        dd += dg[i] * dg[i];
        gd += g[i] * dg[i];
    }
    const double fisher = 2.0 * db_to_power(snr_db) * (dd - (gg > 0.0 ? gd * gd / gg : 0.0));
    return fisher > 1e-300 ? rad_to_deg(std::sqrt(1.0 / fisher)) : inf;
}

} // namespace thzssh
