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

#include "thzssh/synth.hpp"

#include "thzssh/channel.hpp"
#include "thzssh/constants.hpp"
#include "thzssh/csv.hpp"
#include "thzssh/errors.hpp"

#include <cmath>
#include <random>

namespace thzssh {

namespace {

using cplx = std::complex<double>;

// exp(-j 2 pi f tau)
cplx delay_phasor(double f, double tau) { return std::polar(1.0, -2.0 * pi * f * tau); }

// 1 + exp(-j 2 pi f tau) in half-angle form, free of cancellation at the nulls.
cplx direct_plus_delayed(double f, double tau) {
    const double half = pi * f * tau;
    return 2.0 * std::cos(half) * cplx(std::cos(half), -std::sin(half));
}

// Per-path channel amplitude: the profile's attenuation over range plus the path's excess length.
std::vector<double> path_amplitude(const Scenario &s, const Path &path,
                                   const std::vector<double> &gamma_db_per_km) {
    const double range_km = (s.channel.range_m + path.excess_length_m) * 1e-3;
    std::vector<double> a(gamma_db_per_km.size());
    for (std::size_t k = 0; k < a.size(); ++k)
        a[k] = path.gain_linear *
               std::max(std::pow(10.0, -gamma_db_per_km[k] * range_km / 20.0), std::numeric_limits<double>::min());
    return a;
}

std::vector<double> attenuation_db_per_km(const Scenario &s) {
    std::vector<double> gamma(s.grid.n_samples);
    for (std::size_t k = 0; k < gamma.size(); ++k)
        gamma[k] = specific_attenuation(s.grid.frequency(k), s.channel);
    return gamma;
}

double mean_power(const std::vector<cplx> &field) {
    double acc = 0.0;
    for (const auto &v : field)
        acc += std::norm(v);
    return acc / static_cast<double>(field.size());
}

} // namespace

std::vector<double> MeanField::power() const {
    std::vector<double> p(values.size());
    for (std::size_t k = 0; k < p.size(); ++k)
        p[k] = std::norm(values[k]);
    return p;
}

std::vector<double> ObservedSpectrum::power() const {
    std::vector<double> p(z.size());
    for (std::size_t k = 0; k < p.size(); ++k)
        p[k] = z[k] * z[k];
    return p;
}

double delta_t(double theta_deg, double d_m) { return -(d_m / speed_of_light) * std::cos(deg_to_rad(theta_deg)); }

double shaper_zeta(double theta_deg, double d_m) {
    const double s = std::sin(deg_to_rad(theta_deg) / 2.0);
    return 2.0 * d_m / speed_of_light * s * s;
}

double shaper_zeta_slope(double theta_deg, double d_m) {
    // Exact zero at endfire so the information vanishes there
    if (theta_deg == 0.0 || theta_deg == 180.0)
        return 0.0;
    return d_m / speed_of_light * std::sin(deg_to_rad(theta_deg));
}

PairLags pair_lags(double theta_i_deg, double theta_d_deg, double d_m) {
    const double tau = d_m / speed_of_light;
    const double ci = std::cos(deg_to_rad(theta_i_deg));
    const double cd = std::cos(deg_to_rad(theta_d_deg));
    return {tau * (1.0 - ci), tau * (3.0 - cd), tau * (4.0 - ci - cd), tau * (2.0 - cd + ci)};
}

MeanField synth_single(const Scenario &scenario, ReceiverVariant variant) {
    scenario.validate();
    if (scenario.paths.size() != 1)
        throw estimation_error(estimation_failure::path_count_mismatch,
                               "synth_single needs exactly one path, got " + std::to_string(scenario.paths.size()));
    if (scenario.tx_mode != TxMode::single)
        throw estimation_error(estimation_failure::wrong_tx_mode, "synth_single needs tx_mode single");

    const auto &path = scenario.paths.front();
    const auto a = path_amplitude(scenario, path, attenuation_db_per_km(scenario));
    // Second branch delay: delay line D/c plus the geometric shift, or the shift alone.
    const double lag = variant == ReceiverVariant::delay_line ? shaper_zeta(path.theta_deg, scenario.d_m)
                                                              : delta_t(path.theta_deg, scenario.d_m);

    MeanField field{scenario.grid, std::vector<cplx>(scenario.grid.n_samples), 0.0};
    std::vector<cplx> antenna(scenario.grid.n_samples);
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        const double f = scenario.grid.frequency(k);
        antenna[k] = 0.5 * a[k];
        field.values[k] = antenna[k] * direct_plus_delayed(f, lag);
    }
    field.per_antenna_power = mean_power(antenna);
    return field;
}

MeanField synth_multi(const Scenario &scenario) {
    scenario.validate();
    if (scenario.tx_mode != TxMode::single)
        throw estimation_error(estimation_failure::wrong_tx_mode, "synth_multi needs tx_mode single");

    const auto gamma = attenuation_db_per_km(scenario);
    const std::size_t n = scenario.grid.n_samples;
    MeanField field{scenario.grid, std::vector<cplx>(n), 0.0};
    std::vector<cplx> antenna(n);
    for (const auto &path : scenario.paths) {
        const auto a = path_amplitude(scenario, path, gamma);
        const double tof = path.excess_length_m / speed_of_light;
        const double lag = shaper_zeta(path.theta_deg, scenario.d_m);
        for (std::size_t k = 0; k < n; ++k) {
            const double f = scenario.grid.frequency(k);
            const cplx arrival = 0.5 * a[k] * delay_phasor(f, tof);
            antenna[k] += arrival;
            field.values[k] += arrival * direct_plus_delayed(f, lag);
        }
    }
    field.per_antenna_power = mean_power(antenna);
    return field;
}

MeanField synth_aod(const Scenario &scenario) {
    scenario.validate();
    if (scenario.tx_mode != TxMode::pair)
        throw estimation_error(estimation_failure::wrong_tx_mode, "synth_aod needs tx_mode pair");

    const auto &path = scenario.paths.front();
    const auto a = path_amplitude(scenario, path, attenuation_db_per_km(scenario));
    const auto lags = pair_lags(path.theta_deg, path.aod_deg, scenario.d_m);

    MeanField field{scenario.grid, std::vector<cplx>(scenario.grid.n_samples), 0.0};
    std::vector<cplx> antenna(scenario.grid.n_samples);
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        const double f = scenario.grid.frequency(k);
        antenna[k] = 0.25 * a[k] * direct_plus_delayed(f, lags.aod);
        field.values[k] = antenna[k] * direct_plus_delayed(f, lags.doa);
    }
    field.per_antenna_power = mean_power(antenna);
    return field;
}

MeanField synthesize(const Scenario &scenario) {
    if (scenario.tx_mode == TxMode::pair)
        return synth_aod(scenario);
    if (scenario.paths.size() == 1)
        return synth_single(scenario);
    return synth_multi(scenario);
}

double noise_power_n0(double per_antenna_power, double snr_db) {
    return 2.0 * per_antenna_power / db_to_power(snr_db);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial) {
    // splitmix64 finaliser over the (seed, trial) pair
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (trial + 1));
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

ObservedSpectrum add_noise(const MeanField &mean, std::optional<double> snr_db, std::uint64_t seed) {
    ObservedSpectrum obs{mean.grid, std::vector<double>(mean.values.size()), mean, 0.0};
    for (const auto &v : mean.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw numeric_error("add_noise: mean field is not finite");

    if (!snr_db) {
        for (std::size_t k = 0; k < obs.z.size(); ++k)
            obs.z[k] = std::abs(mean.values[k]);
        return obs;
    }

    obs.n0 = noise_power_n0(mean.per_antenna_power, *snr_db);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(obs.n0 / 2.0));
    for (std::size_t k = 0; k < obs.z.size(); ++k) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        obs.z[k] = std::abs(mean.values[k] + cplx(re, im));
    }
    return obs;
}

ObservedSpectrum observe(const Scenario &scenario) {
    return add_noise(synthesize(scenario), scenario.snr_db, scenario.seed);
}

void write_spectrum_csv(std::ostream &out, const ObservedSpectrum &spectrum) {
    csv::Writer w(out, {"f_hz", "z", "mean_re", "mean_im"});
    for (std::size_t k = 0; k < spectrum.z.size(); ++k) {
        w.cell(spectrum.grid.frequency(k))
            .cell(spectrum.z[k])
            .cell(spectrum.mean.values[k].real())
            .cell(spectrum.mean.values[k].imag());
        w.end_row();
    }
}

} // namespace thzssh
