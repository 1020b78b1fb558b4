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

#include "thzssh/scenario.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace thzssh {

/// Noise-free complex field at the THz-TDS input; |values|^2 is the received power spectrum.
/// The scale is fixed so that a unit-gain LoS path through a flat channel peaks at power 1.
struct MeanField {
    FrequencyGrid grid;
    std::vector<std::complex<double>> values;
    double per_antenna_power = 0.0; // mean |field|^2 seen by a single receive antenna

    std::vector<double> power() const;
};

/// One magnitude-only THz-TDS shot.
struct ObservedSpectrum {
    FrequencyGrid grid;
    std::vector<double> z;  // |mean + noise|
    MeanField mean;
    double n0 = 0.0;        // total noise power of the summed field, 0 when noise-free

    std::vector<double> power() const; // z^2
};

/// Arrival time difference between the two receive antennas, -(D/c) cos(theta).
double delta_t(double theta_deg, double d_m);

/// Ripple lag imposed by the delay-line receiver, (2D/c) sin^2(theta/2).
double shaper_zeta(double theta_deg, double d_m);

/// d zeta / d theta per radian, (D/c) sin(theta).
double shaper_zeta_slope(double theta_deg, double d_m);

/// The four ripple lags of the TX-pair configuration.
struct PairLags {
    double doa;  // (D/c)(1 - cos theta_i)
    double aod;  // (D/c)(3 - cos theta_d)
    double sum;  // (D/c)(4 - cos theta_i - cos theta_d)
    double diff; // (D/c)(2 - cos theta_d + cos theta_i)

    std::array<double, 4> as_array() const { return {doa, aod, sum, diff}; }
};

PairLags pair_lags(double theta_i_deg, double theta_d_deg, double d_m);

/// Receiver wiring. `no_delay_line` drops the delay line after the second antenna and
/// exists to demonstrate the front/back ambiguity it removes.
enum class ReceiverVariant { delay_line, no_delay_line };

MeanField synth_single(const Scenario &scenario, ReceiverVariant variant = ReceiverVariant::delay_line);
MeanField synth_multi(const Scenario &scenario);
MeanField synth_aod(const Scenario &scenario);

/// Dispatches on tx_mode and path count.
MeanField synthesize(const Scenario &scenario);

/// Total noise power N0 such that per-antenna power / (N0/2) equals the SNR.
double noise_power_n0(double per_antenna_power, double snr_db);

/// Draws one observation. An empty SNR yields the noise-free magnitude.
ObservedSpectrum add_noise(const MeanField &mean, std::optional<double> snr_db, std::uint64_t seed);

/// synthesize + add_noise with the scenario's SNR and seed.
ObservedSpectrum observe(const Scenario &scenario);

/// Independent stream seed for Monte Carlo trial `trial` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t trial);

/// CSV with columns f_hz,z,mean_re,mean_im.
void write_spectrum_csv(std::ostream &out, const ObservedSpectrum &spectrum);

} // namespace thzssh
