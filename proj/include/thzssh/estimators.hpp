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
#include "thzssh/synth.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace thzssh {

// ---------------------------------------------------------------------------
// Spectrum of the spectrum

struct ZetaOptions {
    std::size_t zero_pad = 8;
    bool remove_mean = true;
    bool hann = true;
};

/// Transform of a power spectrum sampled with spacing `df` onto the lag axis.
ZetaSpectrum zeta_spectrum(std::span<const double> power, double df, const ZetaOptions &options = {});
/// Transform of z^2.
ZetaSpectrum zeta_spectrum(const ObservedSpectrum &spectrum, const ZetaOptions &options = {});

/// Robust detection floor: 6x the median magnitude.
double noise_floor(const ZetaSpectrum &zspec);

struct SpectralPeak {
    double lag_s = 0.0;     // interpolated lag
    double magnitude = 0.0; // interpolated magnitude
    std::size_t bin = 0;
};

/// Local maxima with lag in [lag_lo, lag_hi] and magnitude above `threshold`, 3-point
/// interpolated, sorted by descending magnitude then ascending lag.
std::vector<SpectralPeak> find_peaks(const ZetaSpectrum &zspec, double lag_lo, double lag_hi, double threshold);

/// Keeps lags up to 2D/c plus one native guard bin, zeroes the rest.
ZetaSpectrum lowpass(const ZetaSpectrum &zspec, double d_m);

/// Frequency-domain counterpart of `lowpass`: filters the power spectrum itself through an
/// even-symmetric extension and returns it on the original grid. The pass band ends at 2D/c and a
/// raised-cosine transition reaches zero at 4 x 2D/c.
std::vector<double> lowpass_power(std::span<const double> power, double df, double d_m);

// ---------------------------------------------------------------------------
// Single path

struct DoaEstimate {
    double theta_deg = 0.0;
    double zeta_s = 0.0;      // refined lag
    double peak_lag_s = 0.0;  // interpolated periodogram peak, 0 when near endfire
    double peak_magnitude = 0.0;
    bool near_endfire = false;
};

/// Single-path DoA from the dominant lag of the shaped spectrum.
DoaEstimate estimate_doa_single(const ObservedSpectrum &spectrum, double d_m);

/// Inverse of shaper_zeta, clamped to [0, 180].
double theta_from_zeta(double zeta_s, double d_m);

// ---------------------------------------------------------------------------
// Harmonics

enum class HarmonicMethod { periodogram, music };

struct Harmonic {
    double lag_s = 0.0;
    double amplitude = 0.0; // amplitude of the cosine tone in the power spectrum
};

/// Periodogram peaks of an existing zeta spectrum.
std::vector<Harmonic> harmonic_decompose(const ZetaSpectrum &zspec, std::size_t max_components);

/// Tones of a raw power spectrum, optionally restricted to lags <= max_lag_s.
std::vector<Harmonic> harmonic_decompose(std::span<const double> power, double df, HarmonicMethod method,
                                         std::size_t max_components, double max_lag_s = 0.0);

// ---------------------------------------------------------------------------
// Multipath

struct MatchedFilterCurve {
    std::vector<double> theta_deg;
    std::vector<double> energy;
};

/// E(theta) = integral of cos(2 pi f zeta(theta)) times the mean-removed power spectrum.
MatchedFilterCurve matched_filter(const ObservedSpectrum &spectrum, double d_m, double step_deg = 0.1);
MatchedFilterCurve matched_filter(std::span<const double> power, const FrequencyGrid &grid, double d_m,
                                  double step_deg = 0.1);

struct AnglePeak {
    double theta_deg = 0.0;
    double energy = 0.0;
};

/// Local maxima above `relative_floor` of the global maximum, parabolically refined,
/// sorted by descending energy.
std::vector<AnglePeak> matched_filter_peaks(const MatchedFilterCurve &curve, double relative_floor = 0.1);

/// Path power implied by a matched-filter energy, in dB.
double matched_filter_power_db(double energy, const FrequencyGrid &grid);

struct RelDistance {
    std::size_t earlier = 0; // index into the supplied DoA list
    std::size_t later = 0;
    double distance_m = 0.0;
    double magnitude = 0.0;
};

struct RelDistanceResult {
    std::vector<RelDistance> pairs; // sorted by ascending distance
    std::vector<std::string> warnings;
};

/// Pairwise path-length differences from the cross terms beyond the shaper band. `doas_deg`
/// lists the detected path angles; `max_search_m` bounds the search (0: alias limit).
RelDistanceResult estimate_rel_distances(const ObservedSpectrum &spectrum, double d_m,
                                         std::span<const double> doas_deg, double max_search_m = 0.0);

// ---------------------------------------------------------------------------
// Transmitter pair

struct AodDoaEstimate {
    double aod_deg = 0.0;
    double doa_deg = 0.0;
    double zeta_sum_s = 0.0; // largest detected lag
    double zeta_aod_s = 0.0; // second largest detected lag
    std::vector<SpectralPeak> peaks;
    std::vector<std::string> warnings;
};

/// Decodes the two largest lags, then refines both angles jointly on the four-harmonic
/// template. Unless `strict`, an inconsistent decoding falls back to a global four-harmonic
/// search instead of throwing InconsistentLags.
AodDoaEstimate estimate_aod_doa(const ObservedSpectrum &spectrum, double d_m, bool strict = false);

// ---------------------------------------------------------------------------
// Grid search

/// Precomputed noise-free templates on an angle grid.
class TemplateBank {
  public:
    TemplateBank(std::vector<double> theta_grid_deg, std::vector<std::vector<double>> templates);

    /// Grid argmin of the squared distance, refined on templates interpolated between neighbours.
    double estimate(std::span<const double> observed) const;
    std::vector<double> costs(std::span<const double> observed) const;

    const std::vector<double> &theta_grid() const { return theta_; }

  private:
    std::vector<double> theta_;
    std::vector<std::vector<double>> templates_;
};

using TemplateBuilder = std::function<std::vector<double>(double theta_deg)>;

double mmse_estimate(std::span<const double> observed, const TemplateBuilder &builder,
                     std::span<const double> theta_grid_deg);

/// Uniform grid [lo, hi] with the given step, endpoints included.
std::vector<double> angle_grid(double lo_deg, double hi_deg, double step_deg);

/// Power templates |E_r|^2 of single-path copies of `scenario` with the channel known.
TemplateBank ssh_template_bank(const Scenario &scenario, std::span<const double> theta_grid_deg);

/// Observed power with the mean noise contribution removed, the input an MMSE fit expects.
std::vector<double> debiased_power(const ObservedSpectrum &spectrum);

// ---------------------------------------------------------------------------
// Report

struct EstimateReport {
    std::vector<double> doas_deg;        // by descending power
    std::vector<double> powers_db;       // relative to the strongest path
    std::vector<double> rel_distances_m; // pairwise, ascending
    std::optional<double> aod_deg;
    std::vector<double> peak_magnitudes;
    std::vector<double> peak_lags_s;
    bool near_endfire = false;
    std::vector<std::string> warnings;
};

/// Runs the pipeline matching the scenario's receiver configuration.
EstimateReport estimate_report(const ObservedSpectrum &spectrum, const Scenario &scenario);

std::string to_json(const EstimateReport &report);

/// CSV with columns theta_deg,E.
void write_matched_filter_csv(std::ostream &out, const MatchedFilterCurve &curve);

} // namespace thzssh
