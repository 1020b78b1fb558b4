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

#include "thzssh/grid.hpp"

#include <filesystem>
#include <string_view>
#include <vector>

namespace thzssh {

enum class ChannelKind { dry, humid, tabulated };

const char *to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(std::string_view name);

struct AttenuationSample {
    double f_hz;
    double gamma_db_per_km;

    bool operator==(const AttenuationSample &) const = default;
};

/// Atmospheric state along a path. Free-space spreading is not part of the profile;
/// it is absorbed into the per-antenna SNR.
struct ChannelProfile {
    ChannelKind kind = ChannelKind::dry;
    double water_vapor_g_m3 = 0.0;
    double range_m = 100.0;
    double temperature_k = 288.15;
    double pressure_hpa = 1013.25; // dry-air partial pressure
    std::vector<AttenuationSample> table; // only for ChannelKind::tabulated, sorted by frequency

    static ChannelProfile dry(double range_m);
    static ChannelProfile humid(double range_m, double water_vapor_g_m3 = 10.0);
    static ChannelProfile tabulated(double range_m, std::vector<AttenuationSample> table);
    /// Lossless channel: a zero-attenuation table covering every frequency.
    static ChannelProfile flat(double range_m = 100.0);

    void validate() const;

    bool operator==(const ChannelProfile &) const = default;
};

enum class GasSpecies { oxygen, water_vapour };

/// One resonance of the line catalogue. The six coefficients follow the usual
/// line-by-line parameterisation (strength, its temperature exponent, pressure
/// width, its temperature exponent and two species-specific extras).
struct SpectralLine {
    GasSpecies species;
    double center_hz;
    double strength;
    double strength_temp;
    double width;
    double width_temp;
    double aux1;
    double aux2;
};

struct LineCatalog {
    int version = 0;
    std::vector<SpectralLine> lines;

    /// Catalogue compiled in from data/gas_lines.csv.
    static const LineCatalog &builtin();
    static LineCatalog parse_csv(std::string_view text);
    static LineCatalog load(const std::filesystem::path &path);
};

/// Valid frequency range of the line model.
inline constexpr double attenuation_model_f_min_hz = 0.05e12;
inline constexpr double attenuation_model_f_max_hz = 1.1e12;

/// Specific attenuation gamma(f) in dB/km for the given atmosphere.
double specific_attenuation(double f_hz, const ChannelProfile &profile,
                            const LineCatalog &catalog = LineCatalog::builtin());

/// |a(f_k)| = 10^(-gamma(f_k) * range_km / 20) on every grid point. Values that would
/// underflow are clamped to the smallest normal double so the response stays in (0, 1].
std::vector<double> channel_response(const FrequencyGrid &grid, const ChannelProfile &profile,
                                     const LineCatalog &catalog = LineCatalog::builtin());

/// Tabulated profile CSV: header `f_hz,gamma_db_per_km`, one sample per row.
std::vector<AttenuationSample> load_attenuation_table(const std::filesystem::path &path);
std::vector<AttenuationSample> parse_attenuation_table(std::string_view text);

} // namespace thzssh
