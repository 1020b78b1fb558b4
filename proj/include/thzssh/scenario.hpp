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

#include "thzssh/channel.hpp"
#include "thzssh/grid.hpp"

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thzssh {

enum class TxMode { single, pair };

const char *to_string(TxMode mode);
TxMode tx_mode_from_string(std::string_view name);

/// One propagation path. Only excess lengths relative to the first path matter, so the
/// first path carries excess_length_m = 0.
struct Path {
    double theta_deg = 90.0;
    double excess_length_m = 0.0;
    double gain_linear = 1.0; // field amplitude; power in dB is 20 log10(gain)
    double aod_deg = 90.0;    // departure angle, read only in tx_mode pair

    bool operator==(const Path &) const = default;
};

struct Scenario {
    double d_m = 5e-3;
    FrequencyGrid grid = FrequencyGrid::standard();
    std::vector<Path> paths;
    TxMode tx_mode = TxMode::single;
    double tx_delay_factor = 3.0;
    ChannelProfile channel = ChannelProfile::dry(100.0);
    std::optional<double> snr_db; // empty: noise-free
    std::uint64_t seed = 0;

    void validate() const;

    bool noise_free() const { return !snr_db.has_value(); }

    bool operator==(const Scenario &) const = default;
};

/// Antenna gaps covered by the experiments.
inline constexpr double supported_gaps_m[] = {0.5e-3, 1e-3, 5e-3, 10e-3};

Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path &path);
std::string dump_scenario(const Scenario &scenario);
void save_scenario(const Scenario &scenario, const std::filesystem::path &path);

/// Spacing used when path-length differences have to be resolved.
inline constexpr double distance_grid_spacing_hz = 0.15e9;
/// Excess length above which the standard 1.5 GHz grid would alias.
inline constexpr double distance_refine_threshold_m = 0.09;

/// Returns the scenario with its grid refined to 0.15 GHz spacing when any path's
/// excess length exceeds 0.09 m and the current spacing is coarser.
Scenario refine_grid_for_distances(Scenario scenario);

/// "Spectrum of the spectrum": magnitude of the transform of a power spectrum versus lag.
struct ZetaSpectrum {
    std::vector<double> zeta_s;                   // uniform, from 0 to 1/(2 df)
    std::vector<double> magnitude;                // |values|
    std::vector<std::complex<double>> values;     // complex transform, same length
    std::size_t source_samples = 0;               // un-padded length of the transformed spectrum
    double source_spacing_hz = 0.0;               // df of the transformed spectrum
    double amplitude_scale = 1.0;                 // magnitude of a unit-amplitude cosine tone

    std::size_t size() const { return zeta_s.size(); }
    double lag_step() const { return zeta_s.size() > 1 ? zeta_s[1] - zeta_s[0] : 0.0; }
    /// Width of one un-padded bin, 1/(M df).
    double native_bin_width() const {
        return 1.0 / (static_cast<double>(source_samples) * source_spacing_hz);
    }
    /// Lag axis as distance c * zeta [m].
    std::vector<double> distance_m() const;
};

} // namespace thzssh
