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

#include <cstddef>
#include <vector>

namespace thzssh {

/// Uniform sampling of the measured band, as delivered by one THz-TDS shot.
struct FrequencyGrid {
    double f_start_hz = 0.1e12;
    double f_stop_hz = 1.0e12;
    std::size_t n_samples = 600;

    /// Validating constructor.
    static FrequencyGrid make(double f_start_hz, double f_stop_hz, std::size_t n_samples);

    /// Grid over [f_start, f_stop] whose spacing is as close as possible to `spacing_hz`.
    static FrequencyGrid with_spacing(double f_start_hz, double f_stop_hz, double spacing_hz);

    /// 0.1-1 THz with 600 samples (the 1.5 GHz THz-TDS resolution).
    static FrequencyGrid standard() { return {}; }

    double spacing() const { return (f_stop_hz - f_start_hz) / static_cast<double>(n_samples - 1); }
    double bandwidth() const { return f_stop_hz - f_start_hz; }
    double frequency(std::size_t k) const {
        return f_start_hz + static_cast<double>(k) * spacing();
    }
    std::vector<double> frequencies() const;

    /// Throws validation_error naming the violated invariant.
    void validate() const;

    bool operator==(const FrequencyGrid &) const = default;
};

/// Largest unambiguous lag of the spectrum-of-spectrum, 1/(2 df) [s].
double nyquist_lag(const FrequencyGrid &grid);

/// nyquist_lag expressed as a path-length difference, c/(2 df) [m].
double nyquist_distance(const FrequencyGrid &grid);

} // namespace thzssh
