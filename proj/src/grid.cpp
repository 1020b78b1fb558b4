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

#include "thzssh/grid.hpp"

#include "thzssh/constants.hpp"
#include "thzssh/errors.hpp"

#include <cmath>

namespace thzssh {

FrequencyGrid FrequencyGrid::make(double f_start_hz, double f_stop_hz, std::size_t n_samples) {
    FrequencyGrid grid{f_start_hz, f_stop_hz, n_samples};
    grid.validate();
    return grid;
}

FrequencyGrid FrequencyGrid::with_spacing(double f_start_hz, double f_stop_hz, double spacing_hz) {
    if (!(spacing_hz > 0.0))
        throw validation_error("grid spacing must be > 0");
    const auto intervals = std::llround((f_stop_hz - f_start_hz) / spacing_hz);
    return make(f_start_hz, f_stop_hz, static_cast<std::size_t>(std::max(1LL, intervals)) + 1);
}

std::vector<double> FrequencyGrid::frequencies() const {
    std::vector<double> f(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k)
        f[k] = frequency(k);
    return f;
}

void FrequencyGrid::validate() const {
    if (!std::isfinite(f_start_hz) || !(f_start_hz > 0.0))
        throw validation_error("grid: f_start_hz must be > 0");
    if (!std::isfinite(f_stop_hz) || !(f_stop_hz > f_start_hz))
        throw validation_error("grid: f_stop_hz must be > f_start_hz");
    if (n_samples < 2)
        throw validation_error("grid: n_samples must be >= 2");
    if (!(spacing() > 0.0))
        throw validation_error("grid: spacing must be > 0");
}

double nyquist_lag(const FrequencyGrid &grid) { return 1.0 / (2.0 * grid.spacing()); }

double nyquist_distance(const FrequencyGrid &grid) { return speed_of_light * nyquist_lag(grid); }

} // namespace thzssh
