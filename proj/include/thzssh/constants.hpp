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

#include <cmath>
#include <numbers>

namespace thzssh {

/// Speed of light in vacuum [m/s], exact by SI definition.
inline constexpr double speed_of_light = 299792458.0;

inline constexpr double pi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / pi; }

/// Amplitude (field) ratio to dB.
inline double amplitude_to_db(double gain) { return 20.0 * std::log10(gain); }
inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

/// Power ratio to dB.
inline double power_to_db(double p) { return 10.0 * std::log10(p); }
inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }

} // namespace thzssh
