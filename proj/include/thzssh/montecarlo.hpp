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

#include <cstddef>
#include <string>
#include <string_view>

namespace thzssh {

enum class EstimatorKind {
    ssh_peak, // estimate_doa_single
    ssh_mmse, // grid search over single-path templates with the channel known
    aod_doa,  // estimate_aod_doa, DoA and AoD errors
    ula_mmse, // grid search on a half-wavelength ULA snapshot
    la_mmse   // grid search on a lens-array snapshot
};

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::ssh_mmse;
    std::size_t elements = 0;   // array size for ula_mmse and la_mmse
    double grid_step_deg = 0.1; // template grid for the grid-search estimators

    /// "ssh_peak", "ssh_mmse", "aod_doa", "ula_mmse:<N>", "la_mmse:<M>".
    static EstimatorSpec parse(std::string_view text);
    std::string name() const;
};

struct RmseResult {
    double rmse_deg = 0.0;
    double stderr_deg = 0.0;
    double rmse_aod_deg = 0.0; // aod_doa only
    double stderr_aod_deg = 0.0;
    std::size_t trials = 0;
    std::size_t failures = 0;
};

/// Monte Carlo RMSE of one estimator at the scenario's first path. Trial t draws its noise
/// from derive_seed(scenario.seed, t); results do not depend on `jobs` (0: all cores).
RmseResult rmse_monte_carlo(const Scenario &scenario, const EstimatorSpec &estimator, std::size_t trials,
                            std::size_t jobs = 0);

} // namespace thzssh
