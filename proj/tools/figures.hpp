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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace thzssh::cli {

struct ExperimentSpec {
    std::string figure_id;
    std::string overrides_json = "{}"; // partial scenario merged over the figure's base scenario
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed; // replaces the scenario seed when set
    std::size_t jobs = 0;
    std::optional<std::size_t> trials; // Monte Carlo trials per point, default 1000
};

const std::vector<std::string> &figure_ids();

/// Writes the figure's CSVs, one sidecar manifest per CSV and a run manifest.json into
/// out_dir. Returns the CSV paths.
std::vector<std::filesystem::path> run_figure(const ExperimentSpec &spec);

} // namespace thzssh::cli
