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

#include <stdexcept>
#include <string>

namespace thzssh {

/// Malformed input file (JSON/CSV syntax, missing keys, wrong types).
class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed input violating a domain invariant. The message names the invariant.
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Failure of a numerical routine (singular systems, non-finite results, aborted Monte Carlo).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class estimation_failure {
    no_peak,
    out_of_range,
    harmonic_count_mismatch,
    inconsistent_lags,
    model_order_too_large,
    path_count_mismatch,
    wrong_tx_mode,
};

const char *to_string(estimation_failure kind);

/// Raised by the estimators when the observation does not support an estimate.
class estimation_error : public std::runtime_error {
public:
    estimation_error(estimation_failure kind, const std::string &what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    estimation_failure kind() const noexcept { return kind_; }

private:
    estimation_failure kind_;
};

} // namespace thzssh
