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

#include "thzssh/errors.hpp"

namespace thzssh {

const char *to_string(estimation_failure kind) {
    switch (kind) {
    case estimation_failure::no_peak: return "NoPeak";
    case estimation_failure::out_of_range: return "OutOfRange";
    case estimation_failure::harmonic_count_mismatch: return "HarmonicCountMismatch";
    case estimation_failure::inconsistent_lags: return "InconsistentLags";
    case estimation_failure::model_order_too_large: return "ModelOrderTooLarge";
    case estimation_failure::path_count_mismatch: return "PathCountMismatch";
    case estimation_failure::wrong_tx_mode: return "WrongTxMode";
    }
    return "Unknown";
}

} // namespace thzssh
