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

#include <ostream>

namespace thzssh::cli {

enum exit_code : int { ok = 0, io_failure = 1, usage = 2, invalid_input = 3, numeric_failure = 4 };

/// Entry point of the command-line tool, with streams injectable for tests.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace thzssh::cli
