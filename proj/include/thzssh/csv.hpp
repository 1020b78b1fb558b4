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

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace thzssh::csv {

/// Shortest decimal representation that round-trips the double exactly.
std::string format_number(double value);

/// Comma-separated writer: header first, then rows of numbers or strings.
class Writer {
public:
    Writer(std::ostream &out, std::initializer_list<std::string_view> header);
    Writer(std::ostream &out, const std::vector<std::string> &header);

    Writer &cell(double value);
    Writer &cell(std::string_view text);
    void end_row();

private:
    std::ostream &out_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

/// Splits `text` into trimmed lines, dropping empty lines and `#` comments.
std::vector<std::string> data_lines(std::string_view text);
std::vector<std::string> split_fields(std::string_view line);
double parse_double(std::string_view field);

} // namespace thzssh::csv
