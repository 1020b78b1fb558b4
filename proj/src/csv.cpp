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

#include "thzssh/csv.hpp"

#include "thzssh/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace thzssh::csv {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

} // namespace

std::string format_number(double value) {
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{})
        throw std::runtime_error("csv: cannot format number");
    return {buf.data(), end};
}

Writer::Writer(std::ostream &out, std::initializer_list<std::string_view> header)
    : out_(out), columns_(header.size()) {
    bool first = true;
    for (auto h : header) {
        if (!first)
            out_ << ',';
        out_ << h;
        first = false;
    }
    out_ << '\n';
}

Writer::Writer(std::ostream &out, const std::vector<std::string> &header)
    : out_(out), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i)
        out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

Writer &Writer::cell(double value) { return cell(std::string_view(format_number(value))); }

Writer &Writer::cell(std::string_view text) {
    if (filled_ == columns_)
        throw std::logic_error("csv: too many cells in row");
    if (filled_)
        out_ << ',';
    out_ << text;
    ++filled_;
    return *this;
}

void Writer::end_row() {
    if (filled_ != columns_)
        throw std::logic_error("csv: row has wrong number of cells");
    out_ << '\n';
    filled_ = 0;
}

std::vector<std::string> data_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto next = text.find('\n', pos);
        if (next == std::string_view::npos)
            next = text.size();
        auto line = trim(text.substr(pos, next - pos));
        if (!line.empty() && line.front() != '#')
            lines.emplace_back(line);
        pos = next + 1;
    }
    return lines;
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
        auto next = line.find(',', pos);
        fields.emplace_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
        if (next == std::string_view::npos)
            break;
        pos = next + 1;
    }
    return fields;
}

double parse_double(std::string_view field) {
    field = trim(field);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw parse_error("csv: not a number: '" + std::string(field) + "'");
    return value;
}

} // namespace thzssh::csv
