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

#include "thzssh/channel.hpp"
#include "thzssh/csv.hpp"
#include "thzssh/errors.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace thzssh;
using Catch::Approx;

namespace {

struct GasRow {
    double f_hz, vapor, gamma_o, gamma_w;
};

// Frozen output of tests/oracles/gen_gas_reference.py.
std::vector<GasRow> gas_reference() {
    std::ifstream in(std::string(THZSSH_TEST_DATA_DIR) + "/oracles/gas_reference.csv");
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    std::vector<GasRow> rows;
    const auto lines = csv::data_lines(ss.str());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = csv::split_fields(lines[i]);
        rows.push_back({csv::parse_double(f[0]), csv::parse_double(f[1]), csv::parse_double(f[2]),
                        csv::parse_double(f[3])});
    }
    return rows;
}

} // namespace

TEST_CASE("specific attenuation follows the line-by-line reference", "[channel]") {
    const auto rows = gas_reference();
    REQUIRE(rows.size() == 28);
    for (const auto &r : rows) {
        const auto profile = r.vapor > 0.0 ? ChannelProfile::humid(100.0, r.vapor) : ChannelProfile::dry(100.0);
        const double expected = r.gamma_o + r.gamma_w;
        INFO("f = " << r.f_hz << " Hz, vapor = " << r.vapor);
        CHECK(specific_attenuation(r.f_hz, profile) == Approx(expected).epsilon(0.02).margin(2e-3));
    }
}

TEST_CASE("oxygen line at 118.75 GHz", "[channel]") {
    CHECK(specific_attenuation(118.75e9, ChannelProfile::dry(1.0)) == Approx(1.348).epsilon(0.01));
}

TEST_CASE("channel response is 10^(-gamma R / 20)", "[channel]") {
    const auto grid = FrequencyGrid::make(0.2e12, 0.8e12, 31);
    const auto profile = ChannelProfile::humid(250.0, 7.5);
    const auto a = channel_response(grid, profile);
    REQUIRE(a.size() == grid.n_samples);
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double gamma = specific_attenuation(grid.frequency(k), profile);
        CHECK(a[k] == Approx(std::pow(10.0, -gamma * 0.25 / 20.0)).epsilon(1e-12));
        CHECK(a[k] > 0.0);
        CHECK(a[k] <= 1.0);
    }
}

TEST_CASE("attenuation grows with range and humidity", "[channel]") {
    const auto grid = FrequencyGrid::standard();
    const auto near = channel_response(grid, ChannelProfile::humid(10.0));
    const auto far = channel_response(grid, ChannelProfile::humid(1000.0));
    const auto dry = channel_response(grid, ChannelProfile::dry(1000.0));
    for (std::size_t k = 0; k < grid.n_samples; ++k) {
        CHECK(far[k] <= near[k]);
        CHECK(far[k] <= dry[k]);
    }
}

TEST_CASE("extreme attenuation stays positive", "[channel]") {
    const auto grid = FrequencyGrid::make(0.55e12, 0.56e12, 11);
    for (double v : channel_response(grid, ChannelProfile::humid(1e5, 30.0)))
        CHECK(v > 0.0);
}

TEST_CASE("tabulated profile interpolates linearly", "[channel]") {
    const auto p = ChannelProfile::tabulated(1000.0, {{0.1e12, 1.0}, {1.0e12, 10.0}});
    CHECK(specific_attenuation(0.55e12, p) == Approx(5.5));
    CHECK_THROWS_AS(specific_attenuation(1.1e12, p), validation_error);
    const auto flat = channel_response(FrequencyGrid::standard(), ChannelProfile::flat());
    for (double v : flat)
        CHECK(v == 1.0);
}

TEST_CASE("attenuation table CSV parsing", "[channel]") {
    const auto t = parse_attenuation_table("f_hz,gamma_db_per_km\n1e11,0.5\n1e12,2\n");
    REQUIRE(t.size() == 2);
    CHECK(t[1].f_hz == 1e12);
    CHECK(t[1].gamma_db_per_km == 2.0);
    CHECK_THROWS_AS(parse_attenuation_table("1e11,0.5,3\n"), parse_error);
}

TEST_CASE("channel validation", "[channel]") {
    CHECK_THROWS_AS(ChannelProfile::dry(0.0).validate(), validation_error);
    CHECK_THROWS_AS(ChannelProfile::humid(100.0, -1.0).validate(), validation_error);
    CHECK_THROWS_AS(ChannelProfile::tabulated(100.0, {}).validate(), validation_error);
    CHECK_THROWS_AS(ChannelProfile::tabulated(100.0, {{2e11, 1.0}, {1e11, 1.0}}).validate(), validation_error);
    CHECK_THROWS_AS(specific_attenuation(2e12, ChannelProfile::dry(1.0)), validation_error);
    CHECK_THROWS_AS(channel_kind_from_string("wet"), validation_error);
}

TEST_CASE("builtin line catalogue is versioned", "[channel]") {
    const auto &cat = LineCatalog::builtin();
    CHECK(cat.version > 0);
    CHECK(cat.lines.size() > 40);
    CHECK_THROWS_AS(LineCatalog::parse_csv("nonsense\n"), parse_error);
}
