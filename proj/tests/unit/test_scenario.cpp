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
#include "thzssh/scenario.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

using namespace thzssh;
using Catch::Approx;

namespace {

std::string with_paths(const std::string &paths, const std::string &extra = "") {
    return R"({"d_m": 0.005, "paths": )" + paths + extra + "}";
}

void check_rejects(const std::string &json, const std::string &fragment) {
    try {
        parse_scenario(json);
        FAIL("accepted: " << json);
    } catch (const validation_error &e) {
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring(fragment));
    }
}

} // namespace

TEST_CASE("scenario JSON round-trips bit-exactly", "[scenario]") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> angle(0.0, 180.0), len(0.0, 3.0), gain(0.01, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        Scenario s;
        s.d_m = supported_gaps_m[trial % 4];
        s.grid = FrequencyGrid::make(0.1e12 + len(rng) * 1e10, 1.0e12 - len(rng) * 1e10, 600 + trial);
        s.paths.push_back({angle(rng), 0.0, gain(rng)});
        for (int k = 0; k < trial % 3; ++k)
            s.paths.push_back({angle(rng), len(rng), gain(rng)});
        if (trial % 5 == 0) {
            s.tx_mode = TxMode::pair;
            s.paths.resize(1);
            s.paths.front().aod_deg = angle(rng);
        }
        s.channel = trial % 2 ? ChannelProfile::humid(10.0 + len(rng) * 500.0, len(rng) * 5.0)
                              : ChannelProfile::dry(1.0 + len(rng));
        if (trial % 3)
            s.snr_db = len(rng) * 10.0 - 10.0;
        s.seed = rng();
        CHECK(parse_scenario(dump_scenario(s)) == s);
    }
}

TEST_CASE("scenario file save and load", "[scenario]") {
    const auto path = std::filesystem::temp_directory_path() / "thzssh_scenario_roundtrip.json";
    const auto s = load_scenario(std::string(THZSSH_SCENARIO_DIR) + "/two_path.json");
    save_scenario(s, path);
    CHECK(load_scenario(path) == s);
    std::filesystem::remove(path);
    CHECK(20.0 * std::log10(s.paths[1].gain_linear) == Approx(-6.0).margin(1e-9));
}

TEST_CASE("defaults", "[scenario]") {
    const auto s = parse_scenario(with_paths(R"([{"theta_deg": 45}])"));
    CHECK(s.grid == FrequencyGrid::standard());
    CHECK(s.noise_free());
    CHECK(s.tx_mode == TxMode::single);
    CHECK(s.channel.kind == ChannelKind::dry);
    CHECK(s.channel.range_m == 100.0);
    CHECK(s.paths[0].gain_linear == 1.0);
}

TEST_CASE("invalid scenarios name the broken invariant", "[scenario]") {
    check_rejects(with_paths(R"([{"theta_deg": 181}])"), "theta out of [0,180]");
    check_rejects(with_paths(R"([{"theta_deg": -1}])"), "theta out of [0,180]");
    check_rejects(with_paths(R"([{"theta_deg": 60, "excess_length_m": 0.1}])"), "first path");
    check_rejects(with_paths(R"([{"theta_deg": 60}, {"theta_deg": 80, "excess_length_m": -1}])"), "excess_length_m");
    check_rejects(with_paths(R"([{"theta_deg": 60, "gain_linear": 0}])"), "gain_linear");
    check_rejects(with_paths("[]"), "at least one path");
    check_rejects(R"({"d_m": 0, "paths": [{"theta_deg": 60}]})", "d_m");
    check_rejects(with_paths(R"([{"theta_deg": 60}, {"theta_deg": 70, "excess_length_m": 1}])", R"(, "tx_mode": "pair")"),
                  "exactly one path");
    check_rejects(with_paths(R"([{"theta_deg": 60}])", R"(, "tx_mode": "pair", "tx_delay_factor": 2)"),
                  "tx_delay_factor");
    check_rejects(with_paths(R"([{"theta_deg": 60}])", R"(, "tx_mode": "triple")"), "tx_mode");
    check_rejects(with_paths(R"([{"theta_deg": 60}])", R"(, "grid": {"f_start_hz": 1e12, "f_stop_hz": 1e11, "n_samples": 600})"),
                  "grid");
    check_rejects(with_paths(R"([{"theta_deg": 60}])", R"(, "channel": {"kind": "dry", "water_vapor_g_m3": 3})"),
                  "dry");
}

TEST_CASE("malformed JSON is a parse error", "[scenario]") {
    CHECK_THROWS_AS(parse_scenario("{"), parse_error);
    CHECK_THROWS_AS(parse_scenario("[]"), parse_error);
    CHECK_THROWS_AS(parse_scenario(R"({"paths": [{"theta_deg": 60}]})"), parse_error);
    CHECK_THROWS_AS(parse_scenario(with_paths(R"([{"theta_deg": "sixty"}])")), parse_error);
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), parse_error);
}

TEST_CASE("grid spacing and alias limit", "[scenario]") {
    const auto g = FrequencyGrid::make(0.1e12, 1.0e12, 601);
    CHECK(g.spacing() == Approx(1.5e9));
    CHECK(nyquist_lag(g) == Approx(1.0 / 3.0e9).epsilon(1e-12));
    CHECK(nyquist_distance(g) == Approx(299792458.0 / 3.0e9).epsilon(1e-12));
    CHECK(FrequencyGrid::standard().n_samples == 600);
    CHECK_THROWS_AS(FrequencyGrid::make(0.1e12, 1.0e12, 1), validation_error);
}

TEST_CASE("grid refinement for long excess paths", "[scenario]") {
    auto s = parse_scenario(with_paths(R"([{"theta_deg": 60}, {"theta_deg": 100, "excess_length_m": 0.5}])"));
    const auto r = refine_grid_for_distances(s);
    CHECK(r.grid.spacing() == Approx(0.15e9).epsilon(1e-3));
    CHECK(r.grid.f_start_hz == s.grid.f_start_hz);
    CHECK(r.grid.f_stop_hz == s.grid.f_stop_hz);
    CHECK(nyquist_distance(r.grid) > 0.5);

    auto short_path = parse_scenario(with_paths(R"([{"theta_deg": 60}, {"theta_deg": 100, "excess_length_m": 0.05}])"));
    CHECK(refine_grid_for_distances(short_path).grid == short_path.grid);
}
