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

#include "thzssh/scenario.hpp"

#include "thzssh/constants.hpp"
#include "thzssh/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace thzssh {

using json = nlohmann::ordered_json;

const char *to_string(TxMode mode) { return mode == TxMode::pair ? "pair" : "single"; }

TxMode tx_mode_from_string(std::string_view name) {
    if (name == "single")
        return TxMode::single;
    if (name == "pair")
        return TxMode::pair;
    throw validation_error("tx_mode must be 'single' or 'pair', got '" + std::string(name) + "'");
}

void Scenario::validate() const {
    if (!std::isfinite(d_m) || !(d_m > 0.0))
        throw validation_error("d_m must be > 0");
    grid.validate();
    if (paths.empty())
        throw validation_error("at least one path is required");
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto &p = paths[i];
        if (!std::isfinite(p.theta_deg) || p.theta_deg < 0.0 || p.theta_deg > 180.0)
            throw validation_error("theta out of [0,180] (path " + std::to_string(i) + ")");
        if (!std::isfinite(p.excess_length_m) || p.excess_length_m < 0.0)
            throw validation_error("excess_length_m must be >= 0 (path " + std::to_string(i) + ")");
        if (!std::isfinite(p.gain_linear) || !(p.gain_linear > 0.0))
            throw validation_error("gain_linear must be > 0 (path " + std::to_string(i) + ")");
        if (!std::isfinite(p.aod_deg) || p.aod_deg < 0.0 || p.aod_deg > 180.0)
            throw validation_error("aod out of [0,180] (path " + std::to_string(i) + ")");
    }
    if (paths.front().excess_length_m != 0.0)
        throw validation_error("first path must have excess_length_m = 0");
    if (tx_mode == TxMode::pair) {
        if (paths.size() != 1)
            throw validation_error("tx_mode pair requires exactly one path");
        if (tx_delay_factor != 3.0)
            throw validation_error("tx_delay_factor must be 3 for tx_mode pair");
    }
    channel.validate();
    if (channel.kind == ChannelKind::tabulated &&
        (channel.table.front().f_hz > grid.f_start_hz || channel.table.back().f_hz < grid.f_stop_hz))
        throw validation_error("channel: tabulated profile does not cover the scenario grid");
    if (snr_db && !std::isfinite(*snr_db))
        throw validation_error("snr_db must be finite (use null for noise-free)");
}

namespace {

template <typename T>
T require(const json &j, const char *key) {
    if (!j.contains(key))
        throw parse_error(std::string("scenario: missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw parse_error(std::string("scenario: bad value for '") + key + "': " + e.what());
    }
}

template <typename T>
T optional_value(const json &j, const char *key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null())
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw parse_error(std::string("scenario: bad value for '") + key + "': " + e.what());
    }
}

Scenario from_json(const json &j, const std::filesystem::path &base_dir) {
    if (!j.is_object())
        throw parse_error("scenario: top level must be an object");
    Scenario s;
    s.d_m = require<double>(j, "d_m");

    if (j.contains("grid")) {
        const auto &g = j.at("grid");
        s.grid.f_start_hz = require<double>(g, "f_start_hz");
        s.grid.f_stop_hz = require<double>(g, "f_stop_hz");
        const auto n = require<std::int64_t>(g, "n_samples");
        if (n < 0)
            throw validation_error("grid: n_samples must be >= 2");
        s.grid.n_samples = static_cast<std::size_t>(n);
    }

    s.tx_mode = tx_mode_from_string(optional_value<std::string>(j, "tx_mode", "single"));
    s.tx_delay_factor = optional_value<double>(j, "tx_delay_factor", 3.0);

    if (!j.contains("paths") || !j.at("paths").is_array())
        throw parse_error("scenario: 'paths' must be an array");
    for (const auto &pj : j.at("paths")) {
        Path p;
        p.theta_deg = require<double>(pj, "theta_deg");
        p.excess_length_m = optional_value<double>(pj, "excess_length_m", 0.0);
        p.gain_linear = optional_value<double>(pj, "gain_linear", 1.0);
        p.aod_deg = optional_value<double>(pj, "aod_deg", 90.0);
        s.paths.push_back(p);
    }

    if (j.contains("channel")) {
        const auto &c = j.at("channel");
        auto &ch = s.channel;
        ch.kind = channel_kind_from_string(optional_value<std::string>(c, "kind", "dry"));
        ch.water_vapor_g_m3 =
            optional_value<double>(c, "water_vapor_g_m3", ch.kind == ChannelKind::humid ? 10.0 : 0.0);
        ch.range_m = optional_value<double>(c, "range_m", 100.0);
        ch.temperature_k = optional_value<double>(c, "temperature_k", 288.15);
        ch.pressure_hpa = optional_value<double>(c, "pressure_hpa", 1013.25);
        if (c.contains("table")) {
            for (const auto &row : c.at("table")) {
                if (!row.is_array() || row.size() != 2)
                    throw parse_error("scenario: channel.table rows must be [f_hz, gamma_db_per_km]");
                ch.table.push_back({row[0].get<double>(), row[1].get<double>()});
            }
        } else if (c.contains("table_csv")) {
            auto path = std::filesystem::path(c.at("table_csv").get<std::string>());
            if (path.is_relative())
                path = base_dir / path;
            ch.table = load_attenuation_table(path);
        }
    }

    if (j.contains("snr_db") && !j.at("snr_db").is_null())
        s.snr_db = require<double>(j, "snr_db");
    s.seed = optional_value<std::uint64_t>(j, "seed", 0);
    return s;
}

json to_json(const Scenario &s) {
    json j;
    j["d_m"] = s.d_m;
    j["grid"] = {{"f_start_hz", s.grid.f_start_hz},
                 {"f_stop_hz", s.grid.f_stop_hz},
                 {"n_samples", s.grid.n_samples}};
    j["tx_mode"] = to_string(s.tx_mode);
    if (s.tx_mode == TxMode::pair)
        j["tx_delay_factor"] = s.tx_delay_factor;
    j["paths"] = json::array();
    for (const auto &p : s.paths) {
        json pj = {{"theta_deg", p.theta_deg}, {"excess_length_m", p.excess_length_m}, {"gain_linear", p.gain_linear}};
        if (s.tx_mode == TxMode::pair)
            pj["aod_deg"] = p.aod_deg;
        j["paths"].push_back(pj);
    }
    json c;
    c["kind"] = to_string(s.channel.kind);
    c["water_vapor_g_m3"] = s.channel.water_vapor_g_m3;
    c["range_m"] = s.channel.range_m;
    c["temperature_k"] = s.channel.temperature_k;
    c["pressure_hpa"] = s.channel.pressure_hpa;
    if (s.channel.kind == ChannelKind::tabulated) {
        c["table"] = json::array();
        for (const auto &row : s.channel.table)
            c["table"].push_back({row.f_hz, row.gamma_db_per_km});
    }
    j["channel"] = c;
    j["snr_db"] = s.snr_db ? json(*s.snr_db) : json(nullptr);
    j["seed"] = s.seed;
    return j;
}

Scenario parse_with_base(std::string_view text, const std::filesystem::path &base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw parse_error(std::string("scenario: malformed JSON: ") + e.what());
    }
    auto s = from_json(j, base_dir);
    s.validate();
    return s;
}

} // namespace

Scenario parse_scenario(std::string_view json_text) { return parse_with_base(json_text, "."); }

Scenario load_scenario(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("scenario: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_with_base(ss.str(), path.parent_path());
}

std::string dump_scenario(const Scenario &scenario) { return to_json(scenario).dump(2) + "\n"; }

void save_scenario(const Scenario &scenario, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("scenario: cannot write " + path.string());
    out << dump_scenario(scenario);
}

Scenario refine_grid_for_distances(Scenario scenario) {
    double max_excess = 0.0;
    for (const auto &p : scenario.paths)
        max_excess = std::max(max_excess, p.excess_length_m);
    if (max_excess > distance_refine_threshold_m &&
        scenario.grid.spacing() > distance_grid_spacing_hz * (1.0 + 1e-9))
        scenario.grid = FrequencyGrid::with_spacing(scenario.grid.f_start_hz, scenario.grid.f_stop_hz,
                                                    distance_grid_spacing_hz);
    return scenario;
}

std::vector<double> ZetaSpectrum::distance_m() const {
    std::vector<double> d(zeta_s.size());
    std::transform(zeta_s.begin(), zeta_s.end(), d.begin(), [](double z) { return z * speed_of_light; });
    return d;
}

} // namespace thzssh
