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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace thzssh {

namespace detail {
extern const std::string_view builtin_gas_lines_csv;
}

const char *to_string(ChannelKind kind) {
    switch (kind) {
    case ChannelKind::dry: return "dry";
    case ChannelKind::humid: return "humid";
    case ChannelKind::tabulated: return "tabulated";
    }
    return "dry";
}

ChannelKind channel_kind_from_string(std::string_view name) {
    if (name == "dry")
        return ChannelKind::dry;
    if (name == "humid")
        return ChannelKind::humid;
    if (name == "tabulated")
        return ChannelKind::tabulated;
    throw validation_error("channel: unknown kind '" + std::string(name) + "'");
}

ChannelProfile ChannelProfile::dry(double range_m) {
    ChannelProfile p;
    p.kind = ChannelKind::dry;
    p.range_m = range_m;
    return p;
}

ChannelProfile ChannelProfile::humid(double range_m, double water_vapor_g_m3) {
    ChannelProfile p;
    p.kind = ChannelKind::humid;
    p.range_m = range_m;
    p.water_vapor_g_m3 = water_vapor_g_m3;
    return p;
}

ChannelProfile ChannelProfile::tabulated(double range_m, std::vector<AttenuationSample> table) {
    ChannelProfile p;
    p.kind = ChannelKind::tabulated;
    p.range_m = range_m;
    p.table = std::move(table);
    return p;
}

ChannelProfile ChannelProfile::flat(double range_m) {
    return tabulated(range_m, {{0.0, 0.0}, {std::numeric_limits<double>::max(), 0.0}});
}

void ChannelProfile::validate() const {
    if (!std::isfinite(range_m) || !(range_m > 0.0))
        throw validation_error("channel: range_m must be > 0");
    if (!std::isfinite(water_vapor_g_m3) || water_vapor_g_m3 < 0.0)
        throw validation_error("channel: water_vapor_g_m3 must be >= 0");
    if (kind == ChannelKind::dry && water_vapor_g_m3 != 0.0)
        throw validation_error("channel: dry channel requires water_vapor_g_m3 = 0");
    if (!(temperature_k > 0.0) || !std::isfinite(temperature_k))
        throw validation_error("channel: temperature_k must be > 0");
    if (!(pressure_hpa > 0.0) || !std::isfinite(pressure_hpa))
        throw validation_error("channel: pressure_hpa must be > 0");
    if (kind == ChannelKind::tabulated) {
        if (table.empty())
            throw validation_error("channel: tabulated channel requires a non-empty table");
        for (std::size_t i = 0; i < table.size(); ++i) {
            if (!std::isfinite(table[i].gamma_db_per_km) || table[i].gamma_db_per_km < 0.0)
                throw validation_error("channel: table attenuation must be finite and >= 0");
            if (i > 0 && !(table[i].f_hz > table[i - 1].f_hz))
                throw validation_error("channel: table must be sorted by frequency");
        }
    }
}

// ---------------------------------------------------------------------------
// Line catalogue

LineCatalog LineCatalog::parse_csv(std::string_view text) {
    LineCatalog catalog;
    // The version lives in a comment line "# version,<n>".
    const auto tag = text.find("# version,");
    if (tag != std::string_view::npos) {
        const auto eol = text.find('\n', tag);
        const auto field = text.substr(tag + 10, eol == std::string_view::npos ? eol : eol - tag - 10);
        catalog.version = static_cast<int>(csv::parse_double(field));
    }

    const auto lines = csv::data_lines(text);
    if (lines.empty() || csv::split_fields(lines.front()).at(0) != "species")
        throw parse_error("line catalogue: missing header row");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = csv::split_fields(lines[i]);
        if (f.size() != 8)
            throw parse_error("line catalogue: expected 8 fields in row " + std::to_string(i));
        SpectralLine line{};
        if (f[0] == "o2")
            line.species = GasSpecies::oxygen;
        else if (f[0] == "h2o")
            line.species = GasSpecies::water_vapour;
        else
            throw parse_error("line catalogue: unknown species '" + f[0] + "'");
        line.center_hz = csv::parse_double(f[1]);
        line.strength = csv::parse_double(f[2]);
        line.strength_temp = csv::parse_double(f[3]);
        line.width = csv::parse_double(f[4]);
        line.width_temp = csv::parse_double(f[5]);
        line.aux1 = csv::parse_double(f[6]);
        line.aux2 = csv::parse_double(f[7]);
        if (!(line.center_hz > 0.0))
            throw parse_error("line catalogue: line_center_hz must be > 0");
        catalog.lines.push_back(line);
    }
    return catalog;
}

LineCatalog LineCatalog::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("line catalogue: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

const LineCatalog &LineCatalog::builtin() {
    static const LineCatalog catalog = parse_csv(detail::builtin_gas_lines_csv);
    return catalog;
}

// ---------------------------------------------------------------------------
// Attenuation

namespace {

// Van Vleck-Weisskopf shape with optional line mixing (delta), frequencies in GHz.
double line_shape(double f, double f0, double width, double delta) {
    const double lo = f0 - f;
    const double hi = f0 + f;
    return f / f0 *
           ((width - delta * lo) / (lo * lo + width * width) +
            (width - delta * hi) / (hi * hi + width * width));
}

double interpolate_table(double f_hz, const std::vector<AttenuationSample> &table) {
    if (table.empty() || f_hz < table.front().f_hz || f_hz > table.back().f_hz)
        throw validation_error("channel: tabulated profile does not cover " +
                               csv::format_number(f_hz) + " Hz");
    auto hi = std::lower_bound(table.begin(), table.end(), f_hz,
                               [](const AttenuationSample &s, double f) { return s.f_hz < f; });
    if (hi == table.begin())
        return hi->gamma_db_per_km;
    auto lo = hi - 1;
    const double t = (f_hz - lo->f_hz) / (hi->f_hz - lo->f_hz);
    return lo->gamma_db_per_km + t * (hi->gamma_db_per_km - lo->gamma_db_per_km);
}

} // namespace

double specific_attenuation(double f_hz, const ChannelProfile &profile, const LineCatalog &catalog) {
    if (profile.kind == ChannelKind::tabulated)
        return interpolate_table(f_hz, profile.table);

    if (!(f_hz >= attenuation_model_f_min_hz && f_hz <= attenuation_model_f_max_hz))
        throw validation_error("channel: frequency " + csv::format_number(f_hz) +
                               " Hz outside attenuation model range [0.05, 1.1] THz");

    const double f = f_hz * 1e-9;
    const double theta = 300.0 / profile.temperature_k;
    const double p = profile.pressure_hpa;
    const double e = profile.water_vapor_g_m3 * profile.temperature_k / 216.7;

    double n_imag = 0.0;
    for (const auto &line : catalog.lines) {
        const double f0 = line.center_hz * 1e-9;
        if (line.species == GasSpecies::oxygen) {
            const double strength =
                line.strength * 1e-7 * p * std::pow(theta, 3.0) * std::exp(line.strength_temp * (1.0 - theta));
            double width = line.width * 1e-4 * (p * std::pow(theta, 0.8 - line.width_temp) + 1.1 * e * theta);
            width = std::sqrt(width * width + 2.25e-6);
            const double delta = (line.aux1 + line.aux2 * theta) * 1e-4 * (p + e) * std::pow(theta, 0.8);
            n_imag += strength * line_shape(f, f0, width, delta);
        } else {
            if (e == 0.0)
                continue;
            const double strength =
                line.strength * 1e-1 * e * std::pow(theta, 3.5) * std::exp(line.strength_temp * (1.0 - theta));
            double width = line.width * 1e-4 *
                           (p * std::pow(theta, line.width_temp) + line.aux1 * e * std::pow(theta, line.aux2));
            // Doppler broadening
            width = 0.535 * width + std::sqrt(0.217 * width * width + 2.1316e-12 * f0 * f0 / theta);
            n_imag += strength * line_shape(f, f0, width, 0.0);
        }
    }

    // Dry-air continuum: Debye spectrum of O2 plus pressure-induced N2 absorption.
    const double d = 5.6e-4 * (p + e) * std::pow(theta, 0.8);
    n_imag += f * p * theta * theta *
              (6.14e-5 / (d * (1.0 + (f / d) * (f / d))) +
               1.4e-12 * p * std::pow(theta, 1.5) / (1.0 + 1.9e-5 * std::pow(f, 1.5)));

    return std::max(0.0, 0.1820 * f * n_imag);
}

std::vector<double> channel_response(const FrequencyGrid &grid, const ChannelProfile &profile,
                                     const LineCatalog &catalog) {
    grid.validate();
    profile.validate();
    const double range_km = profile.range_m * 1e-3;
    std::vector<double> response(grid.n_samples);
    for (std::size_t k = 0; k < grid.n_samples; ++k) {
        const double gamma = specific_attenuation(grid.frequency(k), profile, catalog);
        response[k] = std::max(std::pow(10.0, -gamma * range_km / 20.0), std::numeric_limits<double>::min());
    }
    return response;
}

std::vector<AttenuationSample> parse_attenuation_table(std::string_view text) {
    const auto lines = csv::data_lines(text);
    std::vector<AttenuationSample> table;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto f = csv::split_fields(lines[i]);
        if (i == 0 && !f.empty() && f[0] == "f_hz")
            continue;
        if (f.size() != 2)
            throw parse_error("attenuation table: expected 2 fields in row " + std::to_string(i));
        table.push_back({csv::parse_double(f[0]), csv::parse_double(f[1])});
    }
    return table;
}

std::vector<AttenuationSample> load_attenuation_table(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("attenuation table: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_attenuation_table(ss.str());
}

} // namespace thzssh
