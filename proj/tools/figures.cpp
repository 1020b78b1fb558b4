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

#include "figures.hpp"

#include "thzssh/constants.hpp"
#include "thzssh/crb.hpp"
#include "thzssh/csv.hpp"
#include "thzssh/errors.hpp"
#include "thzssh/estimators.hpp"
#include "thzssh/montecarlo.hpp"
#include "thzssh/scenario.hpp"
#include "thzssh/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

namespace thzssh::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t default_trials = 1000;

const std::vector<std::size_t> ula_sizes = {7, 60, 111};
const std::vector<std::size_t> lens_sizes = {15, 80, 201};

// A table of numeric columns built in memory and written once.
struct Table {
    std::string name; // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// Evaluates fn(i) for i in [0, n) on up to `jobs` threads; results keep index order.
template <typename T>
std::vector<T> parallel_map(std::size_t n, std::size_t jobs, const std::function<T(std::size_t)> &fn) {
    std::vector<T> out(n);
    if (jobs == 0)
        jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                if (!failed.exchange(true))
                    failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < jobs; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto &t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

std::vector<double> theta_sweep() { return angle_grid(1.0, 179.0, 1.0); }

Scenario los(double theta_deg, double d_m, double snr_db, ChannelProfile channel) {
    Scenario s;
    s.d_m = d_m;
    s.paths = {Path{theta_deg}};
    s.channel = std::move(channel);
    s.snr_db = snr_db;
    return s;
}

Scenario two_path() {
    Scenario s;
    s.paths = {Path{60.0}, Path{100.0, 0.5, db_to_amplitude(-6.0)}};
    s.channel = ChannelProfile::dry(100.0);
    return refine_grid_for_distances(s);
}

Scenario base_scenario(const std::string &id) {
    if (id == "fig6a")
        return los(60.0, 5e-3, 20.0, ChannelProfile::dry(100.0));
    if (id == "fig6b")
        return los(60.0, 5e-3, 10.0, ChannelProfile::dry(100.0));
    if (id == "fig6c")
        return los(60.0, 5e-3, 0.0, ChannelProfile::dry(100.0));
    if (id == "fig6d")
        return los(60.0, 5e-3, -10.0, ChannelProfile::dry(100.0));
    if (id == "fig7")
        return los(60.0, 5e-3, 5.0, ChannelProfile::humid(100.0, 10.0));
    if (id == "fig8")
        return los(60.0, 5e-3, 0.0, ChannelProfile::dry(100.0));
    if (id == "fig9" || id == "fig11") {
        auto s = los(60.0, 5e-3, 5.0, ChannelProfile::dry(100.0));
        s.tx_mode = TxMode::pair;
        s.paths.front().aod_deg = 60.0;
        return s;
    }
    if (id == "fig10")
        return los(60.0, 5e-3, 5.0, ChannelProfile::dry(100.0));
    if (id == "fig12" || id == "fig13")
        return two_path();
    throw validation_error("unknown figure id '" + id + "'");
}

Scenario apply_overrides(const Scenario &base, const std::string &overrides_json) {
    json patch;
    try {
        patch = json::parse(overrides_json);
    } catch (const json::parse_error &e) {
        throw parse_error(std::string("overrides: malformed JSON: ") + e.what());
    }
    if (!patch.is_object())
        throw parse_error("overrides: top level must be an object");
    auto merged = json::parse(dump_scenario(base));
    merged.merge_patch(patch);
    return parse_scenario(merged.dump());
}

// --- figure bodies ----------------------------------------------------------

std::vector<Table> fig6(const Scenario &s, json &params, std::size_t jobs) {
    const auto thetas = theta_sweep();
    const double snr = *s.snr_db;
    Table t{"", {"theta_deg", "crb_ssh"}, {}};
    for (auto n : ula_sizes)
        t.columns.push_back("crb_ula_" + std::to_string(n));
    for (auto m : lens_sizes)
        t.columns.push_back("crb_la_" + std::to_string(m));
    t.rows = parallel_map<std::vector<double>>(thetas.size(), jobs, [&](std::size_t i) {
        const double th = thetas[i];
        std::vector<double> row{th, crb_ssh_doa(s, th)};
        for (auto n : ula_sizes)
            row.push_back(crb_ula(n, snr, th));
        for (auto m : lens_sizes)
            row.push_back(crb_lens(m, 0.5 * static_cast<double>(m), snr, th));
        return row;
    });
    params["ula_elements"] = ula_sizes;
    params["lens_elements"] = lens_sizes;
    params["lens_aperture"] = "L = M lambda / 2";
    return {t};
}

std::vector<Table> fig7(const Scenario &s, json &params, std::size_t jobs) {
    const std::vector<double> ranges = {10.0, 100.0, 1000.0};
    const auto thetas = theta_sweep();
    Table t{"", {"theta_deg"}, {}};
    for (double r : ranges)
        t.columns.push_back("crb_range_" + csv::format_number(r) + "m");
    t.rows = parallel_map<std::vector<double>>(thetas.size(), jobs, [&](std::size_t i) {
        std::vector<double> row{thetas[i]};
        for (double r : ranges) {
            auto sr = s;
            sr.channel.range_m = r;
            row.push_back(crb_ssh_doa(sr, thetas[i]));
        }
        return row;
    });
    params["ranges_m"] = ranges;
    return {t};
}

std::vector<Table> fig8(const Scenario &s, json &params, std::size_t jobs) {
    const std::vector<double> gaps = {1e-3, 5e-3, 10e-3};
    const auto thetas = theta_sweep();
    Table t{"", {"theta_deg", "crb_d_1mm", "crb_d_5mm", "crb_d_10mm"}, {}};
    t.rows = parallel_map<std::vector<double>>(thetas.size(), jobs, [&](std::size_t i) {
        std::vector<double> row{thetas[i]};
        for (double d : gaps) {
            auto sd = s;
            sd.d_m = d;
            row.push_back(crb_ssh_doa(sd, thetas[i]));
        }
        return row;
    });
    params["d_m"] = gaps;
    return {t};
}

std::vector<Table> fig9(const Scenario &s, json &params, std::size_t jobs) {
    const std::vector<double> fixed = {30.0, 90.0, 150.0};
    const auto thetas = theta_sweep();
    Table t{"", {"theta_deg"}, {}};
    for (double a : fixed)
        t.columns.push_back("crb_aod_doa" + csv::format_number(a));
    for (double a : fixed)
        t.columns.push_back("crb_doa_aod" + csv::format_number(a));
    t.rows = parallel_map<std::vector<double>>(thetas.size(), jobs, [&](std::size_t i) {
        std::vector<double> row{thetas[i]};
        for (double doa : fixed)
            row.push_back(fim_joint(s, doa, thetas[i]).crb_deg[1]);
        for (double aod : fixed)
            row.push_back(fim_joint(s, thetas[i], aod).crb_deg[0]);
        return row;
    });
    params["fixed_angles_deg"] = fixed;
    params["layout"] = "crb_aod_doaX: AoD CRB versus AoD at DoA X; crb_doa_aodX: DoA CRB versus DoA at AoD X";
    return {t};
}

RmseResult rmse_or_nan(const Scenario &s, const EstimatorSpec &spec, std::size_t trials, std::size_t jobs,
                       json &warnings) {
    try {
        return rmse_monte_carlo(s, spec, trials, jobs);
    } catch (const numeric_error &e) {
        warnings.push_back(spec.name() + " at snr " + csv::format_number(*s.snr_db) + " dB: " + e.what());
        return {nan, nan, nan, nan, trials, trials};
    }
}

std::vector<Table> fig10(const Scenario &s, json &params, std::size_t trials, std::size_t jobs) {
    const std::vector<double> snrs = {-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
    const auto ula = EstimatorSpec::parse("ula_mmse:60");
    const auto la = EstimatorSpec::parse("la_mmse:80");
    const auto ssh = EstimatorSpec::parse("ssh_mmse");
    const double theta = s.paths.front().theta_deg;
    json warnings = json::array();

    Table vs_snr{"fig10", {"snr_db", "rmse_ula_60", "stderr_ula_60", "rmse_la_80", "stderr_la_80", "rmse_ssh",
                           "stderr_ssh", "crb_ula_60", "crb_la_80", "crb_ssh"}, {}};
    for (double snr : snrs) {
        auto sp = s;
        sp.snr_db = snr;
        const auto ru = rmse_or_nan(sp, ula, trials, jobs, warnings);
        const auto rl = rmse_or_nan(sp, la, trials, jobs, warnings);
        const auto rs = rmse_or_nan(sp, ssh, trials, jobs, warnings);
        vs_snr.rows.push_back({snr, ru.rmse_deg, ru.stderr_deg, rl.rmse_deg, rl.stderr_deg, rs.rmse_deg,
                               rs.stderr_deg, crb_ula(60, snr, theta), crb_lens(80, 40.0, snr, theta),
                               crb_ssh_doa(sp, theta)});
    }

    const std::vector<double> ranges = {100.0, 500.0, 1000.0, 1500.0, 1800.0, 2000.0};
    const std::vector<double> gaps = {1e-3, 5e-3, 10e-3};
    Table vs_range{"fig10_range", {"range_m", "rmse_d_1mm", "stderr_d_1mm", "rmse_d_5mm", "stderr_d_5mm",
                                   "rmse_d_10mm", "stderr_d_10mm"}, {}};
    auto humid = s;
    humid.channel = ChannelProfile::humid(100.0, 10.0);
    for (double r : ranges) {
        std::vector<double> row{r};
        for (double d : gaps) {
            auto sr = humid;
            sr.channel.range_m = r;
            sr.d_m = d;
            const auto res = rmse_or_nan(sr, ssh, trials, jobs, warnings);
            row.push_back(res.rmse_deg);
            row.push_back(res.stderr_deg);
        }
        vs_range.rows.push_back(row);
    }

    params["snr_db"] = snrs;
    params["estimators"] = {ula.name(), la.name(), ssh.name()};
    params["range_sweep"] = {{"ranges_m", ranges}, {"d_m", gaps}, {"water_vapor_g_m3", 10.0}};
    params["trials"] = trials;
    if (!warnings.empty())
        params["warnings"] = warnings;
    return {vs_snr, vs_range};
}

std::vector<Table> fig11(const Scenario &s, json &params, std::size_t trials, std::size_t jobs) {
    const std::vector<double> snrs = {-5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
    const auto spec = EstimatorSpec::parse("aod_doa");
    const double doa = s.paths.front().theta_deg;
    const double aod = s.paths.front().aod_deg;
    json warnings = json::array();
    Table t{"", {"snr_db", "rmse_doa", "stderr_doa", "rmse_aod", "stderr_aod", "crb_doa", "crb_aod"}, {}};
    for (double snr : snrs) {
        auto sp = s;
        sp.snr_db = snr;
        const auto r = rmse_or_nan(sp, spec, trials, jobs, warnings);
        const auto fim = fim_joint(sp, doa, aod);
        t.rows.push_back({snr, r.rmse_deg, r.stderr_deg, r.rmse_aod_deg, r.stderr_aod_deg, fim.crb_deg[0],
                          fim.crb_deg[1]});
    }
    params["snr_db"] = snrs;
    params["trials"] = trials;
    if (!warnings.empty())
        params["warnings"] = warnings;
    return {t};
}

std::vector<Table> fig12(const Scenario &s, json &params) {
    const auto obs = observe(s);
    const auto curve = matched_filter(obs, s.d_m, 0.1);
    Table t{"", {"theta_deg", "E_theta"}, {}};
    for (std::size_t i = 0; i < curve.theta_deg.size(); ++i)
        t.rows.push_back({curve.theta_deg[i], curve.energy[i]});
    params["step_deg"] = 0.1;
    return {t};
}

std::vector<Table> fig13(const Scenario &s, json &params) {
    const auto obs = observe(s);
    Table spectrum{"fig13_spectrum", {"f_hz", "power"}, {}};
    const auto p = obs.power();
    for (std::size_t k = 0; k < p.size(); ++k)
        spectrum.rows.push_back({obs.grid.frequency(k), p[k]});

    const auto z = zeta_spectrum(obs);
    const auto dist = z.distance_m();
    Table zeta{"fig13_zeta", {"zeta_s", "distance_m", "magnitude"}, {}};
    for (std::size_t i = 0; i < z.size(); ++i)
        zeta.rows.push_back({z.zeta_s[i], dist[i], z.magnitude[i] / z.amplitude_scale});
    params["zeta_normalisation"] = "magnitude divided by the response of a unit-amplitude cosine";
    return {spectrum, zeta};
}

void write_table(const Table &t, const fs::path &path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    csv::Writer w(out, t.columns);
    for (const auto &row : t.rows) {
        for (double v : row)
            w.cell(v);
        w.end_row();
    }
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

} // namespace

const std::vector<std::string> &figure_ids() {
    static const std::vector<std::string> ids = {"fig6a", "fig6b", "fig6c", "fig6d", "fig7", "fig8",
                                                 "fig9",  "fig10", "fig11", "fig12", "fig13"};
    return ids;
}

std::vector<fs::path> run_figure(const ExperimentSpec &spec) {
    const auto &ids = figure_ids();
    if (std::find(ids.begin(), ids.end(), spec.figure_id) == ids.end())
        throw validation_error("unknown figure id '" + spec.figure_id + "'");

    const auto start = std::chrono::steady_clock::now();
    auto scenario = apply_overrides(base_scenario(spec.figure_id), spec.overrides_json);
    if (spec.seed)
        scenario.seed = *spec.seed;
    const std::size_t trials = spec.trials.value_or(default_trials);
    const auto &id = spec.figure_id;
    if (!scenario.snr_db && id != "fig12" && id != "fig13")
        throw validation_error(id + ": snr_db is required");

    json params = json::object();
    std::vector<Table> tables;
    try {
        if (id.rfind("fig6", 0) == 0)
            tables = fig6(scenario, params, spec.jobs);
        else if (id == "fig7")
            tables = fig7(scenario, params, spec.jobs);
        else if (id == "fig8")
            tables = fig8(scenario, params, spec.jobs);
        else if (id == "fig9")
            tables = fig9(scenario, params, spec.jobs);
        else if (id == "fig10")
            tables = fig10(scenario, params, trials, spec.jobs);
        else if (id == "fig11")
            tables = fig11(scenario, params, trials, spec.jobs);
        else if (id == "fig12")
            tables = fig12(scenario, params);
        else
            tables = fig13(scenario, params);
    } catch (const validation_error &e) {
        throw validation_error(id + ": " + e.what());
    } catch (const numeric_error &e) {
        throw numeric_error(id + ": " + e.what());
    } catch (const estimation_error &e) {
        throw estimation_error(e.kind(), id + ": " + e.what());
    }
    const double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    fs::create_directories(spec.out_dir);
    json resolved = {{"figure", id},
                     {"seed", scenario.seed},
                     {"trials", trials},
                     {"scenario", json::parse(dump_scenario(scenario))},
                     {"parameters", params}};
    std::vector<fs::path> written;
    for (auto &t : tables) {
        if (t.name.empty())
            t.name = id;
        const auto csv_path = spec.out_dir / (t.name + ".csv");
        write_table(t, csv_path);
        json manifest = {{"csv", csv_path.filename().string()},
                         {"columns", t.columns},
                         {"rows", t.rows.size()},
                         {"code_version", THZSSH_VERSION},
                         {"runtime_s", runtime},
                         {"conventions",
                          {{"angles", "degrees, measured from the antenna-pair axis"},
                           {"snr", "per-antenna average signal power over the noise variance N0/2"},
                           {"crb", "one shot, Fisher information summed over all spectrum samples"}}},
                         {"resolved_config", resolved}};
        const auto manifest_path = spec.out_dir / (t.name + ".manifest.json");
        std::ofstream out(manifest_path);
        if (!out)
            throw std::runtime_error("cannot write " + manifest_path.string());
        out << manifest.dump(2) << "\n";
        written.push_back(csv_path);
    }
    return written;
}

} // namespace thzssh::cli
