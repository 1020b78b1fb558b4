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

#include "commands.hpp"

#include "figures.hpp"

#include "thzssh/constants.hpp"
#include "thzssh/crb.hpp"
#include "thzssh/csv.hpp"
#include "thzssh/errors.hpp"
#include "thzssh/estimators.hpp"
#include "thzssh/montecarlo.hpp"
#include "thzssh/scenario.hpp"
#include "thzssh/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace thzssh::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Options {
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 0;
    bool noise_free = false;
    std::string sweep = "theta:1:179:1";
    std::vector<std::string> methods;
    std::size_t trials = 1000;
    std::string estimator = "ssh_mmse";
    std::string figure;
    std::string matched_filter_csv;
    bool trials_set = false;
};

struct Sweep {
    std::string param;
    std::vector<double> values;
};

Sweep parse_sweep(const std::string &text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');)
        parts.push_back(item);
    if (parts.size() != 4)
        throw CLI::ValidationError("--sweep", "expected <param>:<start>:<stop>:<step>, got '" + text + "'");
    if (parts[0] != "theta" && parts[0] != "aod")
        throw CLI::ValidationError("--sweep", "unknown sweep parameter '" + parts[0] + "'");
    double lo = 0.0, hi = 0.0, step = 0.0;
    try {
        lo = csv::parse_double(parts[1]);
        hi = csv::parse_double(parts[2]);
        step = csv::parse_double(parts[3]);
    } catch (const std::exception &) {
        throw CLI::ValidationError("--sweep", "non-numeric bound in '" + text + "'");
    }
    if (!(step > 0.0) || hi < lo)
        throw CLI::ValidationError("--sweep", "need start <= stop and step > 0");
    return {parts[0], angle_grid(lo, hi, step)};
}

Scenario load(const Options &o) {
    auto s = refine_grid_for_distances(load_scenario(o.scenario));
    if (o.seed)
        s.seed = *o.seed;
    if (o.noise_free)
        s.snr_db.reset();
    return s;
}

// Writes to --out when given, stdout otherwise.
template <typename Fn>
void emit(const Options &o, std::ostream &stdout_stream, Fn &&body) {
    if (o.out.empty()) {
        body(stdout_stream);
        return;
    }
    std::ofstream f(o.out);
    if (!f)
        throw std::runtime_error("cannot write " + o.out);
    body(f);
}

// Sidecar next to a CSV written with --out.
void write_sidecar(const Options &o, const std::string &command, const Scenario &s, json extra) {
    if (o.out.empty())
        return;
    auto path = fs::path(o.out);
    path.replace_extension(".manifest.json");
    json m = {{"csv", fs::path(o.out).filename().string()},
              {"command", command},
              {"code_version", THZSSH_VERSION},
              {"resolved_config", {{"scenario", json::parse(dump_scenario(s))}}}};
    for (auto &[k, v] : extra.items())
        m["resolved_config"][k] = v;
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    f << m.dump(2) << "\n";
}

void cmd_synth(const Options &o, std::ostream &out) {
    const auto s = load(o);
    const auto obs = observe(s);
    emit(o, out, [&](std::ostream &os) { write_spectrum_csv(os, obs); });
    write_sidecar(o, "synth", s, json::object());
}

void cmd_estimate(const Options &o, std::ostream &out) {
    const auto s = load(o);
    const auto obs = observe(s);
    const auto report = estimate_report(obs, s);
    emit(o, out, [&](std::ostream &os) { os << to_json(report); });
    if (!o.matched_filter_csv.empty()) {
        std::ofstream f(o.matched_filter_csv);
        if (!f)
            throw std::runtime_error("cannot write " + o.matched_filter_csv);
        write_matched_filter_csv(f, matched_filter(obs, s.d_m));
    }
}

std::vector<std::string> default_methods(const Scenario &s) {
    if (s.tx_mode == TxMode::pair)
        return {"joint_doa", "joint_aod"};
    return {"ssh"};
}

double crb_for(const std::string &method, const Scenario &s, double theta, double aod) {
    const double snr = *s.snr_db;
    if (method == "ssh")
        return crb_ssh_doa(s, theta);
    if (method == "ssh_flat_gain")
        return fim_ssh_doa(s, theta, Nuisance::flat_gain).crb_deg.front();
    if (method == "joint_doa")
        return fim_joint(s, theta, aod).crb_deg[0];
    if (method == "joint_aod")
        return fim_joint(s, theta, aod).crb_deg[1];
    const auto colon = method.find(':');
    if (colon != std::string::npos) {
        const auto kind = method.substr(0, colon);
        const auto n = static_cast<std::size_t>(csv::parse_double(method.substr(colon + 1)));
        if (kind == "ula")
            return crb_ula(n, snr, theta);
        if (kind == "la")
            return crb_lens(n, 0.5 * static_cast<double>(n), snr, theta);
    }
    throw validation_error("unknown crb method '" + method + "'");
}

void cmd_crb(const Options &o, std::ostream &out) {
    const auto s = load(o);
    if (!s.snr_db)
        throw validation_error("crb requires snr_db");
    const auto sweep = parse_sweep(o.sweep);
    if (sweep.param == "aod" && s.tx_mode != TxMode::pair)
        throw validation_error("an aod sweep requires tx_mode pair");
    const auto methods = o.methods.empty() ? default_methods(s) : o.methods;
    for (const auto &m : methods)
        if (m.rfind("joint_", 0) == 0 && s.tx_mode != TxMode::pair)
            throw validation_error("method " + m + " requires tx_mode pair");

    std::vector<std::vector<double>> values(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m)
        for (double v : sweep.values) {
            const double theta = sweep.param == "theta" ? v : s.paths.front().theta_deg;
            const double aod = sweep.param == "aod" ? v : s.paths.front().aod_deg;
            values[m].push_back(crb_for(methods[m], s, theta, aod));
        }

    const std::string axis = sweep.param == "theta" ? "theta_deg" : "aod_deg";
    emit(o, out, [&](std::ostream &os) {
        csv::Writer w(os, {axis, "crb_deg", "method", "snr_db", "d_m", "range_m", "vapor_g_m3"});
        for (std::size_t m = 0; m < methods.size(); ++m)
            for (std::size_t i = 0; i < sweep.values.size(); ++i) {
                w.cell(sweep.values[i]).cell(values[m][i]).cell(methods[m]).cell(*s.snr_db).cell(s.d_m);
                w.cell(s.channel.range_m).cell(s.channel.water_vapor_g_m3);
                w.end_row();
            }
    });
    write_sidecar(o, "crb", s, {{"sweep", o.sweep}, {"methods", methods}});
}

void cmd_rmse(const Options &o, std::ostream &out) {
    const auto s = load(o);
    const auto spec = EstimatorSpec::parse(o.estimator);
    const auto r = rmse_monte_carlo(s, spec, o.trials, o.jobs);
    emit(o, out, [&](std::ostream &os) {
        csv::Writer w(os, {"estimator", "theta_deg", "snr_db", "trials", "failures", "rmse_deg", "stderr_deg",
                           "rmse_aod_deg", "stderr_aod_deg"});
        w.cell(spec.name()).cell(s.paths.front().theta_deg);
        if (s.snr_db)
            w.cell(*s.snr_db);
        else
            w.cell("inf");
        w.cell(static_cast<double>(r.trials)).cell(static_cast<double>(r.failures));
        w.cell(r.rmse_deg).cell(r.stderr_deg).cell(r.rmse_aod_deg).cell(r.stderr_aod_deg);
        w.end_row();
    });
    write_sidecar(o, "rmse", s, {{"estimator", spec.name()}, {"trials", o.trials}});
}

// --scenario for run-figure is a partial scenario or a sidecar manifest to replay.
void cmd_run_figure(const Options &o, std::ostream &out) {
    ExperimentSpec spec;
    spec.figure_id = o.figure;
    spec.out_dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    spec.jobs = o.jobs;
    spec.seed = o.seed;
    if (o.trials_set)
        spec.trials = o.trials;
    if (!o.scenario.empty()) {
        std::ifstream f(o.scenario);
        if (!f)
            throw parse_error("cannot open " + o.scenario);
        json j;
        try {
            j = json::parse(f);
        } catch (const json::parse_error &e) {
            throw parse_error(o.scenario + ": malformed JSON: " + e.what());
        }
        if (j.contains("resolved_config")) {
            const auto &rc = j.at("resolved_config");
            if (rc.value("figure", o.figure) != o.figure)
                throw validation_error("manifest belongs to " + rc.at("figure").get<std::string>());
            spec.overrides_json = rc.at("scenario").dump();
            if (!spec.seed)
                spec.seed = rc.at("seed").get<std::uint64_t>();
            if (!spec.trials)
                spec.trials = rc.at("trials").get<std::size_t>();
        } else {
            spec.overrides_json = j.dump();
        }
    }
    for (const auto &p : run_figure(spec))
        out << p.string() << "\n";
}

} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"thzssh: spectrum-shaping link discovery toolkit", "thzssh"};
    app.require_subcommand(1);
    app.set_version_flag("--version", THZSSH_VERSION);
    Options o;

    auto add_scenario = [&](CLI::App *sub, bool required) {
        auto *opt = sub->add_option("--scenario", o.scenario, "Scenario JSON file");
        if (required)
            opt->required()->check(CLI::ExistingFile);
    };

    auto *synth = app.add_subcommand("synth", "Synthesize one spectrum as CSV");
    add_scenario(synth, true);
    synth->add_option("--out", o.out, "Output file (default stdout)");
    synth->add_option("--seed", o.seed, "Noise seed");
    synth->add_flag("--noise-free", o.noise_free, "Ignore snr_db");

    auto *estimate = app.add_subcommand("estimate", "Run the estimators on a synthesized spectrum");
    add_scenario(estimate, true);
    estimate->add_option("--out", o.out, "Output JSON file (default stdout)");
    estimate->add_option("--seed", o.seed, "Noise seed");
    estimate->add_flag("--noise-free", o.noise_free, "Ignore snr_db");
    estimate->add_option("--matched-filter-csv", o.matched_filter_csv, "Also write the matched-filter curve");

    auto *crb = app.add_subcommand("crb", "CRB sweep as CSV");
    add_scenario(crb, true);
    crb->add_option("--out", o.out, "Output file (default stdout)");
    crb->add_option("--sweep", o.sweep, "<theta|aod>:<start>:<stop>:<step> in degrees")->capture_default_str();
    crb->add_option("--method", o.methods, "ssh, ssh_flat_gain, joint_doa, joint_aod, ula:<N>, la:<M>");

    auto *rmse = app.add_subcommand("rmse", "Monte Carlo RMSE of one estimator");
    add_scenario(rmse, true);
    rmse->add_option("--out", o.out, "Output file (default stdout)");
    rmse->add_option("--seed", o.seed, "Base seed");
    rmse->add_option("--jobs", o.jobs, "Worker threads (0: all cores)");
    rmse->add_option("--trials", o.trials, "Trials")->capture_default_str()->check(CLI::PositiveNumber);
    rmse->add_option("--estimator", o.estimator, "ssh_peak, ssh_mmse, aod_doa, ula_mmse:<N>, la_mmse:<M>")
        ->capture_default_str();
    rmse->add_flag("--noise-free", o.noise_free, "Ignore snr_db");

    auto *figure = app.add_subcommand("run-figure", "Write the CSVs of one figure");
    figure->add_option("figure", o.figure, "Figure id")->required()->check(CLI::IsMember(figure_ids()));
    add_scenario(figure, false);
    figure->add_option("--out", o.out, "Output directory")->capture_default_str();
    figure->add_option("--seed", o.seed, "Base seed");
    figure->add_option("--jobs", o.jobs, "Worker threads (0: all cores)");
    auto *trials_opt = figure->add_option("--trials", o.trials, "Monte Carlo trials per point")
                           ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
        o.trials_set = trials_opt->count() > 0;
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::usage;
    }

    try {
        if (synth->parsed())
            cmd_synth(o, out);
        else if (estimate->parsed())
            cmd_estimate(o, out);
        else if (crb->parsed())
            cmd_crb(o, out);
        else if (rmse->parsed())
            cmd_rmse(o, out);
        else
            cmd_run_figure(o, out);
    } catch (const CLI::ValidationError &e) {
        err << "error: " << e.what() << "\n";
        return exit_code::usage;
    } catch (const parse_error &e) {
        err << "error: " << e.what() << "\n";
        return exit_code::invalid_input;
    } catch (const validation_error &e) {
        err << "error: " << e.what() << "\n";
        return exit_code::invalid_input;
    } catch (const numeric_error &e) {
        err << "error: " << e.what() << "\n";
        return exit_code::numeric_failure;
    } catch (const estimation_error &e) {
        err << "error: " << e.what() << "\n";
        return exit_code::numeric_failure;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return exit_code::io_failure;
    }
    return exit_code::ok;
}

} // namespace thzssh::cli
