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

#include "thzssh/montecarlo.hpp"

#include "thzssh/constants.hpp"
#include "thzssh/crb.hpp"
#include "thzssh/errors.hpp"
#include "thzssh/estimators.hpp"
#include "thzssh/synth.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <thread>

namespace thzssh {

namespace {

struct TrialOutcome {
    bool failed = false;
    double err = 0.0;
    double err_aod = 0.0;
};

// Complex array snapshot stacked as [re..., im...].
std::vector<double> ula_snapshot(std::size_t n, double theta_deg) {
    std::vector<double> v(2 * n);
    const double c = std::cos(deg_to_rad(theta_deg));
    const double centre = 0.5 * static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double phase = pi * (static_cast<double>(i) - centre) * c;
        v[i] = std::cos(phase);
        v[n + i] = std::sin(phase);
    }
    return v;
}

std::vector<double> lens_snapshot(std::size_t m, double theta_deg) {
    auto g = lens_response(m, 0.5 * static_cast<double>(m), theta_deg);
    g.resize(2 * m, 0.0);
    return g;
}

// Adds circular complex noise of per-element SNR to a stacked snapshot.
std::vector<double> noisy_snapshot(const std::vector<double> &clean, std::optional<double> snr_db, std::uint64_t seed) {
    auto v = clean;
    if (!snr_db)
        return v;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 / db_to_power(*snr_db)));
    for (auto &x : v)
        x += gauss(rng);
    return v;
}

std::pair<double, double> rmse_and_stderr(const std::vector<double> &sq) {
    const double n = static_cast<double>(sq.size());
    double mean = 0.0;
    for (double v : sq)
        mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : sq)
        var += (v - mean) * (v - mean);
    var /= std::max(1.0, n - 1.0);
    const double rmse = std::sqrt(mean);
    const double se_mse = std::sqrt(var / n);
    return {rmse, rmse > 0.0 ? se_mse / (2.0 * rmse) : 0.0};
}

} // namespace

EstimatorSpec EstimatorSpec::parse(std::string_view text) {
    EstimatorSpec spec;
    const auto colon = text.find(':');
    const auto head = text.substr(0, colon);
    if (head == "ssh_peak")
        spec.kind = EstimatorKind::ssh_peak;
    else if (head == "ssh_mmse")
        spec.kind = EstimatorKind::ssh_mmse;
    else if (head == "aod_doa")
        spec.kind = EstimatorKind::aod_doa;
    else if (head == "ula_mmse")
        spec.kind = EstimatorKind::ula_mmse;
    else if (head == "la_mmse")
        spec.kind = EstimatorKind::la_mmse;
    else
        throw validation_error("unknown estimator '" + std::string(text) + "'");

    const bool array = spec.kind == EstimatorKind::ula_mmse || spec.kind == EstimatorKind::la_mmse;
    if (array) {
        if (colon == std::string_view::npos)
            throw validation_error("estimator '" + std::string(head) + "' needs an element count, e.g. ula_mmse:60");
        const std::string count(text.substr(colon + 1));
        std::size_t used = 0;
        long long n = 0;
        try {
            n = std::stoll(count, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used != count.size() || n < 2)
            throw validation_error("estimator element count must be an integer >= 2");
        spec.elements = static_cast<std::size_t>(n);
    } else if (colon != std::string_view::npos) {
        throw validation_error("estimator '" + std::string(head) + "' takes no element count");
    }
    return spec;
}

std::string EstimatorSpec::name() const {
    switch (kind) {
    case EstimatorKind::ssh_peak: return "ssh_peak";
    case EstimatorKind::ssh_mmse: return "ssh_mmse";
    case EstimatorKind::aod_doa: return "aod_doa";
    case EstimatorKind::ula_mmse: return "ula_mmse:" + std::to_string(elements);
    case EstimatorKind::la_mmse: return "la_mmse:" + std::to_string(elements);
    }
    return "ssh_mmse";
}

RmseResult rmse_monte_carlo(const Scenario &scenario, const EstimatorSpec &estimator, std::size_t trials,
                            std::size_t jobs) {
    scenario.validate();
    if (trials < 1)
        throw validation_error("rmse: trials must be >= 1");
    const double truth = scenario.paths.front().theta_deg;
    const double truth_aod = scenario.paths.front().aod_deg;
    const bool pair = estimator.kind == EstimatorKind::aod_doa;
    if (pair != (scenario.tx_mode == TxMode::pair))
        throw validation_error("rmse: estimator " + estimator.name() + " does not match tx_mode " +
                               to_string(scenario.tx_mode));

    std::optional<MeanField> mean;
    std::optional<TemplateBank> bank;
    std::vector<double> clean;
    const auto grid = angle_grid(0.0, 180.0, estimator.grid_step_deg);
    switch (estimator.kind) {
    case EstimatorKind::ssh_peak:
    case EstimatorKind::aod_doa:
        mean = synthesize(scenario);
        break;
    case EstimatorKind::ssh_mmse:
        mean = synthesize(scenario);
        bank = ssh_template_bank(scenario, grid);
        break;
    case EstimatorKind::ula_mmse:
    case EstimatorKind::la_mmse: {
        const bool ula = estimator.kind == EstimatorKind::ula_mmse;
        const auto build = [&](double t) {
            return ula ? ula_snapshot(estimator.elements, t) : lens_snapshot(estimator.elements, t);
        };
        std::vector<std::vector<double>> templates;
        for (double t : grid)
            templates.push_back(build(t));
        bank.emplace(grid, std::move(templates));
        clean = build(truth);
        break;
    }
    }

    std::vector<TrialOutcome> outcomes(trials);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t t = next++; t < trials; t = next++) {
            const auto seed = derive_seed(scenario.seed, t);
            auto &out = outcomes[t];
            try {
                switch (estimator.kind) {
                case EstimatorKind::ssh_peak:
                    out.err = estimate_doa_single(add_noise(*mean, scenario.snr_db, seed), scenario.d_m).theta_deg - truth;
                    break;
                case EstimatorKind::ssh_mmse:
                    out.err = bank->estimate(debiased_power(add_noise(*mean, scenario.snr_db, seed))) - truth;
                    break;
                case EstimatorKind::aod_doa: {
                    const auto est = estimate_aod_doa(add_noise(*mean, scenario.snr_db, seed), scenario.d_m);
                    out.err = est.doa_deg - truth;
                    out.err_aod = est.aod_deg - truth_aod;
                    break;
                }
                case EstimatorKind::ula_mmse:
                case EstimatorKind::la_mmse:
                    out.err = bank->estimate(noisy_snapshot(clean, scenario.snr_db, seed)) - truth;
                    break;
                }
            } catch (const estimation_error &) {
                out.failed = true;
            }
        }
    };

    const std::size_t n_threads =
        std::max<std::size_t>(1, std::min<std::size_t>(jobs ? jobs : std::thread::hardware_concurrency(), trials));
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n_threads; ++i)
        pool.emplace_back(worker);
    worker();
    for (auto &th : pool)
        th.join();

    RmseResult r;
    r.trials = trials;
    std::vector<double> sq, sq_aod;
    for (const auto &o : outcomes) {
        if (o.failed) {
            ++r.failures;
            continue;
        }
        sq.push_back(o.err * o.err);
        sq_aod.push_back(o.err_aod * o.err_aod);
    }
    if (5 * r.failures > trials)
        throw numeric_error("rmse: " + std::to_string(r.failures) + " of " + std::to_string(trials) + " trials of " +
                            estimator.name() + " failed");
    std::tie(r.rmse_deg, r.stderr_deg) = rmse_and_stderr(sq);
    if (pair)
        std::tie(r.rmse_aod_deg, r.stderr_aod_deg) = rmse_and_stderr(sq_aod);
    return r;
}

} // namespace thzssh
