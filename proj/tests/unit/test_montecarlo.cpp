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

#include "thzssh/crb.hpp"
#include "thzssh/errors.hpp"
#include "thzssh/montecarlo.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace thzssh;
using Catch::Approx;

namespace {

Scenario los(double snr) {
    Scenario s;
    s.paths = {Path{60.0}};
    s.snr_db = snr;
    s.seed = 3;
    return s;
}

} // namespace

TEST_CASE("estimator names", "[montecarlo]") {
    CHECK(EstimatorSpec::parse("ssh_mmse").kind == EstimatorKind::ssh_mmse);
    const auto ula = EstimatorSpec::parse("ula_mmse:60");
    CHECK(ula.kind == EstimatorKind::ula_mmse);
    CHECK(ula.elements == 60);
    CHECK(ula.name() == "ula_mmse:60");
    CHECK(EstimatorSpec::parse("la_mmse:80").name() == "la_mmse:80");
    CHECK(EstimatorSpec::parse("aod_doa").name() == "aod_doa");
    CHECK_THROWS_AS(EstimatorSpec::parse("ula_mmse"), validation_error);
    CHECK_THROWS_AS(EstimatorSpec::parse("ula_mmse:x"), validation_error);
    CHECK_THROWS_AS(EstimatorSpec::parse("beamformer"), validation_error);
}

TEST_CASE("results do not depend on the thread count", "[montecarlo]") {
    const auto s = los(5.0);
    for (const char *name : {"ssh_mmse", "ssh_peak", "ula_mmse:7"}) {
        const auto spec = EstimatorSpec::parse(name);
        const auto a = rmse_monte_carlo(s, spec, 64, 1);
        const auto b = rmse_monte_carlo(s, spec, 64, 4);
        CHECK(a.rmse_deg == b.rmse_deg);
        CHECK(a.stderr_deg == b.stderr_deg);
        CHECK(a.trials == 64);
    }
}

TEST_CASE("seed changes the draw", "[montecarlo]") {
    auto s = los(5.0);
    const auto spec = EstimatorSpec::parse("ssh_mmse");
    const auto a = rmse_monte_carlo(s, spec, 50, 1);
    s.seed = 4;
    CHECK(rmse_monte_carlo(s, spec, 50, 1).rmse_deg != a.rmse_deg);
}

TEST_CASE("noise-free trials are exact", "[montecarlo]") {
    Scenario s = los(0.0);
    s.snr_db.reset();
    CHECK(rmse_monte_carlo(s, EstimatorSpec::parse("ssh_mmse"), 4).rmse_deg < 1e-3);
    CHECK(rmse_monte_carlo(s, EstimatorSpec::parse("ula_mmse:20"), 4).rmse_deg < 1e-3);
}

TEST_CASE("array baselines sit near their bounds at high SNR", "[montecarlo]") {
    const auto s = los(20.0);
    const auto ula = rmse_monte_carlo(s, EstimatorSpec::parse("ula_mmse:60"), 400);
    CHECK(ula.rmse_deg == Approx(crb_ula(60, 20.0, 60.0)).epsilon(0.15));
    const auto ssh = rmse_monte_carlo(s, EstimatorSpec::parse("ssh_mmse"), 400);
    CHECK(ssh.rmse_deg > crb_ssh_doa(s, 60.0) - 3.0 * ssh.stderr_deg);
    CHECK(ssh.rmse_deg < 2.0 * crb_ssh_doa(s, 60.0));
}

TEST_CASE("invalid Monte Carlo requests", "[montecarlo]") {
    CHECK_THROWS_AS(rmse_monte_carlo(los(5.0), EstimatorSpec::parse("ssh_mmse"), 0), validation_error);
    Scenario single = los(5.0);
    CHECK_THROWS_AS(rmse_monte_carlo(single, EstimatorSpec::parse("aod_doa"), 10), validation_error);
}
