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

#include "thzssh/scenario.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace thzssh {

/// ln p(z) of the Rician magnitude with mean field magnitude nu and total noise power N0
/// (each quadrature has variance N0/2).
double rice_log_density(double z, double nu, double n0);

/// Fisher information of nu carried by one Rician sample, in units of 1/sigma^2, as a
/// function of eta = nu / sigma: E[(u I1/I0(u eta) - eta)^2] with u ~ Rice(eta, 1).
double rician_information(double eta);

/// Same quantity by direct quadrature, bypassing the interpolation table.
double rician_information_direct(double eta);

/// E[u I1/I0(u eta) - eta], zero for a regular model.
double rician_score_mean(double eta);

/// Integral of the normalised Rician density, 1 up to quadrature error.
double rician_mass(double eta);

enum class Nuisance {
    known_channel, // a(f) known, angles only
    flat_gain      // an unknown scalar gain on top of the known channel shape
};

struct FisherInfo {
    std::vector<std::string> params;
    std::vector<double> matrix; // row-major, params.size() squared
    std::vector<double> crb_deg; // sqrt of the inverse diagonal for angle params, +inf when singular

    std::size_t dim() const { return params.size(); }
    double at(std::size_t r, std::size_t c) const { return matrix[r * dim() + c]; }
};

/// Single-path DoA information of one shot of the scenario at angle theta.
FisherInfo fim_ssh_doa(const Scenario &scenario, double theta_deg, Nuisance nuisance = Nuisance::known_channel);

/// CRB standard deviation of the single-path DoA [deg].
double crb_ssh_doa(const Scenario &scenario, double theta_deg);

/// |sum of per-bin expected scores| / sqrt(J) for the single-path DoA.
double normalized_score_mean(const Scenario &scenario, double theta_deg);

/// Joint (theta_i, theta_d) information of the transmitter-pair configuration.
FisherInfo fim_joint(const Scenario &scenario, double theta_i_deg, double theta_d_deg);

/// Half-wavelength symmetric ULA, one snapshot, per-element SNR [deg].
double crb_ula(std::size_t n_elements, double snr_db, double theta_deg);

/// Lens-array element responses sinc(m - (L/lambda) cos theta), m centred.
std::vector<double> lens_response(std::size_t m_elements, double aperture_over_lambda, double theta_deg);
/// d/dtheta of lens_response per radian.
std::vector<double> lens_response_slope(std::size_t m_elements, double aperture_over_lambda, double theta_deg);

/// Lens-array CRB from 2 SNR (|g'|^2 - (g.g')^2/|g|^2) [deg].
double crb_lens(std::size_t m_elements, double aperture_over_lambda, double snr_db, double theta_deg);

} // namespace thzssh
