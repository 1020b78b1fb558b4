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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace thzssh::fourier {

/// Forward real DFT of `x` zero-padded to `n_fft` points; returns bins 0..n_fft/2.
/// Sign convention: X[m] = sum_k x[k] exp(-j 2 pi k m / n_fft).
std::vector<std::complex<double>> real_forward(std::span<const double> x, std::size_t n_fft);

/// Forward complex DFT of `x` zero-padded to `n_fft` points, same sign convention.
std::vector<std::complex<double>> complex_forward(std::span<const std::complex<double>> x, std::size_t n_fft);

/// Inverse of real_forward for a Hermitian spectrum of `n_fft` points, scaled by 1/n_fft.
std::vector<double> real_inverse(std::span<const std::complex<double>> half_spectrum, std::size_t n_fft);

} // namespace thzssh::fourier
