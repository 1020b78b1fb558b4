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

#include "thzssh/fourier.hpp"

#include "thzssh/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <mutex>

namespace thzssh::fourier {

namespace {

// The FFTW planner is not re-entrant; plan creation and destruction are serialised.
std::mutex planner_mutex;

struct PlanDeleter {
    void operator()(fftw_plan_s *plan) const {
        std::lock_guard lock(planner_mutex);
        fftw_destroy_plan(plan);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

template <typename T>
struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(static_cast<T *>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)))) {
        if (!data)
            throw numeric_error("fft: allocation failed");
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer &) = delete;
    FftwBuffer &operator=(const FftwBuffer &) = delete;
    T *data;
};

} // namespace

std::vector<std::complex<double>> real_forward(std::span<const double> x, std::size_t n_fft) {
    if (n_fft < x.size() || n_fft < 2)
        throw numeric_error("fft: transform length shorter than input");
    FftwBuffer<double> in(n_fft);
    FftwBuffer<fftw_complex> out(n_fft / 2 + 1);
    Plan plan;
    {
        std::lock_guard lock(planner_mutex);
        plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), in.data, out.data, FFTW_ESTIMATE));
    }
    std::fill(in.data, in.data + n_fft, 0.0);
    std::copy(x.begin(), x.end(), in.data);
    fftw_execute(plan.get());

    std::vector<std::complex<double>> result(n_fft / 2 + 1);
    for (std::size_t m = 0; m < result.size(); ++m)
        result[m] = {out.data[m][0], out.data[m][1]};
    return result;
}

std::vector<std::complex<double>> complex_forward(std::span<const std::complex<double>> x, std::size_t n_fft) {
    if (n_fft < x.size() || n_fft < 2)
        throw numeric_error("fft: transform length shorter than input");
    FftwBuffer<fftw_complex> in(n_fft);
    FftwBuffer<fftw_complex> out(n_fft);
    Plan plan;
    {
        std::lock_guard lock(planner_mutex);
        plan.reset(fftw_plan_dft_1d(static_cast<int>(n_fft), in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE));
    }
    for (std::size_t k = 0; k < n_fft; ++k) {
        in.data[k][0] = k < x.size() ? x[k].real() : 0.0;
        in.data[k][1] = k < x.size() ? x[k].imag() : 0.0;
    }
    fftw_execute(plan.get());

    std::vector<std::complex<double>> result(n_fft);
    for (std::size_t m = 0; m < n_fft; ++m)
        result[m] = {out.data[m][0], out.data[m][1]};
    return result;
}

std::vector<double> real_inverse(std::span<const std::complex<double>> half_spectrum, std::size_t n_fft) {
    if (half_spectrum.size() != n_fft / 2 + 1)
        throw numeric_error("fft: half spectrum length does not match n_fft");
    FftwBuffer<fftw_complex> in(half_spectrum.size());
    FftwBuffer<double> out(n_fft);
    Plan plan;
    {
        std::lock_guard lock(planner_mutex);
        plan.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n_fft), in.data, out.data, FFTW_ESTIMATE));
    }
    for (std::size_t m = 0; m < half_spectrum.size(); ++m) {
        in.data[m][0] = half_spectrum[m].real();
        in.data[m][1] = half_spectrum[m].imag();
    }
    fftw_execute(plan.get());

    std::vector<double> result(out.data, out.data + n_fft);
    for (auto &v : result)
        v /= static_cast<double>(n_fft);
    return result;
}

} // namespace thzssh::fourier
