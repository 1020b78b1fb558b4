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

#include "thzssh/estimators.hpp"

#include "thzssh/channel.hpp"
#include "thzssh/constants.hpp"
#include "thzssh/csv.hpp"
#include "thzssh/errors.hpp"
#include "thzssh/fourier.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace thzssh {

namespace {

using cplx = std::complex<double>;

double median(std::vector<double> v) {
    if (v.empty())
        return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

std::vector<double> hann(std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (n < 2)
        return w;
    for (std::size_t k = 0; k < n; ++k)
        w[k] = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(k) / static_cast<double>(n - 1)));
    return w;
}

std::vector<double> remove_mean(std::span<const double> x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    std::vector<double> out(x.begin(), x.end());
    for (auto &v : out)
        v -= mean;
    return out;
}

// Offset of the vertex of the parabola through (-1, a), (0, b), (1, c).
double parabola_offset(double a, double b, double c) {
    const double den = a - 2.0 * b + c;
    if (den == 0.0)
        return 0.0;
    return std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
}

template <typename F>
double golden_section_max(F &&f, double lo, double hi, double tol) {
    constexpr double r = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

// Maximises f over [lo, hi]: dense scan, then golden section around the best sample.
template <typename F>
double scan_max(F &&f, double lo, double hi, std::size_t n_scan, double tol) {
    if (!(hi > lo))
        return lo;
    const double step = (hi - lo) / static_cast<double>(n_scan);
    double best_x = lo;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= n_scan; ++i) {
        const double x = lo + step * static_cast<double>(i);
        const double v = f(x);
        if (v > best) {
            best = v;
            best_x = x;
        }
    }
    const double x = golden_section_max(f, std::max(lo, best_x - step), std::min(hi, best_x + step), tol);
    return f(x) >= best ? x : best_x;
}

// Least-squares fit score of P ~ A * c for a non-negative template c: <P,c>^2 / <c,c>.
double fit_score(std::span<const double> power, std::span<const double> tmpl) {
    double pc = 0.0, cc = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) {
        pc += power[k] * tmpl[k];
        cc += tmpl[k] * tmpl[k];
    }
    return cc > 0.0 ? pc * std::abs(pc) / cc : 0.0;
}

double single_path_score(std::span<const double> power, const FrequencyGrid &grid, double zeta,
                         std::vector<double> &scratch) {
    for (std::size_t k = 0; k < power.size(); ++k)
        scratch[k] = 1.0 + std::cos(2.0 * pi * grid.frequency(k) * zeta);
    return fit_score(power, scratch);
}

double pair_score(std::span<const double> power, const FrequencyGrid &grid, double beta, double alpha,
                  std::vector<double> &scratch) {
    for (std::size_t k = 0; k < power.size(); ++k) {
        const double f = grid.frequency(k);
        scratch[k] = (1.0 + std::cos(2.0 * pi * f * beta)) * (1.0 + std::cos(2.0 * pi * f * alpha));
    }
    return fit_score(power, scratch);
}

double safe_acos_deg(double arg, double tol, const char *what) {
    if (!std::isfinite(arg) || arg < -1.0 - tol || arg > 1.0 + tol)
        throw estimation_error(estimation_failure::inconsistent_lags,
                               std::string("arccos argument for ") + what + " is " + csv::format_number(arg));
    return rad_to_deg(std::acos(std::clamp(arg, -1.0, 1.0)));
}

} // namespace

// ---------------------------------------------------------------------------
// Spectrum of the spectrum

ZetaSpectrum zeta_spectrum(std::span<const double> power, double df, const ZetaOptions &options) {
    if (power.size() < 2)
        throw validation_error("zeta_spectrum: need at least 2 samples");
    if (!(df > 0.0))
        throw validation_error("zeta_spectrum: spacing must be > 0");
    const std::size_t m = power.size();

    std::vector<double> x = options.remove_mean ? remove_mean(power) : std::vector<double>(power.begin(), power.end());
    double wsum = static_cast<double>(m);
    if (options.hann) {
        const auto w = hann(m);
        wsum = std::accumulate(w.begin(), w.end(), 0.0);
        for (std::size_t k = 0; k < m; ++k)
            x[k] *= w[k];
    }

    const std::size_t n_fft = m * std::max<std::size_t>(options.zero_pad, 1);
    ZetaSpectrum z;
    z.values = fourier::real_forward(x, n_fft);
    z.zeta_s.resize(z.values.size());
    z.magnitude.resize(z.values.size());
    for (std::size_t i = 0; i < z.values.size(); ++i) {
        z.zeta_s[i] = static_cast<double>(i) / (static_cast<double>(n_fft) * df);
        z.magnitude[i] = std::abs(z.values[i]);
    }
    z.source_samples = m;
    z.source_spacing_hz = df;
    z.amplitude_scale = wsum / 2.0;
    return z;
}

ZetaSpectrum zeta_spectrum(const ObservedSpectrum &spectrum, const ZetaOptions &options) {
    const auto p = spectrum.power();
    return zeta_spectrum(p, spectrum.grid.spacing(), options);
}

double noise_floor(const ZetaSpectrum &zspec) { return 6.0 * median(zspec.magnitude); }

std::vector<SpectralPeak> find_peaks(const ZetaSpectrum &zspec, double lag_lo, double lag_hi, double threshold) {
    std::vector<SpectralPeak> peaks;
    const auto &mag = zspec.magnitude;
    const double step = zspec.lag_step();
    for (std::size_t i = 1; i + 1 < mag.size(); ++i) {
        if (zspec.zeta_s[i] < lag_lo || zspec.zeta_s[i] > lag_hi)
            continue;
        if (!(mag[i] > mag[i - 1] && mag[i] >= mag[i + 1] && mag[i] > threshold))
            continue;
        const double d = parabola_offset(mag[i - 1], mag[i], mag[i + 1]);
        peaks.push_back({(static_cast<double>(i) + d) * step, mag[i] - 0.25 * (mag[i - 1] - mag[i + 1]) * d, i});
    }
    std::sort(peaks.begin(), peaks.end(), [](const SpectralPeak &a, const SpectralPeak &b) {
        return a.magnitude != b.magnitude ? a.magnitude > b.magnitude : a.lag_s < b.lag_s;
    });
    return peaks;
}

ZetaSpectrum lowpass(const ZetaSpectrum &zspec, double d_m) {
    ZetaSpectrum out = zspec;
    const double cutoff = 2.0 * d_m / speed_of_light + zspec.native_bin_width();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.zeta_s[i] > cutoff) {
            out.values[i] = 0.0;
            out.magnitude[i] = 0.0;
        }
    }
    return out;
}

std::vector<double> lowpass_power(std::span<const double> power, double df, double d_m) {
    const std::size_t m = power.size();
    if (m < 2)
        throw validation_error("lowpass_power: need at least 2 samples");
    // Even extension x0 .. x_{m-1} x_{m-2} .. x1 removes the wrap-around discontinuity.
    const std::size_t n = 2 * m - 2;
    std::vector<double> ext(n);
    for (std::size_t k = 0; k < m; ++k)
        ext[k] = power[k];
    for (std::size_t k = m; k < n; ++k)
        ext[k] = power[n - k];

    auto spec = fourier::real_forward(ext, n);
    const double lag_step = 1.0 / (static_cast<double>(n) * df);
    // Pass band to 2D/c, raised-cosine transition out to 4 x 2D/c; cross terms sit far beyond.
    const double zmax = 2.0 * d_m / speed_of_light;
    const double edge = zmax + lag_step;
    const double stop = edge + std::max(3.0 * zmax, 8.0 * lag_step);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double lag = static_cast<double>(i) * lag_step;
        if (lag >= stop)
            spec[i] = 0.0;
        else if (lag > edge)
            spec[i] *= 0.5 * (1.0 + std::cos(pi * (lag - edge) / (stop - edge)));
    }
    auto filtered = fourier::real_inverse(spec, n);
    filtered.resize(m);
    return filtered;
}

// ---------------------------------------------------------------------------
// Single path

double theta_from_zeta(double zeta_s, double d_m) {
    const double ratio = std::clamp(zeta_s / (2.0 * d_m / speed_of_light), 0.0, 1.0);
    return rad_to_deg(2.0 * std::asin(std::sqrt(ratio)));
}

DoaEstimate estimate_doa_single(const ObservedSpectrum &spectrum, double d_m) {
    if (!(d_m > 0.0))
        throw validation_error("d_m must be > 0");
    const auto power = spectrum.power();
    const auto zspec = zeta_spectrum(power, spectrum.grid.spacing());
    const double zmax = 2.0 * d_m / speed_of_light;
    const double nb = zspec.native_bin_width();
    const double threshold = noise_floor(zspec);

    DoaEstimate est;
    const auto peaks = find_peaks(zspec, 0.05 * zmax, zmax + 2.0 * nb, threshold);
    double low_lag_max = 0.0;
    for (std::size_t i = 0; i < zspec.size() && zspec.zeta_s[i] <= 2.0 * nb; ++i)
        low_lag_max = std::max(low_lag_max, zspec.magnitude[i]);
    if (peaks.empty() && !(low_lag_max > threshold))
        throw estimation_error(estimation_failure::no_peak, "no lag exceeds the noise floor");

    // A shaper lag inside the DC lobe leaves no clean peak, so the lowest lags are always
    // fitted as well and the better least-squares fit wins.
    std::vector<std::pair<double, double>> windows = {{0.0, std::min(zmax, 4.0 * nb)}};
    if (!peaks.empty()) {
        const auto &peak = peaks.front();
        est.peak_lag_s = peak.lag_s;
        est.peak_magnitude = peak.magnitude;
        if (peak.lag_s > zmax + nb)
            throw estimation_error(estimation_failure::out_of_range,
                                   "peak lag " + csv::format_number(peak.lag_s) + " s exceeds 2D/c");
        windows.emplace_back(std::max(0.0, peak.lag_s - 3.0 * nb), std::min(zmax, peak.lag_s + 3.0 * nb));
    }

    std::vector<double> scratch(power.size());
    const auto score = [&](double zeta) { return single_path_score(power, spectrum.grid, zeta, scratch); };
    double best = -std::numeric_limits<double>::infinity();
    for (const auto &[lo, hi] : windows) {
        const auto n_scan = static_cast<std::size_t>(std::ceil((hi - lo) / (nb / 32.0))) + 1;
        const double zeta = scan_max(score, lo, hi, n_scan, nb * 1e-7);
        const double value = score(zeta);
        if (value > best) {
            best = value;
            est.zeta_s = zeta;
        }
    }
    est.near_endfire = est.zeta_s < 2.0 * nb;
    est.theta_deg = theta_from_zeta(est.zeta_s, d_m);
    return est;
}

// ---------------------------------------------------------------------------
// Harmonics

std::vector<Harmonic> harmonic_decompose(const ZetaSpectrum &zspec, std::size_t max_components) {
    if (max_components < 1)
        throw validation_error("harmonic_decompose: max_components must be >= 1");
    std::vector<Harmonic> out;
    for (const auto &p : find_peaks(zspec, 0.0, zspec.zeta_s.back(), noise_floor(zspec))) {
        if (out.size() == max_components)
            break;
        out.push_back({p.lag_s, p.magnitude / zspec.amplitude_scale});
    }
    return out;
}

namespace {

std::vector<Harmonic> music(std::span<const double> power, double df, std::size_t max_components, double max_lag) {
    const std::size_t m = power.size();
    const std::size_t order = 2 * max_components + 1; // cosine pairs plus the DC level
    if (2 * max_components > m / 3)
        throw estimation_error(estimation_failure::model_order_too_large,
                               "music: model order " + std::to_string(2 * max_components) + " exceeds n_samples/3");
    const std::size_t l = std::clamp<std::size_t>(m / 3, order + 1, 200);
    const std::size_t snapshots = m - l + 1;

    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l));
    Eigen::Map<const Eigen::VectorXd> x(power.data(), static_cast<Eigen::Index>(m));
    for (std::size_t s = 0; s < snapshots; ++s) {
        const auto seg = x.segment(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(l));
        r.noalias() += seg * seg.transpose();
    }
    // Forward-backward averaging.
    const Eigen::MatrixXd flipped = r.reverse();
    r = 0.5 * (r + flipped) / static_cast<double>(snapshots);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
    const auto noise_dim = static_cast<Eigen::Index>(l - std::min(order, l - 1));
    const Eigen::MatrixXd en = eig.eigenvectors().leftCols(noise_dim);
    const Eigen::MatrixXd q = en * en.transpose();

    // |E_n^H e(w)|^2 depends on the diagonal sums of the projector only.
    std::vector<double> diag(l, 0.0);
    for (std::size_t i = 0; i < l; ++i)
        for (std::size_t j = i; j < l; ++j)
            diag[j - i] += q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

    const double nyq = 0.5 / df;
    const double lag_hi = max_lag > 0.0 ? std::min(max_lag, nyq) : nyq;
    const double step = 1.0 / (8.0 * static_cast<double>(m) * df);
    const auto n_grid = static_cast<std::size_t>(lag_hi / step) + 1;
    std::vector<double> pseudo(n_grid);
    for (std::size_t g = 0; g < n_grid; ++g) {
        const double w = 2.0 * pi * static_cast<double>(g) * step * df;
        double acc = diag[0];
        for (std::size_t d = 1; d < l; ++d)
            acc += 2.0 * diag[d] * std::cos(w * static_cast<double>(d));
        pseudo[g] = -std::log(std::max(acc, 1e-300));
    }

    std::vector<std::pair<double, double>> cands; // (log pseudo, lag)
    for (std::size_t g = 1; g + 1 < n_grid; ++g)
        if (pseudo[g] > pseudo[g - 1] && pseudo[g] >= pseudo[g + 1]) {
            const double d = parabola_offset(pseudo[g - 1], pseudo[g], pseudo[g + 1]);
            cands.emplace_back(pseudo[g], (static_cast<double>(g) + d) * step);
        }
    std::sort(cands.begin(), cands.end(), [](const auto &a, const auto &b) { return a.first > b.first; });
    if (cands.size() > max_components)
        cands.resize(max_components);
    if (cands.empty())
        return {};

    // Tone amplitudes by least squares on [1, cos, sin] columns.
    const auto n_cols = static_cast<Eigen::Index>(1 + 2 * cands.size());
    Eigen::MatrixXd a(static_cast<Eigen::Index>(m), n_cols);
    for (std::size_t k = 0; k < m; ++k) {
        const double f = static_cast<double>(k) * df;
        a(static_cast<Eigen::Index>(k), 0) = 1.0;
        for (std::size_t c = 0; c < cands.size(); ++c) {
            a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(1 + 2 * c)) = std::cos(2.0 * pi * f * cands[c].second);
            a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(2 + 2 * c)) = std::sin(2.0 * pi * f * cands[c].second);
        }
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(x);

    std::vector<Harmonic> out;
    for (std::size_t c = 0; c < cands.size(); ++c)
        out.push_back({cands[c].second, std::hypot(coef(static_cast<Eigen::Index>(1 + 2 * c)),
                                                   coef(static_cast<Eigen::Index>(2 + 2 * c)))});
    std::sort(out.begin(), out.end(), [](const Harmonic &a, const Harmonic &b) {
        return a.amplitude != b.amplitude ? a.amplitude > b.amplitude : a.lag_s < b.lag_s;
    });
    return out;
}

} // namespace

std::vector<Harmonic> harmonic_decompose(std::span<const double> power, double df, HarmonicMethod method,
                                         std::size_t max_components, double max_lag_s) {
    if (max_components < 1)
        throw validation_error("harmonic_decompose: max_components must be >= 1");
    if (method == HarmonicMethod::music)
        return music(power, df, max_components, max_lag_s);

    auto all = harmonic_decompose(zeta_spectrum(power, df), std::numeric_limits<std::size_t>::max());
    std::vector<Harmonic> out;
    for (const auto &h : all) {
        if (max_lag_s > 0.0 && h.lag_s > max_lag_s)
            continue;
        if (out.size() == max_components)
            break;
        out.push_back(h);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Multipath

MatchedFilterCurve matched_filter(std::span<const double> power, const FrequencyGrid &grid, double d_m,
                                  double step_deg) {
    if (!(step_deg > 0.0))
        throw validation_error("matched_filter: theta step must be > 0");
    const auto x = remove_mean(power);
    const double df = grid.spacing();
    MatchedFilterCurve curve;
    curve.theta_deg = angle_grid(0.0, 180.0, step_deg);
    curve.energy.reserve(curve.theta_deg.size());
    for (double theta : curve.theta_deg) {
        const double zeta = shaper_zeta(theta, d_m);
        double acc = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double y = x[k] * std::cos(2.0 * pi * grid.frequency(k) * zeta);
            acc += (k == 0 || k + 1 == x.size()) ? 0.5 * y : y;
        }
        curve.energy.push_back(acc * df);
    }
    return curve;
}

MatchedFilterCurve matched_filter(const ObservedSpectrum &spectrum, double d_m, double step_deg) {
    const auto p = spectrum.power();
    return matched_filter(p, spectrum.grid, d_m, step_deg);
}

std::vector<AnglePeak> matched_filter_peaks(const MatchedFilterCurve &curve, double relative_floor) {
    const auto &e = curve.energy;
    const auto &t = curve.theta_deg;
    std::vector<AnglePeak> peaks;
    if (e.empty())
        return peaks;
    const double top = *std::max_element(e.begin(), e.end());
    if (!(top > 0.0))
        return peaks;
    const double floor = relative_floor * top;
    const std::size_t n = e.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool left = i == 0 || e[i] > e[i - 1];
        const bool right = i + 1 == n || e[i] >= e[i + 1];
        if (!(left && right && e[i] > floor))
            continue;
        if (i == 0 || i + 1 == n) {
            peaks.push_back({t[i], e[i]});
            continue;
        }
        const double d = parabola_offset(e[i - 1], e[i], e[i + 1]);
        const double step = 0.5 * (t[i + 1] - t[i - 1]);
        peaks.push_back({std::clamp(t[i] + d * step, 0.0, 180.0), e[i] - 0.25 * (e[i - 1] - e[i + 1]) * d});
    }
    std::sort(peaks.begin(), peaks.end(), [](const AnglePeak &a, const AnglePeak &b) {
        return a.energy != b.energy ? a.energy > b.energy : a.theta_deg < b.theta_deg;
    });
    return peaks;
}

double matched_filter_power_db(double energy, const FrequencyGrid &grid) {
    return power_to_db(4.0 * energy / grid.bandwidth());
}

RelDistanceResult estimate_rel_distances(const ObservedSpectrum &spectrum, double d_m,
                                         std::span<const double> doas_deg, double max_search_m) {
    RelDistanceResult result;
    if (doas_deg.size() < 2)
        return result;

    const auto &grid = spectrum.grid;
    const double df = grid.spacing();
    const std::size_t m = spectrum.z.size();
    const double nyq = nyquist_lag(grid);
    const double zmax = 2.0 * d_m / speed_of_light;
    const double nb = 1.0 / (static_cast<double>(m) * df);
    const double lag_lo = 2.0 * zmax + 2.0 * nb;
    double lag_hi = nyq;
    if (max_search_m > 0.0) {
        if (max_search_m / speed_of_light > nyq)
            result.warnings.push_back("AliasRisk: requested search range " + csv::format_number(max_search_m) +
                                      " m exceeds c/(2 df) = " + csv::format_number(nyquist_distance(grid)) + " m");
        lag_hi = std::min(nyq, max_search_m / speed_of_light);
    }

    const auto x = remove_mean(spectrum.power());
    const auto w = hann(m);
    const std::size_t n_fft = 8 * m;
    const double fft_step = 1.0 / (static_cast<double>(n_fft) * df);

    struct Candidate {
        std::size_t earlier, later;
        double lag, magnitude;
    };
    std::vector<Candidate> cands;
    std::vector<std::vector<cplx>> weighted(doas_deg.size() * doas_deg.size());

    // Cross term of paths (i earlier, j later by T): Re{(1+e^{-j2pi f zi})(1+e^{+j2pi f zj}) e^{j2pi f T}}.
    // Swapping the roles of i and j gives the same term at T + zj - zi, so the order is not
    // observable; the stronger path (lower index) is taken as the earlier one.
    for (std::size_t i = 0; i < doas_deg.size(); ++i) {
        for (std::size_t j = i + 1; j < doas_deg.size(); ++j) {
            const double zi = shaper_zeta(doas_deg[i], d_m);
            const double zj = shaper_zeta(doas_deg[j], d_m);
            auto &u = weighted[i * doas_deg.size() + j];
            u.resize(m);
            for (std::size_t k = 0; k < m; ++k) {
                const double f = grid.frequency(k);
                const cplx h = (1.0 + std::polar(1.0, -2.0 * pi * f * zi)) * (1.0 + std::polar(1.0, 2.0 * pi * f * zj));
                u[k] = w[k] * x[k] * std::conj(h);
            }
            const auto corr = fourier::complex_forward(u, n_fft);
            std::vector<double> mag(n_fft / 2);
            for (std::size_t b = 0; b < mag.size(); ++b)
                mag[b] = std::abs(corr[b]);
            const double threshold = 6.0 * median(mag);
            std::vector<Candidate> local;
            for (std::size_t b = 1; b + 1 < mag.size(); ++b) {
                const double lag = static_cast<double>(b) * fft_step;
                if (lag < lag_lo || lag > lag_hi)
                    continue;
                if (mag[b] > mag[b - 1] && mag[b] >= mag[b + 1] && mag[b] > threshold)
                    local.push_back({i, j, lag, mag[b]});
            }
            std::sort(local.begin(), local.end(), [](const Candidate &a, const Candidate &b) {
                return a.magnitude > b.magnitude;
            });
            if (local.size() > 8)
                local.resize(8);
            cands.insert(cands.end(), local.begin(), local.end());
        }
    }
    std::sort(cands.begin(), cands.end(),
              [](const Candidate &a, const Candidate &b) { return a.magnitude > b.magnitude; });

    // Greedy assignment: each unordered pair and each cross-term cluster is used once.
    std::vector<bool> pair_used(doas_deg.size() * doas_deg.size(), false);
    std::vector<double> used_lags;
    for (const auto &c : cands) {
        const std::size_t key = c.earlier * doas_deg.size() + c.later;
        if (pair_used[key])
            continue;
        const bool clash = std::any_of(used_lags.begin(), used_lags.end(),
                                       [&](double l) { return std::abs(l - c.lag) < 2.0 * zmax + 2.0 * nb; });
        if (clash)
            continue;
        pair_used[key] = true;
        used_lags.push_back(c.lag);

        const auto &u = weighted[c.earlier * doas_deg.size() + c.later];
        const auto corr_at = [&](double lag) {
            cplx acc = 0.0;
            for (std::size_t k = 0; k < m; ++k)
                acc += u[k] * std::polar(1.0, -2.0 * pi * static_cast<double>(k) * df * lag);
            return std::abs(acc);
        };
        const double lag = golden_section_max(corr_at, c.lag - fft_step, c.lag + fft_step, fft_step * 1e-6);
        result.pairs.push_back({c.earlier, c.later, lag * speed_of_light, corr_at(lag)});
        if (lag > nyq - zmax)
            result.warnings.push_back("AliasRisk: distance " + csv::format_number(lag * speed_of_light) +
                                      " m is at the unambiguous limit c/(2 df)");
    }
    std::sort(result.pairs.begin(), result.pairs.end(),
              [](const RelDistance &a, const RelDistance &b) { return a.distance_m < b.distance_m; });
    return result;
}

// ---------------------------------------------------------------------------
// Transmitter pair

AodDoaEstimate estimate_aod_doa(const ObservedSpectrum &spectrum, double d_m, bool strict) {
    if (!(d_m > 0.0))
        throw validation_error("d_m must be > 0");
    const auto power = spectrum.power();
    const auto zspec = zeta_spectrum(power, spectrum.grid.spacing());
    const double tau = d_m / speed_of_light;
    const double nb = zspec.native_bin_width();

    const double lag_lo = 0.1 * tau;
    const double lag_hi = 6.0 * tau + 2.0 * nb;
    double top = 0.0;
    for (std::size_t i = 0; i < zspec.size(); ++i)
        if (zspec.zeta_s[i] >= lag_lo && zspec.zeta_s[i] <= lag_hi)
            top = std::max(top, zspec.magnitude[i]);
    const double threshold = std::max(noise_floor(zspec), 0.05 * top);

    AodDoaEstimate est;
    est.peaks = find_peaks(zspec, lag_lo, lag_hi, threshold);
    if (est.peaks.size() > 4)
        est.peaks.resize(4);
    double beta = 0.0, alpha = 0.0;
    bool consistent = true;
    auto by_lag = est.peaks;
    std::sort(by_lag.begin(), by_lag.end(), [](const SpectralPeak &a, const SpectralPeak &b) { return a.lag_s > b.lag_s; });
    try {
        if (by_lag.size() < 2)
            throw estimation_error(estimation_failure::harmonic_count_mismatch,
                                   "found " + std::to_string(by_lag.size()) + " resolvable harmonics, need 2");
        est.zeta_sum_s = by_lag[0].lag_s;
        est.zeta_aod_s = by_lag[1].lag_s;
        const double cos_d0 = std::cos(deg_to_rad(safe_acos_deg(3.0 - est.zeta_aod_s / tau, 0.02, "the AoD")));
        const double cos_i0 = std::cos(deg_to_rad(safe_acos_deg(4.0 - est.zeta_sum_s / tau - cos_d0, 0.02, "the DoA")));
        beta = tau * (1.0 - cos_i0);
        alpha = tau * (3.0 - cos_d0);

        // Remaining harmonics only cross-check the decoding.
        for (double pred : {beta, alpha - beta}) {
            if (pred < 2.0 * nb)
                continue;
            double miss = std::numeric_limits<double>::infinity();
            for (std::size_t i = 2; i < by_lag.size(); ++i)
                miss = std::min(miss, std::abs(by_lag[i].lag_s - pred) / pred);
            if (miss > 0.05) {
                consistent = false;
                est.warnings.push_back("harmonic at " + csv::format_number(pred) +
                                       " s predicted by the two largest lags was not matched within 5%");
            }
        }
    } catch (const estimation_error &e) {
        if (strict)
            throw;
        consistent = false;
        est.warnings.push_back(e.what());
    }

    if (!consistent && !strict) {
        // Four-harmonic search: <P, (1+cos b)(1+cos a)> expands into correlations at b, a, a+b, a-b.
        const auto x = remove_mean(power);
        const std::size_t n_fft = 16 * power.size();
        const auto c = fourier::real_forward(x, n_fft);
        const double df = spectrum.grid.spacing();
        const double step = 1.0 / (static_cast<double>(n_fft) * df);
        const double f0 = spectrum.grid.f_start_hz;
        std::vector<double> r(c.size());
        for (std::size_t m = 0; m < c.size(); ++m)
            r[m] = (std::polar(1.0, 2.0 * pi * f0 * static_cast<double>(m) * step) * std::conj(c[m])).real();
        const auto corr = [&](double lag) {
            const double pos = std::clamp(lag / step, 0.0, static_cast<double>(r.size() - 2));
            const auto i = static_cast<std::size_t>(pos);
            const double t = pos - static_cast<double>(i);
            return (1.0 - t) * r[i] + t * r[i + 1];
        };
        const auto nb_steps = static_cast<std::size_t>(std::ceil(2.0 * tau / step));
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t ib = 0; ib <= nb_steps; ++ib) {
            const double b = std::min(2.0 * tau, static_cast<double>(ib) * step);
            for (std::size_t ia = 0; ia <= nb_steps; ++ia) {
                const double a = std::min(4.0 * tau, 2.0 * tau + static_cast<double>(ia) * step);
                const double v = corr(b) + corr(a) + 0.5 * corr(a + b) + 0.5 * corr(a - b);
                if (v > best) {
                    best = v;
                    beta = b;
                    alpha = a;
                }
            }
        }
        est.warnings.push_back("two-largest-lag decoding inconsistent; four-harmonic search used");
    }

    // Joint refinement of (beta, alpha) = (DoA lag, AoD lag) on the product template.
    std::vector<double> scratch(power.size());
    const auto score = [&](double beta, double alpha) { return pair_score(power, spectrum.grid, beta, alpha, scratch); };
    double best = score(beta, alpha);
    // A DoA lag within a few bins of zero merges the sum and difference harmonics into the AoD peak and
    // pulls the decoded lags; dense local scans of each lag escape the resulting local maxima.
    if (beta < 4.0 * nb) {
        const double scan = 0.25 * nb;
        const double reach = 8.0 * nb;
        for (int round = 0; round < 2; ++round) {
            for (double b = 0.0; b <= std::min(2.0 * tau, beta + reach); b += scan) {
                const double v = score(b, alpha);
                if (v > best) {
                    best = v;
                    beta = b;
                }
            }
            const double a_lo = std::max(2.0 * tau, alpha - reach), a_hi = std::min(4.0 * tau, alpha + reach);
            for (double a = a_lo; a <= a_hi; a += scan) {
                const double v = score(beta, a);
                if (v > best) {
                    best = v;
                    alpha = a;
                }
            }
        }
    }
    for (double step = 0.5 * nb; step > 1e-7 * nb;) {
        bool moved = false;
        const double trial[4][2] = {{step, 0}, {-step, 0}, {0, step}, {0, -step}};
        for (const auto &t : trial) {
            const double b = std::clamp(beta + t[0], 0.0, 2.0 * tau);
            const double a = std::clamp(alpha + t[1], 2.0 * tau, 4.0 * tau);
            const double s = score(b, a);
            if (s > best) {
                best = s;
                beta = b;
                alpha = a;
                moved = true;
            }
        }
        if (!moved)
            step *= 0.5;
    }
    est.doa_deg = rad_to_deg(std::acos(std::clamp(1.0 - beta / tau, -1.0, 1.0)));
    est.aod_deg = rad_to_deg(std::acos(std::clamp(3.0 - alpha / tau, -1.0, 1.0)));
    return est;
}

// ---------------------------------------------------------------------------
// Grid search

TemplateBank::TemplateBank(std::vector<double> theta_grid_deg, std::vector<std::vector<double>> templates)
    : theta_(std::move(theta_grid_deg)), templates_(std::move(templates)) {
    if (theta_.empty() || theta_.size() != templates_.size())
        throw validation_error("template bank: need one template per grid angle");
    for (const auto &t : templates_)
        if (t.size() != templates_.front().size())
            throw validation_error("template bank: templates differ in length");
}

std::vector<double> TemplateBank::costs(std::span<const double> observed) const {
    if (observed.size() != templates_.front().size())
        throw validation_error("template bank: observation length does not match the templates");
    std::vector<double> c(templates_.size());
    for (std::size_t i = 0; i < templates_.size(); ++i) {
        double acc = 0.0;
        const auto &t = templates_[i];
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double r = observed[k] - t[k];
            acc += r * r;
        }
        c[i] = acc;
    }
    return c;
}

double TemplateBank::estimate(std::span<const double> observed) const {
    const auto c = costs(observed);
    const auto i = static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
    if (i == 0 || i + 1 == c.size())
        return theta_[i];
    // Newton on the cost of the quadratically interpolated template t0 + d g + d^2 h / 2, d in grid steps
    const auto &tm = templates_[i - 1], &t0 = templates_[i], &tp = templates_[i + 1];
    double eg = 0.0, eh = 0.0, gg = 0.0, gh = 0.0, hh = 0.0;
    for (std::size_t k = 0; k < t0.size(); ++k) {
        const double e = observed[k] - t0[k];
        const double g = 0.5 * (tp[k] - tm[k]);
        const double h = tp[k] - 2.0 * t0[k] + tm[k];
        eg += e * g;
        eh += e * h;
        gg += g * g;
        gh += g * h;
        hh += h * h;
    }
    double d = 0.0;
    for (int it = 0; it < 8; ++it) {
        // r = e - d g - d^2 h / 2, J = g + d h
        const double rj = eg + d * eh - d * gg - 1.5 * d * d * gh - 0.5 * d * d * d * hh;
        const double jj = gg + 2.0 * d * gh + d * d * hh;
        const double rh = eh - d * gh - 0.5 * d * d * hh;
        double curv = jj - rh;
        if (!(curv > 0.0))
            curv = jj;
        if (!(curv > 0.0))
            break;
        const double next = std::clamp(d + rj / curv, -1.0, 1.0);
        if (std::abs(next - d) < 1e-12) {
            d = next;
            break;
        }
        d = next;
    }
    const double step = d < 0.0 ? theta_[i] - theta_[i - 1] : theta_[i + 1] - theta_[i];
    return std::clamp(theta_[i] + d * step, 0.0, 180.0);
}

std::vector<double> angle_grid(double lo_deg, double hi_deg, double step_deg) {
    if (!(step_deg > 0.0) || hi_deg < lo_deg)
        throw validation_error("angle grid: need step > 0 and hi >= lo");
    const auto n = static_cast<std::size_t>(std::floor((hi_deg - lo_deg) / step_deg + 1e-9)) + 1;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo_deg + step_deg * static_cast<double>(i);
    if (g.back() < hi_deg - 1e-9 * step_deg)
        g.push_back(hi_deg);
    return g;
}

double mmse_estimate(std::span<const double> observed, const TemplateBuilder &builder,
                     std::span<const double> theta_grid_deg) {
    std::vector<std::vector<double>> templates;
    templates.reserve(theta_grid_deg.size());
    for (double t : theta_grid_deg)
        templates.push_back(builder(t));
    return TemplateBank({theta_grid_deg.begin(), theta_grid_deg.end()}, std::move(templates)).estimate(observed);
}

TemplateBank ssh_template_bank(const Scenario &scenario, std::span<const double> theta_grid_deg) {
    scenario.validate();
    const auto &grid = scenario.grid;
    const double gain = scenario.paths.front().gain_linear;
    const auto response = channel_response(grid, scenario.channel);
    std::vector<std::vector<double>> templates;
    templates.reserve(theta_grid_deg.size());
    for (double theta : theta_grid_deg) {
        const double zeta = shaper_zeta(theta, scenario.d_m);
        std::vector<double> t(grid.n_samples);
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double a = gain * response[k] * std::cos(pi * grid.frequency(k) * zeta);
            t[k] = a * a;
        }
        templates.push_back(std::move(t));
    }
    return TemplateBank({theta_grid_deg.begin(), theta_grid_deg.end()}, std::move(templates));
}

std::vector<double> debiased_power(const ObservedSpectrum &spectrum) {
    auto p = spectrum.power();
    for (auto &v : p)
        v -= spectrum.n0;
    return p;
}

// ---------------------------------------------------------------------------
// Report

EstimateReport estimate_report(const ObservedSpectrum &spectrum, const Scenario &scenario) {
    EstimateReport report;
    const double d_m = scenario.d_m;
    const double nb = 1.0 / (static_cast<double>(spectrum.z.size()) * spectrum.grid.spacing());

    if (scenario.tx_mode == TxMode::pair) {
        const auto est = estimate_aod_doa(spectrum, d_m);
        report.doas_deg = {est.doa_deg};
        report.powers_db = {0.0};
        report.aod_deg = est.aod_deg;
        for (const auto &p : est.peaks) {
            report.peak_magnitudes.push_back(p.magnitude);
            report.peak_lags_s.push_back(p.lag_s);
        }
        report.warnings = est.warnings;
        return report;
    }

    const auto peaks = matched_filter_peaks(matched_filter(spectrum, d_m));
    if (peaks.size() <= 1) {
        try {
            const auto est = estimate_doa_single(spectrum, d_m);
            report.doas_deg = {est.theta_deg};
            report.near_endfire = est.near_endfire;
            report.peak_magnitudes = {est.peak_magnitude};
            report.peak_lags_s = {est.peak_lag_s};
        } catch (const estimation_error &e) {
            if (e.kind() != estimation_failure::no_peak || peaks.empty())
                throw;
            report.doas_deg = {peaks.front().theta_deg};
            report.peak_magnitudes = {peaks.front().energy};
            report.peak_lags_s = {shaper_zeta(peaks.front().theta_deg, d_m)};
            report.near_endfire = report.peak_lags_s.front() < 2.0 * nb;
        }
        report.powers_db = {0.0};
        return report;
    }

    for (const auto &p : peaks) {
        report.doas_deg.push_back(p.theta_deg);
        report.powers_db.push_back(power_to_db(p.energy / peaks.front().energy));
        report.peak_magnitudes.push_back(p.energy);
        report.peak_lags_s.push_back(shaper_zeta(p.theta_deg, d_m));
        if (report.peak_lags_s.back() < 2.0 * nb)
            report.near_endfire = true;
    }
    const auto rel = estimate_rel_distances(spectrum, d_m, report.doas_deg);
    for (const auto &r : rel.pairs)
        report.rel_distances_m.push_back(r.distance_m);
    report.warnings = rel.warnings;
    return report;
}

std::string to_json(const EstimateReport &report) {
    nlohmann::ordered_json j;
    j["doas_deg"] = report.doas_deg;
    j["powers_db"] = report.powers_db;
    j["rel_distances_m"] = report.rel_distances_m;
    j["aod_deg"] = report.aod_deg ? nlohmann::ordered_json(*report.aod_deg) : nlohmann::ordered_json(nullptr);
    j["diagnostics"] = {{"peak_magnitudes", report.peak_magnitudes},
                        {"peak_lags_s", report.peak_lags_s},
                        {"near_endfire", report.near_endfire},
                        {"warnings", report.warnings}};
    return j.dump(2) + "\n";
}

void write_matched_filter_csv(std::ostream &out, const MatchedFilterCurve &curve) {
    csv::Writer w(out, {"theta_deg", "E"});
    for (std::size_t i = 0; i < curve.theta_deg.size(); ++i) {
        w.cell(curve.theta_deg[i]).cell(curve.energy[i]);
        w.end_row();
    }
}

} // namespace thzssh
