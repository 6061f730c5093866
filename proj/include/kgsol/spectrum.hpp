#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "kgsol/grid.hpp"

namespace kgsol {

/// A uniformly sampled complex time series starting at t0.
struct TraceSeries {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<cplx> values;

    double t_end() const { return t0 + dt * (values.empty() ? 0.0 : double(values.size() - 1)); }
};

struct SpectralPeak {
    double frequency = 0.0;  // sign convention: a trace ~ e^{-i omega t} reports +omega
    double magnitude = 0.0;  // windowed DFT magnitude at the peak
    double mass_fraction = 0.0;  // |Y|^2 mass near the peak over the total
};

struct SpectrumReport {
    double window_a = 0.0, window_b = 0.0;
    std::vector<SpectralPeak> peaks;  // sorted by magnitude, descending
    double in_band_fraction = 1.0;    // spectral mass with |omega| <= m
    double dominance = 0.0;           // largest peak mass over total
    double bin_width = 0.0;           // 2*pi / window length
    // full magnitude table (frequency-sorted), kept only on request
    std::vector<std::pair<double, double>> bins;
};

namespace detail {

inline std::vector<cplx> dft_forward(const std::vector<cplx>& y) {
    const int n = static_cast<int>(y.size());
    std::vector<cplx> out(static_cast<std::size_t>(n));
    fftw_plan plan = fftw_plan_dft_1d(
        n, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(y.data())),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    return out;
}

}  // namespace detail

/// Hann-windowed DFT of the trace restricted to [t_a, t_b], with peak
/// detection and quadratic log-magnitude frequency refinement.
///
/// Bin j of the forward DFT corresponds to a factor e^{-i omega_j t} with
/// omega_j = -2 pi j / (N dt) folded to (-pi/dt, pi/dt]; a pure e^{-i w t}
/// tone with w > 0 therefore reports +w.
inline SpectrumReport time_spectrum(const TraceSeries& trace, double t_a, double t_b, double m,
                                    bool keep_bins = false) {
    if (trace.values.empty() || trace.dt <= 0.0)
        throw std::invalid_argument("time_spectrum: empty trace");
    // half a sample of slack so that nominal run lengths like [0, T] work
    if (t_a < trace.t0 - 0.5 * trace.dt || t_b > trace.t_end() + 0.5 * trace.dt || !(t_b > t_a))
        throw std::invalid_argument("time_spectrum: window outside trace extent");
    const int last = static_cast<int>(trace.values.size()) - 1;
    const int ia = std::max(0, static_cast<int>(std::ceil((t_a - trace.t0) / trace.dt - 1e-9)));
    const int ib = std::min(last, static_cast<int>(std::floor((t_b - trace.t0) / trace.dt + 1e-9)));
    const int nw = ib - ia + 1;
    if (nw < 1024) throw std::invalid_argument("time_spectrum: window too short (< 1024 samples)");

    const double pi = 3.14159265358979323846;
    std::vector<cplx> y(static_cast<std::size_t>(nw));
    for (int k = 0; k < nw; ++k) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * pi * k / (nw - 1)));
        y[static_cast<std::size_t>(k)] = w * trace.values[static_cast<std::size_t>(ia + k)];
    }
    const auto Y = detail::dft_forward(y);

    auto omega_of_bin = [&](double j) {
        // continuous bin index, folded
        double jj = j;
        if (jj > nw / 2.0) jj -= nw;
        return -2.0 * pi * jj / (nw * trace.dt);
    };

    std::vector<double> p2(static_cast<std::size_t>(nw));
    double total = 0.0, peak_mag = 0.0;
    for (int j = 0; j < nw; ++j) {
        p2[static_cast<std::size_t>(j)] = std::norm(Y[static_cast<std::size_t>(j)]);
        total += p2[static_cast<std::size_t>(j)];
        peak_mag = std::max(peak_mag, std::abs(Y[static_cast<std::size_t>(j)]));
    }

    SpectrumReport rep;
    rep.window_a = trace.t0 + ia * trace.dt;
    rep.window_b = trace.t0 + ib * trace.dt;
    rep.bin_width = 2.0 * pi / (nw * trace.dt);
    if (keep_bins) {
        rep.bins.reserve(static_cast<std::size_t>(nw));
        for (int j = 0; j < nw; ++j)
            rep.bins.emplace_back(omega_of_bin(j), std::abs(Y[static_cast<std::size_t>(j)]));
        std::sort(rep.bins.begin(), rep.bins.end());
    }

    if (total <= 0.0 || peak_mag <= 0.0) {
        rep.in_band_fraction = 1.0;  // zero trace: by convention fully in band
        rep.dominance = 0.0;
        return rep;
    }

    double in_band = 0.0;
    for (int j = 0; j < nw; ++j)
        if (std::abs(omega_of_bin(j)) <= m) in_band += p2[static_cast<std::size_t>(j)];
    rep.in_band_fraction = in_band / total;

    // Local maxima over the circular bin index, above 1e-4 of the global max.
    const double thresh = 1e-4 * peak_mag;
    const int halo = 3;  // Hann main lobe: +-3 bins hold essentially all peak mass
    for (int j = 0; j < nw; ++j) {
        const double c = std::abs(Y[static_cast<std::size_t>(j)]);
        if (c < thresh) continue;
        const double l = std::abs(Y[static_cast<std::size_t>((j + nw - 1) % nw)]);
        const double r = std::abs(Y[static_cast<std::size_t>((j + 1) % nw)]);
        if (!(c >= l && c > r)) continue;
        // quadratic interpolation on log magnitude
        double delta = 0.0;
        if (l > 0.0 && r > 0.0) {
            const double la = std::log(l), lc = std::log(c), lr = std::log(r);
            const double den = la - 2.0 * lc + lr;
            if (std::abs(den) > 1e-300) delta = 0.5 * (la - lr) / den;
            delta = std::clamp(delta, -0.5, 0.5);
        }
        double mass = 0.0;
        for (int q = -halo; q <= halo; ++q) mass += p2[static_cast<std::size_t>((j + q + nw) % nw)];
        SpectralPeak pk;
        pk.frequency = omega_of_bin(static_cast<double>(j) + delta);
        pk.magnitude = c;
        pk.mass_fraction = mass / total;
        rep.peaks.push_back(pk);
    }
    std::sort(rep.peaks.begin(), rep.peaks.end(),
              [](const SpectralPeak& a, const SpectralPeak& b) { return a.magnitude > b.magnitude; });
    if (!rep.peaks.empty()) rep.dominance = rep.peaks.front().mass_fraction;
    return rep;
}

}  // namespace kgsol
