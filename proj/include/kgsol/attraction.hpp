#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kgsol/integrator.hpp"
#include "kgsol/solitary.hpp"
#include "kgsol/spectrum.hpp"

namespace kgsol {

struct AttractionOptions {
    double late_fraction = 0.25;      // tail share of the run used for spectra
    double dominance_attract = 0.99;  // single-line threshold
    double dominance_multi = 0.90;    // two-line threshold
    double reduction_attract = 10.0;  // required drop of dist from its maximum
    double dist_small = 1e-3;         // "already on the manifold" alternative
};

/// Operational reading of a finished run. The thresholds are reporting
/// heuristics for finite runs, not part of any statement being tested.
struct AttractionSummary {
    std::string verdict = "inconclusive";
    double dist_max = 0.0;
    double dist_final = 0.0;
    double dist_reduction = 0.0;  // dist_max / dist_final
    double log_slope = 0.0;       // least-squares slope of log(dist) over the last half
    std::vector<SpectrumReport> late_spectra;  // one per trace, in trace order
    std::optional<ManifoldDistanceReport> final_distance;
};

namespace detail {

inline bool stable_two_peaks(const TraceSeries& trace, double t_a, double t_b, double m,
                             SpectrumReport& full) {
    full = time_spectrum(trace, t_a, t_b, m);
    if (full.peaks.size() < 2) return false;
    const double mid = 0.5 * (t_a + t_b);
    SpectrumReport first = time_spectrum(trace, t_a, mid, m);
    SpectrumReport second = time_spectrum(trace, mid, t_b, m);
    const double tol = 2.0 * std::max(first.bin_width, second.bin_width);
    for (int k = 0; k < 2; ++k) {
        const double f = full.peaks[static_cast<std::size_t>(k)].frequency;
        auto has_near = [&](const SpectrumReport& rep) {
            for (const auto& p : rep.peaks)
                if (std::abs(p.frequency - f) <= tol && p.mass_fraction >= 1e-3) return true;
            return false;
        };
        if (!has_near(first) || !has_near(second)) return false;
    }
    return true;
}

}  // namespace detail

inline AttractionSummary attraction_report(const std::vector<DiagRecord>& records,
                                           const std::vector<TraceSeries>& traces,
                                           const ModelSpec& model, double m,
                                           std::optional<ManifoldDistanceReport> final_distance = {},
                                           AttractionOptions opt = {}) {
    AttractionSummary out;
    out.final_distance = final_distance;

    std::vector<std::pair<double, double>> dist;  // (t, value)
    for (const auto& rec : records)
        if (rec.ef_metric_to_S) dist.emplace_back(rec.time, *rec.ef_metric_to_S);

    if (!dist.empty()) {
        for (const auto& [t, v] : dist) out.dist_max = std::max(out.dist_max, v);
        const std::size_t tail = std::max<std::size_t>(1, std::min<std::size_t>(3, dist.size()));
        double late = 0.0;
        for (std::size_t k = dist.size() - tail; k < dist.size(); ++k) late += dist[k].second;
        out.dist_final = late / static_cast<double>(tail);
        out.dist_reduction = out.dist_final > 0.0 ? out.dist_max / out.dist_final
                                                  : std::numeric_limits<double>::infinity();

        // slope of log(dist) over the second half
        const std::size_t from = dist.size() / 2;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t cnt = 0;
        for (std::size_t k = from; k < dist.size(); ++k) {
            if (!(dist[k].second > 0.0)) continue;
            const double x = dist[k].first, y = std::log(dist[k].second);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++cnt;
        }
        if (cnt >= 2) {
            const double den = cnt * sxx - sx * sx;
            if (std::abs(den) > 0.0) out.log_slope = (cnt * sxy - sx * sy) / den;
        }
    }

    bool spectra_ok = !traces.empty();
    bool any_two_stable = false;
    double osc_dominance = 0.0;
    for (std::size_t k = 0; k < traces.size(); ++k) {
        const auto& tr = traces[k];
        const double t_end = tr.t_end();
        const double t_a = t_end - opt.late_fraction * (t_end - tr.t0);
        SpectrumReport rep;
        bool two = false;
        try {
            two = detail::stable_two_peaks(tr, t_a, t_end, m, rep);
        } catch (const std::exception&) {
            spectra_ok = false;
            out.late_spectra.push_back(SpectrumReport{});
            continue;
        }
        if (k == 0) osc_dominance = rep.dominance;
        if (two && rep.dominance <= opt.dominance_multi) any_two_stable = true;
        out.late_spectra.push_back(std::move(rep));
    }

    // data that starts on the manifold has nothing to reduce; a uniformly
    // tiny distance counts as attracting too
    const bool dist_shrank = !dist.empty() && (out.dist_reduction >= opt.reduction_attract ||
                                               out.dist_max <= opt.dist_small);
    if (spectra_ok && dist_shrank && osc_dominance >= opt.dominance_attract)
        out.verdict = "attracting";
    else if (spectra_ok && any_two_stable)
        out.verdict = "multifrequency";
    else
        out.verdict = "inconclusive";
    (void)model;
    return out;
}

}  // namespace kgsol
