#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace kgsol::detail {

/// Evaluate p and p' at s (coefficients in ascending order).
inline double poly_eval(const std::vector<double>& c, double s, double& dp) {
    double p = 0.0;
    dp = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) {
        dp = dp * s + p;
        p = p * s + c[k];
    }
    return p;
}

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<double>(k) * c[k]);
    return d;
}

/// All real roots of p on [lo, hi], found by recursive critical-point
/// isolation: between consecutive stationary points p is monotone, so a sign
/// change brackets exactly one root (bisection + Newton polish).
inline std::vector<double> real_roots_on(const std::vector<double>& c, double lo, double hi);

namespace impl {

inline double bisect_root(const std::vector<double>& c, double a, double b) {
    double dp;
    double fa = poly_eval(c, a, dp);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = poly_eval(c, mid, dp);
        if (fm == 0.0) return mid;
        if ((fa < 0.0) == (fm < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        if (b - a <= 1e-15 * (1.0 + std::abs(a) + std::abs(b))) break;
    }
    double s = 0.5 * (a + b);
    // Newton polish
    for (int it = 0; it < 50; ++it) {
        double dp2;
        const double p = poly_eval(c, s, dp2);
        if (dp2 == 0.0) break;
        const double step = p / dp2;
        s -= step;
        if (std::abs(step) <= 1e-17 * (1.0 + std::abs(s))) break;
    }
    return s;
}

}  // namespace impl

inline std::vector<double> real_roots_on(const std::vector<double>& c, double lo, double hi) {
    std::vector<double> trimmed = c;
    while (trimmed.size() > 1 && trimmed.back() == 0.0) trimmed.pop_back();
    const int deg = static_cast<int>(trimmed.size()) - 1;
    std::vector<double> out;
    if (deg < 1) return out;
    if (deg == 1) {
        const double r = -trimmed[0] / trimmed[1];
        if (r >= lo && r <= hi) out.push_back(r);
        return out;
    }
    // breakpoints: interval ends plus interior critical points
    std::vector<double> pts = {lo};
    for (double cp : real_roots_on(poly_derivative(trimmed), lo, hi))
        if (cp > lo && cp < hi) pts.push_back(cp);
    pts.push_back(hi);
    std::sort(pts.begin(), pts.end());

    // p is monotone between breakpoints: each sign change holds one root.
    // Tangential (even-multiplicity) roots at critical points produce no sign
    // change and are not reported, matching a sign-scan's semantics.
    double dp;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double a = pts[k], b = pts[k + 1];
        if (!(b > a)) continue;
        const double fa = poly_eval(trimmed, a, dp);
        const double fb = poly_eval(trimmed, b, dp);
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) out.push_back(impl::bisect_root(trimmed, a, b));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-14 * (1.0 + std::abs(a)); }),
              out.end());
    return out;
}

/// Roots of p in (0, infinity); the upper end comes from a Cauchy bound.
inline std::vector<double> positive_real_roots(const std::vector<double>& c) {
    std::vector<double> trimmed = c;
    while (trimmed.size() > 1 && trimmed.back() == 0.0) trimmed.pop_back();
    if (trimmed.size() <= 1) return {};
    double bound = 0.0;
    for (std::size_t k = 0; k + 1 < trimmed.size(); ++k)
        bound = std::max(bound, std::abs(trimmed[k] / trimmed.back()));
    bound = 2.0 * (1.0 + bound);
    std::vector<double> out;
    for (double r : real_roots_on(trimmed, 1e-300, bound))
        if (r > 0.0) out.push_back(r);
    return out;
}

}  // namespace kgsol::detail
