#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "kgsol/grid.hpp"

namespace kgsol {

using FourierFn = std::function<cplx(double)>;

namespace detail {

template <class F>
double adaptive_simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole,
                            double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double sum = left + right;
    if (depth <= 0 || std::abs(sum - whole) <= 15.0 * tol) return sum + (sum - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(F f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

inline double rho_hat_scale(const FourierFn& rho_hat, double xi_hint) {
    double s = 0.0;
    for (int k = 0; k <= 32; ++k) {
        const double xi = xi_hint * (k / 32.0);
        s = std::max(s, std::abs(rho_hat(xi)));
        s = std::max(s, std::abs(rho_hat(-xi)));
    }
    return s;
}

}  // namespace detail

/// Resonance integral sigma(omega) = (1/2pi) int |rho_hat(xi)|^2 / (xi^2 + m^2 - omega^2) d xi.
///
/// For |omega| < m the integrand is smooth and positive. For |omega| > m the
/// poles at xi = +-sqrt(omega^2 - m^2) must be cancelled by zeros of rho_hat
/// (omega in Z_rho); the quadrature then excludes shrinking symmetric
/// neighbourhoods of the poles and Richardson-extrapolates the exclusion
/// radius to zero.
inline double sigma(const FourierFn& rho_hat, double omega, double m, double rel_tol = 1e-6) {
    const double pi = 3.14159265358979323846;
    const double gap = m * m - omega * omega;

    auto integrand = [&](double xi) {
        const double num = std::norm(rho_hat(xi));
        return num / (xi * xi + gap);
    };

    if (std::abs(omega) < m) {
        // cutoff growth until the shell contribution is negligible
        double cut = std::max(10.0, 10.0 * m);
        double total = detail::adaptive_simpson(integrand, -cut, cut, rel_tol * 1e-3);
        for (int it = 0; it < 24; ++it) {
            const double shell = detail::adaptive_simpson(integrand, cut, 2.0 * cut, rel_tol * 1e-3) +
                                 detail::adaptive_simpson(integrand, -2.0 * cut, -cut, rel_tol * 1e-3);
            total += shell;
            cut *= 2.0;
            if (std::abs(shell) <= 0.25 * rel_tol * std::abs(total)) break;
        }
        return total / (2.0 * pi);
    }

    // |omega| > m: resonant points
    const double xi0 = std::sqrt(omega * omega - m * m);
    const double scale = detail::rho_hat_scale(rho_hat, std::max(1.0, 3.0 * xi0));
    if (std::abs(rho_hat(xi0)) > 1e-6 * scale || std::abs(rho_hat(-xi0)) > 1e-6 * scale)
        throw std::invalid_argument("sigma: omega outside [-m, m] with rho_hat nonzero at resonance");

    double cut = std::max({10.0, 10.0 * m, 4.0 * xi0});
    auto integral_excluding = [&](double eps) {
        double v = 0.0;
        v += detail::adaptive_simpson(integrand, -cut, -xi0 - eps, rel_tol * 1e-3);
        v += detail::adaptive_simpson(integrand, -xi0 + eps, xi0 - eps, rel_tol * 1e-3);
        v += detail::adaptive_simpson(integrand, xi0 + eps, cut, rel_tol * 1e-3);
        return v;
    };

    // Richardson in the exclusion radius; a simple zero of rho_hat leaves an
    // O(eps^3) exclusion error.
    double eps = 1e-2 * std::max(1.0, xi0);
    double prev = integral_excluding(eps);
    double extrap_prev = prev;
    double total = prev;
    for (int k = 0; k < 20; ++k) {
        eps *= 0.5;
        const double cur = integral_excluding(eps);
        const double extrap = (8.0 * cur - prev) / 7.0;
        total = extrap;
        if (std::abs(extrap - extrap_prev) <= rel_tol * std::max(1e-30, std::abs(extrap))) break;
        prev = cur;
        extrap_prev = extrap;
    }

    // tail shells
    for (int it = 0; it < 24; ++it) {
        const double shell = detail::adaptive_simpson(integrand, cut, 2.0 * cut, rel_tol * 1e-3) +
                             detail::adaptive_simpson(integrand, -2.0 * cut, -cut, rel_tol * 1e-3);
        total += shell;
        cut *= 2.0;
        if (std::abs(shell) <= 0.25 * rel_tol * std::max(1e-30, std::abs(total))) break;
    }
    return total / (2.0 * pi);
}

/// Frequencies omega in (m, omega_max] whose resonant points +-sqrt(omega^2-m^2)
/// are zeros of rho_hat (sign-change bisection on the real part).
inline std::vector<double> find_Z_rho(const FourierFn& rho_hat, double m, double omega_max) {
    std::vector<double> out;
    if (!(omega_max > m)) return out;
    const double xi_max = std::sqrt(omega_max * omega_max - m * m);
    const double scale = detail::rho_hat_scale(rho_hat, xi_max);
    if (scale == 0.0) return out;

    auto f = [&](double xi) { return rho_hat(xi).real(); };
    const int n_scan = 4096;
    double prev_xi = xi_max * (1.0 / n_scan);
    double prev_f = f(prev_xi);
    for (int k = 2; k <= n_scan; ++k) {
        const double xi = xi_max * (static_cast<double>(k) / n_scan);
        const double fv = f(xi);
        if ((prev_f < 0.0 && fv > 0.0) || (prev_f > 0.0 && fv < 0.0)) {
            double a = prev_xi, b = xi, fa = prev_f;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = f(mid);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
                if (b - a < 1e-13 * std::max(1.0, xi_max)) break;
            }
            const double xi_star = 0.5 * (a + b);
            if (std::abs(rho_hat(xi_star)) <= 1e-8 * scale && std::abs(rho_hat(-xi_star)) <= 1e-8 * scale)
                out.push_back(std::sqrt(m * m + xi_star * xi_star));
        }
        prev_xi = xi;
        prev_f = fv;
    }
    return out;
}

/// Fourier transform of grid-sampled real data by direct quadrature,
/// convention F[rho](xi) = int rho(x) e^{-i xi x} dx.
inline FourierFn make_rho_hat(const GridSpec& grid, std::vector<double> rho) {
    return [grid, rho = std::move(rho)](double xi) {
        cplx sum(0.0, 0.0);
        for (int j = 0; j < grid.n_points; ++j) {
            const double x = grid.x(j);
            sum += grid.weight(j) * rho[static_cast<std::size_t>(j)] * std::polar(1.0, -xi * x);
        }
        return sum;
    };
}

}  // namespace kgsol
