#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgsol/grid.hpp"
#include "kgsol/model_core.hpp"
#include "kgsol/solitary.hpp"

namespace kgsol {

// ---------------------------------------------------------------------------
// Two-frequency stationary solutions for a pair of point oscillators.
//
// Both families have the time structure  f(x) sin(omega t) + g(x) sin(3
// omega t); the cubic force closes on these two lines through
// sin^3(s) = (3/4) sin(s) - (1/4) sin(3 s).
// ---------------------------------------------------------------------------

/// k(omega) = sqrt(omega^2 - m^2), the real branch for |omega| > m.
inline double propagating_k(double omega, double m) {
    if (!(std::abs(omega) > m))
        throw std::invalid_argument("propagating_k: need |omega| > m");
    return std::sqrt(omega * omega - m * m);
}

/// Cubic-plus-linear oscillator at x = 0 (F1 = alpha z + beta |z|^2 z) and a
/// linear oscillator at x = L (F2 = gamma z). The 3-omega component lives on
/// [0, infinity), vanishing for x <= 0.
struct LinearDegenerateParams {
    double m = 0.0;
    double omega = 0.0;  // in (0, m/3)
    double L = 0.0;
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    double A = 0.0, B = 0.0, C = 0.0;
    double kappa1 = 0.0;  // kappa(omega)
    double kappa3 = 0.0;  // kappa(3 omega)

    /// Relative residuals of the four amplitude equations.
    std::vector<double> residuals() const {
        auto rel = [](double lhs, double rhs) {
            return std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
        };
        const double s = A + B;
        std::vector<double> r;
        r.push_back(rel(2.0 * kappa1 * A, alpha * s + 0.75 * beta * s * s * s));       // sin(w t) at 0
        r.push_back(rel(-kappa3 * C, -0.25 * beta * s * s * s));                        // sin(3w t) at 0
        r.push_back(rel(2.0 * B * kappa1 * std::exp(kappa1 * L),
                        gamma * (A * std::exp(-kappa1 * L) + B * std::exp(kappa1 * L))));  // sin(w t) at L
        const double sh = std::sinh(kappa3 * L), ch = std::cosh(kappa3 * L);
        r.push_back(rel(kappa3 * C * sh + kappa3 * C * ch, gamma * C * sh));            // sin(3w t) at L
        return r;
    }
};

enum class LindegMode { given_alpha, solve_for_alpha };

/// Recipe: gamma from the linear-oscillator jump of the 3-omega line; then
/// (A, B) from the two sin(omega t) equations (the second is linear, giving
/// B = c A; the first then fixes A in closed form, Newton-polished);
/// finally C from the sin(3 omega t) jump at x = 0. In solve_for_alpha mode
/// the amplitude A is prescribed and alpha is solved for instead.
inline LinearDegenerateParams build_linear_degenerate(double m, double omega, double L, double beta,
                                                      double alpha = 0.0,
                                                      LindegMode mode = LindegMode::given_alpha,
                                                      double A_target = 1.0) {
    if (!(m > 0.0)) throw std::invalid_argument("build_linear_degenerate: m must be positive");
    if (!(omega > 0.0 && 3.0 * omega < m))
        throw std::invalid_argument(
            "build_linear_degenerate: need 0 < omega < m/3 so that kappa(3 omega) is real");
    if (!(L > 0.0)) throw std::invalid_argument("build_linear_degenerate: L must be positive");
    if (beta == 0.0) throw std::invalid_argument("build_linear_degenerate: beta must be nonzero");

    LinearDegenerateParams p;
    p.m = m;
    p.omega = omega;
    p.L = L;
    p.beta = beta;
    p.kappa1 = kappa(omega, m);
    p.kappa3 = kappa(3.0 * omega, m);

    const double sh = std::sinh(p.kappa3 * L);
    p.gamma = p.kappa3 * (1.0 + std::cosh(p.kappa3 * L) / sh);

    const double k1 = p.kappa1;
    const double denom = 2.0 * k1 - p.gamma;
    if (std::abs(denom) < 1e-12 * (1.0 + 2.0 * k1))
        throw std::runtime_error("build_linear_degenerate: degenerate coupling, 2 kappa(omega) = gamma");
    const double c = p.gamma * std::exp(-2.0 * k1 * L) / denom;
    const double one_c = 1.0 + c;

    if (mode == LindegMode::given_alpha) {
        p.alpha = alpha;
        const double A2 = 4.0 * (2.0 * k1 - alpha * one_c) / (3.0 * beta * one_c * one_c * one_c);
        if (!(A2 > 0.0)) {
            std::ostringstream msg;
            msg << "build_linear_degenerate: no real amplitude for alpha = " << alpha
                << " (A^2 = " << A2 << "); adjust alpha or beta, or use solve_for_alpha";
            throw std::runtime_error(msg.str());
        }
        p.A = std::sqrt(A2);
        p.B = c * p.A;
    } else {
        if (A_target == 0.0)
            throw std::invalid_argument("build_linear_degenerate: A_target must be nonzero");
        p.A = A_target;
        p.B = c * p.A;
        p.alpha = (2.0 * k1 - 0.75 * beta * one_c * one_c * one_c * p.A * p.A) / one_c;
    }

    // Newton polish of the 2x2 system in (A, B).
    for (int it = 0; it < 50; ++it) {
        const double s = p.A + p.B;
        const double f1 = 2.0 * k1 * p.A - p.alpha * s - 0.75 * p.beta * s * s * s;
        const double f2 = 2.0 * p.B * k1 * std::exp(k1 * L) -
                          p.gamma * (p.A * std::exp(-k1 * L) + p.B * std::exp(k1 * L));
        const double d = 3.0 * 0.75 * p.beta * s * s;  // d/ds of the cubic term
        const double j11 = 2.0 * k1 - p.alpha - d;
        const double j12 = -p.alpha - d;
        const double j21 = -p.gamma * std::exp(-k1 * L);
        const double j22 = 2.0 * k1 * std::exp(k1 * L) - p.gamma * std::exp(k1 * L);
        const double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-300) break;
        const double dA = (-f1 * j22 + f2 * j12) / det;
        const double dB = (-j11 * f2 + j21 * f1) / det;
        p.A += dA;
        p.B += dB;
        if (std::abs(dA) + std::abs(dB) < 1e-16 * (1.0 + std::abs(p.A) + std::abs(p.B))) break;
    }

    const double s = p.A + p.B;
    p.C = p.beta * s * s * s / (4.0 * p.kappa3);

    for (double r : p.residuals())
        if (!(r <= 1e-10)) {
            std::ostringstream msg;
            msg << "build_linear_degenerate: residual certification failed (";
            for (double q : p.residuals()) msg << q << " ";
            msg << ")";
            throw std::runtime_error(msg.str());
        }
    return p;
}

/// Identical cubic oscillators (F = alpha z + beta |z|^2 z) at x = 0 and
/// x = L with a wide gap; the 3-omega line is the standing wave
/// sin(k(3 omega) x) on [0, L] with k(3 omega) = pi / L.
struct WideGapParams {
    double m = 0.0;
    double L = 0.0;
    double omega = 0.0;  // (1/3) sqrt(pi^2/L^2 + m^2)
    double alpha = 0.0, beta = 0.0;
    double A = 0.0, B = 0.0;
    double kappa1 = 0.0;  // kappa(omega)
    double k3 = 0.0;      // k(3 omega) = pi / L

    std::vector<double> residuals() const {
        auto rel = [](double lhs, double rhs) {
            return std::abs(lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
        };
        const double q = std::exp(-kappa1 * L);
        const double a3 = A * A * A * (1.0 + q) * (1.0 + q) * (1.0 + q);
        std::vector<double> r;
        r.push_back(rel(2.0 * A * kappa1, alpha * A * (1.0 + q) + 0.75 * beta * a3));
        r.push_back(rel(B * k3, 0.25 * beta * a3));
        return r;
    }
};

inline double wide_gap_threshold(double m) {
    const double pi = 3.14159265358979323846;
    return pi / (2.0 * std::sqrt(2.0) * m);
}

inline WideGapParams build_wide_gap(double m, double L, double alpha, double beta) {
    const double pi = 3.14159265358979323846;
    if (!(m > 0.0)) throw std::invalid_argument("build_wide_gap: m must be positive");
    if (!(L > wide_gap_threshold(m))) {
        std::ostringstream msg;
        msg << "build_wide_gap: L = " << L << " is not above the threshold pi/(2^{3/2} m) = "
            << wide_gap_threshold(m);
        throw std::invalid_argument(msg.str());
    }
    if (beta == 0.0) throw std::invalid_argument("build_wide_gap: beta must be nonzero");

    WideGapParams p;
    p.m = m;
    p.L = L;
    p.alpha = alpha;
    p.beta = beta;
    p.k3 = pi / L;
    p.omega = std::sqrt(pi * pi / (L * L) + m * m) / 3.0;
    p.kappa1 = kappa(p.omega, m);

    const double q = std::exp(-p.kappa1 * L);
    const double feas = (2.0 * p.kappa1 / (1.0 + q) - alpha) * beta;
    if (!(feas > 0.0)) {
        std::ostringstream msg;
        msg << "build_wide_gap: infeasible parameters, (2 kappa/(1+e^{-kappa L}) - alpha) beta = "
            << feas << " must be positive";
        throw std::invalid_argument(msg.str());
    }
    const double A2 = 4.0 * (2.0 * p.kappa1 - alpha * (1.0 + q)) / (3.0 * beta * (1.0 + q) * (1.0 + q) * (1.0 + q));
    p.A = std::sqrt(A2);  // global phase freedom: take A real positive
    p.B = beta * A2 * p.A * (1.0 + q) * (1.0 + q) * (1.0 + q) / (4.0 * p.k3);

    for (double r : p.residuals())
        if (!(r <= 1e-10)) throw std::runtime_error("build_wide_gap: residual certification failed");
    return p;
}

// ---------------------------------------------------------------------------
// Exact space-time evaluators (real-valued)
// ---------------------------------------------------------------------------

inline double eval_multifreq(const LinearDegenerateParams& p, double x, double t) {
    const double s1 = std::sin(p.omega * t), s3 = std::sin(3.0 * p.omega * t);
    if (x <= 0.0) return (p.A + p.B) * std::exp(p.kappa1 * x) * s1;
    if (x <= p.L)
        return (p.A * std::exp(-p.kappa1 * x) + p.B * std::exp(p.kappa1 * x)) * s1 +
               p.C * std::sinh(p.kappa3 * x) * s3;
    return (p.A * std::exp(-p.kappa1 * x) + p.B * std::exp(p.kappa1 * (2.0 * p.L - x))) * s1 +
           p.C * std::sinh(p.kappa3 * p.L) * std::exp(-p.kappa3 * (x - p.L)) * s3;
}

inline double eval_multifreq_dt(const LinearDegenerateParams& p, double x, double t) {
    const double c1 = p.omega * std::cos(p.omega * t), c3 = 3.0 * p.omega * std::cos(3.0 * p.omega * t);
    if (x <= 0.0) return (p.A + p.B) * std::exp(p.kappa1 * x) * c1;
    if (x <= p.L)
        return (p.A * std::exp(-p.kappa1 * x) + p.B * std::exp(p.kappa1 * x)) * c1 +
               p.C * std::sinh(p.kappa3 * x) * c3;
    return (p.A * std::exp(-p.kappa1 * x) + p.B * std::exp(p.kappa1 * (2.0 * p.L - x))) * c1 +
           p.C * std::sinh(p.kappa3 * p.L) * std::exp(-p.kappa3 * (x - p.L)) * c3;
}

/// One-sided space derivative; side < 0 takes the region to the left of x.
inline double eval_multifreq_dx(const LinearDegenerateParams& p, double x, double t, int side) {
    const double s1 = std::sin(p.omega * t), s3 = std::sin(3.0 * p.omega * t);
    const double k1 = p.kappa1, k3 = p.kappa3;
    const bool left_of_0 = x < 0.0 || (x == 0.0 && side < 0);
    const bool left_of_L = x < p.L || (x == p.L && side < 0);
    if (left_of_0) return (p.A + p.B) * k1 * std::exp(k1 * x) * s1;
    if (left_of_L)
        return (-p.A * k1 * std::exp(-k1 * x) + p.B * k1 * std::exp(k1 * x)) * s1 +
               p.C * k3 * std::cosh(k3 * x) * s3;
    return (-p.A * k1 * std::exp(-k1 * x) - p.B * k1 * std::exp(k1 * (2.0 * p.L - x))) * s1 -
           p.C * k3 * std::sinh(k3 * p.L) * std::exp(-k3 * (x - p.L)) * s3;
}

inline double eval_multifreq(const WideGapParams& p, double x, double t) {
    const double s1 = std::sin(p.omega * t), s3 = std::sin(3.0 * p.omega * t);
    double v = p.A * (std::exp(-p.kappa1 * std::abs(x)) + std::exp(-p.kappa1 * std::abs(x - p.L))) * s1;
    if (x >= 0.0 && x <= p.L) v += p.B * std::sin(p.k3 * x) * s3;
    return v;
}

inline double eval_multifreq_dt(const WideGapParams& p, double x, double t) {
    const double c1 = p.omega * std::cos(p.omega * t), c3 = 3.0 * p.omega * std::cos(3.0 * p.omega * t);
    double v = p.A * (std::exp(-p.kappa1 * std::abs(x)) + std::exp(-p.kappa1 * std::abs(x - p.L))) * c1;
    if (x >= 0.0 && x <= p.L) v += p.B * std::sin(p.k3 * x) * c3;
    return v;
}

inline double eval_multifreq_dx(const WideGapParams& p, double x, double t, int side) {
    const double s1 = std::sin(p.omega * t), s3 = std::sin(3.0 * p.omega * t);
    const double k1 = p.kappa1;
    const bool left_of_0 = x < 0.0 || (x == 0.0 && side < 0);
    const bool left_of_L = x < p.L || (x == p.L && side < 0);
    double d0, dL;
    if (left_of_0)
        d0 = k1 * std::exp(k1 * x);
    else
        d0 = -k1 * std::exp(-k1 * x);
    if (left_of_L)
        dL = k1 * std::exp(-k1 * (p.L - x));
    else
        dL = -k1 * std::exp(-k1 * (x - p.L));
    double v = p.A * (d0 + dL) * s1;
    if (!left_of_0 && left_of_L) v += p.B * p.k3 * std::cos(p.k3 * x) * s3;
    return v;
}

// ---------------------------------------------------------------------------
// Jump-condition residual sampling and state sampling
// ---------------------------------------------------------------------------

struct JumpResiduals {
    std::vector<double> per_oscillator;  // max |mismatch| over one period
};

inline JumpResiduals residual_report(const LinearDegenerateParams& p, int n_times = 64) {
    const double pi = 3.14159265358979323846;
    JumpResiduals out;
    out.per_oscillator.assign(2, 0.0);
    const double period = 2.0 * pi / p.omega;
    for (int k = 0; k < n_times; ++k) {
        const double t = period * k / n_times;
        {
            const double psi0 = eval_multifreq(p, 0.0, t);
            const double jump = -eval_multifreq_dx(p, 0.0, t, +1) + eval_multifreq_dx(p, 0.0, t, -1);
            const double f = p.alpha * psi0 + p.beta * psi0 * psi0 * psi0;
            out.per_oscillator[0] = std::max(out.per_oscillator[0], std::abs(jump - f));
        }
        {
            const double psiL = eval_multifreq(p, p.L, t);
            const double jump = -eval_multifreq_dx(p, p.L, t, +1) + eval_multifreq_dx(p, p.L, t, -1);
            const double f = p.gamma * psiL;
            out.per_oscillator[1] = std::max(out.per_oscillator[1], std::abs(jump - f));
        }
    }
    return out;
}

inline JumpResiduals residual_report(const WideGapParams& p, int n_times = 64) {
    const double pi = 3.14159265358979323846;
    JumpResiduals out;
    out.per_oscillator.assign(2, 0.0);
    const double period = 2.0 * pi / p.omega;
    for (int k = 0; k < n_times; ++k) {
        const double t = period * k / n_times;
        for (int which = 0; which < 2; ++which) {
            const double X = which == 0 ? 0.0 : p.L;
            const double psiX = eval_multifreq(p, X, t);
            const double jump = -eval_multifreq_dx(p, X, t, +1) + eval_multifreq_dx(p, X, t, -1);
            const double f = p.alpha * psiX + p.beta * psiX * psiX * psiX;
            out.per_oscillator[static_cast<std::size_t>(which)] =
                std::max(out.per_oscillator[static_cast<std::size_t>(which)], std::abs(jump - f));
        }
    }
    return out;
}

template <class Params>
FieldState multifreq_state(const Params& p, const GridSpec& grid, double t) {
    FieldState s = FieldState::zero(grid, t);
    for (int j = 0; j < grid.n_points; ++j) {
        const double x = grid.x(j);
        s.psi[static_cast<std::size_t>(j)] = cplx(eval_multifreq(p, x, t), 0.0);
        s.pi[static_cast<std::size_t>(j)] = cplx(eval_multifreq_dt(p, x, t), 0.0);
    }
    return s;
}

/// The oscillator pair realizing each construction: U coefficients follow
/// from F = -grad U, so F = alpha z + beta |z|^2 z has u_1 = -alpha/2,
/// u_2 = -beta/4, and F = gamma z has u_1 = -gamma/2.
inline ModelSpec lindeg_model(const LinearDegenerateParams& p) {
    OscillatorSpec cubic;
    cubic.position = 0.0;
    cubic.coeffs = {0.0, -p.alpha / 2.0, -p.beta / 4.0};
    OscillatorSpec linear;
    linear.position = p.L;
    linear.coeffs = {0.0, -p.gamma / 2.0};
    auto model = ModelSpec::with_oscillators(p.m, {cubic, linear});
    model.allow_unbounded = true;
    return model;
}

inline ModelSpec widegap_model(const WideGapParams& p) {
    OscillatorSpec osc;
    osc.position = 0.0;
    osc.coeffs = {0.0, -p.alpha / 2.0, -p.beta / 4.0};
    OscillatorSpec osc2 = osc;
    osc2.position = p.L;
    auto model = ModelSpec::with_oscillators(p.m, {osc, osc2});
    model.allow_unbounded = !osc.bounded_below();
    return model;
}

}  // namespace kgsol
