#pragma once

#include <cmath>
#include <complex>
#include <iostream>
#include <map>
#include <stdexcept>
#include <vector>

#include "kgsol/grid.hpp"
#include "kgsol/model_core.hpp"

namespace kgsol {

namespace detail {

/// |pi|^2 + |D psi|^2 + m^2 |psi|^2 per node. The gradient term averages the
/// two adjacent cell-midpoint differences (one-sided at the ends): profiles
/// of concentrated couplings have kinks at grid nodes, where a centered
/// stencil would lose the whole kink cell and degrade the quadrature to
/// first order.
inline std::vector<double> energy_density(const FieldState& s, const GridSpec& grid, double m) {
    const int n = grid.n_points;
    std::vector<double> dens(static_cast<std::size_t>(n), 0.0);
    const double inv_dx2 = 1.0 / (grid.dx * grid.dx);
    const double m2 = m * m;
    for (int j = 0; j < n; ++j) {
        const std::size_t k = static_cast<std::size_t>(j);
        double grad2;
        if (j == 0)
            grad2 = std::norm(s.psi[1] - s.psi[0]) * inv_dx2;
        else if (j == n - 1)
            grad2 = std::norm(s.psi[k] - s.psi[k - 1]) * inv_dx2;
        else
            grad2 = 0.5 * (std::norm(s.psi[k] - s.psi[k - 1]) + std::norm(s.psi[k + 1] - s.psi[k])) * inv_dx2;
        dens[k] = std::norm(s.pi[k]) + grad2 + m2 * std::norm(s.psi[k]);
    }
    return dens;
}

inline double trapezoid_range(const std::vector<double>& dens, const GridSpec& grid, int lo, int hi) {
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) {
        const double w = (j == lo || j == hi) ? 0.5 * grid.dx : grid.dx;
        sum += w * dens[static_cast<std::size_t>(j)];
    }
    return sum;
}

/// Sum over a node range with full cell weights except at the two domain
/// ends. Unlike a trapezoid cut, this makes the restriction exactly local:
/// data supported strictly inside |x| < R contributes identically for every
/// larger R, and the full range reproduces the global trapezoid.
inline double range_sum(const std::vector<double>& dens, const GridSpec& grid, int lo, int hi) {
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += grid.weight(j) * dens[static_cast<std::size_t>(j)];
    return sum;
}

}  // namespace detail

/// Total Hamiltonian: field part plus the oscillator or mean-field potential.
inline double energy(const FieldState& s, const ModelSpec& model, const GridSpec& grid) {
    check_same_grid(s, grid, "energy");
    const auto dens = detail::energy_density(s, grid, model.mass);
    double e = 0.5 * detail::trapezoid_range(dens, grid, 0, grid.n_points - 1);
    for (const auto& osc : model.oscillators) {
        const int j = grid.index_near(osc.position);
        e += potential(osc.coeffs, s.psi[static_cast<std::size_t>(j)]);
    }
    if (model.mean_field) {
        const auto& mf = *model.mean_field;
        cplx inner(0.0, 0.0);
        for (int j = 0; j < grid.n_points; ++j)
            inner += grid.weight(j) * mf.rho[static_cast<std::size_t>(j)] * s.psi[static_cast<std::size_t>(j)];
        e += potential(mf.coeffs, inner);
    }
    return e;
}

/// Conserved charge Q = (i/2) integral of (conj(psi) pi - conj(pi) psi).
inline double charge(const FieldState& s, const GridSpec& grid) {
    check_same_grid(s, grid, "charge");
    double q = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const cplx z = std::conj(s.psi[static_cast<std::size_t>(j)]) * s.pi[static_cast<std::size_t>(j)];
        q += grid.weight(j) * (-z.imag());
    }
    return q;
}

/// Energy seminorm over |x| <= R.
inline double seminorm_E_R(const FieldState& s, const GridSpec& grid, double m, double R) {
    check_same_grid(s, grid, "seminorm_E_R");
    if (R > grid.half_width) {
        std::cerr << "seminorm_E_R: R = " << R << " exceeds half_width, clamping\n";
        R = grid.half_width;
    }
    if (!(R > 0.0)) throw std::invalid_argument("seminorm_E_R: R must be positive");
    const auto dens = detail::energy_density(s, grid, m);
    const int c = grid.center();
    int half = static_cast<int>(std::floor(R / grid.dx + 1e-9));
    half = std::min(half, c);
    return std::sqrt(detail::range_sum(dens, grid, c - half, c + half));
}

/// Global energy norm (seminorm at R = half_width).
inline double norm_E(const FieldState& s, const GridSpec& grid, double m) {
    const auto dens = detail::energy_density(s, grid, m);
    return std::sqrt(detail::trapezoid_range(dens, grid, 0, grid.n_points - 1));
}

namespace detail {

inline int metric_R_max(const GridSpec& grid) {
    const int r = static_cast<int>(std::floor(grid.half_width + 1e-9));
    if (r < 1) throw std::invalid_argument("metric: half_width must be at least 1");
    return r;
}

}  // namespace detail

/// Weighted-sum metric sum_{R>=1} 2^{-R} ||.||_{E,R}, truncated at
/// R_max = floor(half_width); the tail collapses to 2^{-R_max} times the
/// full-domain seminorm because each term with R > half_width equals it.
inline double metric_E_F(const FieldState& a, const FieldState& b, const GridSpec& grid, double m) {
    check_same_grid(a, grid, "metric_E_F");
    check_same_grid(b, grid, "metric_E_F");
    const FieldState d = difference(a, b);
    const auto dens = detail::energy_density(d, grid, m);
    const int c = grid.center();
    const int r_max = detail::metric_R_max(grid);

    double total = 0.0;
    double w = 1.0;
    for (int R = 1; R <= r_max; ++R) {
        w *= 0.5;
        int half = static_cast<int>(std::floor(R / grid.dx + 1e-9));
        half = std::min(half, c);
        total += w * std::sqrt(detail::range_sum(dens, grid, c - half, c + half));
    }
    total += w * std::sqrt(detail::range_sum(dens, grid, 0, grid.n_points - 1));
    return total;
}

namespace detail {

/// Phase-resolved metric between a fixed state and e^{i theta} * candidate:
/// per node the energy density of (a - e^{i theta} b) is
/// u_j - 2 Re(e^{i theta} v_j), so each seminorm is available from two
/// prefix sums and a theta sweep costs O(R_max).
class PhaseMetric {
public:
    PhaseMetric(const FieldState& a, const FieldState& b, const GridSpec& grid, double m)
        : grid_(grid) {
        const int n = grid.n_points;
        const double inv_dx2 = 1.0 / (grid.dx * grid.dx);
        const double m2 = m * m;
        std::vector<double> u(static_cast<std::size_t>(n));
        std::vector<cplx> v(static_cast<std::size_t>(n));
        // cell-midpoint differences, matching energy_density
        std::vector<cplx> da(static_cast<std::size_t>(n - 1)), db(static_cast<std::size_t>(n - 1));
        for (int j = 0; j + 1 < n; ++j) {
            const std::size_t k = static_cast<std::size_t>(j);
            da[k] = a.psi[k + 1] - a.psi[k];
            db[k] = b.psi[k + 1] - b.psi[k];
        }
        for (int j = 0; j < n; ++j) {
            const std::size_t k = static_cast<std::size_t>(j);
            double grad_u;
            cplx grad_v;
            if (j == 0) {
                grad_u = (std::norm(da[0]) + std::norm(db[0])) * inv_dx2;
                grad_v = db[0] * std::conj(da[0]) * inv_dx2;
            } else if (j == n - 1) {
                grad_u = (std::norm(da[k - 1]) + std::norm(db[k - 1])) * inv_dx2;
                grad_v = db[k - 1] * std::conj(da[k - 1]) * inv_dx2;
            } else {
                grad_u = 0.5 * (std::norm(da[k - 1]) + std::norm(db[k - 1]) + std::norm(da[k]) + std::norm(db[k])) * inv_dx2;
                grad_v = 0.5 * (db[k - 1] * std::conj(da[k - 1]) + db[k] * std::conj(da[k])) * inv_dx2;
            }
            u[k] = std::norm(a.pi[k]) + std::norm(b.pi[k]) + grad_u +
                   m2 * (std::norm(a.psi[k]) + std::norm(b.psi[k]));
            v[k] = b.pi[k] * std::conj(a.pi[k]) + grad_v + m2 * b.psi[k] * std::conj(a.psi[k]);
        }
        // Trapezoid prefix sums from the center outwards.
        const int c = grid.center();
        r_max_ = metric_R_max(grid);
        su_.resize(static_cast<std::size_t>(r_max_) + 1);
        sv_.resize(static_cast<std::size_t>(r_max_) + 1);
        for (int R = 1; R <= r_max_; ++R) {
            int half = static_cast<int>(std::floor(R / grid.dx + 1e-9));
            half = std::min(half, c);
            double suv = 0.0;
            cplx svv(0.0, 0.0);
            for (int j = c - half; j <= c + half; ++j) {
                const double w = grid.weight(j);
                suv += w * u[static_cast<std::size_t>(j)];
                svv += w * v[static_cast<std::size_t>(j)];
            }
            su_[static_cast<std::size_t>(R)] = suv;
            sv_[static_cast<std::size_t>(R)] = svv;
        }
        double suv = 0.0;
        cplx svv(0.0, 0.0);
        for (int j = 0; j < n; ++j) {
            suv += grid.weight(j) * u[static_cast<std::size_t>(j)];
            svv += grid.weight(j) * v[static_cast<std::size_t>(j)];
        }
        su_[0] = suv;  // slot 0 holds the full-domain sums
        sv_[0] = svv;
    }

    double operator()(double theta) const {
        const cplx ph = std::polar(1.0, theta);
        double total = 0.0;
        double w = 1.0;
        for (int R = 1; R <= r_max_; ++R) {
            w *= 0.5;
            const double q = su_[static_cast<std::size_t>(R)] - 2.0 * (ph * sv_[static_cast<std::size_t>(R)]).real();
            total += w * std::sqrt(std::max(0.0, q));
        }
        const double qf = su_[0] - 2.0 * (ph * sv_[0]).real();
        total += w * std::sqrt(std::max(0.0, qf));
        return total;
    }

    /// The phase maximizing the full-domain cross term; for near-members all
    /// seminorm cross terms align, so this is essentially the optimum.
    double phase_seed() const {
        return std::abs(sv_[0]) > 0.0 ? -std::arg(sv_[0]) : 0.0;
    }

private:
    GridSpec grid_;
    int r_max_ = 1;
    std::vector<double> su_;
    std::vector<cplx> sv_;
};

/// Golden-section minimum of f on [lo, hi] to the given x tolerance.
template <class F>
double golden_min(F&& f, double lo, double hi, double xtol) {
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

}  // namespace kgsol
