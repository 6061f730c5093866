#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgsol {

using cplx = std::complex<double>;

/// Uniform symmetric grid on [-half_width, half_width] with an odd number of
/// nodes, so that x = 0 is always a node.
struct GridSpec {
    double half_width = 0.0;
    double dx = 0.0;
    int n_points = 0;

    static GridSpec make(double half_width, double dx) {
        if (!(half_width > 0.0) || !(dx > 0.0))
            throw std::invalid_argument("GridSpec: half_width and dx must be positive");
        const double ratio = half_width / dx;
        const double r = std::round(ratio);
        if (std::abs(ratio - r) > 1e-6 * std::max(1.0, ratio))
            throw std::invalid_argument("GridSpec: half_width must be an integer multiple of dx");
        GridSpec g;
        g.half_width = half_width;
        g.dx = dx;
        g.n_points = 2 * static_cast<int>(r) + 1;
        return g;
    }

    double x(int j) const { return -half_width + j * dx; }
    int center() const { return (n_points - 1) / 2; }

    /// Nearest node index to a position x.
    int index_near(double pos) const {
        int j = static_cast<int>(std::llround((pos + half_width) / dx));
        if (j < 0) j = 0;
        if (j >= n_points) j = n_points - 1;
        return j;
    }

    bool aligned(double pos, double tol_frac = 1e-6) const {
        const int j = index_near(pos);
        return std::abs(x(j) - pos) <= tol_frac * dx;
    }

    /// Trapezoid weight of node j (dx in the interior, dx/2 at the ends).
    double weight(int j) const {
        return (j == 0 || j == n_points - 1) ? 0.5 * dx : dx;
    }
};

/// Sampled state pair (psi, pi = d/dt psi) at a single time.
struct FieldState {
    std::vector<cplx> psi;
    std::vector<cplx> pi;
    double time = 0.0;

    static FieldState zero(const GridSpec& grid, double t = 0.0) {
        FieldState s;
        s.psi.assign(static_cast<std::size_t>(grid.n_points), cplx(0.0, 0.0));
        s.pi.assign(static_cast<std::size_t>(grid.n_points), cplx(0.0, 0.0));
        s.time = t;
        return s;
    }

    bool finite() const {
        for (const auto& z : psi)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        for (const auto& z : pi)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& z : psi) m = std::max(m, std::abs(z));
        for (const auto& z : pi) m = std::max(m, std::abs(z));
        return m;
    }
};

inline void check_same_grid(const FieldState& s, const GridSpec& grid, const char* who) {
    if (s.psi.size() != static_cast<std::size_t>(grid.n_points) ||
        s.pi.size() != static_cast<std::size_t>(grid.n_points))
        throw std::invalid_argument(std::string(who) + ": state size does not match grid");
}

/// s *= e^{i theta}
inline void rotate_phase(FieldState& s, double theta) {
    const cplx ph = std::polar(1.0, theta);
    for (auto& z : s.psi) z *= ph;
    for (auto& z : s.pi) z *= ph;
}

/// a - b (common grid assumed)
inline FieldState difference(const FieldState& a, const FieldState& b) {
    FieldState d = a;
    for (std::size_t j = 0; j < d.psi.size(); ++j) {
        d.psi[j] -= b.psi[j];
        d.pi[j] -= b.pi[j];
    }
    return d;
}

}  // namespace kgsol
