#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "kgsol/grid.hpp"

namespace kgsol {

// ---------------------------------------------------------------------------
// Polynomial potentials U(z) = sum_l u_l |z|^{2l} and their forces
// F(z) = -grad U(z) = -(sum_{l>=1} 2 l u_l |z|^{2l-2}) z.
//
// The force factors as g(|z|^2) z with g real, so equivariance
// F(e^{i theta} z) = e^{i theta} F(z) holds exactly up to rounding.
// ---------------------------------------------------------------------------

/// g(r) = -sum_{l>=1} 2 l u_l r^{l-1}, the real radial force factor.
inline double force_factor(const std::vector<double>& coeffs, double r) {
    double g = 0.0;
    for (std::size_t l = coeffs.size(); l-- > 1;)
        g = g * r - 2.0 * static_cast<double>(l) * coeffs[l];
    return g;
}

inline cplx force(const std::vector<double>& coeffs, cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("force: non-finite input");
    return force_factor(coeffs, std::norm(z)) * z;
}

inline double potential(const std::vector<double>& coeffs, cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("potential: non-finite input");
    const double r = std::norm(z);
    double u = 0.0;
    for (std::size_t l = coeffs.size(); l-- > 0;) u = u * r + coeffs[l];
    return u;
}

/// d/dr of the radial force factor, used by Newton solvers.
inline double force_factor_deriv(const std::vector<double>& coeffs, double r) {
    double d = 0.0;
    for (std::size_t l = coeffs.size(); l-- > 2;)
        d = d * r - 2.0 * static_cast<double>(l) * static_cast<double>(l - 1) * coeffs[l];
    return d;
}

// ---------------------------------------------------------------------------
// Model descriptions
// ---------------------------------------------------------------------------

/// Point oscillator at x = position with potential coefficients u_0..u_p.
struct OscillatorSpec {
    double position = 0.0;
    std::vector<double> coeffs;  // u_0 .. u_degree

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    /// u_p > 0 and p >= 2.
    bool strictly_nonlinear() const {
        const int p = degree();
        return p >= 2 && coeffs.back() > 0.0;
    }

    /// inf U > -infinity: the leading nonconstant coefficient is positive,
    /// or the potential is constant.
    bool bounded_below() const {
        for (std::size_t l = coeffs.size(); l-- > 1;) {
            if (coeffs[l] != 0.0) return coeffs[l] > 0.0;
        }
        return true;
    }
};

/// Mean-field coupling: rho sampled on the working grid plus the polynomial.
struct MeanFieldSpec {
    std::vector<double> rho;     // samples over grid nodes
    std::vector<double> coeffs;  // u_0 .. u_degree

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    bool strictly_nonlinear() const {
        const int p = degree();
        return p >= 2 && coeffs.back() > 0.0;
    }
    bool bounded_below() const {
        for (std::size_t l = coeffs.size(); l-- > 1;) {
            if (coeffs[l] != 0.0) return coeffs[l] > 0.0;
        }
        return true;
    }
};

struct ModelSpec {
    double mass = 1.0;
    std::vector<OscillatorSpec> oscillators;
    std::optional<MeanFieldSpec> mean_field;
    /// Permit potentials that are not bounded below (the well-posedness
    /// hypothesis) for controlled experiments.
    bool allow_unbounded = false;

    bool is_mean_field() const { return mean_field.has_value(); }
    int n_oscillators() const { return static_cast<int>(oscillators.size()); }

    static ModelSpec free_field(double mass) {
        ModelSpec m;
        m.mass = mass;
        return m;
    }

    static ModelSpec with_oscillators(double mass, std::vector<OscillatorSpec> osc) {
        ModelSpec m;
        m.mass = mass;
        m.oscillators = std::move(osc);
        if (!(mass > 0.0)) throw std::invalid_argument("ModelSpec: mass must be positive");
        for (std::size_t i = 1; i < m.oscillators.size(); ++i)
            if (!(m.oscillators[i - 1].position < m.oscillators[i].position))
                throw std::invalid_argument("ModelSpec: oscillator positions must be strictly increasing");
        return m;
    }

    static ModelSpec with_mean_field(double mass, MeanFieldSpec mf) {
        ModelSpec m;
        m.mass = mass;
        if (!(mass > 0.0)) throw std::invalid_argument("ModelSpec: mass must be positive");
        bool nonzero = false;
        for (double r : mf.rho)
            if (r != 0.0) nonzero = true;
        if (!nonzero) throw std::invalid_argument("ModelSpec: rho must not be identically zero");
        m.mean_field = std::move(mf);
        return m;
    }
};

// ---------------------------------------------------------------------------
// Gap condition between neighbouring oscillators
// ---------------------------------------------------------------------------

struct GapCheck {
    bool holds = true;
    bool vacuous = false;  // fewer than two oscillators
    double lhs = 0.0;      // min over gaps of sqrt(pi^2/gap^2 + m^2)
    double rhs = 0.0;      // m * max_J min(prod_{l<=J}(2p_l-1), prod_{l>=J}(2p_l-1))
};

inline GapCheck check_gap_condition(const ModelSpec& model) {
    if (model.is_mean_field())
        throw std::invalid_argument("check_gap_condition: oscillator models only");
    GapCheck out;
    const int N = model.n_oscillators();
    if (N < 2) {
        out.vacuous = true;
        out.holds = true;
        return out;
    }
    for (const auto& osc : model.oscillators)
        if (!osc.strictly_nonlinear())
            throw std::invalid_argument(
                "check_gap_condition: all oscillators must be strictly nonlinear (u_p > 0, p >= 2)");

    const double pi = 3.14159265358979323846;
    double lhs = std::numeric_limits<double>::infinity();
    for (int j = 0; j + 1 < N; ++j) {
        const double gap = model.oscillators[j + 1].position - model.oscillators[j].position;
        lhs = std::min(lhs, std::sqrt(pi * pi / (gap * gap) + model.mass * model.mass));
    }

    double best = 0.0;
    for (int j = 0; j < N; ++j) {
        double left = 1.0, right = 1.0;
        for (int l = 0; l <= j; ++l) left *= 2.0 * model.oscillators[l].degree() - 1.0;
        for (int l = j; l < N; ++l) right *= 2.0 * model.oscillators[l].degree() - 1.0;
        best = std::max(best, std::min(left, right));
    }

    out.lhs = lhs;
    out.rhs = model.mass * best;
    out.holds = lhs > out.rhs;
    return out;
}

// ---------------------------------------------------------------------------
// Model/grid validation: findings, not exceptions
// ---------------------------------------------------------------------------

struct Finding {
    std::string code;
    std::string message;
};

inline std::vector<Finding> validate_model(const ModelSpec& model, const GridSpec& grid) {
    std::vector<Finding> out;
    if (!(model.mass > 0.0)) out.push_back({"bad_mass", "mass must be positive"});

    auto check_poly = [&](const std::vector<double>& coeffs, const std::string& who,
                          bool strictly, bool bounded) {
        if (coeffs.empty()) {
            out.push_back({"empty_coeffs", who + ": no potential coefficients"});
            return;
        }
        if (coeffs.size() >= 2 && coeffs.back() == 0.0)
            out.push_back({"zero_leading", who + ": leading coefficient u_p is zero"});
        if (!strictly)
            out.push_back({"not_strictly_nonlinear",
                           who + ": not strictly nonlinear (needs u_p > 0 and p >= 2)"});
        if (!bounded)
            out.push_back({"unbounded_potential",
                           who + ": potential not bounded below (well-posedness hypothesis fails)"});
    };

    for (std::size_t i = 0; i < model.oscillators.size(); ++i) {
        const auto& osc = model.oscillators[i];
        const std::string who = "oscillator " + std::to_string(i);
        if (!grid.aligned(osc.position))
            out.push_back({"off_grid_oscillator",
                           who + ": position " + std::to_string(osc.position) +
                               " is not a grid node (dx = " + std::to_string(grid.dx) + ")"});
        check_poly(osc.coeffs, who, osc.strictly_nonlinear(), osc.bounded_below());
    }
    if (model.mean_field) {
        const auto& mf = *model.mean_field;
        if (mf.rho.size() != static_cast<std::size_t>(grid.n_points))
            out.push_back({"rho_grid_mismatch", "mean field: rho sample count differs from grid"});
        bool nonzero = false;
        for (double r : mf.rho)
            if (r != 0.0) nonzero = true;
        if (!nonzero) out.push_back({"rho_zero", "mean field: rho is identically zero"});
        check_poly(mf.coeffs, "mean field", mf.strictly_nonlinear(), mf.bounded_below());
    }
    return out;
}

/// True when every potential in the model is bounded below.
inline bool model_bounded_below(const ModelSpec& model) {
    for (const auto& osc : model.oscillators)
        if (!osc.bounded_below()) return false;
    if (model.mean_field && !model.mean_field->bounded_below()) return false;
    return true;
}

}  // namespace kgsol
