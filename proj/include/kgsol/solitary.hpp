#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgsol/detail/linalg.hpp"
#include "kgsol/detail/polyroots.hpp"
#include "kgsol/grid.hpp"
#include "kgsol/model_core.hpp"
#include "kgsol/norms.hpp"

namespace kgsol {

/// kappa(omega) = sqrt(m^2 - omega^2); only |omega| <= m admits decaying
/// profiles, and |omega| = m only the zero wave.
inline double kappa(double omega, double m) {
    if (std::abs(omega) > m)
        throw std::invalid_argument("kappa: |omega| > m, no nonzero solitary waves outside the band");
    return std::sqrt(std::max(0.0, m * m - omega * omega));
}

/// All amplitudes C > 0 with 2 kappa(omega) = F(C)/C, i.e. positive real
/// roots of 2 kappa + sum_{l>=1} 2 l u_l s^{l-1} in s = C^2.
inline std::vector<double> amplitude_roots(const std::vector<double>& coeffs, double omega, double m) {
    if (!(std::abs(omega) < m))
        throw std::invalid_argument("amplitude_roots: need |omega| < m");
    const double k = kappa(omega, m);
    std::vector<double> poly;
    if (coeffs.size() >= 2) {
        poly.resize(coeffs.size() - 1, 0.0);
        for (std::size_t l = 1; l < coeffs.size(); ++l)
            poly[l - 1] = 2.0 * static_cast<double>(l) * coeffs[l];
    } else {
        poly.assign(1, 0.0);
    }
    poly[0] += 2.0 * k;

    std::vector<double> out;
    for (double s : detail::positive_real_roots(poly)) {
        // accept relative to the size of the balanced terms
        double term_scale = 2.0 * k;
        double pw = 1.0;
        for (std::size_t l = 1; l < coeffs.size(); ++l) {
            term_scale += std::abs(2.0 * static_cast<double>(l) * coeffs[l]) * pw;
            pw *= s;
        }
        const double mismatch = std::abs(2.0 * k - force_factor(coeffs, s));
        if (mismatch <= 1e-10 * (1.0 + term_scale)) out.push_back(std::sqrt(s));
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct SolitaryWave {
    double omega = 0.0;
    double amplitude = 0.0;  // C > 0
    double kappa = 0.0;      // sqrt(m^2 - omega^2)
    std::string model_tag = "oscillator";

    static SolitaryWave make(const std::vector<double>& coeffs, double omega, double m, double C) {
        SolitaryWave w;
        w.omega = omega;
        w.kappa = kgsol::kappa(omega, m);
        w.amplitude = C;
        if (!(C > 0.0)) throw std::invalid_argument("SolitaryWave: amplitude must be positive");
        const double mismatch = std::abs(2.0 * w.kappa - force_factor(coeffs, C * C));
        if (mismatch > 1e-10 * (1.0 + 2.0 * w.kappa))
            throw std::invalid_argument("SolitaryWave: amplitude condition 2 kappa = F(C)/C violated");
        return w;
    }
};

/// Every solitary wave of the single-oscillator model at this omega.
inline std::vector<SolitaryWave> solitary_waves(const std::vector<double>& coeffs, double omega, double m) {
    std::vector<SolitaryWave> out;
    for (double C : amplitude_roots(coeffs, omega, m)) out.push_back(SolitaryWave::make(coeffs, omega, m, C));
    return out;
}

/// Sample (phi, -i omega phi) with phi = C e^{-kappa |x - center|} e^{i phase}.
inline FieldState sample_solitary(const SolitaryWave& wave, const GridSpec& grid, double phase,
                                  double center = 0.0) {
    FieldState s = FieldState::zero(grid);
    const cplx ph = std::polar(wave.amplitude, phase);
    const cplx rot = cplx(0.0, -wave.omega);
    for (int j = 0; j < grid.n_points; ++j) {
        const cplx v = ph * std::exp(-wave.kappa * std::abs(grid.x(j) - center));
        s.psi[static_cast<std::size_t>(j)] = v;
        s.pi[static_cast<std::size_t>(j)] = rot * v;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Stationary profiles for several oscillators
// ---------------------------------------------------------------------------

/// A stationary profile of an N-oscillator model, stored by its nodal values;
/// between and outside oscillators the profile is the exponential/sinh
/// interpolant determined by kappa and decay at infinity.
struct MultiProfile {
    double omega = 0.0;
    double kappa = 0.0;
    std::vector<double> positions;
    std::vector<cplx> node_values;
    double max_jump_residual = 0.0;

    cplx evaluate(double x) const {
        const int N = static_cast<int>(positions.size());
        if (N == 0) return cplx(0.0, 0.0);
        if (x <= positions.front()) return node_values.front() * std::exp(kappa * (x - positions.front()));
        if (x >= positions.back()) return node_values.back() * std::exp(-kappa * (x - positions.back()));
        int seg = 0;
        while (seg + 1 < N && x > positions[static_cast<std::size_t>(seg + 1)]) ++seg;
        const double h = positions[static_cast<std::size_t>(seg + 1)] - positions[static_cast<std::size_t>(seg)];
        const double sh = std::sinh(kappa * h);
        return (node_values[static_cast<std::size_t>(seg)] *
                    std::sinh(kappa * (positions[static_cast<std::size_t>(seg + 1)] - x)) +
                node_values[static_cast<std::size_t>(seg + 1)] *
                    std::sinh(kappa * (x - positions[static_cast<std::size_t>(seg)]))) /
               sh;
    }

    FieldState sample(const GridSpec& grid, double phase = 0.0) const {
        FieldState s = FieldState::zero(grid);
        const cplx ph = std::polar(1.0, phase);
        const cplx rot = cplx(0.0, -omega);
        for (int j = 0; j < grid.n_points; ++j) {
            const cplx v = ph * evaluate(grid.x(j));
            s.psi[static_cast<std::size_t>(j)] = v;
            s.pi[static_cast<std::size_t>(j)] = rot * v;
        }
        return s;
    }

    double max_abs_node() const {
        double v = 0.0;
        for (const auto& z : node_values) v = std::max(v, std::abs(z));
        return v;
    }
};

struct MultiProfileResult {
    std::vector<MultiProfile> profiles;  // deduplicated up to global phase
    bool newton_failures = false;        // some seeds failed to converge
};

namespace detail {

/// Jump mismatch G_J(z) = phi'(X_J+) - phi'(X_J-) + F_J(z_J) for the
/// exponential interpolant through nodal values z.
inline std::vector<cplx> multi_jump_residual(const ModelSpec& model, double kap,
                                             const std::vector<cplx>& z) {
    const int N = model.n_oscillators();
    std::vector<cplx> G(static_cast<std::size_t>(N));
    auto coth_term = [&](double h) { return kap * std::cosh(kap * h) / std::sinh(kap * h); };
    auto csch_term = [&](double h) { return kap / std::sinh(kap * h); };
    for (int J = 0; J < N; ++J) {
        cplx acc(0.0, 0.0);
        if (J == 0)
            acc -= kap * z[0];
        else {
            const double h = model.oscillators[static_cast<std::size_t>(J)].position -
                             model.oscillators[static_cast<std::size_t>(J - 1)].position;
            acc -= coth_term(h) * z[static_cast<std::size_t>(J)];
            acc += csch_term(h) * z[static_cast<std::size_t>(J - 1)];
        }
        if (J == N - 1)
            acc -= kap * z[static_cast<std::size_t>(J)];
        else {
            const double h = model.oscillators[static_cast<std::size_t>(J + 1)].position -
                             model.oscillators[static_cast<std::size_t>(J)].position;
            acc -= coth_term(h) * z[static_cast<std::size_t>(J)];
            acc += csch_term(h) * z[static_cast<std::size_t>(J + 1)];
        }
        acc += force(model.oscillators[static_cast<std::size_t>(J)].coeffs, z[static_cast<std::size_t>(J)]);
        G[static_cast<std::size_t>(J)] = acc;
    }
    return G;
}

inline double vec_norm(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

/// Newton on the 2N real unknowns (Re z_J, Im z_J).
inline bool multi_newton(const ModelSpec& model, double kap, std::vector<cplx>& z) {
    const int N = model.n_oscillators();
    const int n = 2 * N;
    for (int it = 0; it < 80; ++it) {
        auto G = multi_jump_residual(model, kap, z);
        const double gn = vec_norm(G);
        double scale = 1.0;
        for (const auto& v : z) scale = std::max(scale, std::abs(v));
        if (gn <= 1e-12 * scale) return true;

        std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);
        std::vector<double> b(static_cast<std::size_t>(n), 0.0);
        auto put = [&](int r, int c, double v) { A[static_cast<std::size_t>(r) * n + c] += v; };
        auto coth_term = [&](double h) { return kap * std::cosh(kap * h) / std::sinh(kap * h); };
        auto csch_term = [&](double h) { return kap / std::sinh(kap * h); };
        for (int J = 0; J < N; ++J) {
            double diag = 0.0;
            if (J == 0)
                diag -= kap;
            else {
                const double h = model.oscillators[static_cast<std::size_t>(J)].position -
                                 model.oscillators[static_cast<std::size_t>(J - 1)].position;
                diag -= coth_term(h);
                const double off = csch_term(h);
                put(2 * J, 2 * (J - 1), off);
                put(2 * J + 1, 2 * (J - 1) + 1, off);
            }
            if (J == N - 1)
                diag -= kap;
            else {
                const double h = model.oscillators[static_cast<std::size_t>(J + 1)].position -
                                 model.oscillators[static_cast<std::size_t>(J)].position;
                diag -= coth_term(h);
                const double off = csch_term(h);
                put(2 * J, 2 * (J + 1), off);
                put(2 * J + 1, 2 * (J + 1) + 1, off);
            }
            // d/dz of F(z) = g(|z|^2) z as a 2x2 real block
            const auto& coeffs = model.oscillators[static_cast<std::size_t>(J)].coeffs;
            const cplx zj = z[static_cast<std::size_t>(J)];
            const double r = std::norm(zj);
            const double g = force_factor(coeffs, r);
            const double gp = force_factor_deriv(coeffs, r);
            const double re = zj.real(), im = zj.imag();
            put(2 * J, 2 * J, diag + g + 2.0 * gp * re * re);
            put(2 * J, 2 * J + 1, 2.0 * gp * re * im);
            put(2 * J + 1, 2 * J, 2.0 * gp * im * re);
            put(2 * J + 1, 2 * J + 1, diag + g + 2.0 * gp * im * im);
            b[static_cast<std::size_t>(2 * J)] = -G[static_cast<std::size_t>(J)].real();
            b[static_cast<std::size_t>(2 * J + 1)] = -G[static_cast<std::size_t>(J)].imag();
        }
        if (!solve_dense(A, b, n)) return false;

        // damped update
        double lambda = 1.0;
        bool accepted = false;
        for (int attempt = 0; attempt < 12; ++attempt) {
            std::vector<cplx> trial = z;
            for (int J = 0; J < N; ++J)
                trial[static_cast<std::size_t>(J)] +=
                    lambda * cplx(b[static_cast<std::size_t>(2 * J)], b[static_cast<std::size_t>(2 * J + 1)]);
            if (vec_norm(multi_jump_residual(model, kap, trial)) < gn) {
                z = trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            // take the full step once; convergence is re-checked next loop
            for (int J = 0; J < N; ++J)
                z[static_cast<std::size_t>(J)] +=
                    cplx(b[static_cast<std::size_t>(2 * J)], b[static_cast<std::size_t>(2 * J + 1)]);
        }
    }
    auto G = multi_jump_residual(model, kap, z);
    double scale = 1.0;
    for (const auto& v : z) scale = std::max(scale, std::abs(v));
    return vec_norm(G) <= 1e-10 * scale;
}

}  // namespace detail

/// Stationary profiles of an N >= 2 oscillator model at frequency omega,
/// found by Newton from the decoupled-limit seeds (single-oscillator
/// amplitudes at each node, all sign patterns) and deduplicated up to a
/// global phase. The zero profile is always a solution and is included.
inline MultiProfileResult solitary_profiles_multi(const ModelSpec& model, double omega) {
    if (model.is_mean_field() || model.n_oscillators() == 0)
        throw std::invalid_argument("solitary_profiles_multi: oscillator models only");
    if (!(std::abs(omega) < model.mass))
        throw std::invalid_argument("solitary_profiles_multi: need |omega| < m");
    const double kap = kappa(omega, model.mass);
    const int N = model.n_oscillators();

    // seed amplitudes per node: 0 and +-(single-oscillator roots)
    std::vector<std::vector<double>> node_seeds(static_cast<std::size_t>(N));
    for (int J = 0; J < N; ++J) {
        auto& s = node_seeds[static_cast<std::size_t>(J)];
        s.push_back(0.0);
        for (double C : amplitude_roots(model.oscillators[static_cast<std::size_t>(J)].coeffs, omega, model.mass)) {
            s.push_back(C);
            s.push_back(-C);
        }
    }

    MultiProfileResult out;
    std::vector<std::vector<cplx>> found;

    std::vector<std::size_t> idx(static_cast<std::size_t>(N), 0);
    long long total = 1;
    for (const auto& s : node_seeds) total *= static_cast<long long>(s.size());
    total = std::min<long long>(total, 512);

    for (long long seed_no = 0; seed_no < total; ++seed_no) {
        std::vector<cplx> z(static_cast<std::size_t>(N));
        long long rem = seed_no;
        for (int J = 0; J < N; ++J) {
            const auto& s = node_seeds[static_cast<std::size_t>(J)];
            z[static_cast<std::size_t>(J)] = cplx(s[static_cast<std::size_t>(rem % static_cast<long long>(s.size()))], 0.0);
            rem /= static_cast<long long>(s.size());
        }
        if (!detail::multi_newton(model, kap, z)) {
            out.newton_failures = true;
            continue;
        }
        // canonical phase: largest component rotated to the positive real axis
        double best = 0.0;
        cplx lead(1.0, 0.0);
        for (const auto& v : z)
            if (std::abs(v) > best) {
                best = std::abs(v);
                lead = v;
            }
        if (best > 0.0) {
            const cplx rot = std::conj(lead) / std::abs(lead);
            for (auto& v : z) v *= rot;
        }
        bool dup = false;
        for (const auto& f : found) {
            double d = 0.0;
            for (int J = 0; J < N; ++J) d += std::abs(f[static_cast<std::size_t>(J)] - z[static_cast<std::size_t>(J)]);
            if (d <= 1e-6 * (1.0 + best)) dup = true;
        }
        if (dup) continue;
        found.push_back(z);

        MultiProfile prof;
        prof.omega = omega;
        prof.kappa = kap;
        for (const auto& osc : model.oscillators) prof.positions.push_back(osc.position);
        prof.node_values = z;
        double mj = 0.0;
        for (const auto& g : detail::multi_jump_residual(model, kap, z)) mj = std::max(mj, std::abs(g));
        prof.max_jump_residual = mj;
        out.profiles.push_back(std::move(prof));
    }
    std::sort(out.profiles.begin(), out.profiles.end(),
              [](const MultiProfile& a, const MultiProfile& b) { return a.max_abs_node() < b.max_abs_node(); });
    return out;
}

// ---------------------------------------------------------------------------
// Mean-field stationary profiles
// ---------------------------------------------------------------------------

struct MeanFieldProfiles {
    std::vector<FieldState> profiles;
    std::vector<double> s_values;  // <rho, phi> for each profile
    double sigma_h = 0.0;          // discrete resonance integral <rho, (kappa^2 - D2)^{-1} rho>
    bool degenerate = false;       // linear coupling tuned exactly to 1/sigma
};

/// Stationary profiles of the mean-field model: the scalar self-consistency
/// s = sigma * F(s) with the discrete Green's function of (kappa^2 - D2),
/// so the sampled profile solves the discrete stationary equation to
/// machine precision.
inline MeanFieldProfiles meanfield_solitary(const MeanFieldSpec& spec, double omega, double m,
                                            const GridSpec& grid) {
    if (!(std::abs(omega) < m))
        throw std::invalid_argument("meanfield_solitary: need |omega| < m (no resonance)");
    if (spec.rho.size() != static_cast<std::size_t>(grid.n_points))
        throw std::invalid_argument("meanfield_solitary: rho samples do not match grid");
    const double kap2 = m * m - omega * omega;
    const double diag = kap2 + 2.0 / (grid.dx * grid.dx);
    const double off = -1.0 / (grid.dx * grid.dx);
    const auto green = detail::solve_tridiag_const(diag, off, spec.rho);

    MeanFieldProfiles out;
    double sig = 0.0;
    for (int j = 0; j < grid.n_points; ++j)
        sig += grid.weight(j) * spec.rho[static_cast<std::size_t>(j)] * green[static_cast<std::size_t>(j)];
    out.sigma_h = sig;

    // roots of 1 + sigma * q(r) = 0 in r = s^2, where F(s)/s = -q(s^2)
    std::vector<double> poly;
    if (spec.coeffs.size() >= 2) {
        poly.resize(spec.coeffs.size() - 1, 0.0);
        for (std::size_t l = 1; l < spec.coeffs.size(); ++l)
            poly[l - 1] = sig * 2.0 * static_cast<double>(l) * spec.coeffs[l];
    } else {
        poly.assign(1, 0.0);
    }
    poly[0] += 1.0;

    bool nontrivial_poly = false;
    for (std::size_t k = 1; k < poly.size(); ++k)
        if (poly[k] != 0.0) nontrivial_poly = true;
    if (!nontrivial_poly) {
        if (std::abs(poly[0]) <= 1e-9) out.degenerate = true;  // one-parameter family
        return out;
    }

    for (double r : detail::positive_real_roots(poly)) {
        const double s = std::sqrt(r);
        const double Fs = force_factor(spec.coeffs, r) * s;
        FieldState st = FieldState::zero(grid);
        for (int j = 0; j < grid.n_points; ++j) {
            const double phi = Fs * green[static_cast<std::size_t>(j)];
            st.psi[static_cast<std::size_t>(j)] = cplx(phi, 0.0);
            st.pi[static_cast<std::size_t>(j)] = cplx(0.0, -omega * phi);
        }
        out.profiles.push_back(std::move(st));
        out.s_values.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Distance to the solitary manifold
// ---------------------------------------------------------------------------

struct ManifoldDistanceReport {
    double distance = 0.0;
    double best_omega = 0.0;
    double best_amplitude = 0.0;  // 0 for the zero wave
    double best_phase = 0.0;      // in [0, 2 pi)
    long long candidates_examined = 0;
};

struct DistanceOptions {
    int omega_samples = 257;
    // each pass shrinks the omega spacing by refine_factor; four passes put
    // the omega quantization floor (~2e-6) well below the O(dx^2) state
    // errors the acceptance-scale runs produce
    int refine_passes = 4;
    int refine_factor = 8;
    double phase_tol = 1e-6;
    // continuous (omega, phase) polish around the best grid sample; the
    // metric has a conical minimum at exact members, so without it the
    // reported distance floors at the grid resolution
    bool final_polish = true;
    double polish_phase_tol = 1e-9;
};

namespace detail {

struct DistanceBest {
    double value = std::numeric_limits<double>::infinity();
    double omega = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;
    FieldState candidate;  // unrotated
    bool has_candidate = false;
};

inline void consider_candidate(const FieldState& state, const FieldState& cand, const GridSpec& grid,
                               double m, double omega, double amplitude, double phase_tol,
                               DistanceBest& best) {
    PhaseMetric pm(state, cand, grid, m);
    const double pi = 3.14159265358979323846;
    double th_best = 0.0, v_best = pm(0.0);
    for (int k = 1; k < 32; ++k) {
        const double th = 2.0 * pi * k / 32.0;
        const double v = pm(th);
        if (v < v_best) {
            v_best = v;
            th_best = th;
        }
    }
    {
        const double th = pm.phase_seed();
        const double v = pm(th);
        if (v < v_best) {
            v_best = v;
            th_best = th;
        }
    }
    const double lo = th_best - 2.0 * pi / 32.0, hi = th_best + 2.0 * pi / 32.0;
    const double th = golden_min([&](double t) { return pm(t); }, lo, hi, phase_tol);
    const double v = pm(th);
    const double th_final = v < v_best ? th : th_best;
    const double v_final = std::min(v, v_best);
    if (v_final < best.value - 1e-15 ||
        (std::abs(v_final - best.value) <= 1e-15 && omega < best.omega)) {
        best.value = v_final;
        best.omega = omega;
        best.amplitude = amplitude;
        best.phase = th_final < 0.0 ? th_final + 2.0 * pi : th_final;
        best.candidate = cand;
        best.has_candidate = true;
    }
}

inline void scan_omega(const FieldState& state, const ModelSpec& model, const GridSpec& grid,
                       double omega, const DistanceOptions& opt, DistanceBest& best,
                       long long& examined) {
    const double m = model.mass;
    if (model.is_mean_field()) {
        auto mf = meanfield_solitary(*model.mean_field, omega, m, grid);
        for (std::size_t k = 0; k < mf.profiles.size(); ++k) {
            ++examined;
            consider_candidate(state, mf.profiles[k], grid, m, omega, mf.s_values[k], opt.phase_tol, best);
        }
        return;
    }
    const int N = model.n_oscillators();
    if (N == 1) {
        const auto& osc = model.oscillators.front();
        for (const auto& w : solitary_waves(osc.coeffs, omega, m)) {
            ++examined;
            consider_candidate(state, sample_solitary(w, grid, 0.0, osc.position), grid, m, omega,
                               w.amplitude, opt.phase_tol, best);
        }
    } else if (N >= 2) {
        auto res = solitary_profiles_multi(model, omega);
        for (const auto& prof : res.profiles) {
            if (prof.max_abs_node() <= 1e-12) continue;  // zero handled separately
            ++examined;
            consider_candidate(state, prof.sample(grid), grid, m, omega, prof.max_abs_node(),
                               opt.phase_tol, best);
        }
    }
}

}  // namespace detail

/// Distance from a state to the solitary manifold in the truncated E_F
/// metric, minimized over omega (coarse grid plus refinement passes), the
/// amplitude branch, and the global phase. The zero wave is always a
/// candidate, so the distance is finite.
inline ManifoldDistanceReport manifold_distance(const FieldState& state, const ModelSpec& model,
                                                const GridSpec& grid, DistanceOptions opt = {}) {
    check_same_grid(state, grid, "manifold_distance");
    const double m = model.mass;
    detail::DistanceBest best;
    long long examined = 0;

    // zero wave
    {
        ++examined;
        const FieldState z = FieldState::zero(grid);
        const double v = metric_E_F(state, z, grid, m);
        best.value = v;
        best.omega = 0.0;
        best.amplitude = 0.0;
        best.phase = 0.0;
        best.candidate = z;
        best.has_candidate = true;
    }

    // coarse omega grid, then refinement passes around the running optimum
    const int n0 = opt.omega_samples;
    double spacing = 2.0 * m / (n0 + 1);
    for (int i = 0; i < n0; ++i)
        detail::scan_omega(state, model, grid, -m + spacing * (i + 1), opt, best, examined);
    for (int pass = 0; pass < opt.refine_passes; ++pass) {
        const double center = best.has_candidate && best.amplitude > 0.0 ? best.omega : 0.0;
        const double fine = spacing / opt.refine_factor;
        for (int i = -opt.refine_factor; i <= opt.refine_factor; ++i) {
            const double omega = center + fine * i;
            if (!(std::abs(omega) < m)) continue;
            detail::scan_omega(state, model, grid, omega, opt, best, examined);
        }
        spacing = fine;
    }

    if (opt.final_polish && best.amplitude > 0.0) {
        DistanceOptions popt = opt;
        popt.phase_tol = opt.polish_phase_tol;
        const double lo = std::max(best.omega - 1.5 * spacing, -m * (1.0 - 1e-12));
        const double hi = std::min(best.omega + 1.5 * spacing, m * (1.0 - 1e-12));
        detail::golden_min(
            [&](double omega) {
                detail::DistanceBest local;
                detail::scan_omega(state, model, grid, omega, popt, local, examined);
                if (local.has_candidate &&
                    (local.value < best.value - 1e-18 ||
                     (std::abs(local.value - best.value) <= 1e-18 && omega < best.omega)))
                    best = local;
                return local.has_candidate ? local.value : std::numeric_limits<double>::infinity();
            },
            lo, hi, 1e-9 * m);
    }

    // Final direct-metric polish: the fast phase-resolved evaluation
    // cancels two O(1) sums and cannot see below ~1e-8 near an exact
    // member, while the direct metric of the per-node difference can.
    if (opt.final_polish && best.has_candidate && best.amplitude > 0.0) {
        auto direct_at = [&](const FieldState& cand, double th) {
            FieldState rot = cand;
            rotate_phase(rot, th);
            return metric_E_F(state, rot, grid, m);
        };
        auto polish_phase = [&](const FieldState& cand, double th0) {
            return detail::golden_min([&](double t) { return direct_at(cand, t); }, th0 - 1e-6,
                                      th0 + 1e-6, 1e-12);
        };
        best.phase = polish_phase(best.candidate, best.phase);
        if (!model.is_mean_field() && model.n_oscillators() == 1) {
            const auto& osc = model.oscillators.front();
            auto candidate_at = [&](double om) -> std::optional<FieldState> {
                if (!(std::abs(om) < m)) return std::nullopt;
                const auto ws = solitary_waves(osc.coeffs, om, m);
                if (ws.empty()) return std::nullopt;
                std::size_t pick = 0;
                for (std::size_t k = 1; k < ws.size(); ++k)
                    if (std::abs(ws[k].amplitude - best.amplitude) <
                        std::abs(ws[pick].amplitude - best.amplitude))
                        pick = k;
                return sample_solitary(ws[pick], grid, 0.0, osc.position);
            };
            const double om = detail::golden_min(
                [&](double w) {
                    const auto cand = candidate_at(w);
                    return cand ? direct_at(*cand, best.phase)
                                : std::numeric_limits<double>::infinity();
                },
                best.omega - 1e-7, best.omega + 1e-7, 1e-12);
            if (auto cand = candidate_at(om)) {
                const double th = polish_phase(*cand, best.phase);
                if (direct_at(*cand, th) < direct_at(best.candidate, best.phase)) {
                    const auto ws = solitary_waves(osc.coeffs, om, m);
                    std::size_t pick = 0;
                    for (std::size_t k = 1; k < ws.size(); ++k)
                        if (std::abs(ws[k].amplitude - best.amplitude) <
                            std::abs(ws[pick].amplitude - best.amplitude))
                            pick = k;
                    best.candidate = *cand;
                    best.omega = om;
                    best.phase = th;
                    best.amplitude = ws[pick].amplitude;
                }
            }
        }
        const double two_pi = 2.0 * 3.14159265358979323846;
        best.phase = std::fmod(std::fmod(best.phase, two_pi) + two_pi, two_pi);
    }

    ManifoldDistanceReport rep;
    rep.best_omega = best.omega;
    rep.best_amplitude = best.amplitude;
    rep.best_phase = best.phase;
    rep.candidates_examined = examined;
    // recompute the reported distance directly against the chosen candidate
    FieldState rotated = best.candidate;
    rotate_phase(rotated, best.phase);
    rep.distance = metric_E_F(state, rotated, grid, m);
    return rep;
}

}  // namespace kgsol
