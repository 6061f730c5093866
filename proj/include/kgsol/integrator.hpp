#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgsol/grid.hpp"
#include "kgsol/model_core.hpp"
#include "kgsol/norms.hpp"
#include "kgsol/spectrum.hpp"

namespace kgsol {

enum class BoundaryKind { transparent, dirichlet, periodic };

inline std::string to_string(BoundaryKind bc) {
    switch (bc) {
        case BoundaryKind::transparent: return "transparent";
        case BoundaryKind::dirichlet: return "dirichlet";
        case BoundaryKind::periodic: return "periodic";
    }
    return "?";
}

struct SchemeParams {
    double dt = 0.0;
    BoundaryKind bc = BoundaryKind::transparent;
    bool buffer_check = false;    // flag runs whose light cone touched the boundary
    double overflow_guard = 1e12;

    double cfl(const GridSpec& grid) const { return dt / grid.dx; }

    void validate(const GridSpec& grid) const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("SchemeParams: dt must be positive");
        if (!(cfl(grid) < 1.0))
            throw std::invalid_argument("SchemeParams: cfl = dt/dx must be below 1 for stability");
    }
};

enum class RunStatus { completed, boundary_contaminated, blown_up };

inline std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::completed: return "completed";
        case RunStatus::boundary_contaminated: return "boundary_contaminated";
        case RunStatus::blown_up: return "blown_up";
    }
    return "?";
}

struct DiagRecord {
    double time = 0.0;
    double energy = 0.0;
    double charge = 0.0;
    std::map<int, double> seminorms;          // R -> ||.||_{E,R}
    std::optional<double> ef_metric_to_S;     // filled on the distance cadence
    std::optional<SpectrumReport> spectral;   // filled by reporting passes
};

struct EvolveResult {
    FieldState final;
    std::vector<DiagRecord> records;
    std::vector<TraceSeries> traces;          // one per oscillator, then per probe
    std::vector<double> trace_positions;
    RunStatus status = RunStatus::completed;
    long long steps = 0;
    double sentinel_max = 0.0;                // max |psi| seen next to the boundary
};

struct DiagnosticsConfig {
    std::vector<int> seminorm_R = {1, 2, 5, 10};
    int distance_every = 0;  // every k-th record; 0 disables
    std::function<double(const FieldState&)> distance_fn;
    std::vector<double> probe_positions;
    long long snapshot_every = 0;  // steps; 0 disables
    std::function<void(const FieldState&, long long)> snapshot_fn;
};

namespace detail {

struct BoundContext {
    std::vector<int> osc_nodes;
    double inv_dx2 = 0.0;
    double m2 = 0.0;
    int n = 0;
};

inline BoundContext bind_model(const ModelSpec& model, const GridSpec& grid) {
    BoundContext ctx;
    ctx.n = grid.n_points;
    ctx.inv_dx2 = 1.0 / (grid.dx * grid.dx);
    ctx.m2 = model.mass * model.mass;
    for (const auto& osc : model.oscillators) {
        if (!grid.aligned(osc.position))
            throw std::invalid_argument("integrator: oscillator at " + std::to_string(osc.position) +
                                        " does not sit on a grid node");
        ctx.osc_nodes.push_back(grid.index_near(osc.position));
    }
    if (model.mean_field && model.mean_field->rho.size() != static_cast<std::size_t>(grid.n_points))
        throw std::invalid_argument("integrator: mean-field rho does not match grid");
    if (!model_bounded_below(model) && !model.allow_unbounded)
        throw std::invalid_argument(
            "integrator: potential not bounded below; set allow_unbounded to run anyway");
    return ctx;
}

/// acceleration = D2 psi - m^2 psi + coupling, with the point coupling
/// entering as F(psi_j)/dx at its node (single-node delta weight).
inline void acceleration(const FieldState& s, const ModelSpec& model, const GridSpec& grid,
                         const BoundContext& ctx, BoundaryKind bc, std::vector<cplx>& a) {
    const int n = ctx.n;
    a.assign(static_cast<std::size_t>(n), cplx(0.0, 0.0));
    const double inv_dx2 = ctx.inv_dx2;
    const double m2 = ctx.m2;
    for (int j = 1; j + 1 < n; ++j) {
        const std::size_t k = static_cast<std::size_t>(j);
        a[k] = (s.psi[k + 1] - 2.0 * s.psi[k] + s.psi[k - 1]) * inv_dx2 - m2 * s.psi[k];
    }
    if (bc == BoundaryKind::periodic) {
        a[0] = (s.psi[1] - 2.0 * s.psi[0] + s.psi[static_cast<std::size_t>(n - 1)]) * inv_dx2 - m2 * s.psi[0];
        a[static_cast<std::size_t>(n - 1)] =
            (s.psi[0] - 2.0 * s.psi[static_cast<std::size_t>(n - 1)] + s.psi[static_cast<std::size_t>(n - 2)]) *
                inv_dx2 -
            m2 * s.psi[static_cast<std::size_t>(n - 1)];
    }
    for (std::size_t i = 0; i < ctx.osc_nodes.size(); ++i) {
        const int j = ctx.osc_nodes[i];
        a[static_cast<std::size_t>(j)] +=
            force(model.oscillators[i].coeffs, s.psi[static_cast<std::size_t>(j)]) / grid.dx;
    }
    if (model.mean_field) {
        const auto& mf = *model.mean_field;
        cplx inner(0.0, 0.0);
        for (int j = 0; j < n; ++j)
            inner += grid.weight(j) * mf.rho[static_cast<std::size_t>(j)] * s.psi[static_cast<std::size_t>(j)];
        const cplx f = force(mf.coeffs, inner);
        for (int j = 0; j < n; ++j)
            a[static_cast<std::size_t>(j)] += mf.rho[static_cast<std::size_t>(j)] * f;
    }
}

/// One velocity-Verlet step; time-reversible, explicit, second order.
inline void step_inplace(FieldState& s, const ModelSpec& model, const GridSpec& grid,
                         const BoundContext& ctx, const SchemeParams& scheme, std::vector<cplx>& a) {
    const int n = ctx.n;
    const double dt = scheme.dt;
    const double half = 0.5 * dt;

    if (scheme.bc == BoundaryKind::dirichlet) {
        s.psi[0] = s.psi[static_cast<std::size_t>(n - 1)] = cplx(0.0, 0.0);
        s.pi[0] = s.pi[static_cast<std::size_t>(n - 1)] = cplx(0.0, 0.0);
    }

    const cplx left_old0 = s.psi[0];
    const cplx left_old1 = s.psi[1];
    const cplx right_old0 = s.psi[static_cast<std::size_t>(n - 1)];
    const cplx right_old1 = s.psi[static_cast<std::size_t>(n - 2)];

    acceleration(s, model, grid, ctx, scheme.bc, a);
    const bool full_range = scheme.bc == BoundaryKind::periodic;
    const int lo = full_range ? 0 : 1;
    const int hi = full_range ? n - 1 : n - 2;
    for (int j = lo; j <= hi; ++j) {
        const std::size_t k = static_cast<std::size_t>(j);
        s.pi[k] += half * a[k];
        s.psi[k] += dt * s.pi[k];
    }

    if (scheme.bc == BoundaryKind::transparent) {
        // outgoing d/dt psi = +- d/dx psi, discretized one-sided in x and t
        // around the staggered edge cell (Mur form)
        const double c = scheme.cfl(grid);
        const double w = (c - 1.0) / (c + 1.0);
        s.psi[0] = left_old1 + w * (s.psi[1] - left_old0);
        s.psi[static_cast<std::size_t>(n - 1)] =
            right_old1 + w * (s.psi[static_cast<std::size_t>(n - 2)] - right_old0);
        s.pi[0] = (s.psi[0] - left_old0) / dt;
        s.pi[static_cast<std::size_t>(n - 1)] = (s.psi[static_cast<std::size_t>(n - 1)] - right_old0) / dt;
    } else if (scheme.bc == BoundaryKind::dirichlet) {
        s.psi[0] = s.psi[static_cast<std::size_t>(n - 1)] = cplx(0.0, 0.0);
        s.pi[0] = s.pi[static_cast<std::size_t>(n - 1)] = cplx(0.0, 0.0);
    }

    acceleration(s, model, grid, ctx, scheme.bc, a);
    for (int j = lo; j <= hi; ++j) s.pi[static_cast<std::size_t>(j)] += half * a[static_cast<std::size_t>(j)];

    s.time += dt;
}

}  // namespace detail

/// Functional single step (the building block of evolve).
inline FieldState step(const FieldState& state, const ModelSpec& model, const GridSpec& grid,
                       const SchemeParams& scheme) {
    check_same_grid(state, grid, "step");
    scheme.validate(grid);
    auto ctx = detail::bind_model(model, grid);
    FieldState s = state;
    std::vector<cplx> a;
    detail::step_inplace(s, model, grid, ctx, scheme, a);
    return s;
}

/// The literal edge relations: transparent sets pi = +-(one-sided d/dx psi),
/// dirichlet pins the edge values, periodic is index wrapping (no-op here).
inline void apply_boundary(FieldState& s, const GridSpec& grid, const SchemeParams& scheme) {
    check_same_grid(s, grid, "apply_boundary");
    const int n = grid.n_points;
    switch (scheme.bc) {
        case BoundaryKind::transparent:
            s.pi[0] = (s.psi[1] - s.psi[0]) / grid.dx;
            s.pi[static_cast<std::size_t>(n - 1)] =
                -(s.psi[static_cast<std::size_t>(n - 1)] - s.psi[static_cast<std::size_t>(n - 2)]) / grid.dx;
            break;
        case BoundaryKind::dirichlet:
            s.psi[0] = s.psi[static_cast<std::size_t>(n - 1)] = cplx(0.0, 0.0);
            s.pi[0] = s.pi[static_cast<std::size_t>(n - 1)] = cplx(0.0, 0.0);
            break;
        case BoundaryKind::periodic: break;
    }
}

/// Evolve initial data to time T, sampling diagnostics every sample_every
/// steps and recording psi at every oscillator and probe each step.
/// Identical inputs produce bit-identical results.
inline EvolveResult evolve(const FieldState& state0, const ModelSpec& model, const GridSpec& grid,
                           const SchemeParams& scheme, double T, long long sample_every,
                           const DiagnosticsConfig& diag = {}) {
    check_same_grid(state0, grid, "evolve");
    scheme.validate(grid);
    if (T < 0.0) throw std::invalid_argument("evolve: T must be nonnegative");
    if (sample_every < 1) sample_every = 1;
    auto ctx = detail::bind_model(model, grid);

    const long long n_steps = static_cast<long long>(std::llround(T / scheme.dt));

    EvolveResult result;
    for (std::size_t i = 0; i < ctx.osc_nodes.size(); ++i)
        result.trace_positions.push_back(model.oscillators[i].position);
    std::vector<int> trace_nodes = ctx.osc_nodes;
    for (double p : diag.probe_positions) {
        if (!grid.aligned(p, 0.5))
            throw std::invalid_argument("evolve: probe position outside grid");
        trace_nodes.push_back(grid.index_near(p));
        result.trace_positions.push_back(grid.x(grid.index_near(p)));
    }
    result.traces.assign(trace_nodes.size(), TraceSeries{state0.time, scheme.dt, {}});
    for (auto& tr : result.traces) tr.values.reserve(static_cast<std::size_t>(n_steps) + 1);

    FieldState s = state0;
    std::vector<cplx> a;
    long long record_index = 0;

    auto sample_traces = [&]() {
        for (std::size_t k = 0; k < trace_nodes.size(); ++k)
            result.traces[k].values.push_back(s.psi[static_cast<std::size_t>(trace_nodes[k])]);
    };
    auto sample_record = [&]() {
        DiagRecord rec;
        rec.time = s.time;
        rec.energy = energy(s, model, grid);
        rec.charge = charge(s, grid);
        for (int R : diag.seminorm_R)
            rec.seminorms[R] = seminorm_E_R(s, grid, model.mass, static_cast<double>(R));
        if (diag.distance_every > 0 && diag.distance_fn && record_index % diag.distance_every == 0)
            rec.ef_metric_to_S = diag.distance_fn(s);
        ++record_index;
        result.records.push_back(std::move(rec));
    };
    auto update_sentinel = [&]() {
        const int n = grid.n_points;
        result.sentinel_max = std::max({result.sentinel_max, std::abs(s.psi[1]),
                                        std::abs(s.psi[static_cast<std::size_t>(n - 2)])});
    };

    sample_traces();
    sample_record();
    update_sentinel();
    const double scale0 = std::max(1.0, s.max_abs());

    for (long long step_no = 1; step_no <= n_steps; ++step_no) {
        detail::step_inplace(s, model, grid, ctx, scheme, a);
        sample_traces();
        update_sentinel();
        if (step_no % sample_every == 0 || step_no == n_steps) {
            if (!s.finite() || s.max_abs() > scheme.overflow_guard) {
                result.status = RunStatus::blown_up;
                result.steps = step_no;
                result.final = s;
                return result;
            }
            sample_record();
        }
        if (diag.snapshot_every > 0 && diag.snapshot_fn && step_no % diag.snapshot_every == 0)
            diag.snapshot_fn(s, step_no);
    }

    result.steps = n_steps;
    result.final = s;
    if (scheme.buffer_check && result.sentinel_max > 1e-12 * scale0)
        result.status = RunStatus::boundary_contaminated;
    return result;
}

/// Free Klein-Gordon evolution (all couplings removed); m = 0 is allowed
/// here for pure transport experiments.
inline EvolveResult evolve_free(const FieldState& state0, double m, const GridSpec& grid,
                                const SchemeParams& scheme, double T, long long sample_every,
                                const DiagnosticsConfig& diag = {}) {
    ModelSpec model;
    model.mass = m;
    if (!(m >= 0.0)) throw std::invalid_argument("evolve_free: m must be nonnegative");
    return evolve(state0, model, grid, scheme, T, sample_every, diag);
}

}  // namespace kgsol
