#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "kgsol/integrator.hpp"
#include "kgsol/norms.hpp"
#include "kgsol/solitary.hpp"

using namespace kgsol;

namespace {

constexpr double kPi = 3.14159265358979323846;

ModelSpec double_well_model() {
    OscillatorSpec osc;
    osc.position = 0.0;
    osc.coeffs = {0.0, -1.0, 0.25};
    return ModelSpec::with_oscillators(1.0, {osc});
}

FieldState right_moving_pulse(const GridSpec& grid, double center, double width) {
    FieldState s = FieldState::zero(grid);
    for (int j = 0; j < grid.n_points; ++j) {
        const double u = (grid.x(j) - center) / width;
        const double v = std::exp(-0.5 * u * u);
        s.psi[static_cast<std::size_t>(j)] = v;
        s.pi[static_cast<std::size_t>(j)] = u / width * v;  // pi = -d/dx psi
    }
    return s;
}

}  // namespace

TEST_CASE("the zero state is a fixed point") {
    const auto grid = GridSpec::make(10.0, 0.05);
    const auto model = double_well_model();
    SchemeParams sch;
    sch.dt = 0.02;
    auto s = step(FieldState::zero(grid), model, grid, sch);
    REQUIRE(s.max_abs() == 0.0);
    REQUIRE(s.time == Catch::Approx(0.02));
}

TEST_CASE("cfl at or above one is rejected") {
    const auto grid = GridSpec::make(10.0, 0.05);
    SchemeParams sch;
    sch.dt = 0.05;
    REQUIRE_THROWS_AS(sch.validate(grid), std::invalid_argument);
}

TEST_CASE("one-step refinement ratios match the scheme orders") {
    auto one_step_err = [](double omega, double dx, double dt, double& epsi, double& epi_off) {
        const auto grid = GridSpec::make(30.0, dx);
        const auto model = double_well_model();
        const auto waves = solitary_waves(model.oscillators[0].coeffs, omega, 1.0);
        REQUIRE_FALSE(waves.empty());
        auto s0 = sample_solitary(waves[0], grid, 0.0);
        SchemeParams sch;
        sch.dt = dt;
        sch.bc = BoundaryKind::dirichlet;
        auto s1 = step(s0, model, grid, sch);
        const cplx rot = std::polar(1.0, -omega * dt);
        epsi = epi_off = 0.0;
        for (int j = 0; j < grid.n_points; ++j) {
            const double x = grid.x(j);
            if (std::abs(x) <= 25.0)
                epsi = std::max(epsi, std::abs(s1.psi[static_cast<std::size_t>(j)] -
                                               rot * s0.psi[static_cast<std::size_t>(j)]));
            if (std::abs(x) >= 1.0 && std::abs(x) <= 25.0)
                epi_off = std::max(epi_off, std::abs(s1.pi[static_cast<std::size_t>(j)] -
                                                     rot * s0.pi[static_cast<std::size_t>(j)]));
        }
    };

    // dt-dominant regime (fast rotation): psi error ratio ~ 8
    double a1, b1, a2, b2, a3, b3;
    one_step_err(0.95, 0.03, 0.02, a1, b1);
    one_step_err(0.95, 0.03, 0.01, a2, b2);
    REQUIRE(a1 / a2 > 6.5);
    REQUIRE(a1 / a2 < 9.5);

    // dx-dominant regime away from the kink cell: pi error ratio ~ 4
    one_step_err(0.1, 0.1, 0.002, a1, b1);
    one_step_err(0.1, 0.05, 0.002, a2, b2);
    one_step_err(0.1, 0.025, 0.002, a3, b3);
    REQUIRE(b1 / b2 > 3.4);
    REQUIRE(b1 / b2 < 4.6);
    REQUIRE(b2 / b3 > 3.4);
    REQUIRE(b2 / b3 < 4.6);
}

TEST_CASE("plane wave rotates at the discrete dispersion frequency") {
    const auto grid = GridSpec::make(10.0, 0.01);
    const double Lper = grid.n_points * grid.dx;  // periodic indexing is mod n
    const double k = 2.0 * kPi * 50.0 / Lper;
    SchemeParams sch;
    sch.dt = 0.005;
    sch.bc = BoundaryKind::periodic;
    const double m = 1.0;
    const double wk2 = 4.0 / (grid.dx * grid.dx) * std::pow(std::sin(k * grid.dx / 2.0), 2) + m * m;
    const double Omega = 2.0 / sch.dt * std::asin(0.5 * sch.dt * std::sqrt(wk2));

    FieldState s0 = FieldState::zero(grid);
    for (int j = 0; j < grid.n_points; ++j)
        s0.psi[static_cast<std::size_t>(j)] = std::polar(1.0, k * grid.x(j));
    // pi is irrelevant for the two-step phase measurement below; start from
    // the eigenmode's synchronized derivative
    for (int j = 0; j < grid.n_points; ++j)
        s0.pi[static_cast<std::size_t>(j)] =
            cplx(0.0, -Omega) * s0.psi[static_cast<std::size_t>(j)] * std::sin(Omega * sch.dt) /
            (Omega * sch.dt);
    const auto model = ModelSpec::free_field(m);
    const auto s2 = step(step(s0, model, grid, sch), model, grid, sch);
    const cplx ratio = s2.psi[123] / s0.psi[123];
    const double measured = -std::arg(ratio) / (2.0 * sch.dt);
    REQUIRE(std::abs(measured - Omega) / Omega <= 1e-12);
}

TEST_CASE("transparent edges pass an m = 0 pulse with tiny reflection") {
    const auto grid = GridSpec::make(20.0, 0.01);
    const auto wide = GridSpec::make(60.0, 0.01);
    SchemeParams sch;
    sch.dt = 0.005;
    sch.bc = BoundaryKind::transparent;
    auto r1 = evolve_free(right_moving_pulse(grid, 10.0, 1.0), 0.0, grid, sch, 25.0, 100000);
    auto r2 = evolve_free(right_moving_pulse(wide, 10.0, 1.0), 0.0, wide, sch, 25.0, 100000);
    double reflected = 0.0;
    const int off = (wide.n_points - grid.n_points) / 2;
    for (int j = 0; j < grid.n_points; ++j)
        reflected = std::max(reflected, std::abs(r1.final.psi[static_cast<std::size_t>(j)] -
                                                 r2.final.psi[static_cast<std::size_t>(j + off)]));
    REQUIRE(reflected <= 1e-3);  // incident amplitude is 1
}

TEST_CASE("dirichlet wall reflects with a sign flip") {
    const auto grid = GridSpec::make(20.0, 0.01);
    SchemeParams sch;
    sch.dt = 0.005;
    sch.bc = BoundaryKind::dirichlet;
    // pulse at +10 moving right: reflects at x = 20, returns inverted near +10 at t = 20
    auto r = evolve_free(right_moving_pulse(grid, 10.0, 1.0), 0.0, grid, sch, 20.0, 100000);
    double vmin = 0.0;
    double where = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const double v = r.final.psi[static_cast<std::size_t>(j)].real();
        if (v < vmin) {
            vmin = v;
            where = grid.x(j);
        }
    }
    REQUIRE(vmin < -0.95);
    REQUIRE(std::abs(where - 10.0) < 0.5);
}

TEST_CASE("periodic pulse re-enters from the other side") {
    const auto grid = GridSpec::make(20.0, 0.01);
    SchemeParams sch;
    sch.dt = 0.005;
    sch.bc = BoundaryKind::periodic;
    // pulse at +10 moving right passes the seam; period is n*dx = 40.01
    auto r = evolve_free(right_moving_pulse(grid, 10.0, 1.0), 0.0, grid, sch, 20.0, 100000);
    double vmax = 0.0;
    double where = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        const double v = r.final.psi[static_cast<std::size_t>(j)].real();
        if (v > vmax) {
            vmax = v;
            where = grid.x(j);
        }
    }
    REQUIRE(vmax > 0.95);
    REQUIRE(std::abs(where - (-10.0)) < 0.5);
}

TEST_CASE("apply_boundary implements the stated edge relations") {
    const auto grid = GridSpec::make(1.0, 0.1);
    FieldState s = FieldState::zero(grid);
    for (int j = 0; j < grid.n_points; ++j) s.psi[static_cast<std::size_t>(j)] = cplx(grid.x(j), 0.0);
    SchemeParams sch;
    sch.dt = 0.05;
    sch.bc = BoundaryKind::transparent;
    apply_boundary(s, grid, sch);
    REQUIRE(s.pi[0].real() == Catch::Approx(1.0));   // +d/dx psi at the left edge
    REQUIRE(s.pi.back().real() == Catch::Approx(-1.0));  // -d/dx psi at the right edge
    sch.bc = BoundaryKind::dirichlet;
    apply_boundary(s, grid, sch);
    REQUIRE(s.psi[0] == cplx(0.0, 0.0));
    REQUIRE(s.psi.back() == cplx(0.0, 0.0));
}

TEST_CASE("time reversal recovers compactly supported initial data") {
    const auto grid = GridSpec::make(20.0, 0.01);
    const auto model = double_well_model();
    FieldState s0 = FieldState::zero(grid);
    for (int j = 0; j < grid.n_points; ++j) {
        const double x = grid.x(j);
        s0.psi[static_cast<std::size_t>(j)] = cplx(0.7 * std::exp(-x * x), 0.2 * std::exp(-(x - 2.0) * (x - 2.0)));
        s0.pi[static_cast<std::size_t>(j)] = cplx(0.0, -0.4 * std::exp(-x * x));
    }
    SchemeParams sch;
    sch.dt = 0.005;
    sch.bc = BoundaryKind::dirichlet;
    auto fwd = evolve(s0, model, grid, sch, 10.0, 100000);
    auto back = fwd.final;
    for (auto& z : back.pi) z = -z;
    auto rev = evolve(back, model, grid, sch, 10.0, 100000);
    double err = 0.0;
    for (int j = 0; j < grid.n_points; ++j)
        err = std::max(err, std::abs(rev.final.psi[static_cast<std::size_t>(j)] -
                                     s0.psi[static_cast<std::size_t>(j)]));
    REQUIRE(err <= 1e-8);
}

TEST_CASE("charge is conserved and energy drift is bounded") {
    const auto grid = GridSpec::make(30.0, 0.01);
    const auto model = double_well_model();
    const auto waves = solitary_waves(model.oscillators[0].coeffs, 0.8, 1.0);
    auto s0 = sample_solitary(waves[0], grid, 0.0);
    for (int j = 0; j < grid.n_points; ++j) {
        const double x = grid.x(j);
        s0.psi[static_cast<std::size_t>(j)] += 0.05 * std::exp(-0.5 * (x - 2.0) * (x - 2.0));
    }
    SchemeParams sch;
    sch.dt = 0.005;
    sch.bc = BoundaryKind::dirichlet;
    auto r = evolve(s0, model, grid, sch, 50.0, 200);  // 10^4 steps
    const double E0 = r.records.front().energy;
    const double Q0 = r.records.front().charge;
    // least-squares slope, scaled to the full 10^4-step span
    double sx = 0, sxx = 0, sE = 0, sxE = 0, sQ = 0, sxQ = 0;
    int n = 0;
    for (const auto& rec : r.records) {
        sx += rec.time;
        sxx += rec.time * rec.time;
        sE += rec.energy;
        sxE += rec.time * rec.energy;
        sQ += rec.charge;
        sxQ += rec.time * rec.charge;
        ++n;
    }
    const double den = n * sxx - sx * sx;
    REQUIRE(std::abs((n * sxE - sx * sE) / den) * 50.0 / std::abs(E0) <= 1e-6);
    REQUIRE(std::abs((n * sxQ - sx * sQ) / den) * 50.0 / std::abs(Q0) <= 1e-8);
}

TEST_CASE("the flow commutes with global phase rotation") {
    const auto grid = GridSpec::make(10.0, 0.01);
    const auto model = double_well_model();
    FieldState s0 = FieldState::zero(grid);
    for (int j = 0; j < grid.n_points; ++j) {
        const double x = grid.x(j);
        s0.psi[static_cast<std::size_t>(j)] = cplx(std::exp(-x * x), 0.3 * std::exp(-(x - 1) * (x - 1)));
        s0.pi[static_cast<std::size_t>(j)] = cplx(0.1 * std::exp(-x * x), -0.2 * std::exp(-(x + 1) * (x + 1)));
    }
    SchemeParams sch;
    sch.dt = 0.005;
    sch.bc = BoundaryKind::dirichlet;
    const double theta = 0.9;
    auto a = evolve(s0, model, grid, sch, 1.0, 100000);
    auto s0r = s0;
    rotate_phase(s0r, theta);
    auto b = evolve(s0r, model, grid, sch, 1.0, 100000);
    const cplx ph = std::polar(1.0, theta);
    double err = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
        err = std::max(err, std::abs(b.final.psi[static_cast<std::size_t>(j)] -
                                     ph * a.final.psi[static_cast<std::size_t>(j)]));
        err = std::max(err, std::abs(b.final.pi[static_cast<std::size_t>(j)] -
                                     ph * a.final.pi[static_cast<std::size_t>(j)]));
    }
    REQUIRE(err <= 1e-12);
}

TEST_CASE("T = 0 returns the initial state with one record") {
    const auto grid = GridSpec::make(5.0, 0.05);
    const auto model = double_well_model();
    SchemeParams sch;
    sch.dt = 0.02;
    FieldState s0 = FieldState::zero(grid);
    s0.psi[grid.center()] = cplx(0.5, 0.0);
    auto r = evolve(s0, model, grid, sch, 0.0, 10);
    REQUIRE(r.records.size() == 1);
    REQUIRE(r.steps == 0);
    REQUIRE(r.final.psi[grid.center()] == s0.psi[grid.center()]);
    REQUIRE(r.traces.size() == 1);
    REQUIRE(r.traces[0].values.size() == 1);
}

TEST_CASE("unbounded potential blows up and is flagged") {
    const auto grid = GridSpec::make(5.0, 0.05);
    OscillatorSpec osc;
    osc.position = 0.0;
    osc.coeffs = {0.0, 0.0, -1.0};  // U = -|psi|^4: focusing
    auto model = ModelSpec::with_oscillators(1.0, {osc});
    SchemeParams sch;
    sch.dt = 0.02;
    sch.bc = BoundaryKind::dirichlet;
    FieldState s0 = FieldState::zero(grid);
    for (int j = 0; j < grid.n_points; ++j)
        s0.psi[static_cast<std::size_t>(j)] = 30.0 * std::exp(-10.0 * grid.x(j) * grid.x(j));

    // rejected without the override
    REQUIRE_THROWS_AS(evolve(s0, model, grid, sch, 1.0, 1), std::invalid_argument);

    model.allow_unbounded = true;
    auto r = evolve(s0, model, grid, sch, 5.0, 1);
    REQUIRE(r.status == RunStatus::blown_up);
}

TEST_CASE("buffer check flags runs whose light cone touched the boundary") {
    const auto grid = GridSpec::make(5.0, 0.01);
    SchemeParams sch;
    sch.dt = 0.005;
    sch.bc = BoundaryKind::dirichlet;
    sch.buffer_check = true;
    FieldState s0 = FieldState::zero(grid);
    // compactly supported data near the center
    for (int j = 0; j < grid.n_points; ++j) {
        const double x = grid.x(j);
        s0.psi[static_cast<std::size_t>(j)] = std::abs(x) < 1.0 ? std::pow(std::cos(kPi * x / 2.0), 2) : 0.0;
    }
    auto ok = evolve_free(s0, 1.0, grid, sch, 2.0, 100000);
    REQUIRE(ok.status == RunStatus::completed);
    auto bad = evolve_free(s0, 1.0, grid, sch, 10.0, 100000);
    REQUIRE(bad.status == RunStatus::boundary_contaminated);
}

TEST_CASE("evolution is deterministic") {
    const auto grid = GridSpec::make(10.0, 0.02);
    const auto model = double_well_model();
    const auto waves = solitary_waves(model.oscillators[0].coeffs, 0.6, 1.0);
    auto s0 = sample_solitary(waves[0], grid, 0.4);
    SchemeParams sch;
    sch.dt = 0.01;
    auto a = evolve(s0, model, grid, sch, 3.0, 7);
    auto b = evolve(s0, model, grid, sch, 3.0, 7);
    REQUIRE(a.final.psi == b.final.psi);
    REQUIRE(a.final.pi == b.final.pi);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        REQUIRE(a.records[k].energy == b.records[k].energy);
        REQUIRE(a.records[k].charge == b.records[k].charge);
    }
}
