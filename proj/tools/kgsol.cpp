// Command-line front end: construction, evolution, and diagnostics of
// Klein-Gordon models with concentrated nonlinearities.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kgsol/attraction.hpp"
#include "kgsol/config.hpp"
#include "kgsol/io.hpp"
#include "kgsol/multifreq.hpp"
#include "kgsol/runner.hpp"
#include "kgsol/sigma.hpp"
#include "kgsol/solitary.hpp"
#include "kgsol/version.hpp"

namespace {

using namespace kgsol;

int cmd_simulate(const std::string& config_path, bool force) {
    RunConfig cfg;
    try {
        cfg = bind_run_config(ConfigFile::load(config_path));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    }
    for (const auto& note : cfg.notes) std::cerr << "note: " << note << "\n";
    try {
        const auto outcome = run_simulation(cfg, force);
        std::cout << "status: " << to_string(outcome.status) << "\n";
        if (outcome.summary) {
            std::cout << "verdict: " << outcome.summary->verdict << "\n";
            std::cout << "dist_max: " << fmt17(outcome.summary->dist_max)
                      << "  dist_final: " << fmt17(outcome.summary->dist_final) << "\n";
            if (outcome.final_distance)
                std::cout << "best_omega: " << fmt17(outcome.final_distance->best_omega)
                          << "  best_amplitude: " << fmt17(outcome.final_distance->best_amplitude) << "\n";
        }
        std::cout << "outputs in " << outcome.directory << "\n";
        return outcome.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config_error;
    }
}

int cmd_solitary(double mass, double omega, const std::string& coeffs_str, const std::string& csv,
                 double half_width, double dx, double phase) {
    std::vector<double> coeffs;
    try {
        coeffs = parse_double_list(coeffs_str, "--coeffs");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config_error;
    }
    if (std::abs(omega) >= mass) {
        std::cerr << "error: |omega| >= m admits no nonzero solitary waves\n";
        return exit_config_error;
    }
    const auto roots = amplitude_roots(coeffs, omega, mass);
    const double kap = kappa(omega, mass);
    std::cout << "omega = " << fmt17(omega) << "  kappa = " << fmt17(kap) << "\n";
    if (roots.empty()) {
        std::cout << "no positive amplitudes satisfy 2 kappa = F(C)/C at this omega\n";
        return exit_ok;
    }
    for (std::size_t k = 0; k < roots.size(); ++k) {
        const double C = roots[k];
        const double resid = std::abs(2.0 * kap - force_factor(coeffs, C * C));
        std::cout << "C[" << k << "] = " << fmt17(C) << "  residual = " << fmt17(resid) << "\n";
    }
    if (!csv.empty()) {
        const auto grid = GridSpec::make(half_width, dx);
        const auto wave = SolitaryWave::make(coeffs, omega, mass, roots.front());
        write_snapshot_csv(csv, sample_solitary(wave, grid, phase), grid, "none");
        std::cout << "profile written to " << csv << "\n";
    }
    return exit_ok;
}

int cmd_gapcheck(double mass, const std::string& positions_str, const std::string& degrees_str) {
    std::vector<double> positions, degrees;
    try {
        positions = parse_double_list(positions_str, "--positions");
        degrees = parse_double_list(degrees_str, "--degrees");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config_error;
    }
    if (positions.size() != degrees.size()) {
        std::cerr << "error: positions and degrees must have equal length\n";
        return exit_config_error;
    }
    std::vector<OscillatorSpec> oscs;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        OscillatorSpec o;
        o.position = positions[k];
        const int p = static_cast<int>(degrees[k]);
        o.coeffs.assign(static_cast<std::size_t>(p) + 1, 0.0);
        o.coeffs.back() = 1.0;  // strictly nonlinear representative of this degree
        oscs.push_back(std::move(o));
    }
    try {
        const auto model = ModelSpec::with_oscillators(mass, std::move(oscs));
        const auto gc = check_gap_condition(model);
        if (gc.vacuous) {
            std::cout << "vacuous: fewer than two oscillators\n";
            return exit_ok;
        }
        std::cout << "lhs = " << fmt17(gc.lhs) << "\nrhs = " << fmt17(gc.rhs) << "\n"
                  << (gc.holds ? "holds" : "violated") << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config_error;
    }
}

int cmd_spectrum(const std::string& trace_path, double a, double b, double mass,
                 const std::string& csv) {
    try {
        const auto tr = load_trace_csv(trace_path);
        const auto rep = time_spectrum(tr, a, b, mass, /*keep_bins=*/!csv.empty());
        std::cout << "window = [" << fmt17(rep.window_a) << ", " << fmt17(rep.window_b) << "]\n";
        std::cout << "bin_width = " << fmt17(rep.bin_width) << "\n";
        std::cout << "in_band_fraction = " << fmt17(rep.in_band_fraction) << "\n";
        std::cout << "dominance = " << fmt17(rep.dominance) << "\n";
        for (const auto& p : rep.peaks)
            std::cout << "peak: omega = " << fmt17(p.frequency) << "  |Y| = " << fmt17(p.magnitude)
                      << "  mass = " << fmt17(p.mass_fraction) << "\n";
        if (!csv.empty()) {
            write_spectrum_csv(csv, rep, "none");
            std::cout << "magnitudes written to " << csv << "\n";
        }
        return exit_ok;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config_error;
    }
}

int cmd_free_decay(double mass, double half_width, double dx, double cfl, double T, double sigma,
                   double R) {
    try {
        const auto grid = GridSpec::make(half_width, dx);
        FieldState s0 = FieldState::zero(grid);
        for (int j = 0; j < grid.n_points; ++j) {
            const double u = grid.x(j) / sigma;
            s0.psi[static_cast<std::size_t>(j)] = cplx(std::exp(-0.5 * u * u), 0.0);
        }
        SchemeParams scheme;
        scheme.dt = cfl * dx;
        scheme.bc = BoundaryKind::transparent;
        const double before = seminorm_E_R(s0, grid, mass, R);
        const auto result = evolve_free(s0, mass, grid, scheme, T, 1000);
        const double after = seminorm_E_R(result.final, grid, mass, R);
        std::cout << "seminorm_E_R(R=" << R << ") at t=0: " << fmt17(before) << "\n";
        std::cout << "seminorm_E_R(R=" << R << ") at t=" << fmt17(T) << ": " << fmt17(after) << "\n";
        std::cout << "ratio: " << fmt17(after / before) << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config_error;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Klein-Gordon concentrated-nonlinearity simulator and diagnostics"};
    app.set_version_flag("--version", kgsol::artifact_version);
    app.require_subcommand(1);

    // simulate
    std::string config_path;
    bool force = false;
    auto* sim = app.add_subcommand("simulate", "run a config-driven simulation");
    sim->add_option("config", config_path, "config file")->required();
    sim->add_flag("--force", force, "overwrite an output directory holding a different config's results");

    // solitary
    double mass = 1.0, omega = 0.8, phase = 0.0, half_width = 40.0, dx = 0.01;
    std::string coeffs_str = "0,-1,0.25", csv_path;
    auto* sol = app.add_subcommand("solitary", "solve 2 kappa(omega) = F(C)/C and sample the profile");
    sol->add_option("--mass", mass)->required();
    sol->add_option("--omega", omega)->required();
    sol->add_option("--coeffs", coeffs_str, "potential coefficients u0,u1,...")->required();
    sol->add_option("--csv", csv_path, "write the first profile to this CSV");
    sol->add_option("--half-width", half_width);
    sol->add_option("--dx", dx);
    sol->add_option("--phase", phase);

    // multifreq
    auto* mf = app.add_subcommand("multifreq", "build the two-frequency solutions");
    mf->require_subcommand(1);
    double mf_m = 1.0, mf_omega = 0.25, mf_L = 1.0, mf_alpha = 0.0, mf_beta = 1.0;
    double a_target = 0.0;
    bool use_a_target = false;
    std::string emit_path, outdir = "out/multifreq";
    auto* lin = mf->add_subcommand("lindeg", "linear second oscillator (cubic + linear pair)");
    lin->add_option("--mass", mf_m)->required();
    lin->add_option("--omega", mf_omega)->required();
    lin->add_option("--L", mf_L)->required();
    lin->add_option("--beta", mf_beta)->required();
    lin->add_option("--alpha", mf_alpha);
    lin->add_option("--a-target", a_target)->each([&](const std::string&) { use_a_target = true; });
    lin->add_option("--emit-config", emit_path, "write a ready-to-run config here");
    lin->add_option("--outdir", outdir, "output directory named in the emitted config");
    auto* wg = mf->add_subcommand("widegap", "identical cubic pair beyond the gap threshold");
    wg->add_option("--mass", mf_m)->required();
    wg->add_option("--L", mf_L)->required();
    wg->add_option("--alpha", mf_alpha)->required();
    wg->add_option("--beta", mf_beta)->required();
    wg->add_option("--emit-config", emit_path, "write a ready-to-run config here");
    wg->add_option("--outdir", outdir, "output directory named in the emitted config");

    // gapcheck
    std::string positions_str, degrees_str;
    auto* gap = app.add_subcommand("gapcheck", "evaluate the oscillator gap condition");
    gap->add_option("--mass", mass)->required();
    gap->add_option("--positions", positions_str, "comma-separated oscillator positions")->required();
    gap->add_option("--degrees", degrees_str, "comma-separated potential degrees")->required();

    // spectrum
    std::string trace_path, window_str;
    auto* spec_cmd = app.add_subcommand("spectrum", "windowed spectrum of a trace CSV");
    spec_cmd->add_option("trace", trace_path, "trace CSV (t,re,im)")->required();
    spec_cmd->add_option("--window", window_str, "time window 'a,b'")->required();
    spec_cmd->add_option("--mass", mass)->required();
    spec_cmd->add_option("--csv", csv_path, "write the magnitude table to this CSV");

    // free-decay
    double fd_T = 100.0, fd_sigma = 0.25, fd_R = 5.0, fd_cfl = 0.5;
    auto* fd = app.add_subcommand("free-decay", "free-field local energy decay experiment");
    fd->add_option("--mass", mass)->required();
    fd->add_option("--half-width", half_width);
    fd->add_option("--dx", dx);
    fd->add_option("--cfl", fd_cfl);
    fd->add_option("--T", fd_T);
    fd->add_option("--sigma", fd_sigma);
    fd->add_option("--R", fd_R);

    CLI11_PARSE(app, argc, argv);

    if (*sim) return cmd_simulate(config_path, force);
    if (*sol) return cmd_solitary(mass, omega, coeffs_str, csv_path, half_width, dx, phase);
    if (*gap) return cmd_gapcheck(mass, positions_str, degrees_str);
    if (*fd) return cmd_free_decay(mass, half_width, dx, fd_cfl, fd_T, fd_sigma, fd_R);
    if (*spec_cmd) {
        std::vector<double> w;
        try {
            w = kgsol::parse_double_list(window_str, "--window");
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kgsol::exit_config_error;
        }
        if (w.size() != 2) {
            std::cerr << "error: --window wants 'a,b'\n";
            return kgsol::exit_config_error;
        }
        return cmd_spectrum(trace_path, w[0], w[1], mass, csv_path);
    }
    if (*mf) {
        try {
            if (*lin) {
                const auto p = use_a_target
                                   ? kgsol::build_linear_degenerate(mf_m, mf_omega, mf_L, mf_beta, mf_alpha,
                                                                    kgsol::LindegMode::solve_for_alpha,
                                                                    a_target)
                                   : kgsol::build_linear_degenerate(mf_m, mf_omega, mf_L, mf_beta, mf_alpha);
                std::cout << "omega = " << kgsol::fmt17(p.omega) << "  gamma = " << kgsol::fmt17(p.gamma)
                          << "\nalpha = " << kgsol::fmt17(p.alpha) << "  beta = " << kgsol::fmt17(p.beta)
                          << "\nA = " << kgsol::fmt17(p.A) << "  B = " << kgsol::fmt17(p.B)
                          << "  C = " << kgsol::fmt17(p.C) << "\n";
                const auto res = kgsol::residual_report(p);
                std::cout << "jump residual at 0: " << kgsol::fmt17(res.per_oscillator[0])
                          << "\njump residual at L: " << kgsol::fmt17(res.per_oscillator[1]) << "\n";
                if (!emit_path.empty()) {
                    std::ofstream out(emit_path, std::ios::binary | std::ios::trunc);
                    out << kgsol::emit_lindeg_config(p, outdir);
                    std::cout << "config written to " << emit_path << "\n";
                }
            } else {
                const auto p = kgsol::build_wide_gap(mf_m, mf_L, mf_alpha, mf_beta);
                std::cout << "omega = " << kgsol::fmt17(p.omega) << "  k(3 omega) = " << kgsol::fmt17(p.k3)
                          << "\nkappa(omega) = " << kgsol::fmt17(p.kappa1) << "\nA = " << kgsol::fmt17(p.A)
                          << "  B = " << kgsol::fmt17(p.B) << "\n";
                const auto res = kgsol::residual_report(p);
                std::cout << "jump residual at 0: " << kgsol::fmt17(res.per_oscillator[0])
                          << "\njump residual at L: " << kgsol::fmt17(res.per_oscillator[1]) << "\n";
                if (!emit_path.empty()) {
                    std::ofstream out(emit_path, std::ios::binary | std::ios::trunc);
                    out << kgsol::emit_widegap_config(p, outdir);
                    std::cout << "config written to " << emit_path << "\n";
                }
            }
            return kgsol::exit_ok;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kgsol::exit_config_error;
        }
    }
    return kgsol::exit_ok;
}
