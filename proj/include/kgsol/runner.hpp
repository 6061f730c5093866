#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kgsol/attraction.hpp"
#include "kgsol/config.hpp"
#include "kgsol/integrator.hpp"
#include "kgsol/io.hpp"
#include "kgsol/multifreq.hpp"
#include "kgsol/version.hpp"

namespace kgsol {

// Exit-code contract: 0 completed, 2 config error, 3 blown up,
// 4 boundary contaminated.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 2;
inline constexpr int exit_blown_up = 3;
inline constexpr int exit_contaminated = 4;

struct RunOutcome {
    RunStatus status = RunStatus::completed;
    int exit_code = exit_ok;
    std::string directory;
    std::vector<std::string> files;
    std::optional<AttractionSummary> summary;
    std::vector<DiagRecord> records;
    std::optional<ManifoldDistanceReport> final_distance;
};

namespace detail {

inline std::string iso_walltime() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

inline std::optional<std::string> manifest_hash(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const std::string key = "\"config_hash\": \"";
    const auto pos = text.find(key);
    if (pos == std::string::npos) return std::nullopt;
    const auto end = text.find('"', pos + key.size());
    if (end == std::string::npos) return std::nullopt;
    return text.substr(pos + key.size(), end - pos - key.size());
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
            out.push_back(c);
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace detail

/// Run one simulation end to end: evolve, write NDJSON diagnostics, traces,
/// snapshots, and finally the manifest (written atomically). Refuses to reuse
/// an output directory whose manifest records a different config hash unless
/// forced.
inline RunOutcome run_simulation(const RunConfig& cfg, bool force = false) {
    namespace fs = std::filesystem;
    if (cfg.output.directory.empty()) throw ConfigError("[output] directory is required for simulate");

    const std::string start_time = detail::iso_walltime();
    const fs::path dir(cfg.output.directory);
    const fs::path manifest_path = dir / "manifest.json";
    if (fs::exists(manifest_path)) {
        const auto old_hash = detail::manifest_hash(manifest_path.string());
        if (old_hash && *old_hash != cfg.config_hash && !force)
            throw ConfigError("output directory " + cfg.output.directory +
                              " holds results for a different config (hash " + *old_hash +
                              "); use --force to overwrite");
    }

    RunOutcome out;
    out.directory = cfg.output.directory;

    // build the initial state before touching the output directory, so a bad
    // [initial] section leaves no partial outputs behind
    const FieldState initial = build_initial_state(cfg);
    fs::create_directories(dir);

    DiagnosticsConfig diag;
    diag.seminorm_R = cfg.seminorm_R;
    diag.probe_positions = cfg.probes;
    diag.distance_every = static_cast<int>(cfg.distance_every);
    if (cfg.distance_every > 0)
        diag.distance_fn = [&cfg](const FieldState& s) {
            return manifold_distance(s, cfg.model, cfg.grid).distance;
        };
    std::vector<std::pair<std::string, FieldState>> snapshots;
    diag.snapshot_every = cfg.output.snapshot_every;
    if (cfg.output.snapshot_every > 0)
        diag.snapshot_fn = [&snapshots](const FieldState& s, long long step_no) {
            char name[64];
            std::snprintf(name, sizeof(name), "snapshot_%08lld.csv", static_cast<long long>(step_no));
            snapshots.emplace_back(name, s);
        };

    auto result = evolve(initial, cfg.model, cfg.grid, cfg.scheme, cfg.t_end, cfg.sample_every, diag);
    out.status = result.status;

    // data files
    auto add_file = [&](const std::string& name) { out.files.push_back(name); };
    write_snapshot_csv((dir / "snapshot_initial.csv").string(), initial, cfg.grid, cfg.config_hash);
    add_file("snapshot_initial.csv");
    for (const auto& [name, st] : snapshots) {
        write_snapshot_csv((dir / name).string(), st, cfg.grid, cfg.config_hash);
        add_file(name);
    }
    write_snapshot_csv((dir / "snapshot_final.csv").string(), result.final, cfg.grid, cfg.config_hash);
    add_file("snapshot_final.csv");

    const int n_osc = cfg.model.n_oscillators();
    for (std::size_t k = 0; k < result.traces.size(); ++k) {
        char name[64];
        if (k < static_cast<std::size_t>(n_osc))
            std::snprintf(name, sizeof(name), "trace_osc%zu.csv", k);
        else
            std::snprintf(name, sizeof(name), "trace_probe%zu.csv", k - static_cast<std::size_t>(n_osc));
        write_trace_csv((dir / name).string(), result.traces[k], result.trace_positions[k],
                        cfg.config_hash, cfg.output.trace_stride);
        add_file(name);
    }

    // reporting pass: final distance, configured spectrum window, verdict
    if (cfg.distance_every > 0 && result.status == RunStatus::completed) {
        out.final_distance = manifold_distance(result.final, cfg.model, cfg.grid);
        out.summary = attraction_report(result.records, result.traces, cfg.model, cfg.model.mass,
                                        out.final_distance);
    }
    if (cfg.spectrum_window && !result.traces.empty()) {
        try {
            const auto rep = time_spectrum(result.traces.front(), cfg.spectrum_window->first,
                                           cfg.spectrum_window->second, cfg.model.mass);
            write_spectrum_csv((dir / "spectrum_osc0.csv").string(), rep, cfg.config_hash);
            add_file("spectrum_osc0.csv");
            if (!result.records.empty()) result.records.back().spectral = rep;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "spectrum window skipped: %s\n", e.what());
        }
    }

    {
        std::ofstream nd((dir / "diagnostics.ndjson").string(), std::ios::binary | std::ios::trunc);
        if (!nd) throw std::runtime_error("cannot write diagnostics.ndjson");
        nd << ndjson_header(cfg.config_hash) << "\n";
        for (const auto& rec : result.records) nd << ndjson_record(rec) << "\n";
        add_file("diagnostics.ndjson");
    }
    out.records = result.records;

    // manifest, written last and atomically
    {
        const fs::path tmp = dir / "manifest.json.tmp";
        std::ofstream mf(tmp.string(), std::ios::binary | std::ios::trunc);
        if (!mf) throw std::runtime_error("cannot write manifest");
        mf << "{\n";
        mf << "  \"config_hash\": \"" << cfg.config_hash << "\",\n";
        mf << "  \"artifact_version\": \"" << artifact_version << "\",\n";
        mf << "  \"status\": \"" << to_string(result.status) << "\",\n";
        mf << "  \"start_walltime\": \"" << start_time << "\",\n";
        mf << "  \"end_walltime\": \"" << detail::iso_walltime() << "\",\n";
        mf << "  \"steps\": " << result.steps << ",\n";
        if (out.summary) {
            mf << "  \"verdict\": \"" << out.summary->verdict << "\",\n";
            mf << "  \"dist_max\": " << fmt17(out.summary->dist_max) << ",\n";
            mf << "  \"dist_final\": " << fmt17(out.summary->dist_final) << ",\n";
        }
        mf << "  \"notes\": [";
        for (std::size_t k = 0; k < cfg.notes.size(); ++k) {
            if (k) mf << ", ";
            mf << "\"" << detail::json_escape(cfg.notes[k]) << "\"";
        }
        mf << "],\n";
        mf << "  \"files\": [";
        for (std::size_t k = 0; k < out.files.size(); ++k) {
            if (k) mf << ", ";
            mf << "\"" << out.files[k] << "\"";
        }
        mf << "]\n}\n";
        mf.close();
        fs::rename(tmp, manifest_path);
        out.files.push_back("manifest.json");
    }

    switch (result.status) {
        case RunStatus::completed: out.exit_code = exit_ok; break;
        case RunStatus::blown_up: out.exit_code = exit_blown_up; break;
        case RunStatus::boundary_contaminated: out.exit_code = exit_contaminated; break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ready-to-run config emission for the two-frequency constructions
// ---------------------------------------------------------------------------

namespace detail {

inline void emit_common_tail(std::ostringstream& out, const std::string& outdir, double t_end,
                             double probe) {
    out << "\n[time]\n";
    out << "cfl = 0.5\n";
    out << "t_end = " << fmt17(t_end) << "\n";
    out << "sample_every = 20\n";
    out << "bc = transparent\n";
    out << "\n[diagnostics]\n";
    out << "seminorm_R = 1,2,5,10\n";
    out << "distance_every = 20\n";
    out << "probe = " << fmt17(probe) << "\n";
    out << "\n[output]\n";
    out << "directory = " << outdir << "\n";
}

}  // namespace detail

/// A grid whose spacing divides L exactly (nominal dx 0.01) and whose
/// half-width is a whole number of cells around nominal 40.
inline GridSpec grid_matching_gap(double L, double dx_nominal = 0.01, double half_nominal = 40.0) {
    const double cells = std::max(1.0, std::round(L / dx_nominal));
    const double dx = L / cells;
    const double half_cells = std::ceil(half_nominal / dx);
    return GridSpec::make(half_cells * dx, dx);
}

inline std::string emit_widegap_config(const WideGapParams& p, const std::string& outdir,
                                       double t_end = 60.0) {
    const GridSpec grid = grid_matching_gap(p.L);
    std::ostringstream out;
    out << "# two-frequency wide-gap initial data on its own oscillator pair\n";
    out << "[model]\n";
    out << "mass = " << fmt17(p.m) << "\n";
    out << "oscillator = 0 " << fmt17(0.0) << ',' << fmt17(-p.alpha / 2.0) << ',' << fmt17(-p.beta / 4.0)
        << "\n";
    out << "oscillator = " << fmt17(p.L) << " " << fmt17(0.0) << ',' << fmt17(-p.alpha / 2.0) << ','
        << fmt17(-p.beta / 4.0) << "\n";
    if (!(-p.beta / 4.0 > 0.0)) out << "allow_unbounded = true\n";
    out << "\n[grid]\n";
    out << "half_width_x = " << fmt17(grid.half_width) << "\n";
    out << "dx = " << fmt17(grid.dx) << "\n";
    out << "\n[initial]\n";
    out << "kind = multifreq_widegap\n";
    out << "alpha = " << fmt17(p.alpha) << "\n";
    out << "beta = " << fmt17(p.beta) << "\n";
    std::ostringstream tail;
    detail::emit_common_tail(tail, outdir, t_end, p.L / 2.0);
    return out.str() + tail.str();
}

inline std::string emit_lindeg_config(const LinearDegenerateParams& p, const std::string& outdir,
                                      double t_end = 60.0) {
    const GridSpec grid = grid_matching_gap(p.L);
    std::ostringstream out;
    out << "# two-frequency linear-degeneration initial data on its own oscillator pair\n";
    out << "[model]\n";
    out << "mass = " << fmt17(p.m) << "\n";
    out << "oscillator = 0 " << fmt17(0.0) << ',' << fmt17(-p.alpha / 2.0) << ',' << fmt17(-p.beta / 4.0)
        << "\n";
    out << "oscillator = " << fmt17(p.L) << " " << fmt17(0.0) << ',' << fmt17(-p.gamma / 2.0) << "\n";
    out << "allow_unbounded = true\n";
    out << "\n[grid]\n";
    out << "half_width_x = " << fmt17(grid.half_width) << "\n";
    out << "dx = " << fmt17(grid.dx) << "\n";
    out << "\n[initial]\n";
    out << "kind = multifreq_lindeg\n";
    out << "omega = " << fmt17(p.omega) << "\n";
    out << "alpha = " << fmt17(p.alpha) << "\n";
    out << "beta = " << fmt17(p.beta) << "\n";
    std::ostringstream tail;
    detail::emit_common_tail(tail, outdir, t_end, p.L);
    return out.str() + tail.str();
}

}  // namespace kgsol
