#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kgsol/config.hpp"
#include "kgsol/runner.hpp"

using namespace kgsol;
namespace fs = std::filesystem;

namespace {

std::string small_run_config(const std::string& outdir) {
    std::ostringstream cfg;
    cfg << "[model]\n"
        << "mass = 1.0\n"
        << "oscillator = 0.0 0,-1,0.25\n"
        << "[grid]\n"
        << "half_width_x = 10\n"
        << "dx = 0.02\n"
        << "[time]\n"
        << "dt = 0.01\n"
        << "t_end = 2.0\n"
        << "sample_every = 20\n"
        << "bc = dirichlet\n"
        << "[initial]\n"
        << "kind = solitary\n"
        << "omega = 0.8\n"
        << "[diagnostics]\n"
        << "seminorm_R = 1,2,5\n"
        << "distance_every = 5\n"
        << "[output]\n"
        << "directory = " << outdir << "\n";
    return cfg.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parse errors carry location context") {
    REQUIRE_THROWS_WITH(ConfigFile::parse_text("[model\nmass = 1\n"),
                        Catch::Matchers::ContainsSubstring("1"));
    REQUIRE_THROWS_WITH(ConfigFile::parse_text("[model]\njust a line\n"),
                        Catch::Matchers::ContainsSubstring("2"));
    const auto cf = ConfigFile::parse_text("[grid]\nhalf_width_x = abc\n");
    REQUIRE_THROWS_WITH(cf.get_double("grid", "half_width_x"),
                        Catch::Matchers::ContainsSubstring("half_width_x"));
}

TEST_CASE("missing required keys are reported") {
    const auto cf = ConfigFile::parse_text("[grid]\nhalf_width_x = 10\ndx = 0.1\n");
    REQUIRE_THROWS_WITH(bind_run_config(cf), Catch::Matchers::ContainsSubstring("model"));
}

TEST_CASE("oscillator positions snap to the grid with a note") {
    std::ostringstream cfg;
    cfg << "[model]\nmass = 1\noscillator = 0.004 0,-1,0.25\n"
        << "[grid]\nhalf_width_x = 5\ndx = 0.01\n"
        << "[time]\ndt = 0.005\nt_end = 0.1\n"
        << "[initial]\nkind = solitary\nomega = 0.8\n";
    const auto bound = bind_run_config(ConfigFile::parse_text(cfg.str()));
    REQUIRE(bound.model.oscillators[0].position == Catch::Approx(0.0));
    REQUIRE_FALSE(bound.notes.empty());
    // off-grid by more than dx/2 is an error
    std::ostringstream bad;
    bad << "[model]\nmass = 1\noscillator = 99 0,-1,0.25\n"
        << "[grid]\nhalf_width_x = 5\ndx = 0.01\n"
        << "[time]\ndt = 0.005\nt_end = 0.1\n"
        << "[initial]\nkind = solitary\nomega = 0.8\n";
    REQUIRE_THROWS_AS(bind_run_config(ConfigFile::parse_text(bad.str())), ConfigError);
}

TEST_CASE("unbounded potentials need the override") {
    std::ostringstream cfg;
    cfg << "[model]\nmass = 1\noscillator = 0 0,0,-0.25\n"
        << "[grid]\nhalf_width_x = 5\ndx = 0.01\n"
        << "[time]\ndt = 0.005\nt_end = 0.1\n"
        << "[initial]\nkind = gaussian\nsigma = 0.5\n";
    REQUIRE_THROWS_WITH(bind_run_config(ConfigFile::parse_text(cfg.str())),
                        Catch::Matchers::ContainsSubstring("allow_unbounded"));
    std::ostringstream cfg2;
    cfg2 << "[model]\nmass = 1\noscillator = 0 0,0,-0.25\nallow_unbounded = true\n"
         << "[grid]\nhalf_width_x = 5\ndx = 0.01\n"
         << "[time]\ndt = 0.005\nt_end = 0.1\n"
         << "[initial]\nkind = gaussian\nsigma = 0.5\n";
    REQUIRE_NOTHROW(bind_run_config(ConfigFile::parse_text(cfg2.str())));
}

TEST_CASE("simulate writes data, diagnostics, and a manifest") {
    const fs::path dir = fs::temp_directory_path() / "kgsol_test_run";
    fs::remove_all(dir);
    const auto cfg = bind_run_config(ConfigFile::parse_text(small_run_config(dir.string())));
    const auto outcome = run_simulation(cfg);
    REQUIRE(outcome.exit_code == exit_ok);
    REQUIRE(fs::exists(dir / "diagnostics.ndjson"));
    REQUIRE(fs::exists(dir / "trace_osc0.csv"));
    REQUIRE(fs::exists(dir / "snapshot_initial.csv"));
    REQUIRE(fs::exists(dir / "snapshot_final.csv"));
    REQUIRE(fs::exists(dir / "manifest.json"));

    const std::string nd = slurp(dir / "diagnostics.ndjson");
    REQUIRE(nd.find("\"config_hash\":\"" + cfg.config_hash + "\"") != std::string::npos);
    REQUIRE(nd.find("\"t\":") != std::string::npos);
    REQUIRE(nd.find("\"E\":") != std::string::npos);
    REQUIRE(nd.find("\"Q\":") != std::string::npos);
    REQUIRE(nd.find("\"semi_R\":") != std::string::npos);
    REQUIRE(nd.find("\"dist_S\":") != std::string::npos);

    const std::string mf = slurp(dir / "manifest.json");
    REQUIRE(mf.find(cfg.config_hash) != std::string::npos);
    REQUIRE(mf.find("\"status\": \"completed\"") != std::string::npos);

    // snapshots round-trip through the CSV loader
    const auto grid = cfg.grid;
    const auto loaded = load_snapshot_csv((dir / "snapshot_final.csv").string(), grid);
    REQUIRE(loaded.psi.size() == static_cast<std::size_t>(grid.n_points));
    fs::remove_all(dir);
}

TEST_CASE("identical configs reproduce byte-identical data files") {
    const fs::path dir1 = fs::temp_directory_path() / "kgsol_repro_1";
    const fs::path dir2 = fs::temp_directory_path() / "kgsol_repro_2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    const auto cfg1 = bind_run_config(ConfigFile::parse_text(small_run_config(dir1.string())));
    const auto cfg2 = bind_run_config(ConfigFile::parse_text(small_run_config(dir2.string())));
    run_simulation(cfg1);
    run_simulation(cfg2);
    for (const char* name : {"diagnostics.ndjson", "trace_osc0.csv", "snapshot_initial.csv",
                             "snapshot_final.csv"}) {
        INFO(name);
        // the config hash differs (different output directory), so compare
        // everything after the header line
        std::string a = slurp(dir1 / name), b = slurp(dir2 / name);
        a.erase(0, a.find('\n'));
        b.erase(0, b.find('\n'));
        REQUIRE(a == b);
    }
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("output directories holding a different config are protected") {
    const fs::path dir = fs::temp_directory_path() / "kgsol_protect";
    fs::remove_all(dir);
    auto cfg = bind_run_config(ConfigFile::parse_text(small_run_config(dir.string())));
    run_simulation(cfg);
    // second run with a modified config into the same directory
    std::string text = small_run_config(dir.string());
    text += "# trailing comment changes the hash\n";
    auto cfg2 = bind_run_config(ConfigFile::parse_text(text));
    REQUIRE(cfg2.config_hash != cfg.config_hash);
    REQUIRE_THROWS_WITH(run_simulation(cfg2), Catch::Matchers::ContainsSubstring("--force"));
    REQUIRE_NOTHROW(run_simulation(cfg2, /*force=*/true));
    fs::remove_all(dir);
}

TEST_CASE("initial kinds: gaussian normalization and file round trip") {
    const auto grid = GridSpec::make(10.0, 0.02);
    std::ostringstream cfg;
    cfg << "[model]\nmass = 1\noscillator = 0 0,-1,0.25\n"
        << "[grid]\nhalf_width_x = 10\ndx = 0.02\n"
        << "[time]\ndt = 0.01\nt_end = 0.1\n"
        << "[initial]\nkind = gaussian\nsigma = 0.5\nomega0 = 0.6\nnormalize = true\n";
    const auto bound = bind_run_config(ConfigFile::parse_text(cfg.str()));
    const auto s = build_initial_state(bound);
    REQUIRE(norm_E(s, grid, 1.0) == Catch::Approx(1.0).epsilon(1e-12));

    const fs::path file = fs::temp_directory_path() / "kgsol_state.csv";
    write_snapshot_csv(file.string(), s, grid, "t");
    std::ostringstream cfg2;
    cfg2 << "[model]\nmass = 1\noscillator = 0 0,-1,0.25\n"
         << "[grid]\nhalf_width_x = 10\ndx = 0.02\n"
         << "[time]\ndt = 0.01\nt_end = 0.1\n"
         << "[initial]\nkind = file\npath = " << file.string() << "\n";
    const auto bound2 = bind_run_config(ConfigFile::parse_text(cfg2.str()));
    const auto s2 = build_initial_state(bound2);
    for (int j = 0; j < grid.n_points; ++j)
        REQUIRE(std::abs(s2.psi[static_cast<std::size_t>(j)] - s.psi[static_cast<std::size_t>(j)]) == 0.0);
    fs::remove(file);

    std::ostringstream cfg3;
    cfg3 << "[model]\nmass = 1\noscillator = 0 0,-1,0.25\n"
         << "[grid]\nhalf_width_x = 10\ndx = 0.02\n"
         << "[time]\ndt = 0.01\nt_end = 0.1\n"
         << "[initial]\nkind = file\npath = /nonexistent/state.csv\n";
    const auto bound3 = bind_run_config(ConfigFile::parse_text(cfg3.str()));
    REQUIRE_THROWS(build_initial_state(bound3));
}

TEST_CASE("emitted multifrequency configs load and rebuild the same parameters") {
    const auto p = build_wide_gap(1.0, 3.14159265358979323846, 0.0, 1.0);
    const std::string text = emit_widegap_config(p, "out/widegap_test");
    const auto bound = bind_run_config(ConfigFile::parse_text(text));
    REQUIRE(bound.model.n_oscillators() == 2);
    REQUIRE(bound.model.oscillators[1].position == Catch::Approx(p.L).margin(1e-12));
    const auto s0 = build_initial_state(bound);
    // psi(x, 0) = 0, pi carries both frequency lines
    REQUIRE(s0.psi[bound.grid.center()] == cplx(0.0, 0.0));
    REQUIRE(std::abs(s0.pi[static_cast<std::size_t>(bound.grid.index_near(p.L / 2.0))]) > 0.1);

    const auto q = build_linear_degenerate(1.0, 0.25, 1.0, 1.0);
    const auto bound2 = bind_run_config(ConfigFile::parse_text(emit_lindeg_config(q, "out/lindeg_test")));
    REQUIRE(bound2.model.oscillators[1].coeffs.size() == 2);
    REQUIRE(bound2.model.oscillators[1].coeffs[1] == Catch::Approx(-q.gamma / 2.0).epsilon(1e-12));
    REQUIRE_NOTHROW(build_initial_state(bound2));
}
