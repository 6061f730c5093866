#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgsol/grid.hpp"
#include "kgsol/integrator.hpp"
#include "kgsol/io.hpp"
#include "kgsol/model_core.hpp"
#include "kgsol/multifreq.hpp"
#include "kgsol/solitary.hpp"

namespace kgsol {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

namespace detail {

struct ConfigEntry {
    std::string value;
    int line = 0;
    mutable bool used = false;
};

}  // namespace detail

/// Sectioned key = value text; '#' starts a comment; keys may repeat.
class ConfigFile {
public:
    static ConfigFile parse_text(const std::string& text, const std::string& origin = "<string>") {
        ConfigFile cf;
        cf.text_ = text;
        cf.origin_ = origin;
        cf.hash_ = fnv1a_hex(text);
        std::istringstream in(text);
        std::string line;
        std::string section;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash_pos = line.find('#');
            if (hash_pos != std::string::npos) line.erase(hash_pos);
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                if (a == std::string::npos) return std::string();
                const auto b = s.find_last_not_of(" \t\r");
                return s.substr(a, b - a + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
            cf.entries_[section + "." + key].push_back({value, line_no, false});
        }
        return cf;
    }

    static ConfigFile load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_text(ss.str(), path);
    }

    const std::string& text() const { return text_; }
    const std::string& hash() const { return hash_; }
    const std::string& origin() const { return origin_; }

    bool has(const std::string& section, const std::string& key) const {
        return entries_.count(section + "." + key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key) const {
        const auto it = entries_.find(section + "." + key);
        if (it == entries_.end() || it->second.empty())
            throw ConfigError(origin_ + ": missing required key [" + section + "] " + key);
        it->second.back().used = true;
        return it->second.back().value;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        return has(section, key) ? get_string(section, key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return parse_double(section, key, get_string(section, key));
    }
    double get_double(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    long long get_int(const std::string& section, const std::string& key, long long fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get_string(section, key);
        try {
            std::size_t pos = 0;
            const long long r = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return r;
        } catch (...) {
            throw ConfigError(origin_ + ": [" + section + "] " + key + ": not an integer: '" + v + "'");
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get_string(section, key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError(origin_ + ": [" + section + "] " + key + ": not a boolean: '" + v + "'");
    }

    std::vector<std::pair<std::string, int>> get_all(const std::string& section,
                                                     const std::string& key) const {
        std::vector<std::pair<std::string, int>> out;
        const auto it = entries_.find(section + "." + key);
        if (it == entries_.end()) return out;
        for (const auto& e : it->second) {
            e.used = true;
            out.emplace_back(e.value, e.line);
        }
        return out;
    }

    std::vector<std::string> unused_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries_)
            for (const auto& e : v)
                if (!e.used) out.push_back(k + " (line " + std::to_string(e.line) + ")");
        return out;
    }

    double parse_double(const std::string& section, const std::string& key, const std::string& v) const {
        try {
            std::size_t pos = 0;
            const double r = std::stod(v, &pos);
            if (pos != v.size() || !std::isfinite(r)) throw std::invalid_argument("");
            return r;
        } catch (...) {
            throw ConfigError(origin_ + ": [" + section + "] " + key + ": not a number: '" + v + "'");
        }
    }

private:
    std::string text_, origin_, hash_;
    std::map<std::string, std::vector<detail::ConfigEntry>> entries_;
};

inline std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::string tok;
    std::istringstream in(s);
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(tok, &pos);
            while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
            if (pos != tok.size()) throw std::invalid_argument("");
            out.push_back(v);
        } catch (...) {
            throw ConfigError(what + ": bad number '" + tok + "'");
        }
    }
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

// ---------------------------------------------------------------------------
// Bound run description
// ---------------------------------------------------------------------------

struct InitialSpec {
    std::string kind;
    // solitary
    double omega = 0.0, phase = 0.0;
    long long root_index = 0;
    // multifrequency
    double alpha = 0.0, beta = 1.0;
    std::optional<double> a_target;
    // gaussian
    double sigma = 1.0, amplitude = 1.0, center = 0.0, omega0 = 0.0, noise = 0.0;
    bool normalize = false;
    unsigned long long seed = 0;
    // file
    std::string path;
};

struct OutputSpec {
    std::string directory;
    long long snapshot_every = 0;  // steps; 0 = first and last only
    long long trace_stride = 1;
    std::string format = "csv";
};

struct RunConfig {
    std::string config_text;
    std::string config_hash;
    GridSpec grid;
    ModelSpec model;
    SchemeParams scheme;
    double t_end = 0.0;
    long long sample_every = 1;
    InitialSpec initial;
    std::vector<int> seminorm_R = {1, 2, 5, 10};
    long long distance_every = 0;
    std::optional<std::pair<double, double>> spectrum_window;
    std::vector<double> probes;
    OutputSpec output;
    std::vector<std::string> notes;  // snap echoes and other load-time remarks
};

namespace detail {

inline std::vector<double> gaussian_rho(const GridSpec& grid, double amp, double center, double width) {
    std::vector<double> rho(static_cast<std::size_t>(grid.n_points));
    for (int j = 0; j < grid.n_points; ++j) {
        const double u = (grid.x(j) - center) / width;
        rho[static_cast<std::size_t>(j)] = amp * std::exp(-0.5 * u * u);
    }
    return rho;
}

}  // namespace detail

/// Build the initial state described by cfg.initial (pure; seeded noise only).
inline FieldState build_initial_state(const RunConfig& cfg) {
    const auto& ini = cfg.initial;
    const auto& grid = cfg.grid;
    const auto& model = cfg.model;

    if (ini.kind == "solitary") {
        if (model.is_mean_field() || model.n_oscillators() != 1)
            throw ConfigError("initial kind 'solitary' needs a single-oscillator model");
        const auto& osc = model.oscillators.front();
        auto waves = solitary_waves(osc.coeffs, ini.omega, model.mass);
        if (waves.empty())
            throw ConfigError("no solitary wave at omega = " + std::to_string(ini.omega) +
                              " for this oscillator");
        if (ini.root_index < 0 || ini.root_index >= static_cast<long long>(waves.size()))
            throw ConfigError("root_index out of range; " + std::to_string(waves.size()) +
                              " amplitude roots available");
        return sample_solitary(waves[static_cast<std::size_t>(ini.root_index)], grid, ini.phase,
                               osc.position);
    }
    if (ini.kind == "multifreq_widegap") {
        if (model.n_oscillators() != 2) throw ConfigError("multifreq_widegap needs two oscillators");
        const double L = model.oscillators[1].position - model.oscillators[0].position;
        auto p = build_wide_gap(model.mass, L, ini.alpha, ini.beta);
        FieldState s = multifreq_state(p, grid, 0.0);
        if (model.oscillators[0].position != 0.0) {
            // construction is anchored at x = 0; shift support is not provided
            throw ConfigError("multifreq_widegap expects the first oscillator at x = 0");
        }
        return s;
    }
    if (ini.kind == "multifreq_lindeg") {
        if (model.n_oscillators() != 2) throw ConfigError("multifreq_lindeg needs two oscillators");
        if (model.oscillators[0].position != 0.0)
            throw ConfigError("multifreq_lindeg expects the first oscillator at x = 0");
        const double L = model.oscillators[1].position;
        auto p = ini.a_target ? build_linear_degenerate(model.mass, ini.omega, L, ini.beta, ini.alpha,
                                                        LindegMode::solve_for_alpha, *ini.a_target)
                              : build_linear_degenerate(model.mass, ini.omega, L, ini.beta, ini.alpha);
        return multifreq_state(p, grid, 0.0);
    }
    if (ini.kind == "gaussian") {
        FieldState s = FieldState::zero(grid);
        for (int j = 0; j < grid.n_points; ++j) {
            const double u = (grid.x(j) - ini.center) / ini.sigma;
            const double v = ini.amplitude * std::exp(-0.5 * u * u);
            s.psi[static_cast<std::size_t>(j)] = cplx(v, 0.0);
            s.pi[static_cast<std::size_t>(j)] = cplx(0.0, -ini.omega0 * v);
        }
        if (ini.noise != 0.0) {
            std::mt19937_64 rng(ini.seed);
            std::normal_distribution<double> gauss(0.0, 1.0);
            const double env_w = 3.0 * ini.sigma;
            for (int j = 0; j < grid.n_points; ++j) {
                const double u = (grid.x(j) - ini.center) / env_w;
                const double env = std::exp(-0.5 * u * u);
                s.psi[static_cast<std::size_t>(j)] += ini.noise * env * cplx(gauss(rng), gauss(rng));
            }
        }
        if (ini.normalize) {
            const double e = norm_E(s, grid, model.mass);
            if (e > 0.0) {
                const double scl = 1.0 / e;
                for (auto& z : s.psi) z *= scl;
                for (auto& z : s.pi) z *= scl;
            }
        }
        return s;
    }
    if (ini.kind == "file") return load_snapshot_csv(ini.path, grid);
    throw ConfigError("unknown initial kind '" + ini.kind + "'");
}

/// Parse and bind a full run description; snaps oscillator positions to the
/// nearest grid node (within dx/2) and records what was snapped.
inline RunConfig bind_run_config(const ConfigFile& cf) {
    RunConfig cfg;
    cfg.config_text = cf.text();
    cfg.config_hash = cf.hash();

    cfg.grid = GridSpec::make(cf.get_double("grid", "half_width_x"), cf.get_double("grid", "dx"));

    // model
    const double mass = cf.get_double("model", "mass");
    const auto osc_lines = cf.get_all("model", "oscillator");
    const bool has_mf = cf.has("model", "meanfield_rho");
    if (!osc_lines.empty() && has_mf)
        throw ConfigError("[model]: choose either oscillators or a mean-field coupling, not both");
    if (osc_lines.empty() && !has_mf) throw ConfigError("[model]: no coupling given");

    if (!osc_lines.empty()) {
        std::vector<OscillatorSpec> oscs;
        for (const auto& [value, line] : osc_lines) {
            std::istringstream in(value);
            std::string pos_tok, coeff_tok;
            if (!(in >> pos_tok >> coeff_tok))
                throw ConfigError("line " + std::to_string(line) +
                                  ": oscillator wants '<position> <u0,u1,...>'");
            OscillatorSpec o;
            o.position = cf.parse_double("model", "oscillator", pos_tok);
            o.coeffs = parse_double_list(coeff_tok, "oscillator coefficients (line " +
                                                        std::to_string(line) + ")");
            // snap to the grid
            const int j = cfg.grid.index_near(o.position);
            const double node = cfg.grid.x(j);
            if (std::abs(node - o.position) > 0.5 * cfg.grid.dx + 1e-12)
                throw ConfigError("line " + std::to_string(line) + ": oscillator position " + pos_tok +
                                  " is outside the grid");
            if (std::abs(node - o.position) > 1e-9 * cfg.grid.dx) {
                std::ostringstream note;
                note << "oscillator at " << o.position << " snapped to grid node " << node;
                cfg.notes.push_back(note.str());
            }
            o.position = node;
            oscs.push_back(std::move(o));
        }
        cfg.model = ModelSpec::with_oscillators(mass, std::move(oscs));
    } else {
        std::istringstream in(cf.get_string("model", "meanfield_rho"));
        std::string kind;
        in >> kind;
        if (kind != "gaussian")
            throw ConfigError("[model] meanfield_rho: only 'gaussian <amp> <center> <width>' is supported");
        double amp, center, width;
        if (!(in >> amp >> center >> width) || !(width > 0.0))
            throw ConfigError("[model] meanfield_rho: wants 'gaussian <amp> <center> <width>'");
        MeanFieldSpec mf;
        mf.rho = detail::gaussian_rho(cfg.grid, amp, center, width);
        mf.coeffs = parse_double_list(cf.get_string("model", "meanfield_coeffs"), "[model] meanfield_coeffs");
        cfg.model = ModelSpec::with_mean_field(mass, std::move(mf));
    }
    cfg.model.allow_unbounded = cf.get_bool("model", "allow_unbounded", false);
    if (!model_bounded_below(cfg.model) && !cfg.model.allow_unbounded)
        throw ConfigError(
            "[model]: a potential is not bounded below (well-posedness hypothesis); "
            "set allow_unbounded = true to run regardless");

    // time stepping
    if (cf.has("time", "dt") && cf.has("time", "cfl"))
        throw ConfigError("[time]: give either dt or cfl, not both");
    if (cf.has("time", "dt"))
        cfg.scheme.dt = cf.get_double("time", "dt");
    else
        cfg.scheme.dt = cf.get_double("time", "cfl", 0.5) * cfg.grid.dx;
    cfg.t_end = cf.get_double("time", "t_end");
    cfg.sample_every = cf.get_int("time", "sample_every", 10);
    const std::string bc = cf.get_string("time", "bc", "transparent");
    if (bc == "transparent")
        cfg.scheme.bc = BoundaryKind::transparent;
    else if (bc == "dirichlet")
        cfg.scheme.bc = BoundaryKind::dirichlet;
    else if (bc == "periodic")
        cfg.scheme.bc = BoundaryKind::periodic;
    else
        throw ConfigError("[time] bc: unknown boundary kind '" + bc + "'");
    cfg.scheme.buffer_check = cf.get_bool("time", "buffer_check", false);
    cfg.scheme.overflow_guard = cf.get_double("time", "overflow_guard", 1e12);
    cfg.scheme.validate(cfg.grid);

    // initial data
    cfg.initial.kind = cf.get_string("initial", "kind");
    cfg.initial.omega = cf.get_double("initial", "omega", 0.0);
    cfg.initial.phase = cf.get_double("initial", "phase", 0.0);
    cfg.initial.root_index = cf.get_int("initial", "root_index", 0);
    cfg.initial.alpha = cf.get_double("initial", "alpha", 0.0);
    cfg.initial.beta = cf.get_double("initial", "beta", 1.0);
    if (cf.has("initial", "a_target")) cfg.initial.a_target = cf.get_double("initial", "a_target");
    cfg.initial.sigma = cf.get_double("initial", "sigma", 1.0);
    cfg.initial.amplitude = cf.get_double("initial", "amplitude", 1.0);
    cfg.initial.center = cf.get_double("initial", "center", 0.0);
    cfg.initial.omega0 = cf.get_double("initial", "omega0", 0.0);
    cfg.initial.noise = cf.get_double("initial", "noise", 0.0);
    cfg.initial.normalize = cf.get_bool("initial", "normalize", false);
    cfg.initial.seed = static_cast<unsigned long long>(cf.get_int("initial", "seed", 0));
    cfg.initial.path = cf.get_string("initial", "path", "");

    // diagnostics
    if (cf.has("diagnostics", "seminorm_R")) {
        cfg.seminorm_R.clear();
        for (double v : parse_double_list(cf.get_string("diagnostics", "seminorm_R"),
                                          "[diagnostics] seminorm_R"))
            cfg.seminorm_R.push_back(static_cast<int>(std::llround(v)));
    }
    cfg.distance_every = cf.get_int("diagnostics", "distance_every", 20);
    if (cf.has("diagnostics", "spectrum_window")) {
        const auto w = parse_double_list(cf.get_string("diagnostics", "spectrum_window"),
                                         "[diagnostics] spectrum_window");
        if (w.size() != 2 || !(w[0] < w[1]))
            throw ConfigError("[diagnostics] spectrum_window wants 'a,b' with a < b");
        cfg.spectrum_window = std::make_pair(w[0], w[1]);
    }
    for (const auto& [value, line] : cf.get_all("diagnostics", "probe"))
        cfg.probes.push_back(cf.parse_double("diagnostics", "probe", value));

    // output
    cfg.output.directory = cf.get_string("output", "directory", "");
    cfg.output.snapshot_every = cf.get_int("output", "snapshot_every", 0);
    cfg.output.trace_stride = cf.get_int("output", "trace_stride", 1);
    cfg.output.format = cf.get_string("output", "format", "csv");
    if (cfg.output.format != "csv") throw ConfigError("[output] format: only 'csv' is supported");

    return cfg;
}

}  // namespace kgsol
