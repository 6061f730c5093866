#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgsol/grid.hpp"
#include "kgsol/integrator.hpp"
#include "kgsol/spectrum.hpp"
#include "kgsol/version.hpp"

namespace kgsol {

/// 17 significant digits: doubles round-trip exactly through the text files.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

// ---------------------------------------------------------------------------
// CSV snapshots and traces (header row, comma separators, LF endings)
// ---------------------------------------------------------------------------

inline void write_snapshot_csv(const std::string& path, const FieldState& s, const GridSpec& grid,
                               const std::string& config_hash) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write snapshot: " + path);
    out << "# config_hash=" << config_hash << " t=" << fmt17(s.time) << "\n";
    out << "x,re_psi,im_psi,re_pi,im_pi\n";
    for (int j = 0; j < grid.n_points; ++j) {
        const std::size_t k = static_cast<std::size_t>(j);
        out << fmt17(grid.x(j)) << ',' << fmt17(s.psi[k].real()) << ',' << fmt17(s.psi[k].imag()) << ','
            << fmt17(s.pi[k].real()) << ',' << fmt17(s.pi[k].imag()) << "\n";
    }
    if (!out.good()) throw std::runtime_error("short write: " + path);
}

inline FieldState load_snapshot_csv(const std::string& path, const GridSpec& grid) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    FieldState s = FieldState::zero(grid);
    std::string line;
    int row = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (row == -1) {  // header row
            row = 0;
            continue;
        }
        std::istringstream ls(line);
        std::string tok;
        double vals[5];
        for (int c = 0; c < 5; ++c) {
            if (!std::getline(ls, tok, ','))
                throw std::runtime_error(path + ": bad snapshot row '" + line + "'");
            vals[c] = std::stod(tok);
        }
        if (row >= grid.n_points) throw std::runtime_error(path + ": more rows than grid nodes");
        s.psi[static_cast<std::size_t>(row)] = cplx(vals[1], vals[2]);
        s.pi[static_cast<std::size_t>(row)] = cplx(vals[3], vals[4]);
        ++row;
    }
    if (row != grid.n_points)
        throw std::runtime_error(path + ": snapshot has " + std::to_string(row) + " rows, grid wants " +
                                 std::to_string(grid.n_points));
    return s;
}

inline void write_trace_csv(const std::string& path, const TraceSeries& tr, double position,
                            const std::string& config_hash, long long stride = 1) {
    if (stride < 1) stride = 1;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write trace: " + path);
    out << "# config_hash=" << config_hash << " x=" << fmt17(position) << " dt=" << fmt17(tr.dt * stride)
        << "\n";
    out << "t,re,im\n";
    for (std::size_t k = 0; k < tr.values.size(); k += static_cast<std::size_t>(stride))
        out << fmt17(tr.t0 + tr.dt * static_cast<double>(k)) << ',' << fmt17(tr.values[k].real()) << ','
            << fmt17(tr.values[k].imag()) << "\n";
    if (!out.good()) throw std::runtime_error("short write: " + path);
}

inline TraceSeries load_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace: " + path);
    TraceSeries tr;
    std::string line;
    bool have_header = false;
    std::vector<double> times;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!have_header) {
            have_header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string tok;
        double vals[3];
        for (int c = 0; c < 3; ++c) {
            if (!std::getline(ls, tok, ',')) throw std::runtime_error(path + ": bad trace row");
            vals[c] = std::stod(tok);
        }
        times.push_back(vals[0]);
        tr.values.emplace_back(vals[1], vals[2]);
    }
    if (tr.values.size() < 2) throw std::runtime_error(path + ": trace needs at least two samples");
    tr.t0 = times.front();
    tr.dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    return tr;
}

/// Full magnitude table when the report kept its bins, peak table otherwise.
inline void write_spectrum_csv(const std::string& path, const SpectrumReport& rep,
                               const std::string& config_hash) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write spectrum: " + path);
    out << "# config_hash=" << config_hash << " window=" << fmt17(rep.window_a) << ','
        << fmt17(rep.window_b) << "\n";
    if (!rep.bins.empty()) {
        out << "frequency,magnitude\n";
        for (const auto& [f, mag] : rep.bins) out << fmt17(f) << ',' << fmt17(mag) << "\n";
    } else {
        out << "frequency,magnitude,mass_fraction\n";
        for (const auto& p : rep.peaks)
            out << fmt17(p.frequency) << ',' << fmt17(p.magnitude) << ',' << fmt17(p.mass_fraction)
                << "\n";
    }
    if (!out.good()) throw std::runtime_error("short write: " + path);
}

// ---------------------------------------------------------------------------
// NDJSON diagnostics: a header object, then one object per record
// ---------------------------------------------------------------------------

inline std::string ndjson_header(const std::string& config_hash) {
    std::ostringstream out;
    out << "{\"config_hash\":\"" << config_hash << "\",\"artifact_version\":\"" << artifact_version
        << "\"}";
    return out.str();
}

inline std::string ndjson_record(const DiagRecord& rec) {
    std::ostringstream out;
    out << "{\"t\":" << fmt17(rec.time) << ",\"E\":" << fmt17(rec.energy) << ",\"Q\":" << fmt17(rec.charge);
    out << ",\"semi_R\":{";
    bool first = true;
    for (const auto& [R, v] : rec.seminorms) {
        if (!first) out << ',';
        first = false;
        out << "\"" << R << "\":" << fmt17(v);
    }
    out << "}";
    if (rec.ef_metric_to_S) out << ",\"dist_S\":" << fmt17(*rec.ef_metric_to_S);
    if (rec.spectral) {
        out << ",\"peaks\":[";
        for (std::size_t k = 0; k < rec.spectral->peaks.size(); ++k) {
            if (k) out << ',';
            out << '[' << fmt17(rec.spectral->peaks[k].frequency) << ','
                << fmt17(rec.spectral->peaks[k].magnitude) << ']';
        }
        out << ']';
    }
    out << "}";
    return out.str();
}

}  // namespace kgsol
