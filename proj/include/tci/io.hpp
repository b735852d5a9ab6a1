#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tci/grid.hpp"
#include "tci/subsolution.hpp"

namespace tci {

// Binary field dumps: magic "WFLD", version u32, n, N, component count,
// slice count, f64 time table, then per slice the components as little-endian
// IEEE-754 f64 values row-major (component-major within a slice).

inline constexpr std::uint32_t wfld_version = 1;

struct FieldDump {
    int n = 0;
    int N = 0;
    int ncomp = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> slices;  // [slice][comp * N^n + idx]

    std::size_t npoints() const {
        std::size_t p = 1;
        for (int i = 0; i < n; ++i) p *= static_cast<std::size_t>(N);
        return p;
    }
};

namespace detail {
inline void write_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}
inline std::uint32_t read_u32(std::ifstream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (!in) throw std::runtime_error("WFLD: truncated header");
    return v;
}
} // namespace detail

inline void write_wfld(const std::string& path, const FieldDump& dump) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write("WFLD", 4);
    detail::write_u32(out, wfld_version);
    detail::write_u32(out, static_cast<std::uint32_t>(dump.n));
    detail::write_u32(out, static_cast<std::uint32_t>(dump.N));
    detail::write_u32(out, static_cast<std::uint32_t>(dump.ncomp));
    detail::write_u32(out, static_cast<std::uint32_t>(dump.times.size()));
    out.write(reinterpret_cast<const char*>(dump.times.data()),
              static_cast<std::streamsize>(dump.times.size() * sizeof(double)));
    for (const auto& s : dump.slices) {
        if (s.size() != dump.npoints() * static_cast<std::size_t>(dump.ncomp))
            throw std::runtime_error("WFLD: slice size mismatch while writing");
        out.write(reinterpret_cast<const char*>(s.data()),
                  static_cast<std::streamsize>(s.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline FieldDump read_wfld(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "WFLD", 4) != 0)
        throw std::runtime_error("WFLD: bad magic in " + path);
    std::uint32_t ver = detail::read_u32(in);
    if (ver != wfld_version)
        throw std::runtime_error("WFLD: unsupported version " + std::to_string(ver));
    FieldDump d;
    d.n = static_cast<int>(detail::read_u32(in));
    d.N = static_cast<int>(detail::read_u32(in));
    d.ncomp = static_cast<int>(detail::read_u32(in));
    std::uint32_t nsl = detail::read_u32(in);
    if (d.n < 1 || d.n > 3 || d.N < 2 || d.N > 4096 || d.ncomp < 1 || d.ncomp > 16)
        throw std::runtime_error("WFLD: implausible shape in " + path);
    d.times.resize(nsl);
    in.read(reinterpret_cast<char*>(d.times.data()),
            static_cast<std::streamsize>(nsl * sizeof(double)));
    if (!in) throw std::runtime_error("WFLD: truncated time table in " + path);
    const std::size_t per_slice = d.npoints() * static_cast<std::size_t>(d.ncomp);
    d.slices.resize(nsl);
    for (auto& s : d.slices) {
        s.resize(per_slice);
        in.read(reinterpret_cast<char*>(s.data()),
                static_cast<std::streamsize>(per_slice * sizeof(double)));
        if (!in) throw std::runtime_error("WFLD: truncated data in " + path);
    }
    return d;
}

/// Dump a state family: momentum components first, then the packed U.
inline FieldDump state_to_dump(const SubsolutionState& st) {
    const GridSpec& g = st.grid;
    FieldDump d;
    d.n = g.n;
    d.N = g.N;
    d.ncomp = g.n + sym_size(g.n);
    const std::size_t np = g.npoints();
    for (int s = 0; s < st.nt; ++s) {
        d.times.push_back(st.time_of(s));
        std::vector<double> slice(np * static_cast<std::size_t>(d.ncomp));
        for (int a = 0; a < g.n; ++a)
            std::copy(st.m_slice(a, s), st.m_slice(a, s) + np, slice.begin() + a * np);
        for (int k = 0; k < sym_size(g.n); ++k)
            std::copy(st.U_slice(k, s), st.U_slice(k, s) + np,
                      slice.begin() + (g.n + k) * np);
        d.slices.push_back(std::move(slice));
    }
    return d;
}

/// Rebuild a state from a dump plus the run metadata it does not carry.
inline SubsolutionState dump_to_state(const FieldDump& d, const ScalarGridField& rho0,
                                      const ScalarGridField& p0, const ChiFn& chi, double dt_expect) {
    if (d.times.size() < 2) throw std::runtime_error("state dump needs at least two slices");
    GridSpec g;
    g.n = d.n;
    g.N = d.N;
    g.dt = d.times[1] - d.times[0];
    g.T = d.times.back() - d.times.front();
    if (std::abs(g.dt - dt_expect) > 1e-12)
        throw std::runtime_error("state dump sampling does not match the configuration");
    for (std::size_t s = 1; s < d.times.size(); ++s)
        if (std::abs(d.times[s] - d.times[s - 1] - g.dt) > 1e-9)
            throw std::runtime_error("state dump time table is not uniform");
    if (d.ncomp != g.n + sym_size(g.n))
        throw std::runtime_error("state dump has wrong component count");
    if (!rho0.grid.same_layout(g))
        throw std::runtime_error("state dump grid does not match the configuration");
    SubsolutionState st(g, rho0, p0, chi, d.times.front(), g.T);
    const std::size_t np = g.npoints();
    for (int s = 0; s < st.nt; ++s) {
        const auto& slice = d.slices[static_cast<std::size_t>(s)];
        for (int a = 0; a < g.n; ++a)
            std::copy(slice.begin() + a * np, slice.begin() + (a + 1) * np, st.m_slice(a, s));
        for (int k = 0; k < sym_size(g.n); ++k)
            std::copy(slice.begin() + (g.n + k) * np, slice.begin() + (g.n + k + 1) * np,
                      st.U_slice(k, s));
    }
    return st;
}

inline FieldDump scalar_to_dump(const ScalarGridField& f) {
    FieldDump d;
    d.n = f.grid.n;
    d.N = f.grid.N;
    d.ncomp = 1;
    d.times.push_back(0.0);
    d.slices.push_back(f.v);
    return d;
}

/// Deterministic float formatting for CSV output.
inline std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

} // namespace tci
