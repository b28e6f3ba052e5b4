#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "convexflow/flow.hpp"

namespace convexflow {

// Shortest exact decimal for doubles in CSV output (round-trippable, stable
// across reruns).
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Body snapshots: {"dim": n, "grid": id, "h": [...], "t": t}

inline nlohmann::ordered_json body_snapshot_json(const SphereGrid& grid,
                                                 const std::vector<double>& h, double t) {
    nlohmann::ordered_json j;
    j["dim"] = grid.dim();
    j["grid"] = grid.id();
    j["h"] = h;
    j["t"] = t;
    return j;
}

inline nlohmann::ordered_json body_snapshot_json(const ConvexBody& k, double t) {
    return body_snapshot_json(k.grid(), k.support(), t);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << text;
}

inline void write_body_snapshot(const std::filesystem::path& path, const SphereGrid& grid,
                                const std::vector<double>& h, double t) {
    write_text_file(path, body_snapshot_json(grid, h, t).dump(1) + "\n");
}

struct SnapshotData {
    int dim = 2;
    std::string grid_id;
    std::vector<double> h;
    double t = 0;
};

inline SnapshotData read_body_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open snapshot: " + path.string());
    nlohmann::json j;
    in >> j;
    SnapshotData s;
    s.dim = j.at("dim").get<int>();
    s.grid_id = j.at("grid").get<std::string>();
    s.h = j.at("h").get<std::vector<double>>();
    s.t = j.at("t").get<double>();
    return s;
}

inline std::shared_ptr<const SphereGrid> grid_from_id(const std::string& id) {
    auto colon = id.find(':');
    if (colon == std::string::npos) throw InvalidArgument("bad grid id: " + id);
    std::string kind = id.substr(0, colon);
    int arg = std::stoi(id.substr(colon + 1));
    if (kind == "circle") return make_circle_grid(arg);
    if (kind == "icosphere") return make_sphere_grid(arg);
    throw InvalidArgument("bad grid id: " + id);
}

// ---------------------------------------------------------------------------
// Trace CSV (fixed column order)

inline std::string trace_csv(const FlowTrace& trace) {
    std::ostringstream out;
    out << "step,t,dt,V,h_min,h_max,K_min,K_max,A_p,B_p,drift,santalo_product\n";
    for (const auto& r : trace.rows) {
        out << r.step << ',' << fmt_double(r.t) << ',' << fmt_double(r.dt) << ','
            << fmt_double(r.V) << ',' << fmt_double(r.h_min) << ',' << fmt_double(r.h_max) << ','
            << fmt_double(r.K_min) << ',' << fmt_double(r.K_max) << ',' << fmt_double(r.A_p)
            << ',' << fmt_double(r.B_p) << ',' << fmt_double(r.drift) << ','
            << fmt_double(r.santalo) << '\n';
    }
    return out.str();
}

// Boundary polyline CSV: x,y rows (x,y,z in 3D).
inline std::string boundary_csv(const ConvexBody& k) {
    auto b = boundary_embedding(k);
    std::ostringstream out;
    out << (k.dim() == 2 ? "x,y\n" : "x,y,z\n");
    for (const auto& p : b.points) {
        out << fmt_double(p.x) << ',' << fmt_double(p.y);
        if (k.dim() == 3) out << ',' << fmt_double(p.z);
        out << '\n';
    }
    return out.str();
}

// EntropyReport CSV row: p, phi_id, e_x, e_y[, e_z], A, B, residual.
inline std::string entropy_report_csv(const EntropyReport& rep, int dim, bool header = true) {
    std::ostringstream out;
    if (header)
        out << (dim == 2 ? "p,phi_id,e_x,e_y,A,B,residual\n" : "p,phi_id,e_x,e_y,e_z,A,B,residual\n");
    out << fmt_double(rep.p) << ',' << rep.phi_id << ',' << fmt_double(rep.e_point.x) << ','
        << fmt_double(rep.e_point.y) << ',';
    if (dim == 3) out << fmt_double(rep.e_point.z) << ',';
    out << fmt_double(rep.A_value) << ','
        << (rep.B_value ? fmt_double(*rep.B_value) : std::string("nan")) << ','
        << fmt_double(rep.residual) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// SVG export of 2D boundary polylines (fixed viewbox, one body per file)

inline std::string body_svg(const ConvexBody& k) {
    if (k.dim() != 2) throw DimensionUnsupported("body_svg: 2D only (3D exports CSV point clouds)");
    auto b = boundary_embedding(k);
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-3 -3 6 6\">\n"
        << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.01\" points=\"";
    for (size_t i = 0; i <= b.points.size(); ++i) {
        const Vec3& p = b.points[i % b.points.size()];
        if (i) out << ' ';
        out << fmt_double(p.x) << ',' << fmt_double(-p.y);
    }
    out << "\"/>\n</svg>\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Flat key=value configuration text

inline std::map<std::string, std::string> parse_flat_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
        size_t a = 0, b = line.size();
        while (a < b && is_space(line[a])) ++a;
        while (b > a && is_space(line[b - 1])) --b;
        line = line.substr(a, b - a);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        while (!key.empty() && is_space(key.back())) key.pop_back();
        size_t v = 0;
        while (v < val.size() && is_space(val[v])) ++v;
        val = val.substr(v);
        if (key.empty()) throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key))
            throw InvalidArgument("config: duplicate key '" + key + "'");
        kv[key] = val;
    }
    return kv;
}

inline std::map<std::string, std::string> parse_flat_config_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error("cannot open config: " + p.string());
    return parse_flat_config(in);
}

inline std::string dump_flat_config(const std::map<std::string, std::string>& kv) {
    std::ostringstream out;
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
    return out.str();
}

// phi specification: keys "const", "k<j>.cos", "k<j>.sin" with numeric values.
// Returns samples on the grid (empty for the constant-1 weight) and an id.
struct PhiSpec {
    std::vector<double> samples;  // empty = constant 1
    bool is_even = true;
    std::string id = "const";
};

inline PhiSpec build_phi(const SphereGrid& grid, const std::map<std::string, double>& coeffs) {
    PhiSpec spec;
    if (coeffs.empty()) return spec;
    double c0 = 1.0;
    std::map<int, std::pair<double, double>> modes;  // k -> (cos, sin)
    for (const auto& [key, val] : coeffs) {
        if (key == "const") {
            c0 = val;
            continue;
        }
        if (key.size() < 2 || key[0] != 'k')
            throw InvalidArgument("phi: bad key '" + key + "' (want const, k<j>.cos, k<j>.sin)");
        auto dotp = key.find('.');
        if (dotp == std::string::npos)
            throw InvalidArgument("phi: bad key '" + key + "' (want k<j>.cos or k<j>.sin)");
        int k = std::stoi(key.substr(1, dotp - 1));
        std::string part = key.substr(dotp + 1);
        if (k < 1) throw InvalidArgument("phi: harmonic index must be >= 1");
        if (part == "cos")
            modes[k].first = val;
        else if (part == "sin")
            modes[k].second = val;
        else
            throw InvalidArgument("phi: bad key '" + key + "'");
    }
    if (grid.dim() != 2 && !modes.empty())
        throw InvalidArgument("phi: Fourier coefficients are 2D-only (3D phi must be constant)");
    spec.samples.assign(grid.size(), c0);
    std::ostringstream id;
    id << "const=" << fmt_double(c0);
    for (const auto& [k, ab] : modes) {
        if (k % 2 == 1 && (ab.first != 0 || ab.second != 0)) spec.is_even = false;
        for (int i = 0; i < grid.size(); ++i)
            spec.samples[i] += ab.first * std::cos(k * grid.theta(i)) +
                               ab.second * std::sin(k * grid.theta(i));
        if (ab.first != 0) id << ";k" << k << ".cos=" << fmt_double(ab.first);
        if (ab.second != 0) id << ";k" << k << ".sin=" << fmt_double(ab.second);
    }
    spec.id = id.str();
    double mn = spec.samples[0];
    for (double v : spec.samples) mn = std::min(mn, v);
    if (!(mn > 0)) throw InvalidArgument("phi: weight must be positive everywhere");
    if (modes.empty() && c0 == 1.0) spec.samples.clear();  // plain constant 1
    return spec;
}

}  // namespace convexflow
