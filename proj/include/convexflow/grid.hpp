#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "convexflow/common.hpp"
#include "convexflow/fft.hpp"

namespace convexflow {

// Symmetric (n-1)x(n-1) matrix field: the radii-of-curvature matrices
// r_ij = nabla_i nabla_j h + h g_ij at each node, in the node's tangent frame.
// 2D stores one scalar rho per node, 3D stores (r11, r12, r22).
struct RadiiField {
    int dim = 2;
    std::vector<double> a;

    int size() const { return dim == 2 ? static_cast<int>(a.size()) : static_cast<int>(a.size()) / 3; }
    double det(int i) const {
        if (dim == 2) return a[i];
        const double* r = &a[3 * i];
        return r[0] * r[2] - r[1] * r[1];
    }
    double trace(int i) const { return dim == 2 ? a[i] : a[3 * i] + a[3 * i + 2]; }
    double eig_min(int i) const {
        if (dim == 2) return a[i];
        const double* r = &a[3 * i];
        double m = 0.5 * (r[0] + r[2]);
        double d = std::sqrt(0.25 * (r[0] - r[2]) * (r[0] - r[2]) + r[1] * r[1]);
        return m - d;
    }
    double eig_max(int i) const {
        if (dim == 2) return a[i];
        const double* r = &a[3 * i];
        double m = 0.5 * (r[0] + r[2]);
        double d = std::sqrt(0.25 * (r[0] - r[2]) * (r[0] - r[2]) + r[1] * r[1]);
        return m + d;
    }
};

// Per-node least-squares stencil on the icosphere. `fit` maps stencil values
// to the 9 coefficients of a quadratic polynomial of R^3 restricted to the
// sphere, written in the frame basis
//   {1, d1, d2, dn, d1^2, d1 d2, d2^2, d1 dn, d2 dn},  d = v - node.
struct NodeStencil {
    std::vector<int> nodes;   // self first, then neighbors by (distance, index)
    std::vector<double> fit;  // 9 rows x nodes.size() columns, row-major
    Vec3 e1, e2;              // tangent frame
};

class SphereGrid {
public:
    // -- construction ------------------------------------------------------
    static std::shared_ptr<const SphereGrid> circle(int m);
    static std::shared_ptr<const SphereGrid> icosphere(int level);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<Vec3>& nodes() const { return nodes_; }
    const Vec3& node(int i) const { return nodes_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    double weight(int i) const { return weights_[i]; }
    double spacing() const { return spacing_; }
    double total_weight() const { return total_weight_; }
    int antipode(int i) const { return antipode_[i]; }
    const std::string& id() const { return id_; }

    double theta(int i) const { return 2.0 * pi * i / size(); }  // 2D only

    // -- quadrature ----------------------------------------------------------
    double integrate(std::span<const double> f) const {
        check_field(f);
        double s = 0;
        for (int i = 0; i < size(); ++i) s += weights_[i] * f[i];
        return s;
    }
    Vec3 first_moment(std::span<const double> f) const {
        check_field(f);
        Vec3 s;
        for (int i = 0; i < size(); ++i) s += weights_[i] * f[i] * nodes_[i];
        return s;
    }

    // -- differential operators ---------------------------------------------
    RadiiField hessian_radii(std::span<const double> h) const {
        check_field(h);
        RadiiField r;
        r.dim = dim_;
        if (dim_ == 2) {
            r.a = spectral_->radii(h);
        } else {
            r.a.resize(3 * size());
            for (int i = 0; i < size(); ++i) {
                auto c = fit_coeffs(i, h);
                // r = tangential Hessian + (f - d_n f) * I with f = c0, d_n f = c3
                r.a[3 * i + 0] = 2.0 * c[4] + c[0] - c[3];
                r.a[3 * i + 1] = c[5];
                r.a[3 * i + 2] = 2.0 * c[6] + c[0] - c[3];
            }
        }
        return r;
    }

    // Tangential gradient as ambient vectors.
    std::vector<Vec3> tangent_gradient(std::span<const double> h) const {
        check_field(h);
        std::vector<Vec3> g(size());
        if (dim_ == 2) {
            auto d = spectral_->derivative(h);
            for (int i = 0; i < size(); ++i) {
                const Vec3& u = nodes_[i];
                g[i] = Vec3{-u.y, u.x, 0.0} * d[i];
            }
        } else {
            for (int i = 0; i < size(); ++i) {
                auto c = fit_coeffs(i, h);
                g[i] = stencils_[i].e1 * c[1] + stencils_[i].e2 * c[2];
            }
        }
        return g;
    }

    // Full spherical Hessian (nabla^2 h, without the +h g term), frame packed
    // like RadiiField. Mostly a test surface for the stencil identities.
    RadiiField spherical_hessian(std::span<const double> h) const {
        RadiiField r = hessian_radii(h);
        if (dim_ == 2) {
            for (int i = 0; i < size(); ++i) r.a[i] -= h[i];
        } else {
            for (int i = 0; i < size(); ++i) {
                r.a[3 * i + 0] -= h[i];
                r.a[3 * i + 2] -= h[i];
            }
        }
        return r;
    }

    // -- interpolation -------------------------------------------------------
    // Evaluate the sampled field at an arbitrary direction. 2D: trigonometric
    // interpolation (exact for band-limited data). 3D: evaluate the local
    // least-squares quadratic of the nearest node. `hint` accelerates repeated
    // nearby queries.
    double interpolate(std::span<const double> h, const Vec3& dir, int* hint = nullptr) const {
        check_field(h);
        Vec3 u = normalized(dir);
        if (dim_ == 2) {
            auto c = spectral_->analyze(h);
            return CircleSpectral::eval(c, size(), std::atan2(u.y, u.x));
        }
        int i = locate(u, hint ? *hint : 0);
        if (hint) *hint = i;
        auto c = fit_coeffs(i, h);
        return eval_fit(i, c, u);
    }

    // Batch version reusing the Fourier coefficients (2D) or walk hints (3D).
    std::vector<double> interpolate_many(std::span<const double> h, std::span<const Vec3> dirs) const {
        check_field(h);
        std::vector<double> out(dirs.size());
        if (dim_ == 2) {
            auto c = spectral_->analyze(h);
            for (size_t q = 0; q < dirs.size(); ++q)
                out[q] = CircleSpectral::eval(c, size(), std::atan2(dirs[q].y, dirs[q].x));
        } else {
            int hint = 0;
            for (size_t q = 0; q < dirs.size(); ++q) {
                Vec3 u = normalized(dirs[q]);
                hint = locate(u, hint);
                auto c = fit_coeffs(hint, h);
                out[q] = eval_fit(hint, c, u);
            }
        }
        return out;
    }

    // Nearest node by greedy ascent of u . node over the neighbor graph.
    int locate(const Vec3& u, int start = 0) const {
        if (dim_ == 2) {
            double t = std::atan2(u.y, u.x);
            if (t < 0) t += 2.0 * pi;
            int i = static_cast<int>(std::lround(t / (2.0 * pi) * size())) % size();
            return i;
        }
        int cur = start;
        double best = dot(nodes_[cur], u);
        for (;;) {
            int next = cur;
            for (int j : neighbors_[cur]) {
                double d = dot(nodes_[j], u);
                if (d > best + 1e-15) { best = d; next = j; }
            }
            if (next == cur) return cur;
            cur = next;
        }
    }

    const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
    const NodeStencil& stencil(int i) const { return stencils_[i]; }
    const CircleSpectral& spectral() const {
        if (!spectral_) throw DimensionUnsupported("spectral engine is 2D-only");
        return *spectral_;
    }

    // Least-squares coefficients of the local quadratic fit at node i.
    std::array<double, 9> fit_coeffs(int i, std::span<const double> values) const {
        const NodeStencil& st = stencils_[i];
        std::array<double, 9> c{};
        const int k = static_cast<int>(st.nodes.size());
        for (int r = 0; r < 9; ++r) {
            double s = 0;
            const double* row = &st.fit[r * k];
            for (int j = 0; j < k; ++j) s += row[j] * values[st.nodes[j]];
            c[r] = s;
        }
        return c;
    }

    double eval_fit(int i, const std::array<double, 9>& c, const Vec3& v) const {
        const NodeStencil& st = stencils_[i];
        Vec3 d = v - nodes_[i];
        double d1 = dot(d, st.e1), d2 = dot(d, st.e2), dn = dot(d, nodes_[i]);
        return c[0] + c[1] * d1 + c[2] * d2 + c[3] * dn + c[4] * d1 * d1 + c[5] * d1 * d2 +
               c[6] * d2 * d2 + c[7] * d1 * dn + c[8] * d2 * dn;
    }

private:
    SphereGrid() = default;
    void check_field(std::span<const double> f) const {
        if (static_cast<int>(f.size()) != size()) throw InvalidArgument("field size does not match grid");
    }
    void build_icosphere(int level);
    void build_stencils();

    int dim_ = 2;
    std::string id_;
    std::vector<Vec3> nodes_;
    std::vector<double> weights_;
    std::vector<int> antipode_;
    double spacing_ = 0;
    double total_weight_ = 0;
    std::shared_ptr<CircleSpectral> spectral_;      // 2D
    std::vector<std::vector<int>> neighbors_;       // 3D one-ring
    std::vector<NodeStencil> stencils_;             // 3D
};

// ---------------------------------------------------------------------------

inline std::shared_ptr<const SphereGrid> SphereGrid::circle(int m) {
    if (m < 16 || m % 2 != 0) throw InvalidArgument("circle grid: node count must be even and >= 16");
    auto g = std::shared_ptr<SphereGrid>(new SphereGrid());
    g->dim_ = 2;
    g->id_ = "circle:" + std::to_string(m);
    g->nodes_.resize(m);
    g->weights_.assign(m, 2.0 * pi / m);
    g->antipode_.resize(m);
    for (int i = 0; i < m; ++i) {
        double t = 2.0 * pi * i / m;
        g->nodes_[i] = {std::cos(t), std::sin(t), 0.0};
        g->antipode_[i] = (i + m / 2) % m;
    }
    g->spacing_ = 2.0 * pi / m;
    g->total_weight_ = 2.0 * pi;
    g->spectral_ = std::make_shared<CircleSpectral>(m);
    return g;
}

inline std::shared_ptr<const SphereGrid> SphereGrid::icosphere(int level) {
    if (level < 2 || level > 7) throw InvalidArgument("icosphere level must be in [2, 7]");
    auto g = std::shared_ptr<SphereGrid>(new SphereGrid());
    g->dim_ = 3;
    g->id_ = "icosphere:" + std::to_string(level);
    g->build_icosphere(level);
    g->build_stencils();
    return g;
}

inline void SphereGrid::build_icosphere(int level) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& v : verts) v = normalized(v);
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

    for (int s = 0; s < level; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Vec3 m = normalized(verts[key.first] + verts[key.second]);
            verts.push_back(m);
            int idx = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (auto& f : faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    const int n = static_cast<int>(verts.size());
    nodes_ = verts;

    // adjacency and incident faces
    neighbors_.assign(n, {});
    std::vector<std::vector<int>> node_faces(n);
    auto add_edge = [&](int a, int b) {
        auto& v = neighbors_[a];
        if (std::find(v.begin(), v.end(), b) == v.end()) v.push_back(b);
    };
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
        auto& t = faces[f];
        for (int e = 0; e < 3; ++e) {
            add_edge(t[e], t[(e + 1) % 3]);
            add_edge(t[(e + 1) % 3], t[e]);
            node_faces[t[e]].push_back(f);
        }
    }
    for (auto& v : neighbors_) std::sort(v.begin(), v.end());

    // spacing: minimum edge arc length
    spacing_ = 10.0;
    for (int i = 0; i < n; ++i)
        for (int j : neighbors_[i])
            if (j > i) spacing_ = std::min(spacing_, std::acos(std::clamp(dot(nodes_[i], nodes_[j]), -1.0, 1.0)));

    // circumcenters of faces, oriented outward
    std::vector<Vec3> cc(faces.size());
    for (size_t f = 0; f < faces.size(); ++f) {
        const Vec3 &a = nodes_[faces[f][0]], &b = nodes_[faces[f][1]], &c = nodes_[faces[f][2]];
        Vec3 m = normalized(cross(b - a, c - a));
        if (dot(m, a + b + c) < 0) m = -m;
        cc[f] = m;
    }

    // Voronoi cell of each node: spherical polygon of incident-face
    // circumcenters ordered around the node; area by angle excess. Faces are
    // consistently oriented, so each face incident to i contributes a directed
    // ring edge a -> b (the cyclic order i, a, b), and those edges chain into
    // the one-ring cycle.
    weights_.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        auto& fs = node_faces[i];
        std::unordered_map<int, std::pair<int, int>> succ;  // a -> (face, b)
        for (int f : fs) {
            auto& t = faces[f];
            int pos = t[0] == i ? 0 : (t[1] == i ? 1 : 2);
            int a = t[(pos + 1) % 3], b = t[(pos + 2) % 3];
            succ[a] = {f, b};
        }
        std::vector<int> ordered;
        int a = succ.begin()->first;
        for (size_t q = 0; q < fs.size(); ++q) {
            auto it = succ.find(a);
            if (it == succ.end()) throw Error("icosphere: broken one-ring at a vertex");
            ordered.push_back(it->second.first);
            a = it->second.second;
        }
        const int k = static_cast<int>(ordered.size());
        double angle_sum = 0;
        for (int q = 0; q < k; ++q) {
            const Vec3& prev = cc[ordered[(q + k - 1) % k]];
            const Vec3& cur = cc[ordered[q]];
            const Vec3& next = cc[ordered[(q + 1) % k]];
            Vec3 a = prev - dot(prev, cur) * cur;
            Vec3 b = next - dot(next, cur) * cur;
            double ang = std::atan2(norm(cross(a, b)), dot(a, b));
            angle_sum += ang;
        }
        weights_[i] = angle_sum - (k - 2) * pi;
    }
    total_weight_ = 0;
    for (double w : weights_) total_weight_ += w;

    // antipodal index map (the subdivided icosahedron is centrally symmetric)
    antipode_.assign(n, -1);
    std::unordered_map<long long, int> bucket;
    auto key_of = [](const Vec3& v) {
        auto q = [](double t) { return static_cast<long long>(std::llround(t * 1e7)); };
        return (q(v.x) * 20000003LL + q(v.y)) * 20000003LL + q(v.z);
    };
    for (int i = 0; i < n; ++i) bucket[key_of(nodes_[i])] = i;
    for (int i = 0; i < n; ++i) {
        auto it = bucket.find(key_of(-nodes_[i]));
        if (it == bucket.end()) throw Error("icosphere: antipode lookup failed");
        antipode_[i] = it->second;
    }
}

inline void SphereGrid::build_stencils() {
    const int n = size();
    stencils_.resize(n);
    for (int i = 0; i < n; ++i) {
        NodeStencil& st = stencils_[i];
        const Vec3& u = nodes_[i];

        // tangent frame: stable choice from the smallest component axis
        Vec3 axis = std::abs(u.x) < std::abs(u.y)
                        ? (std::abs(u.x) < std::abs(u.z) ? Vec3{1, 0, 0} : Vec3{0, 0, 1})
                        : (std::abs(u.y) < std::abs(u.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
        st.e1 = normalized(cross(axis, u));
        st.e2 = cross(u, st.e1);

        // candidates: one-ring plus two-ring, nearest first, ties by index
        std::vector<int> cand;
        for (int j : neighbors_[i]) cand.push_back(j);
        for (int j : neighbors_[i])
            for (int k : neighbors_[j])
                if (k != i && std::find(cand.begin(), cand.end(), k) == cand.end()) cand.push_back(k);
        std::vector<std::pair<double, int>> by_dist;
        by_dist.reserve(cand.size());
        for (int j : cand) by_dist.emplace_back(std::acos(std::clamp(dot(u, nodes_[j]), -1.0, 1.0)), j);
        std::sort(by_dist.begin(), by_dist.end());
        const int want = std::min<int>(18, static_cast<int>(by_dist.size()));
        st.nodes.clear();
        st.nodes.push_back(i);
        for (int q = 0; q < want; ++q) st.nodes.push_back(by_dist[q].second);
        if (static_cast<int>(st.nodes.size()) < 13)
            throw Error("icosphere stencil: fewer than 12 neighbors");

        const int k = static_cast<int>(st.nodes.size());
        const double scale = by_dist[want - 1].first;  // widest included distance

        // weighted Vandermonde in the 9-function basis, coordinates scaled
        std::vector<double> A(k * 9);
        std::vector<double> wrow(k);
        for (int r = 0; r < k; ++r) {
            Vec3 d = nodes_[st.nodes[r]] - u;
            double d1 = dot(d, st.e1) / scale, d2 = dot(d, st.e2) / scale, dn = dot(d, u) / scale;
            double dist = std::acos(std::clamp(dot(u, nodes_[st.nodes[r]]), -1.0, 1.0)) / scale;
            double w = std::exp(-1.5 * dist * dist);
            wrow[r] = w;
            double* row = &A[r * 9];
            row[0] = 1.0; row[1] = d1; row[2] = d2; row[3] = dn;
            row[4] = d1 * d1; row[5] = d1 * d2; row[6] = d2 * d2;
            row[7] = d1 * dn; row[8] = d2 * dn;
            for (int c = 0; c < 9; ++c) row[c] *= w;
        }

        // pseudo-inverse via Householder QR of the weighted Vandermonde
        std::vector<double> Q(A);  // k x 9, becomes R in place with reflectors
        std::vector<double> tau(9);
        for (int c = 0; c < 9; ++c) {
            double nrm = 0;
            for (int r = c; r < k; ++r) nrm += Q[r * 9 + c] * Q[r * 9 + c];
            nrm = std::sqrt(nrm);
            if (nrm < 1e-300) throw Error("icosphere stencil: rank-deficient fit");
            double alpha = Q[c * 9 + c] >= 0 ? -nrm : nrm;
            double v0 = Q[c * 9 + c] - alpha;
            std::vector<double> v(k, 0.0);
            v[c] = v0;
            for (int r = c + 1; r < k; ++r) v[r] = Q[r * 9 + c];
            double vtv = 0;
            for (int r = c; r < k; ++r) vtv += v[r] * v[r];
            tau[c] = vtv > 0 ? 2.0 / vtv : 0.0;
            for (int cc = c; cc < 9; ++cc) {
                double s = 0;
                for (int r = c; r < k; ++r) s += v[r] * Q[r * 9 + cc];
                s *= tau[c];
                for (int r = c; r < k; ++r) Q[r * 9 + cc] -= s * v[r];
            }
            // store reflector below diagonal (normalized by v0) for reuse
            if (std::abs(v0) > 1e-300)
                for (int r = c + 1; r < k; ++r) Q[r * 9 + c] = v[r] / v0;
            Q[c * 9 + c] = alpha;
            tau[c] *= v0 * v0;  // effective tau for normalized reflector
        }
        // Solve for the pseudo-inverse column by column: for each unit value
        // vector e_r (weighted), coefficients = R^{-1} Q^T W e_r.
        st.fit.assign(9 * k, 0.0);
        for (int r0 = 0; r0 < k; ++r0) {
            std::vector<double> y(k, 0.0);
            y[r0] = wrow[r0];  // weighted unit sample
            // apply Q^T (sequence of reflectors)
            for (int c = 0; c < 9; ++c) {
                double s = y[c];
                for (int r = c + 1; r < k; ++r) s += Q[r * 9 + c] * y[r];
                s *= tau[c];
                if (tau[c] == 0.0) continue;
                y[c] -= s;
                for (int r = c + 1; r < k; ++r) y[r] -= s * Q[r * 9 + c];
            }
            // back-substitute R x = y[0..8]
            std::array<double, 9> x{};
            for (int c = 8; c >= 0; --c) {
                double s = y[c];
                for (int cc = c + 1; cc < 9; ++cc) s -= Q[c * 9 + cc] * x[cc];
                x[c] = s / Q[c * 9 + c];
            }
            // undo the coordinate scaling
            const double s1 = 1.0 / scale, s2 = s1 * s1;
            st.fit[0 * k + r0] = x[0];
            st.fit[1 * k + r0] = x[1] * s1;
            st.fit[2 * k + r0] = x[2] * s1;
            st.fit[3 * k + r0] = x[3] * s1;
            st.fit[4 * k + r0] = x[4] * s2;
            st.fit[5 * k + r0] = x[5] * s2;
            st.fit[6 * k + r0] = x[6] * s2;
            st.fit[7 * k + r0] = x[7] * s2;
            st.fit[8 * k + r0] = x[8] * s2;
        }
    }
}

// Spec-facing constructors.
inline std::shared_ptr<const SphereGrid> make_circle_grid(int m) { return SphereGrid::circle(m); }
inline std::shared_ptr<const SphereGrid> make_sphere_grid(int level) { return SphereGrid::icosphere(level); }
inline RadiiField hessian_radii(const SphereGrid& grid, std::span<const double> h) {
    return grid.hessian_radii(h);
}

}  // namespace convexflow
