#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "convexflow/common.hpp"
#include "convexflow/grid.hpp"

namespace convexflow {

// Convex body represented by support-function samples on a shared grid.
// Immutable after construction; the radii matrices and the curvature function
// S_{n-1} = det r / det g are cached eagerly.
class ConvexBody {
public:
    ConvexBody(std::shared_ptr<const SphereGrid> grid, std::vector<double> h)
        : grid_(std::move(grid)), h_(std::move(h)) {
        if (static_cast<int>(h_.size()) != grid_->size())
            throw InvalidArgument("ConvexBody: sample count does not match grid");
        radii_ = grid_->hessian_radii(h_);
        const int n = grid_->size();
        surface_.resize(n);
        min_eig_ = std::numeric_limits<double>::infinity();
        double hmax = 0;
        for (int i = 0; i < n; ++i) {
            surface_[i] = radii_.det(i);
            min_eig_ = std::min(min_eig_, radii_.eig_min(i));
            hmax = std::max(hmax, std::abs(h_[i]));
        }
        if (!(min_eig_ > 1e-10 * hmax))
            throw NonConvexBody("ConvexBody: radii matrix not positive definite");
    }

    const SphereGrid& grid() const { return *grid_; }
    std::shared_ptr<const SphereGrid> grid_ptr() const { return grid_; }
    int dim() const { return grid_->dim(); }
    int size() const { return grid_->size(); }
    const std::vector<double>& support() const { return h_; }
    double support(int i) const { return h_[i]; }
    const RadiiField& radii() const { return radii_; }
    // S_{n-1}, the reciprocal Gauss curvature as a function of the normal.
    const std::vector<double>& surface_density() const { return surface_; }
    double min_radii_eig() const { return min_eig_; }

    double min_support() const {
        double m = h_[0];
        for (double v : h_) m = std::min(m, v);
        return m;
    }
    double max_support() const {
        double m = h_[0];
        for (double v : h_) m = std::max(m, v);
        return m;
    }
    bool origin_interior() const { return min_support() > 0.0; }
    bool origin_symmetric(double tol = 1e-9) const {
        double dev = 0, scale = max_support();
        for (int i = 0; i < size(); ++i)
            dev = std::max(dev, std::abs(h_[i] - h_[grid_->antipode(i)]));
        return dev < tol * scale;
    }

private:
    std::shared_ptr<const SphereGrid> grid_;
    std::vector<double> h_;
    RadiiField radii_;
    std::vector<double> surface_;
    double min_eig_ = 0;
};

// Positive Gauss curvature field 1/S_{n-1}.
inline std::vector<double> gauss_curvature(const ConvexBody& k) {
    std::vector<double> out(k.size());
    for (int i = 0; i < k.size(); ++i) {
        double s = k.surface_density()[i];
        if (!(s > 0.0)) throw NonConvexBody("gauss_curvature: nonpositive curvature function");
        out[i] = 1.0 / s;
    }
    return out;
}

inline double volume(const ConvexBody& k) {
    const auto& g = k.grid();
    double v = 0;
    for (int i = 0; i < k.size(); ++i) v += g.weight(i) * k.support(i) * k.surface_density()[i];
    return v / k.dim();
}

// V_1(K, L) = (1/n) int h_L dS_K.
inline double mixed_volume(const ConvexBody& k, const ConvexBody& l) {
    if (k.grid_ptr() != l.grid_ptr()) throw GridMismatch("mixed_volume: bodies on different grids");
    const auto& g = k.grid();
    double v = 0;
    for (int i = 0; i < k.size(); ++i) v += g.weight(i) * l.support(i) * k.surface_density()[i];
    return v / k.dim();
}

inline ConvexBody translate(const ConvexBody& k, const Vec3& x0) {
    std::vector<double> h = k.support();
    for (int i = 0; i < k.size(); ++i) h[i] += dot(x0, k.grid().node(i));
    return ConvexBody(k.grid_ptr(), std::move(h));
}

inline double hausdorff_distance(const ConvexBody& k, const ConvexBody& l) {
    if (k.grid_ptr() != l.grid_ptr()) throw GridMismatch("hausdorff_distance: bodies on different grids");
    double d = 0;
    for (int i = 0; i < k.size(); ++i) d = std::max(d, std::abs(k.support(i) - l.support(i)));
    return d;
}

// Boundary points via the inverse Gauss map x = h u + grad h.
struct BoundaryEmbedding {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;
};

inline BoundaryEmbedding boundary_embedding(const ConvexBody& k) {
    BoundaryEmbedding b;
    b.points.resize(k.size());
    b.normals.assign(k.grid().nodes().begin(), k.grid().nodes().end());
    auto grad = k.grid().tangent_gradient(k.support());
    for (int i = 0; i < k.size(); ++i) b.points[i] = k.support(i) * k.grid().node(i) + grad[i];
    return b;
}

inline Vec3 centroid(const ConvexBody& k) {
    auto b = boundary_embedding(k);
    const auto& g = k.grid();
    Vec3 m;
    double v = 0;
    for (int i = 0; i < k.size(); ++i) {
        double f = g.weight(i) * k.support(i) * k.surface_density()[i];
        v += f;
        m += f * b.points[i];
    }
    v /= k.dim();
    return m / (v * (k.dim() + 1.0));
}

// h_{AK}(u) = |A^T u| h_K(A^T u / |A^T u|).
inline ConvexBody linear_image(const ConvexBody& k, const Mat3& a) {
    if (a.dim != k.dim()) throw InvalidArgument("linear_image: matrix dimension mismatch");
    if (std::abs(a.det()) < 1e-14) throw SingularMatrix("linear_image: singular matrix");
    const auto& g = k.grid();
    std::vector<Vec3> dirs(k.size());
    std::vector<double> scale(k.size());
    for (int i = 0; i < k.size(); ++i) {
        Vec3 v = a.apply_transpose(g.node(i));
        scale[i] = norm(v);
        dirs[i] = v / scale[i];
    }
    auto vals = g.interpolate_many(k.support(), dirs);
    std::vector<double> h(k.size());
    for (int i = 0; i < k.size(); ++i) h[i] = scale[i] * vals[i];
    return ConvexBody(k.grid_ptr(), std::move(h));
}

// ---------------------------------------------------------------------------
// Polar body

namespace detail {

// 2D: the boundary point with normal angle t is x(t) = h u + h' u_perp; its
// polar angle alpha(t) is strictly increasing. Invert alpha by Newton to get
// the radial function in a prescribed direction.
class PolarInverter2D {
public:
    explicit PolarInverter2D(const ConvexBody& k)
        : m_(k.size()), coeffs_(k.grid().spectral().analyze(k.support())) {}

    // radial function of K in direction beta, from the smooth parametrization
    double radial(double beta) const {
        double t = beta;
        for (int it = 0; it < 60; ++it) {
            double h = CircleSpectral::eval(coeffs_, m_, t);
            double hp = CircleSpectral::eval_derivative(coeffs_, m_, t);
            double rho = CircleSpectral::eval_radii(coeffs_, m_, t);
            double cx = h * std::cos(t) - hp * std::sin(t);
            double cy = h * std::sin(t) + hp * std::cos(t);
            double alpha = std::atan2(cy, cx);
            double diff = std::remainder(alpha - beta, 2.0 * pi);
            double r2 = cx * cx + cy * cy;
            if (std::abs(diff) < 1e-14) return std::sqrt(r2);
            // d alpha / dt = h rho / |x|^2
            t -= diff * r2 / (h * rho);
        }
        throw NotConverged("polar (2D): Gauss-map inversion did not converge");
    }

private:
    int m_;
    std::vector<std::complex<double>> coeffs_;
};

}  // namespace detail

namespace detail {

// 3D Gauss-map inversion: find the normal nu whose boundary point
// x(nu) = h nu + grad h lies in direction w, using per-node quadratic fits
// of the support samples for all evaluations. Returns |x(nu)|.
class PolarInverter3D {
public:
    PolarInverter3D(const SphereGrid& g, std::span<const double> h) : g_(g), h_(h) {}

    double radial(const Vec3& w, int* hint) {
        Vec3 nu = w;
        // Phase one re-selects the nearest node each iteration; once the
        // residual is below the inter-stencil model disagreement the node is
        // frozen, so Newton converges on one smooth quadratic.
        int frozen = -1;
        for (int it = 0; it < 80; ++it) {
            int n = frozen >= 0 ? frozen : g_.locate(nu, hint ? *hint : 0);
            if (hint && frozen < 0) *hint = n;
            auto c = g_.fit_coeffs(n, h_);
            const NodeStencil& st = g_.stencil(n);
            Vec3 delta = nu - g_.node(n);
            // ambient quadratic F and its derivatives at nu
            double d1 = dot(delta, st.e1), d2 = dot(delta, st.e2), dn = dot(delta, g_.node(n));
            double f = c[0] + c[1] * d1 + c[2] * d2 + c[3] * dn + c[4] * d1 * d1 +
                       c[5] * d1 * d2 + c[6] * d2 * d2 + c[7] * d1 * dn + c[8] * d2 * dn;
            Vec3 gradF = st.e1 * (c[1] + 2 * c[4] * d1 + c[5] * d2 + c[7] * dn) +
                         st.e2 * (c[2] + c[5] * d1 + 2 * c[6] * d2 + c[8] * dn) +
                         g_.node(n) * (c[3] + c[7] * d1 + c[8] * d2);
            double fr = dot(nu, gradF);  // radial derivative
            Vec3 x = f * nu + (gradF - fr * nu);
            double xn = norm(x);
            Vec3 dir = x / xn;
            Vec3 res = dir - dot(dir, w) * w;  // tangent-of-w residual
            double rn = norm(res);
            if (rn < 1e-13) return xn;
            if (frozen < 0 && rn < 0.2 * g_.spacing()) frozen = n;
            // tangent frame at nu
            Vec3 a1 = normalized(std::abs(nu.x) < 0.9 ? cross(Vec3{1, 0, 0}, nu)
                                                      : cross(Vec3{0, 1, 0}, nu));
            Vec3 a2 = cross(nu, a1);
            // radii matrix of the fit at nu: d x(tau) = r tau
            double hess11 = 2 * c[4], hess12 = c[5], hess22 = 2 * c[6];
            // rotate fitted frame Hessian (at node) into (a1, a2); the fit's
            // ambient Hessian is 2*Gamma with Gamma built from c[4..8]
            auto gamma = [&](const Vec3& p, const Vec3& q) {
                double p1 = dot(p, st.e1), p2 = dot(p, st.e2), pn = dot(p, g_.node(n));
                double q1 = dot(q, st.e1), q2 = dot(q, st.e2), qn = dot(q, g_.node(n));
                return hess11 * p1 * q1 + hess12 * (p1 * q2 + p2 * q1) + hess22 * p2 * q2 +
                       c[7] * (p1 * qn + pn * q1) + c[8] * (p2 * qn + pn * q2);
            };
            double r11 = gamma(a1, a1) + f - fr;
            double r12 = gamma(a1, a2);
            double r22 = gamma(a2, a2) + f - fr;
            // Newton system: P_w ( (I - dir dir^T)/|x| ) r[tau] = -res
            Vec3 col1 = (r11 * a1 + r12 * a2);
            Vec3 col2 = (r12 * a1 + r22 * a2);
            auto proj = [&](const Vec3& v) {
                Vec3 t = (v - dot(v, dir) * dir) / xn;
                return t - dot(t, w) * w;
            };
            Vec3 j1 = proj(col1), j2 = proj(col2);
            // solve least-squares 3x2 (rows are ambient; effectively rank 2)
            double a11 = dot(j1, j1), a12 = dot(j1, j2), a22 = dot(j2, j2);
            double b1 = -dot(j1, res), b2 = -dot(j2, res);
            double det = a11 * a22 - a12 * a12;
            if (std::abs(det) < 1e-300) throw NotConverged("polar (3D): singular Newton system");
            double s1 = (b1 * a22 - b2 * a12) / det;
            double s2 = (b2 * a11 - b1 * a12) / det;
            double step = 1.0;
            if (std::sqrt(s1 * s1 + s2 * s2) > 0.5) step = 0.5 / std::sqrt(s1 * s1 + s2 * s2);
            nu = normalized(nu + step * (s1 * a1 + s2 * a2));
        }
        throw NotConverged("polar (3D): Gauss-map inversion did not converge");
    }

private:
    const SphereGrid& g_;
    std::span<const double> h_;
};

}  // namespace detail

// Radial function sampled at the grid directions.
inline std::vector<double> radial_function(const ConvexBody& k) {
    if (!k.origin_interior()) throw OriginNotInterior("radial_function: origin not interior");
    const auto& g = k.grid();
    std::vector<double> r(k.size());
    if (k.dim() == 2) {
        detail::PolarInverter2D inv(k);
        for (int i = 0; i < k.size(); ++i) r[i] = inv.radial(g.theta(i));
    } else {
        detail::PolarInverter3D inv(g, k.support());
        int hint = 0;
        for (int i = 0; i < k.size(); ++i) r[i] = inv.radial(g.node(i), &hint);
    }
    return r;
}

// Polar body K^*: support function is the reciprocal radial function.
inline ConvexBody polar_body(const ConvexBody& k) {
    if (!k.origin_interior()) throw OriginNotInterior("polar_body: origin not interior");
    auto r = radial_function(k);
    std::vector<double> h(k.size());
    for (int i = 0; i < k.size(); ++i) h[i] = 1.0 / r[i];
    return ConvexBody(k.grid_ptr(), std::move(h));
}

// Polar volume without constructing the polar: V(K^*) = (1/n) int h^{-n} dsigma.
inline double polar_volume(const ConvexBody& k, const Vec3& center = {}) {
    const auto& g = k.grid();
    double v = 0;
    for (int i = 0; i < k.size(); ++i) {
        double hv = k.support(i) - dot(center, g.node(i));
        if (!(hv > 0)) throw OriginNotInterior("polar_volume: center not interior");
        v += g.weight(i) * std::pow(hv, -k.dim());
    }
    return v / k.dim();
}

// Max pointwise deviation of (h^{n+1}/K)(x) * (h*^{n+1}/K*)(x*) from 1 over
// the grid, with x* the point of the polar boundary satisfying x . x* = 1.
inline double polar_duality_identity_error(const ConvexBody& k) {
    const ConvexBody ks = polar_body(k);
    const auto& g = k.grid();
    const int n = k.dim();
    auto b = boundary_embedding(k);
    // primal factor at node i: h^{n+1} S_{n-1}; dual factor evaluated at the
    // polar's normal direction, which is x_i/|x_i|
    std::vector<double> dual_field(k.size());
    for (int i = 0; i < k.size(); ++i)
        dual_field[i] = std::pow(ks.support(i), n + 1) * ks.surface_density()[i];
    std::vector<Vec3> dirs(k.size());
    for (int i = 0; i < k.size(); ++i) dirs[i] = normalized(b.points[i]);
    auto dual_at = g.interpolate_many(dual_field, dirs);
    double err = 0;
    for (int i = 0; i < k.size(); ++i) {
        double primal = std::pow(k.support(i), n + 1) * k.surface_density()[i];
        err = std::max(err, std::abs(primal * dual_at[i] - 1.0));
    }
    return err;
}

// ---------------------------------------------------------------------------
// Width, diameter, circumradius, inradius

struct WidthDiameter {
    double mean_width = 0;
    double diameter = 0;
    double circumradius = 0;
    double inradius = 0;
    Vec3 circumcenter;
    Vec3 incenter;
};

inline WidthDiameter width_diameter(const ConvexBody& k) {
    const auto& g = k.grid();
    WidthDiameter out;
    double s = 0;
    for (int i = 0; i < k.size(); ++i) s += g.weight(i) * k.support(i);
    out.mean_width = 2.0 * s / (k.dim() * unit_ball_volume(k.dim()));
    for (int i = 0; i < k.size(); ++i)
        out.diameter = std::max(out.diameter, k.support(i) + k.support(g.antipode(i)));

    auto b = boundary_embedding(k);
    // circumcenter: subgradient iteration on c -> max_i |x_i - c|,
    // keeping the best iterate; ties in the farthest point go to first index
    auto max_dist = [&](const Vec3& c, int* arg = nullptr) {
        double best = -1;
        int far = 0;
        for (int i = 0; i < k.size(); ++i) {
            double d2 = dot(b.points[i] - c, b.points[i] - c);
            if (d2 > best) { best = d2; far = i; }
        }
        if (arg) *arg = far;
        return std::sqrt(best);
    };
    Vec3 c = centroid(k);
    Vec3 best_c = c;
    double best_r = max_dist(c);
    for (int it = 0; it < 200; ++it) {
        int far = 0;
        max_dist(c, &far);
        c = c + (1.0 / (it + 2.0)) * (b.points[far] - c);
        double r = max_dist(c);
        if (r < best_r) { best_r = r; best_c = c; }
    }
    out.circumcenter = best_c;
    out.circumradius = best_r;

    // incenter: subgradient ascent on c -> min_i (h_i - c . u_i)
    auto min_gap = [&](const Vec3& c2, int* arg = nullptr) {
        double best = std::numeric_limits<double>::infinity();
        int lo = 0;
        for (int i = 0; i < k.size(); ++i) {
            double gap = k.support(i) - dot(c2, g.node(i));
            if (gap < best) { best = gap; lo = i; }
        }
        if (arg) *arg = lo;
        return best;
    };
    Vec3 ic = centroid(k);
    Vec3 best_ic = ic;
    double best_gap = min_gap(ic);
    double scale = k.max_support();
    for (int it = 0; it < 200; ++it) {
        int lo = 0;
        min_gap(ic, &lo);
        ic = ic - (0.5 * scale / (it + 2.0)) * g.node(lo);
        double gap = min_gap(ic);
        if (gap > best_gap) { best_gap = gap; best_ic = ic; }
    }
    out.incenter = best_ic;
    out.inradius = best_gap;
    return out;
}

// ---------------------------------------------------------------------------
// Moments and affine normalization

// Second moment matrix C = int_K x (x)^T dx by boundary quadrature.
inline Mat3 second_moment(const ConvexBody& k) {
    auto b = boundary_embedding(k);
    const auto& g = k.grid();
    Mat3 c; c.dim = k.dim();
    for (int i = 0; i < k.size(); ++i) {
        double f = g.weight(i) * k.support(i) * k.surface_density()[i];
        const Vec3& x = b.points[i];
        for (int a = 0; a < k.dim(); ++a)
            for (int bb = 0; bb < k.dim(); ++bb) c(a, bb) += f * x[a] * x[bb];
    }
    for (int a = 0; a < k.dim(); ++a)
        for (int bb = 0; bb < k.dim(); ++bb) c(a, bb) /= k.dim() + 2.0;
    return c;
}

// T = det(C)^{1/2n} C^{-1/2} in SL(n); the image T K has isotropic covariance.
inline std::pair<ConvexBody, Mat3> covariance_normalize(const ConvexBody& k) {
    Vec3 cent = centroid(k);
    double scale = k.max_support();
    if (norm(cent) > 1e-6 * scale)
        throw InvalidArgument("covariance_normalize: centroid must be at the origin (translate first)");
    Mat3 c = second_moment(k);
    std::array<double, 3> ev{};
    Mat3 q;
    sym_eigen(c, ev, q);
    const int n = k.dim();
    for (int i = 0; i < n; ++i)
        if (!(ev[i] > 0)) throw DegenerateBody("covariance_normalize: moment matrix not positive");
    if (ev[n - 1] / ev[0] > 1e12) throw DegenerateBody("covariance_normalize: moment matrix ill-conditioned");
    double det_c = 1;
    for (int i = 0; i < n; ++i) det_c *= ev[i];
    double pref = std::pow(det_c, 1.0 / (2.0 * n));
    Mat3 t; t.dim = n;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += q(a, i) * q(b, i) / std::sqrt(ev[i]);
            t(a, b) = pref * s;
        }
    return {linear_image(k, t), t};
}

// Convenience constructors.
inline ConvexBody make_ball(std::shared_ptr<const SphereGrid> grid, double radius = 1.0) {
    std::vector<double> h(grid->size(), radius);
    return ConvexBody(std::move(grid), std::move(h));
}

}  // namespace convexflow
