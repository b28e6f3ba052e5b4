#pragma once

#include <optional>

#include "convexflow/body.hpp"

namespace convexflow {

// Parameters of the entropy machinery: the exponent p, the positive weight
// phi (empty means phi == 1), and the flags that gate the weighted cases.
struct EntropyParams {
    double p = 2.0;
    std::vector<double> phi;  // samples on the grid; empty = constant 1
    bool phi_is_even = true;
    bool body_is_symmetric = false;
    std::string phi_id = "const";

    bool phi_constant() const { return phi.empty(); }
    double phi_at(int i) const { return phi.empty() ? 1.0 : phi[i]; }
};

struct EntropyReport {
    Vec3 e_point;
    double A_value = 0;
    std::optional<double> B_value;
    double residual = 0;
    double p = 0;
    std::string phi_id = "const";
};

namespace detail {

inline void validate_entropy_params(const ConvexBody& k, const EntropyParams& prm) {
    const int n = k.dim();
    if (prm.p < -n) throw InvalidArgument("entropy: p below -n is outside the valid range");
    if (!prm.phi.empty()) {
        if (static_cast<int>(prm.phi.size()) != k.size())
            throw InvalidArgument("entropy: phi samples do not match grid");
        double mn = prm.phi[0];
        for (double v : prm.phi) mn = std::min(mn, v);
        if (!(mn > 0)) throw InvalidArgument("entropy: phi must be positive");
        if (prm.phi_is_even) {
            for (int i = 0; i < k.size(); ++i)
                if (std::abs(prm.phi[i] - prm.phi[k.grid().antipode(i)]) > 1e-10)
                    throw InvalidArgument("entropy: phi flagged even but is not");
        }
        // weighted entropy point exists only in the proven ranges
        bool in_range = prm.p >= -n && prm.p <= -n + 1;
        if (!in_range && !prm.body_is_symmetric)
            throw InvalidArgument(
                "entropy: nonconstant phi requires p in [-n, -n+1] or a symmetric body");
        if (prm.body_is_symmetric && !prm.phi_is_even)
            throw InvalidArgument("entropy: symmetric-body convention needs even phi");
    }
}

}  // namespace detail

// Residual of the first-order condition at x:
//   G(x) = sum_i w_i u_i / (phi_i (h_i - x.u_i)^{1-p}).
inline Vec3 entropy_gradient(const ConvexBody& k, const EntropyParams& prm, const Vec3& x) {
    const auto& g = k.grid();
    Vec3 s;
    for (int i = 0; i < k.size(); ++i) {
        double gap = k.support(i) - dot(x, g.node(i));
        s += (g.weight(i) * std::pow(gap, prm.p - 1.0) / prm.phi_at(i)) * g.node(i);
    }
    return s;
}

struct EntropyPointResult {
    Vec3 point;
    double residual = 0;   // |G| / scale
    int iterations = 0;
    double hessian_min_eig = 0;  // of the moment matrix sum w uu^T gap^{p-2}/phi
};

inline EntropyPointResult entropy_point_full(const ConvexBody& k, const EntropyParams& prm) {
    detail::validate_entropy_params(k, prm);
    const auto& g = k.grid();
    const int n = k.dim();

    if (prm.body_is_symmetric) {
        // symmetric convention: the entropy point is the origin
        if (!k.origin_symmetric(1e-6))
            throw InvalidArgument("entropy: body flagged symmetric but is not");
        EntropyPointResult r;
        r.point = {};
        Vec3 gr = entropy_gradient(k, prm, r.point);
        double scale = 0;
        for (int i = 0; i < k.size(); ++i)
            scale += g.weight(i) * std::pow(k.support(i), prm.p - 1.0) / prm.phi_at(i);
        r.residual = norm(gr) / scale;
        return r;
    }
    if (prm.p == 1.0)
        throw InvalidArgument("entropy: p = 1 is excluded unless the body is origin-symmetric");

    Vec3 x = centroid(k);
    EntropyPointResult res;
    for (int it = 0; it < 100; ++it) {
        // gradient, scale, and Jacobian at x
        Vec3 gr;
        double scale = 0;
        Mat3 jac; jac.dim = n;
        double min_gap = std::numeric_limits<double>::infinity();
        for (int i = 0; i < k.size(); ++i) {
            const Vec3& u = g.node(i);
            double gap = k.support(i) - dot(x, u);
            min_gap = std::min(min_gap, gap);
            double base = g.weight(i) * std::pow(gap, prm.p - 2.0) / prm.phi_at(i);
            double f = base * gap;  // w gap^{p-1}/phi
            scale += f;
            gr += f * u;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) jac(a, b) += base * u[a] * u[b];
        }
        if (!(min_gap > 0)) throw InteriorLost("entropy: iterate left the interior");
        res.residual = norm(gr) / scale;
        res.iterations = it;
        {
            std::array<double, 3> ev{};
            Mat3 q;
            sym_eigen(jac, ev, q);
            res.hessian_min_eig = ev[0];
        }
        if (res.residual < 1e-10) {
            res.point = x;
            return res;
        }
        // Newton step: solve (1-p) J dx = -G
        Mat3 j2 = jac;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) j2(a, b) *= 1.0 - prm.p;
        // solve j2 dx = -gr (tiny dense solve)
        Vec3 dx;
        {
            double det = j2.det();
            if (std::abs(det) < 1e-300) throw NotConverged("entropy: singular Newton system");
            if (n == 2) {
                dx.x = (-gr.x * j2(1, 1) + gr.y * j2(0, 1)) / det;
                dx.y = (-gr.y * j2(0, 0) + gr.x * j2(1, 0)) / det;
            } else {
                // Cramer
                Mat3 m;
                auto solve_col = [&](int col) {
                    m = j2;
                    m(0, col) = -gr.x;
                    m(1, col) = -gr.y;
                    m(2, col) = -gr.z;
                    return m.det() / det;
                };
                dx = {solve_col(0), solve_col(1), solve_col(2)};
            }
        }
        // step halving to stay strictly interior
        double step = 1.0;
        for (int half = 0; half < 60; ++half) {
            Vec3 trial = x + step * dx;
            double mg = std::numeric_limits<double>::infinity();
            for (int i = 0; i < k.size(); ++i)
                mg = std::min(mg, k.support(i) - dot(trial, g.node(i)));
            if (mg > 0) { x = trial; break; }
            step *= 0.5;
            if (half == 59) throw InteriorLost("entropy: cannot maintain interior feasibility");
        }
    }
    throw NotConverged("entropy: Newton did not converge in 100 iterations");
}

inline Vec3 entropy_point(const ConvexBody& k, const EntropyParams& prm) {
    return entropy_point_full(k, prm).point;
}

// A_p(K) at a known entropy point; log branch at p = 0.
inline double entropy_A_at(const ConvexBody& k, const EntropyParams& prm, const Vec3& e) {
    const auto& g = k.grid();
    const int n = k.dim();
    double v = volume(k);
    if (prm.p != 0.0) {
        double s = 0;
        for (int i = 0; i < k.size(); ++i) {
            double gap = k.support(i) - dot(e, g.node(i));
            s += g.weight(i) * std::pow(gap, prm.p) / prm.phi_at(i);
        }
        return v * std::pow(s, -static_cast<double>(n) / prm.p);
    }
    double s = 0;
    for (int i = 0; i < k.size(); ++i) {
        double gap = k.support(i) - dot(e, g.node(i));
        s += g.weight(i) * (-std::log(gap)) / prm.phi_at(i);
    }
    return v * std::exp(s / unit_ball_volume(n));
}

// A_p(K) = V(K) (int (h - e.u)^p / phi dsigma)^{-n/p}.
inline double entropy_A(const ConvexBody& k, const EntropyParams& prm) {
    return entropy_A_at(k, prm, entropy_point_full(k, prm).point);
}

// B_p(K) = V(K)^{n-1} A_p(K) / V(Lambda_p K)^{n-1}; the curvature image is
// supplied by the caller (2D only).
inline double entropy_B(const ConvexBody& k, const EntropyParams& prm, const ConvexBody& lambda) {
    if (k.dim() != 2) throw DimensionUnsupported("entropy_B: curvature images are 2D-only");
    double a = entropy_A(k, prm);
    double vk = volume(k), vl = volume(lambda);
    const int n = k.dim();
    return std::pow(vk / vl, n - 1) * a;
}

inline EntropyReport entropy_report(const ConvexBody& k, const EntropyParams& prm,
                                    const ConvexBody* lambda = nullptr) {
    EntropyReport rep;
    auto ep = entropy_point_full(k, prm);
    rep.e_point = ep.point;
    rep.residual = ep.residual;
    rep.A_value = entropy_A_at(k, prm, ep.point);
    if (lambda) {
        double vk = volume(k), vl = volume(*lambda);
        rep.B_value = std::pow(vk / vl, k.dim() - 1) * rep.A_value;
    }
    rep.p = prm.p;
    rep.phi_id = prm.phi_id;
    return rep;
}

}  // namespace convexflow
