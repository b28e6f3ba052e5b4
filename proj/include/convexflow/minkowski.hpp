#pragma once

#include "convexflow/entropy.hpp"

namespace convexflow {

// Surface-area-measure density dS/dsigma on a circle grid.
struct MeasureDensity {
    std::shared_ptr<const SphereGrid> grid;
    std::vector<double> f;
};

inline MeasureDensity make_measure_density(std::shared_ptr<const SphereGrid> grid,
                                           std::vector<double> f) {
    if (grid->dim() != 2) throw DimensionUnsupported("MeasureDensity: 2D only");
    if (static_cast<int>(f.size()) != grid->size())
        throw InvalidArgument("MeasureDensity: sample count mismatch");
    double mn = f[0], total = 0;
    for (int i = 0; i < grid->size(); ++i) {
        mn = std::min(mn, f[i]);
        total += grid->weight(i) * f[i];
    }
    if (!(mn > 0)) throw InvalidArgument("MeasureDensity: density must be positive");
    Vec3 fm = grid->first_moment(f);
    if (norm(fm) > 1e-9 * total)
        throw MeasureNotCentered("MeasureDensity: first harmonic is not zero");
    return {std::move(grid), std::move(f)};
}

// Solve h'' + h = f in Fourier space; mode 1 of h is the translation gauge
// and is set to zero. The output is strictly convex since rho = f > 0.
inline ConvexBody solve_minkowski_2d(const MeasureDensity& density) {
    const auto& g = *density.grid;
    auto h = g.spectral().solve_radii(density.f);
    ConvexBody body(density.grid, std::move(h));
    // residual of the reconstruction
    double maxf = 0, res = 0;
    for (int i = 0; i < g.size(); ++i) maxf = std::max(maxf, std::abs(density.f[i]));
    Vec3 fm = g.spectral().first_harmonic(density.f);
    for (int i = 0; i < g.size(); ++i) {
        double fi = density.f[i] - fm.x * g.node(i).x - fm.y * g.node(i).y;
        res = std::max(res, std::abs(body.surface_density()[i] - fi));
    }
    if (res > 1e-10 * maxf) throw Error("solve_minkowski_2d: reconstruction residual too large");
    return body;
}

inline ConvexBody solve_minkowski_2d(std::shared_ptr<const SphereGrid> grid, std::vector<double> f) {
    return solve_minkowski_2d(make_measure_density(std::move(grid), std::move(f)));
}

// Curvature image Lambda_p K (and Lambda_p^phi K): the body whose surface
// area measure has density
//   (V(K) / ((1/n) int h_e^p / phi dsigma)) / (phi h_e^{1-p}),
// where h_e is the support of K - e_p. The image is translated to share K's
// centroid.
inline ConvexBody curvature_image(const ConvexBody& k, const EntropyParams& prm) {
    if (k.dim() != 2) throw DimensionUnsupported("curvature_image: 2D only");
    const auto& g = k.grid();
    Vec3 e = entropy_point(k, prm);
    const int n = k.dim();

    double denom = 0;
    std::vector<double> f(k.size());
    for (int i = 0; i < k.size(); ++i) {
        double gap = k.support(i) - dot(e, g.node(i));
        denom += g.weight(i) * std::pow(gap, prm.p) / prm.phi_at(i);
        f[i] = std::pow(gap, prm.p - 1.0) / prm.phi_at(i);
    }
    denom /= n;
    double scale = volume(k) / denom;
    for (double& v : f) v *= scale;

    // the entropy-point condition makes f first-harmonic-free; remove the
    // Newton-tolerance remnant so the solver accepts it
    Vec3 fh = g.spectral().first_harmonic(f);
    for (int i = 0; i < k.size(); ++i) f[i] -= fh.x * g.node(i).x + fh.y * g.node(i).y;

    auto lam = solve_minkowski_2d(k.grid_ptr(), std::move(f));
    Vec3 shift = centroid(k) - centroid(lam);
    return translate(lam, shift);
}

// ---------------------------------------------------------------------------
// Self-similar solutions of h^{1-p} det(hess h + Id h) = c / phi.

struct SelfSimilarOptions {
    double alpha = 0.5;          // damping of the fixed-point iteration
    double tol = 1e-11;          // Hausdorff change between iterates
    long max_iterations = 10000;
    std::vector<double> seed_h;  // optional initial support samples
};

struct SelfSimilarResult {
    ConvexBody body;
    double c = 0;         // the constant in the equation
    double residual = 0;  // max |phi h^{1-p} rho - c| / c
    long iterations = 0;
};

inline SelfSimilarResult self_similar_solve(std::shared_ptr<const SphereGrid> grid,
                                            const EntropyParams& prm, double target_volume,
                                            const SelfSimilarOptions& opt = {}) {
    if (grid->dim() != 2) throw DimensionUnsupported("self_similar_solve: 2D only");
    if (!(target_volume > 0)) throw InvalidArgument("self_similar_solve: volume must be positive");
    if (prm.body_is_symmetric && !prm.phi.empty() && !prm.phi_is_even)
        throw SymmetryViolation("self_similar_solve: symmetric solution requested with uneven phi");
    const auto& g = *grid;
    const int n = 2;

    auto measure_residual = [&](const ConvexBody& body) {
        double c_emp = 0, wsum = 0;
        for (int i = 0; i < body.size(); ++i) {
            double v = prm.phi_at(i) * std::pow(body.support(i), 1.0 - prm.p) *
                       body.surface_density()[i];
            c_emp += g.weight(i) * v;
            wsum += g.weight(i);
        }
        c_emp /= wsum;
        double res = 0;
        for (int i = 0; i < body.size(); ++i) {
            double v = prm.phi_at(i) * std::pow(body.support(i), 1.0 - prm.p) *
                       body.surface_density()[i];
            res = std::max(res, std::abs(v - c_emp));
        }
        return std::pair{c_emp, res / c_emp};
    };

    // p = 1: the equation is linear, one Minkowski solve
    if (prm.p == 1.0) {
        std::vector<double> f(g.size());
        for (int i = 0; i < g.size(); ++i) f[i] = 1.0 / prm.phi_at(i);
        Vec3 fh = g.spectral().first_harmonic(f);
        for (int i = 0; i < g.size(); ++i) f[i] -= fh.x * g.node(i).x + fh.y * g.node(i).y;
        auto base = solve_minkowski_2d(grid, std::move(f));
        double c = std::sqrt(target_volume / volume(base));
        std::vector<double> h(g.size());
        for (int i = 0; i < g.size(); ++i) h[i] = c * base.support(i);
        ConvexBody body(grid, std::move(h));
        auto [c_emp, res] = measure_residual(body);
        return {std::move(body), c_emp, res, 1};
    }

    std::vector<double> h = opt.seed_h;
    if (h.empty()) h.assign(g.size(), std::sqrt(target_volume / pi));
    if (static_cast<int>(h.size()) != g.size())
        throw InvalidArgument("self_similar_solve: seed size mismatch");

    long it = 0;
    for (; it < opt.max_iterations; ++it) {
        ConvexBody cur(grid, h);
        // keep the gauge where the density is first-harmonic-free: subtract
        // the entropy point (origin for symmetric data)
        if (!prm.body_is_symmetric) {
            Vec3 e = entropy_point(cur, prm);
            if (norm(e) > 1e-15) {
                std::vector<double> hs = cur.support();
                for (int i = 0; i < g.size(); ++i) hs[i] -= dot(e, g.node(i));
                cur = ConvexBody(grid, std::move(hs));
            }
        }
        std::vector<double> f(g.size());
        for (int i = 0; i < g.size(); ++i)
            f[i] = 1.0 / (prm.phi_at(i) * std::pow(cur.support(i), 1.0 - prm.p));
        Vec3 fh = g.spectral().first_harmonic(f);
        for (int i = 0; i < g.size(); ++i) f[i] -= fh.x * g.node(i).x + fh.y * g.node(i).y;
        auto solved = solve_minkowski_2d(grid, std::move(f));
        double c = std::sqrt(target_volume / volume(solved));

        double drift = 0;
        std::vector<double> next(g.size());
        for (int i = 0; i < g.size(); ++i) {
            next[i] = (1.0 - opt.alpha) * cur.support(i) + opt.alpha * c * solved.support(i);
            drift = std::max(drift, std::abs(next[i] - h[i]));
        }
        h = std::move(next);
        if (drift < opt.tol) break;
    }
    if (it >= opt.max_iterations)
        throw NotConverged("self_similar_solve: fixed-point iteration did not converge");

    // rescale exactly to the target volume
    ConvexBody body(grid, h);
    double s = std::sqrt(target_volume / volume(body));
    if (std::abs(s - 1.0) > 1e-14) {
        for (double& v : h) v *= s;
        body = ConvexBody(grid, std::move(h));
    }
    auto [c_emp, res] = measure_residual(body);
    return {std::move(body), c_emp, res, it + 1};
}

// Fixed points reached from a family of seeds; distinct solutions only.
inline std::vector<SelfSimilarResult> self_similar_multi(std::shared_ptr<const SphereGrid> grid,
                                                         const EntropyParams& prm,
                                                         double target_volume, int seeds = 8) {
    std::vector<SelfSimilarResult> out;
    const auto& g = *grid;
    for (int s = 0; s < seeds; ++s) {
        SelfSimilarOptions opt;
        opt.seed_h.assign(g.size(), std::sqrt(target_volume / pi));
        if (s > 0) {
            // deterministic low-harmonic seed bodies, built through the
            // density route so every seed is convex
            Rng rng(1000 + s);
            double a2 = 0.45 * rng.uniform(-1.0, 1.0);
            double b2 = 0.3 * rng.uniform(-1.0, 1.0);
            double a4 = 0.2 * rng.uniform(-1.0, 1.0);
            std::vector<double> f(g.size());
            for (int i = 0; i < g.size(); ++i) {
                double t = g.theta(i);
                f[i] = 1.0 + a2 * std::cos(2 * t) + b2 * std::sin(2 * t) + a4 * std::cos(4 * t);
            }
            auto seed = solve_minkowski_2d(grid, std::move(f));
            double sc = std::sqrt(target_volume / volume(seed));
            for (int i = 0; i < g.size(); ++i) opt.seed_h[i] = sc * seed.support(i);
        }
        SelfSimilarResult r = [&] {
            try {
                return self_similar_solve(grid, prm, target_volume, opt);
            } catch (const NotConverged&) {
                SelfSimilarOptions retry = opt;
                retry.alpha = 0.25;
                return self_similar_solve(grid, prm, target_volume, retry);
            }
        }();
        bool fresh = true;
        for (const auto& prev : out)
            if (hausdorff_distance(prev.body, r.body) < 1e-6) fresh = false;
        if (fresh) out.push_back(std::move(r));
    }
    return out;
}

}  // namespace convexflow
