#pragma once

// Shared test-body builders.

#include <cmath>

#include "convexflow/body.hpp"

namespace cf_test {

using namespace convexflow;

inline ConvexBody ellipse(std::shared_ptr<const SphereGrid> g, double a, double b) {
    std::vector<double> h(g->size());
    for (int i = 0; i < g->size(); ++i) {
        double c = std::cos(g->theta(i)), s = std::sin(g->theta(i));
        h[i] = std::sqrt(a * a * c * c + b * b * s * s);
    }
    return ConvexBody(std::move(g), std::move(h));
}

// Generic smooth 2D body: positive curvature density, h from h'' + h = rho.
inline ConvexBody wobble(std::shared_ptr<const SphereGrid> g, double amp = 0.15,
                         double a3 = 0.6, double a5 = 0.3) {
    std::vector<double> rho(g->size());
    for (int i = 0; i < g->size(); ++i) {
        double t = g->theta(i);
        rho[i] = 1.0 + amp * std::cos(2 * t) + a3 * amp * std::sin(3 * t) + a5 * amp * std::cos(5 * t);
    }
    auto h = g->spectral().solve_radii(rho);
    return ConvexBody(std::move(g), std::move(h));
}

// Smooth 3D body from low harmonics (kept well within convexity).
inline ConvexBody bump3d(std::shared_ptr<const SphereGrid> g, double amp = 0.1) {
    std::vector<double> h(g->size());
    for (int i = 0; i < g->size(); ++i) {
        const Vec3& u = g->node(i);
        h[i] = 1.0 + amp * u.x * u.y + 0.5 * amp * (3 * u.z * u.z - 1) + 0.6 * amp * u.x;
    }
    return ConvexBody(std::move(g), std::move(h));
}

}  // namespace cf_test
