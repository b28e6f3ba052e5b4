#include <catch2/catch_amalgamated.hpp>

#include "convexflow/flow.hpp"
#include "helpers.hpp"

using namespace convexflow;
using cf_test::wobble;

namespace {

// Exact expanding-ball solution: R' = phi R^{n+1-p}.
double ball_radius(double r0, double p, int n, double t) {
    double q = p - n;  // R^{q}' = q
    if (q == 0.0) return r0 * std::exp(t);
    return std::pow(std::pow(r0, q) + q * t, 1.0 / q);
}

FlowConfig basic(double p, FlowKind kind = FlowKind::expanding) {
    FlowConfig cfg;
    cfg.p = p;
    cfg.kind = kind;
    cfg.certify_entropy = false;
    return cfg;
}

double actual_radius(const FlowResult& r) {
    // for balls the normalized body is the unit ball
    return std::exp(r.state.log_scale) * r.state.h_norm[0];
}

}  // namespace

TEST_CASE("speed fields") {
    auto g = make_circle_grid(128);
    auto d = make_ball(g);
    auto s = speed(d, basic(2.0));
    for (double v : s) REQUIRE(v == Catch::Approx(1.0).margin(1e-12));

    // ball radius R, general p: speed = R^{n+1-p}
    for (double p : {-2.0, 0.0, 1.0, 3.5}) {
        auto d2 = make_ball(g, 1.7);
        auto s2 = speed(d2, basic(p));
        for (double v : s2) REQUIRE(v == Catch::Approx(std::pow(1.7, 3.0 - p)).epsilon(1e-12));
    }

    auto g3 = make_sphere_grid(2);
    auto b3 = make_ball(g3);
    auto sc = speed(b3, basic(0.0, FlowKind::contracting));
    for (double v : sc) REQUIRE(v == Catch::Approx(-1.0).margin(1e-9));

    FlowConfig bad = basic(2.0);
    bad.cfl = 0.9;
    REQUIRE_THROWS_AS(speed(d, bad), InvalidArgument);
}

TEST_CASE("expanding ball matches the exact solution (2D)") {
    auto g = make_circle_grid(64);
    auto d = make_ball(g);
    struct Case { double p, t; };
    for (auto c : {Case{3.0, 0.5}, Case{0.0, 0.3}, Case{-2.0, 0.2}}) {
        FlowConfig cfg = basic(c.p);
        cfg.t_end = c.t;
        auto r = run(d, cfg);
        REQUIRE(r.reason == StopReason::time_reached);
        REQUIRE(r.state.t == Catch::Approx(c.t).margin(1e-12));
        double want = ball_radius(1.0, c.p, 2, c.t);
        REQUIRE(actual_radius(r) == Catch::Approx(want).epsilon(1e-8));
    }
    // p = 2: exponential growth
    FlowConfig cfg = basic(2.0);
    cfg.t_end = 0.5;
    auto r = run(d, cfg);
    REQUIRE(actual_radius(r) == Catch::Approx(std::exp(0.5)).epsilon(1e-8));
}

TEST_CASE("expanding ball matches the exact solution (3D)") {
    auto g = make_sphere_grid(2);
    auto b = make_ball(g);
    FlowConfig cfg = basic(-3.0);
    cfg.t_end = 0.12;
    auto r = run(b, cfg);
    double want = ball_radius(1.0, -3.0, 3, 0.12);
    REQUIRE(actual_radius(r) == Catch::Approx(want).epsilon(1e-6));
}

TEST_CASE("contracting ball matches the exact solution (3D)") {
    auto g = make_sphere_grid(2);
    auto b = make_ball(g);
    FlowConfig cfg = basic(0.0, FlowKind::contracting);
    cfg.t_end = 0.1;  // blow-down at 1/6
    auto r = run(b, cfg);
    // R' = -R^{-(n+2)}; R = (1 - (n+3) t)^{1/(n+3)}
    double want = std::pow(1.0 - 6.0 * 0.1, 1.0 / 6.0);
    REQUIRE(actual_radius(r) == Catch::Approx(want).epsilon(1e-6));
}

TEST_CASE("volume is strictly monotone along flows") {
    auto g = make_circle_grid(128);
    auto k = wobble(g, 0.15);
    FlowConfig cfg = basic(1.5);
    cfg.t_end = 0.05;
    auto r = run(k, cfg);
    for (size_t i = 1; i < r.trace.rows.size(); ++i)
        REQUIRE(r.trace.rows[i].V > r.trace.rows[i - 1].V);

    FlowConfig cc = basic(0.0, FlowKind::contracting);
    cc.t_end = 0.05;
    auto rc = run(k, cc);
    for (size_t i = 1; i < rc.trace.rows.size(); ++i)
        REQUIRE(rc.trace.rows[i].V < rc.trace.rows[i - 1].V);
}

TEST_CASE("a disk is a fixed point of the normalized flow") {
    auto g = make_circle_grid(128);
    auto d = make_ball(g);
    FlowConfig cfg = basic(0.5);
    cfg.max_steps = 1000;
    cfg.stop_hausdorff_tol = 0;  // force the full 1000 steps
    cfg.t_end = 0;
    cfg.max_steps = 1000;
    auto r = run(d, cfg);
    double dmax = 0;
    for (const auto& row : r.trace.rows) dmax = std::max(dmax, row.drift);
    REQUIRE(dmax < 1e-12);
}

TEST_CASE("entropy monotonicity along a generic flow") {
    auto g = make_circle_grid(128);
    auto k = wobble(g, 0.25);
    for (double p : {-2.0, 0.5, 2.0}) {
        FlowConfig cfg = basic(p);
        cfg.certify_entropy = true;
        cfg.stop_hausdorff_tol = 1e-8;
        cfg.max_steps = 30000;
        auto ek = translate(k, entropy_point(k, [&] {
                                EntropyParams e;
                                e.p = p;
                                return e;
                            }()) * -1.0);
        auto r = run(ek, cfg);
        REQUIRE((r.reason == StopReason::plateau || r.reason == StopReason::scale_limit));
        REQUIRE(r.trace.min_A_step >= -1e-8);
        REQUIRE(r.trace.min_logB_step >= -1e-8);
        REQUIRE(r.trace.min_bracket >= -1e-8);
    }
}

TEST_CASE("entropy centering is preserved along the flow") {
    auto g = make_circle_grid(128);
    auto k = wobble(g, 0.2);
    double p = 0.5;
    EntropyParams eprm;
    eprm.p = p;
    auto centered = translate(k, entropy_point(k, eprm) * -1.0);
    FlowConfig cfg = basic(p);
    cfg.t_end = 0.2;
    cfg.certify_entropy = false;
    auto r = run(centered, cfg);
    auto final_e = entropy_point(r.final_body(), eprm);
    REQUIRE(norm(final_e) < 1e-7);
}

TEST_CASE("normalized flow converges to the disk for p = 0.5") {
    auto g = make_circle_grid(128);
    auto k = wobble(g, 0.2);
    EntropyParams eprm;
    eprm.p = 0.5;
    auto centered = translate(k, entropy_point(k, eprm) * -1.0);
    FlowConfig cfg = basic(0.5);
    cfg.certify_entropy = false;
    cfg.stop_hausdorff_tol = 1e-9;
    auto r = run(centered, cfg);
    REQUIRE(hausdorff_distance(r.final_body(), make_ball(g)) < 1e-3);
}

TEST_CASE("rotational equivariance for grid-commensurate rotations") {
    auto g = make_circle_grid(128);
    auto k = wobble(g, 0.2);
    const int shift = 16;  // rotation by 2 pi / 8
    FlowConfig cfg = basic(1.5);
    cfg.t_end = 0.05;
    cfg.certify_entropy = false;
    auto r1 = run(k, cfg);
    std::vector<double> hrot(g->size());
    for (int i = 0; i < g->size(); ++i) hrot[i] = k.support((i + shift) % g->size());
    auto r2 = run(ConvexBody(g, std::move(hrot)), cfg);
    double dev = 0;
    for (int i = 0; i < g->size(); ++i)
        dev = std::max(dev, std::abs(r2.state.h_norm[i] -
                                     r1.state.h_norm[(i + shift) % g->size()]));
    REQUIRE(dev < 1e-8);
    REQUIRE(std::abs(r1.state.log_scale - r2.state.log_scale) < 1e-12);
}

TEST_CASE("polar co-evolution tracks the polar trajectory") {
    auto g = make_circle_grid(256);
    // origin-centered small ellipse (blow-up safely after t = 0.2)
    auto e = cf_test::ellipse(g, 0.85, 0.65);
    auto res = polar_duality_check(e, 0.2, -2.0, 10);
    REQUIRE(res.max_deviation < 5e-4);

    // ball: both sides remain balls
    auto b = make_ball(g, 0.9);
    auto resb = polar_duality_check(b, 0.2, -2.0, 25);
    REQUIRE(resb.max_deviation < 1e-9);
}

TEST_CASE("mismatched exponent breaks the polar correspondence") {
    auto g = make_circle_grid(256);
    auto e = cf_test::ellipse(g, 0.85, 0.65);
    REQUIRE_THROWS_AS(polar_duality_check(e, 0.1, -1.0, 10), InvalidArgument);
    auto res = polar_duality_check(e, 0.2, -1.0, 10, 0.2, false);
    REQUIRE(res.max_deviation > 1e-2);
}

TEST_CASE("step collapse is reported, trace retained") {
    auto g = make_circle_grid(64);
    // strongly eccentric body under a fast contracting flow collapses
    auto e = cf_test::ellipse(g, 1.0, 0.12);
    FlowConfig cfg = basic(0.0, FlowKind::contracting);
    cfg.max_steps = 200000;
    cfg.stop_hausdorff_tol = 0;
    auto r = run(e, cfg);
    REQUIRE((r.reason == StopReason::collapse || r.reason == StopReason::scale_limit ||
             r.reason == StopReason::max_steps));
    REQUIRE(!r.trace.rows.empty());
}
