#include <catch2/catch_amalgamated.hpp>

#include "convexflow/minkowski.hpp"
#include "helpers.hpp"

using namespace convexflow;
using cf_test::wobble;

TEST_CASE("constant density gives the unit disk") {
    auto g = make_circle_grid(256);
    auto k = solve_minkowski_2d(g, std::vector<double>(g->size(), 1.0));
    auto d = make_ball(g);
    REQUIRE(hausdorff_distance(k, d) < 1e-12);
}

TEST_CASE("single-mode density has the closed-form solution") {
    auto g = make_circle_grid(256);
    std::vector<double> f(g->size());
    for (int i = 0; i < g->size(); ++i) f[i] = 1.0 + 0.5 * std::cos(2 * g->theta(i));
    auto k = solve_minkowski_2d(g, std::move(f));
    for (int i = 0; i < g->size(); ++i) {
        double want = 1.0 - (0.5 / 3.0) * std::cos(2 * g->theta(i));
        REQUIRE(k.support(i) == Catch::Approx(want).margin(1e-12));
    }
}

TEST_CASE("round trip recovers a body up to translation") {
    auto g = make_circle_grid(512);
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto k = translate(wobble(g, 0.05 + 0.01 * trial, 0.6 * rng.uniform(0, 1), 0.3 * rng.uniform(0, 1)),
                           {0.1 * rng.uniform(-1, 1), 0.1 * rng.uniform(-1, 1), 0});
        auto rec = solve_minkowski_2d(g, k.surface_density());
        auto aligned = translate(rec, centroid(k) - centroid(rec));
        REQUIRE(hausdorff_distance(k, aligned) < 1e-9);
    }
}

TEST_CASE("uncentered densities are rejected") {
    auto g = make_circle_grid(256);
    std::vector<double> f(g->size());
    for (int i = 0; i < g->size(); ++i) f[i] = 1.0 + 0.2 * std::cos(g->theta(i));
    REQUIRE_THROWS_AS(solve_minkowski_2d(g, std::move(f)), MeasureNotCentered);

    std::vector<double> neg(g->size(), 1.0);
    neg[7] = -0.5;
    REQUIRE_THROWS_AS(solve_minkowski_2d(g, std::move(neg)), InvalidArgument);
}

TEST_CASE("even densities give even bodies exactly") {
    auto g = make_circle_grid(256);
    std::vector<double> f(g->size());
    for (int i = 0; i < g->size(); ++i)
        f[i] = 1.0 + 0.3 * std::cos(2 * g->theta(i)) - 0.2 * std::sin(4 * g->theta(i));
    auto k = solve_minkowski_2d(g, std::move(f));
    for (int i = 0; i < g->size(); ++i)
        REQUIRE(k.support(i) == Catch::Approx(k.support(g->antipode(i))).margin(1e-13));
}

TEST_CASE("curvature image of the disk is the disk") {
    auto g = make_circle_grid(256);
    auto d = make_ball(g);
    for (double p : {-2.0, 0.0, 1.5, 3.0}) {
        EntropyParams prm;
        prm.p = p;
        auto lam = curvature_image(d, prm);
        REQUIRE(hausdorff_distance(d, lam) < 1e-10);
    }
}

TEST_CASE("curvature image identities") {
    auto g = make_circle_grid(512);
    Rng rng(3);
    for (double p : {-2.0, 0.0, 2.0}) {
        for (int trial = 0; trial < 8; ++trial) {
            auto k = translate(wobble(g, 0.05 + 0.02 * trial, 0.6 * rng.uniform(0, 1), 0.3 * rng.uniform(0, 1)),
                               {0.05 * rng.uniform(-1, 1), 0.05 * rng.uniform(-1, 1), 0});
            EntropyParams prm;
            prm.p = p;
            auto lam = curvature_image(k, prm);
            double vk = volume(k), vl = volume(lam);
            REQUIRE(mixed_volume(lam, k) == Catch::Approx(vk).epsilon(1e-9));
            REQUIRE(vl <= vk * (1.0 + 1e-9));
            REQUIRE(mixed_volume(k, lam) >= vl * (1.0 - 1e-9));
            // centroids agree by convention
            REQUIRE(norm(centroid(lam) - centroid(k)) < 1e-9);
        }
    }
}

TEST_CASE("B >= A with equality for the disk") {
    auto g = make_circle_grid(256);
    auto d = make_ball(g);
    EntropyParams prm;
    prm.p = 2.0;
    auto lam_d = curvature_image(d, prm);
    REQUIRE(entropy_B(d, prm, lam_d) == Catch::Approx(entropy_A(d, prm)).epsilon(1e-10));

    auto k = wobble(g, 0.2);
    auto lam = curvature_image(k, prm);
    double a = entropy_A(k, prm), b = entropy_B(k, prm, lam);
    REQUIRE(b >= a * (1.0 - 1e-9));
    REQUIRE(b > a);  // strict for a non-disk

    // scale invariance of B
    Mat3 s = Mat3::identity(2);
    s(0, 0) = s(1, 1) = 0.5;
    auto k2 = linear_image(k, s);
    auto lam2 = curvature_image(k2, prm);
    REQUIRE(entropy_B(k2, prm, lam2) == Catch::Approx(b).epsilon(1e-9));
}

TEST_CASE("self-similar solution with constant phi is the disk") {
    auto g = make_circle_grid(256);
    for (double p : {-1.5, -1.0, 0.0, 0.5, 2.0, 3.0}) {
        EntropyParams prm;
        prm.p = p;
        prm.body_is_symmetric = true;
        auto res = self_similar_solve(g, prm, pi);
        REQUIRE(hausdorff_distance(res.body, make_ball(g)) < 1e-9);
        REQUIRE(res.c == Catch::Approx(1.0).margin(1e-9));
        REQUIRE(res.residual < 1e-8);
    }
}

TEST_CASE("self-similar p = 1 solves the linear equation exactly") {
    auto g = make_circle_grid(256);
    EntropyParams prm;
    prm.p = 1.0;
    prm.body_is_symmetric = true;
    prm.phi.resize(g->size());
    for (int i = 0; i < g->size(); ++i) prm.phi[i] = 1.0 / (1.0 + 0.2 * std::cos(2 * g->theta(i)));
    auto res = self_similar_solve(g, prm, pi);
    // rho = c / phi pointwise
    for (int i = 0; i < g->size(); ++i) {
        REQUIRE(res.body.surface_density()[i] ==
                Catch::Approx(res.c / prm.phi[i]).epsilon(1e-10));
    }
    REQUIRE(volume(res.body) == Catch::Approx(pi).epsilon(1e-12));
}

TEST_CASE("self-similar with even phi converges and satisfies the equation") {
    auto g = make_circle_grid(256);
    for (double p : {-1.0, 2.0}) {
        EntropyParams prm;
        prm.p = p;
        prm.body_is_symmetric = true;
        prm.phi.resize(g->size());
        for (int i = 0; i < g->size(); ++i) prm.phi[i] = 1.0 + 0.3 * std::cos(2 * g->theta(i));
        auto res = self_similar_solve(g, prm, pi);
        REQUIRE(res.residual < 1e-8);
        REQUIRE(volume(res.body) == Catch::Approx(pi).epsilon(1e-12));
        REQUIRE(res.body.origin_symmetric());
    }
}

TEST_CASE("self-similar rejects uneven phi for symmetric requests") {
    auto g = make_circle_grid(256);
    EntropyParams prm;
    prm.p = 2.0;
    prm.body_is_symmetric = true;
    prm.phi_is_even = false;
    prm.phi.resize(g->size());
    for (int i = 0; i < g->size(); ++i) prm.phi[i] = 1.0 + 0.2 * std::sin(g->theta(i));
    REQUIRE_THROWS_AS(self_similar_solve(g, prm, pi), SymmetryViolation);
}

TEST_CASE("multi-seed search finds the disk for p = 2") {
    auto g = make_circle_grid(128);
    EntropyParams prm;
    prm.p = 2.0;
    prm.body_is_symmetric = true;
    auto sols = self_similar_multi(g, prm, pi, 8);
    REQUIRE(sols.size() == 1);  // unique solution
    REQUIRE(hausdorff_distance(sols[0].body, make_ball(g)) < 1e-8);
}
