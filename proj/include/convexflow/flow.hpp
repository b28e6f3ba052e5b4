#pragma once

#include "convexflow/minkowski.hpp"

namespace convexflow {

enum class FlowKind { expanding, contracting };
enum class RenormalizeMode { volume, volume_affine };
enum class StopReason { plateau, time_reached, max_steps, collapse, scale_limit };

struct FlowConfig {
    double p = 2.0;                 // exponent of the expanding speed
    std::vector<double> phi;        // weight samples; empty = 1
    FlowKind kind = FlowKind::expanding;
    double cfl = 0.2;               // in (0, 0.5]
    long max_steps = 400000;
    double stop_hausdorff_tol = 1e-7;  // normalized drift per accepted step
    double t_end = 0;               // 0 = run to plateau
    RenormalizeMode renormalize = RenormalizeMode::volume;
    int affine_every = 20;
    int snapshot_every = 0;
    bool certify_entropy = true;    // per-step A_p (and B_p in 2D) tracking
    bool body_symmetric = false;    // entropy-point convention
    bool phi_is_even = true;
    std::string phi_id = "const";

    double phi_at(int i) const { return phi.empty() ? 1.0 : phi[i]; }
    void validate(int dim) const {
        if (!(cfl > 0 && cfl <= 0.5)) throw InvalidArgument("flow: cfl must be in (0, 0.5]");
        if (kind == FlowKind::expanding && p < -dim)
            throw InvalidArgument("flow: p below -n is outside the valid range");
    }
    // exponent tracked by the entropy diagnostics
    double entropy_p(int dim) const { return kind == FlowKind::expanding ? p : -dim; }
    // homogeneity degree of the speed in h
    double speed_degree(int dim) const {
        return kind == FlowKind::expanding ? dim + 1 - p : -(2.0 * dim - 1.0);
    }
};

// Evolving state: actual support = exp(log_scale) * h_norm, with h_norm kept
// at unit-ball volume. Rescaling is exact because the speeds are homogeneous.
struct FlowState {
    std::shared_ptr<const SphereGrid> grid;
    std::vector<double> h_norm;
    double log_scale = 0;
    double t = 0;
    long step = 0;
};

struct TraceRow {
    long step = 0;
    double t = 0, dt = 0, V = 0;
    double h_min = 0, h_max = 0, K_min = 0, K_max = 0;
    double A_p = 0, B_p = 0;
    double drift = 0;
    double santalo = 0;
    double bracket = 0;  // V1(K, Lambda)/V(Lambda) - 1
    bool affine_applied = false;
};

struct FlowTrace {
    std::vector<TraceRow> rows;
    // worst per-step slacks of the monotone quantities (relative for A)
    double min_A_step = std::numeric_limits<double>::infinity();
    double min_logB_step = std::numeric_limits<double>::infinity();
    double min_bracket = std::numeric_limits<double>::infinity();
};

struct FlowResult {
    FlowTrace trace;
    FlowState state;
    StopReason reason = StopReason::plateau;
    std::vector<std::pair<double, std::vector<double>>> snapshots;  // (t, normalized h)

    ConvexBody final_body() const { return ConvexBody(state.grid, state.h_norm); }
    double final_volume() const {
        return unit_ball_volume(state.grid->dim()) * std::exp(state.grid->dim() * state.log_scale);
    }
};

// Speed of the flow on actual support samples (spec-facing helper).
inline std::vector<double> speed(const ConvexBody& k, const FlowConfig& cfg) {
    cfg.validate(k.dim());
    if (!k.origin_interior()) throw OriginNotInterior("speed: origin must be interior");
    std::vector<double> s(k.size());
    for (int i = 0; i < k.size(); ++i) {
        double surf = k.surface_density()[i];
        if (!(surf > 0)) throw NonConvexBody("speed: nonpositive curvature function");
        if (cfg.kind == FlowKind::expanding)
            s[i] = cfg.phi_at(i) * std::pow(k.support(i), 2.0 - cfg.p) * surf;
        else
            s[i] = -1.0 / (std::pow(k.support(i), k.dim()) * surf);
    }
    return s;
}

namespace detail {

struct StageEval {
    bool ok = false;
    std::vector<double> speed;
    double max_diffusion = 0;
};

// Speed and parabolic coefficient on (possibly intermediate) samples.
inline StageEval eval_stage(const SphereGrid& g, const std::vector<double>& h,
                            const FlowConfig& cfg, bool need_diffusion) {
    StageEval ev;
    const int n = g.dim();
    RadiiField r = g.hessian_radii(h);
    ev.speed.resize(g.size());
    for (int i = 0; i < g.size(); ++i) {
        if (!(h[i] > 0)) return ev;
        double s = r.det(i);
        if (!(s > 0)) return ev;
        if (cfg.kind == FlowKind::expanding) {
            double base = cfg.phi_at(i) * std::pow(h[i], 2.0 - cfg.p);
            ev.speed[i] = base * s;
            if (need_diffusion) {
                double d = base * (n == 2 ? 1.0 : r.eig_max(i));
                ev.max_diffusion = std::max(ev.max_diffusion, d);
            }
        } else {
            double hn = std::pow(h[i], n);
            ev.speed[i] = -1.0 / (hn * s);
            if (need_diffusion) {
                double emax = n == 2 ? 1.0 : r.eig_max(i);
                double d = emax / (hn * s * s);
                ev.max_diffusion = std::max(ev.max_diffusion, d);
            }
        }
    }
    ev.ok = true;
    return ev;
}

inline bool acceptable(const SphereGrid& g, const std::vector<double>& h) {
    double hmax = 0;
    for (double v : h) {
        if (!(v > 0)) return false;
        hmax = std::max(hmax, v);
    }
    RadiiField r = g.hessian_radii(h);
    for (int i = 0; i < g.size(); ++i)
        if (!(r.eig_min(i) > 1e-10 * hmax)) return false;
    return true;
}

}  // namespace detail

struct StepInfo {
    double dt = 0;        // actual time advanced
    double dt_eff = 0;    // step taken on the normalized representative
    int halvings = 0;
};

inline FlowState make_flow_state(const ConvexBody& k0) {
    FlowState st;
    st.grid = k0.grid_ptr();
    st.h_norm = k0.support();
    double v = volume(k0);
    double lam = std::pow(v / unit_ball_volume(k0.dim()), 1.0 / k0.dim());
    for (double& x : st.h_norm) x /= lam;
    st.log_scale = std::log(lam);
    return st;
}

// One accepted RK4 step with CFL-selected dt and per-failure halving. The
// normalized representative is advanced with dt_eff = lambda^{d-1} dt, which
// equals the CFL bound evaluated on the normalized body directly.
inline StepInfo step(FlowState& st, const FlowConfig& cfg) {
    const auto& g = *st.grid;
    cfg.validate(g.dim());
    const int n = g.dim();
    const double d = cfg.speed_degree(n);

    auto base = detail::eval_stage(g, st.h_norm, cfg, true);
    if (!base.ok) throw StepCollapse("flow step: invalid state");
    double dt_eff = cfg.cfl * g.spacing() * g.spacing() / base.max_diffusion;

    // optional exact-time landing
    double lam_fac = std::exp((1.0 - d) * st.log_scale);  // dt = dt_eff * lam^{1-d}
    if (cfg.t_end > 0) {
        double remaining = cfg.t_end - st.t;
        if (remaining <= 0) return {0, 0, 0};
        double dt_eff_cap = remaining / lam_fac;
        dt_eff = std::min(dt_eff, dt_eff_cap);
    }

    const int N = g.size();
    std::vector<double> tmp(N), out(N);
    for (int halving = 0; halving <= 8; ++halving) {
        auto advance = [&](const std::vector<double>& from, const std::vector<double>& k,
                           double f) {
            for (int i = 0; i < N; ++i) tmp[i] = from[i] + f * k[i];
        };
        advance(st.h_norm, base.speed, 0.5 * dt_eff);
        auto k2 = detail::eval_stage(g, tmp, cfg, false);
        if (k2.ok) {
            advance(st.h_norm, k2.speed, 0.5 * dt_eff);
            auto k3 = detail::eval_stage(g, tmp, cfg, false);
            if (k3.ok) {
                advance(st.h_norm, k3.speed, dt_eff);
                auto k4 = detail::eval_stage(g, tmp, cfg, false);
                if (k4.ok) {
                    for (int i = 0; i < N; ++i)
                        out[i] = st.h_norm[i] + dt_eff / 6.0 *
                                 (base.speed[i] + 2 * k2.speed[i] + 2 * k3.speed[i] + k4.speed[i]);
                    if (detail::acceptable(g, out)) {
                        // renormalize volume exactly
                        ConvexBody body(st.grid, out);
                        double v = volume(body);
                        double lam = std::pow(v / unit_ball_volume(n), 1.0 / n);
                        for (int i = 0; i < N; ++i) out[i] /= lam;
                        double dt_actual = dt_eff * lam_fac;
                        st.h_norm = out;
                        st.log_scale += std::log(lam);
                        st.t += dt_actual;
                        st.step += 1;
                        return StepInfo{dt_actual, dt_eff, halving};
                    }
                }
            }
        }
        dt_eff *= 0.5;
    }
    throw StepCollapse("flow step: convexity lost at the minimum time step");
}

// ---------------------------------------------------------------------------

inline FlowResult run(const ConvexBody& k0, const FlowConfig& cfg) {
    const auto& g = k0.grid();
    cfg.validate(g.dim());
    const int n = g.dim();
    FlowResult res;
    FlowState& st = res.state;
    st = make_flow_state(k0);

    EntropyParams eprm;
    eprm.p = cfg.entropy_p(n);
    eprm.phi = cfg.phi;
    eprm.phi_is_even = cfg.phi_is_even;
    eprm.body_is_symmetric = cfg.body_symmetric;
    eprm.phi_id = cfg.phi_id;
    const bool track_B = cfg.certify_entropy && n == 2 && cfg.kind == FlowKind::expanding;
    const bool certify = cfg.certify_entropy && cfg.kind == FlowKind::expanding;

    std::vector<double> prev = st.h_norm;
    double prev_A = 0, prev_logB = 0;
    bool have_prev_entropy = false;

    auto record = [&](double dt_actual, double drift, bool affine) {
        TraceRow row;
        row.step = st.step;
        row.t = st.t;
        row.dt = dt_actual;
        double lam = std::exp(st.log_scale);
        row.V = unit_ball_volume(n) * std::pow(lam, n);
        ConvexBody body(st.grid, st.h_norm);
        row.h_min = body.min_support() * lam;
        row.h_max = body.max_support() * lam;
        double smin = std::numeric_limits<double>::infinity(), smax = 0;
        for (double s : body.surface_density()) {
            smin = std::min(smin, s);
            smax = std::max(smax, s);
        }
        double curv_scale = std::pow(lam, 1.0 - n);
        row.K_min = curv_scale / smax;
        row.K_max = curv_scale / smin;
        row.drift = drift;
        row.affine_applied = affine;
        row.B_p = std::numeric_limits<double>::quiet_NaN();
        row.santalo = std::numeric_limits<double>::quiet_NaN();
        row.bracket = std::numeric_limits<double>::quiet_NaN();
        if (cfg.certify_entropy) {
            auto ep = entropy_point_full(body, eprm);
            row.A_p = entropy_A_at(body, eprm, ep.point);
            if (eprm.p == -n) row.santalo = row.A_p / n;
            if (track_B && eprm.p != 1.0) {
                auto lamb = curvature_image(body, eprm);
                double vk = volume(body), vl = volume(lamb);
                row.B_p = std::pow(vk / vl, n - 1) * row.A_p;
                row.bracket = mixed_volume(body, lamb) / vl - 1.0;
                res.trace.min_bracket = std::min(res.trace.min_bracket, row.bracket);
            }
            if (certify && have_prev_entropy) {
                res.trace.min_A_step = std::min(res.trace.min_A_step, (row.A_p - prev_A) / row.A_p);
                if (track_B && eprm.p != 1.0) {
                    double logb = std::log(row.B_p) / (1.0 - eprm.p);
                    res.trace.min_logB_step = std::min(res.trace.min_logB_step, logb - prev_logB);
                }
            }
            prev_A = row.A_p;
            if (track_B && eprm.p != 1.0) prev_logB = std::log(row.B_p) / (1.0 - eprm.p);
            have_prev_entropy = true;
        } else {
            row.A_p = std::numeric_limits<double>::quiet_NaN();
        }
        res.trace.rows.push_back(row);
    };

    if (cfg.snapshot_every > 0) res.snapshots.emplace_back(st.t, st.h_norm);
    record(0.0, 0.0, false);

    for (long iter = 0; iter < cfg.max_steps; ++iter) {
        StepInfo info;
        try {
            info = step(st, cfg);
        } catch (const StepCollapse&) {
            res.reason = StopReason::collapse;
            return res;
        }
        if (info.dt == 0 && cfg.t_end > 0) {
            res.reason = StopReason::time_reached;
            return res;
        }
        bool affine = false;
        if (cfg.renormalize == RenormalizeMode::volume_affine && cfg.affine_every > 0 &&
            st.step % cfg.affine_every == 0) {
            ConvexBody body(st.grid, st.h_norm);
            Vec3 cen = centroid(body);
            Mat3 c = second_moment(body);
            double v = volume(body);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) c(a, b) -= v * cen[a] * cen[b];
            std::array<double, 3> ev{};
            Mat3 q;
            sym_eigen(c, ev, q);
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
            ConvexBody img = linear_image(body, t);
            double vi = volume(img);
            double lam = std::pow(vi / unit_ball_volume(n), 1.0 / n);
            st.h_norm = img.support();
            for (double& x : st.h_norm) x /= lam;
            affine = true;
        }
        double drift = 0;
        for (int i = 0; i < g.size(); ++i) drift = std::max(drift, std::abs(st.h_norm[i] - prev[i]));
        prev = st.h_norm;
        record(info.dt, drift, affine);
        if (cfg.snapshot_every > 0 && st.step % cfg.snapshot_every == 0)
            res.snapshots.emplace_back(st.t, st.h_norm);

        if (cfg.t_end > 0 && st.t >= cfg.t_end * (1.0 - 1e-14)) {
            res.reason = StopReason::time_reached;
            return res;
        }
        if (cfg.t_end <= 0 && drift < cfg.stop_hausdorff_tol && iter > 2) {
            res.reason = StopReason::plateau;
            return res;
        }
        if (std::abs(st.log_scale) * n > 600) {
            res.reason = StopReason::scale_limit;
            return res;
        }
    }
    res.reason = StopReason::max_steps;
    return res;
}

// ---------------------------------------------------------------------------
// Polar co-evolution: for p = -n, phi = 1, the polars of an expanding
// solution solve the contracting flow with the same clock.

struct DualityCheckResult {
    double max_deviation = 0;
    double t_end = 0;
    long steps = 0;
    std::vector<std::pair<double, double>> checkpoints;  // (t, deviation)
};

inline DualityCheckResult polar_duality_check(const ConvexBody& k0, double horizon,
                                              double p_expanding, int check_every = 10,
                                              double cfl = 0.2, bool enforce_p = true) {
    const auto& g = k0.grid();
    const int n = g.dim();
    if (enforce_p && p_expanding != -n)
        throw InvalidArgument("polar_duality_check: expanding exponent must be -n");
    if (!k0.origin_interior()) throw OriginNotInterior("polar_duality_check: origin not interior");

    FlowConfig ck;
    ck.p = p_expanding;
    ck.kind = FlowKind::expanding;
    ck.cfl = cfl;
    ck.certify_entropy = false;
    FlowConfig cl = ck;
    cl.kind = FlowKind::contracting;

    FlowState sk = make_flow_state(k0);
    FlowState sl = make_flow_state(polar_body(k0));

    DualityCheckResult out;
    auto compare = [&]() {
        ConvexBody kb(sk.grid, sk.h_norm);
        auto pk = polar_body(kb);
        double lam_k = std::exp(sk.log_scale), lam_l = std::exp(sl.log_scale);
        double dev = 0;
        for (int i = 0; i < g.size(); ++i)
            dev = std::max(dev, std::abs(pk.support(i) / lam_k - sl.h_norm[i] * lam_l));
        out.max_deviation = std::max(out.max_deviation, dev);
        out.checkpoints.emplace_back(sk.t, dev);
    };
    compare();

    const double dk = ck.speed_degree(n), dl = cl.speed_degree(n);
    for (long iter = 0; iter < 2000000 && sk.t < horizon * (1.0 - 1e-14); ++iter) {
        auto ek = detail::eval_stage(g, sk.h_norm, ck, true);
        auto el = detail::eval_stage(g, sl.h_norm, cl, true);
        if (!ek.ok || !el.ok) throw StepCollapse("polar_duality_check: invalid state");
        double dt_k = cfl * g.spacing() * g.spacing() / ek.max_diffusion *
                      std::exp((1.0 - dk) * sk.log_scale);
        double dt_l = cfl * g.spacing() * g.spacing() / el.max_diffusion *
                      std::exp((1.0 - dl) * sl.log_scale);
        double dt = std::min({dt_k, dt_l, horizon - sk.t});

        FlowConfig ck2 = ck, cl2 = cl;
        ck2.t_end = sk.t + dt;
        cl2.t_end = sl.t + dt;
        step(sk, ck2);
        step(sl, cl2);
        // keep the clocks aligned even if one side halved its step
        while (sl.t < sk.t * (1.0 - 1e-14)) {
            cl2.t_end = sk.t;
            step(sl, cl2);
        }
        while (sk.t < sl.t * (1.0 - 1e-14)) {
            ck2.t_end = sl.t;
            step(sk, ck2);
        }
        out.steps += 1;
        if (out.steps % check_every == 0) compare();
    }
    compare();
    out.t_end = sk.t;
    return out;
}

}  // namespace convexflow
