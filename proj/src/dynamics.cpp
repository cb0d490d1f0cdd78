#include "msibim/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "msibim/stencils.hpp"

namespace msibim {

VelocityField jump_velocity_near_band(const DistanceBundle& bundle,
                                      const TopologyReport& topology,
                                      const FluxEvaluator& flux,
                                      const DynamicsConfig& cfg, JumpStats* stats) {
    const Grid& g = bundle.grid;
    VelocityField v;
    v.values = ScalarField(g, 0.0);
    v.clamp = cfg.v_clamp;
    JumpStats local;

    const double lo = cfg.inner_lo * g.h, hi = cfg.inner_hi * g.h;
    for (std::size_t p = 0; p < bundle.size(); ++p) {
        if (!bundle.usable[p]) continue;
        double dv = bundle.d[p];
        double ad = std::abs(dv);
        if (ad < lo || ad > hi) continue;

        std::size_t idx = bundle.grid_index(p);
        Vec3 grad = bundle.grad[p];
        Vec3 n = -1.0 * grad;  // outward from the solid phase
        double s = dv > 0.0 ? 1.0 : -1.0;
        int own = topology.labels[idx];
        int piece = topology.band_piece[p];
        const PieceInfo& info = topology.pieces[piece];
        int opposite = own > 0 ? info.liquid_label : info.solid_label;

        // The pair x, x - 2 d grad d is symmetric about the closest point.
        // Points closer than ~2h would put the evaluation inside the
        // unresolvable near field of the quadrature, so the pair is slid
        // outward along the same normal line (v is constant along normals).
        double offset = std::max(ad, 2.0 * g.h);
        Vec3 q_own = bundle.proj[p] + (s * offset) * grad;
        Vec3 q_mirror = bundle.proj[p] - (s * offset) * grad;

        auto side_label = [&](Vec3 q) {
            int qi = static_cast<int>(std::lround((q.x - g.origin.x) / g.h));
            int qj = static_cast<int>(std::lround((q.y - g.origin.y) / g.h));
            int qk = g.dim == 3
                         ? static_cast<int>(std::lround((q.z - g.origin.z) / g.h))
                         : 0;
            if (!g.in_bounds(qi, qj, qk) ||
                g.margin_cells(qi, qj, qk) < kWindowMargin)
                throw SimError("window too small: mirror point outside the grid");
            return topology.labels[g.flat(qi, qj, qk)];
        };

        // a side landing in a third region, or inside the unresolvable near
        // field of another interface piece (pinch-off), contributes one-sided
        double own_flux = 0.0, mirror_flux = 0.0;
        bool degraded = false;
        int lab_own = side_label(q_own);      // throws when outside the window
        int lab_mirror = side_label(q_mirror);
        try {
            if (lab_own == own)
                own_flux = flux(own, q_own, n);
            else
                degraded = true;
        } catch (const SimError&) {  // near field of another interface piece
            own_flux = 0.0;
            degraded = true;
        }
        try {
            if (lab_mirror == opposite)
                mirror_flux = flux(opposite, q_mirror, n);
            else
                degraded = true;
        } catch (const SimError&) {
            mirror_flux = 0.0;
            degraded = true;
        }
        if (degraded) ++local.one_sided;

        v.values[idx] = s * (mirror_flux - own_flux);
        ++local.evaluated;
    }
    if (local.evaluated == 0)
        throw SimError("no inner-layer band points for the velocity evaluation");
    if (stats) *stats = local;
    return v;
}

void extend_velocity(VelocityField& v, const DistanceBundle& bundle,
                     const DynamicsConfig& cfg) {
    const Grid& g = bundle.grid;
    const double h = g.h;
    const double lo = cfg.inner_lo * h, hi = cfg.inner_hi * h;

    // collect the free band points and their transport directions; the
    // characteristics leave the inner data layer in both directions
    std::vector<std::size_t> free_pts;
    std::vector<Vec3> adv;
    for (std::size_t p = 0; p < bundle.size(); ++p) {
        double ad = std::abs(bundle.d[p]);
        bool fixed = bundle.usable[p] && ad >= lo && ad <= hi;
        if (fixed) continue;
        std::size_t idx = bundle.grid_index(p);
        free_pts.push_back(idx);
        double s = bundle.d[p] > 0.0 ? 1.0 : -1.0;
        if (ad < lo) s = -s;  // innermost sliver: transport from the data inward
        adv.push_back(s * bundle.grad[p]);
    }

    const double dtau = 0.4 * h;
    const double tol = 1e-6 * std::max(cfg.v_clamp, 1e-12);
    const std::size_t si = static_cast<std::size_t>(g.n[1]) * g.n[2];
    const std::size_t strides[3] = {si, static_cast<std::size_t>(g.n[2]), 1};
    std::vector<double> upd(free_pts.size());

    for (int it = 0; it < 600; ++it) {
        double max_change = 0.0;
#pragma omp parallel for schedule(static) reduction(max : max_change)
        for (long long q = 0; q < static_cast<long long>(free_pts.size()); ++q) {
            std::size_t idx = free_pts[q];
            const double* vp = v.values.values.data() + idx;
            double acc = 0.0;
            for (int a = 0; a < g.dim; ++a) {
                double aa = adv[q][a];
                std::ptrdiff_t s = static_cast<std::ptrdiff_t>(strides[a]);
                if (aa > 0.0)
                    acc += aa * (vp[0] - vp[-s]) / h;
                else
                    acc += aa * (vp[s] - vp[0]) / h;
            }
            double nv = vp[0] - dtau * acc;
            upd[q] = nv;
            max_change = std::max(max_change, std::abs(nv - vp[0]));
        }
        for (std::size_t q = 0; q < free_pts.size(); ++q)
            v.values[free_pts[q]] = upd[q];
        if (max_change < tol) break;
    }

    // clamp and record the extremes over the band
    double vmax = 0.0;
    for (std::size_t p = 0; p < bundle.size(); ++p) {
        std::size_t idx = bundle.grid_index(p);
        double& val = v.values[idx];
        if (cfg.clamp_mode == ClampMode::symmetric) {
            if (val > cfg.v_clamp) val = cfg.v_clamp;
            if (val < -cfg.v_clamp) val = -cfg.v_clamp;
        } else {
            val = std::max(val, -cfg.v_clamp);
        }
        vmax = std::max(vmax, std::abs(val));
    }
    v.max_abs = vmax;
}

ScalarField advect(const ScalarField& phi, const VelocityField& v, double dt,
                   const NarrowBand& band, double cfl) {
    const Grid& g = phi.grid;
    const double h = g.h;
    if (v.max_abs > 0.0 && dt > cfl * h / v.max_abs * (1.0 + 1e-12)) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "CFL violation: dt must be at most %.6e", cfl * h / v.max_abs);
        throw SimError(buf);
    }

    const std::size_t si = static_cast<std::size_t>(g.n[1]) * g.n[2];
    const std::size_t strides[3] = {si, static_cast<std::size_t>(g.n[2]), 1};

    auto hamiltonian = [&](const ScalarField& f, std::size_t idx) {
        double vel = v.values[idx];
        if (vel == 0.0) return 0.0;
        const double* fp = f.values.data() + idx;
        double line[5], dm[3] = {0, 0, 0}, dp[3] = {0, 0, 0};
        for (int a = 0; a < g.dim; ++a) {
            std::ptrdiff_t s = static_cast<std::ptrdiff_t>(strides[a]);
            for (int q = -2; q <= 2; ++q) line[q + 2] = fp[q * s];
            dm[a] = weno3_minus(line + 2, h);
            dp[a] = weno3_plus(line + 2, h);
        }
        return vel * godunov_norm(dm, dp, g.dim, vel);
    };

    auto stage = [&](const ScalarField& f, ScalarField& out, double ca,
                     const ScalarField& base, double cb) {
        // out = ca * base + cb * (f - dt * H(f)) on the band; points with
        // zero velocity pass through bit-exactly
#pragma omp parallel for schedule(static)
        for (long long q = 0; q < static_cast<long long>(band.size()); ++q) {
            std::size_t idx = band.indices[q];
            if (v.values[idx] == 0.0) {
                out.values[idx] = f.values[idx];
                continue;
            }
            out.values[idx] =
                ca * base.values[idx] +
                cb * (f.values[idx] - dt * hamiltonian(f, idx));
        }
    };

    ScalarField s1 = phi, s2 = phi, out = phi;
    stage(phi, s1, 0.0, phi, 1.0);
    stage(s1, s2, 0.75, phi, 0.25);
    stage(s2, out, 1.0 / 3.0, phi, 2.0 / 3.0);
    return out;
}

namespace {

SeriesRecord measure_record(const SimState& state, const DistanceBundle& bundle,
                            const TopologyReport& topo) {
    SeriesRecord rec;
    rec.t = state.t;
    rec.volume = measure_volume(state.d);
    rec.area = measure_area(bundle);
    rec.components = static_cast<int>(topo.components.size());
    rec.pieces = static_cast<int>(topo.piece_count());
    return rec;
}

}  // namespace

StepReport step(SimState& state, const DynamicsConfig& cfg) {
    const Grid& g = state.d.grid;
    const double eps = cfg.eps_over_h * g.h;

    if (!state.bundle_cache || !state.topology_cache) {
        state.bundle_cache = build_bundle(state.d, eps, ReachPolicy::Drop);
        state.topology_cache =
            analyze_topology(state.d, *state.bundle_cache, ReachPolicy::Drop);
    }
    DistanceBundle bundle = std::move(*state.bundle_cache);
    TopologyReport topo = std::move(*state.topology_cache);
    state.bundle_cache.reset();
    state.topology_cache.reset();

    // Gibbs-Thomson data: f = -kappa, curvature of the interface with the
    // convex-solid-positive convention (3D: sum of principal curvatures)
    std::vector<double> f_band(bundle.size(), 0.0);
    for (std::size_t p = 0; p < bundle.size(); ++p)
        if (bundle.usable[p]) f_band[p] = -bundle.mean_curvature_sum(p);

    std::map<int, BieSolution> solutions;
    StepReport rep;
    for (const auto& comp : topo.components) {
        double u_inf = (!comp.bounded && g.dim == 3) ? cfg.u_inf : 0.0;
        BieProblem prob =
            make_component_problem(bundle, topo, comp.label, f_band, u_inf);
        auto prev = state.last_solutions.find(comp.label);
        BieSolution sol =
            solve(prob, cfg.solver,
                  prev == state.last_solutions.end() ? nullptr : &prev->second);
        rep.max_residual = std::max(rep.max_residual, sol.residual);
        rep.max_iterations = std::max(rep.max_iterations, sol.iterations);
        solutions.emplace(comp.label, std::move(sol));
    }

    FluxEvaluator flux = [&](int label, Vec3 x, Vec3 n) {
        return eval_normal_derivative(solutions.at(label), x, n);
    };
    JumpStats jstats;
    VelocityField v = jump_velocity_near_band(bundle, topo, flux, cfg, &jstats);
    extend_velocity(v, bundle, cfg);

    // velocity CFL plus the surface-tension stiffness cap
    double dt = std::min(cfg.max_dt, cfg.stiff_factor * g.h * g.h * g.h);
    if (v.max_abs > 0.0) dt = std::min(dt, cfg.cfl * g.h / v.max_abs);
    ScalarField phi = advect(state.d, v, dt, bundle.band, cfg.cfl);
    state.d = redistance(phi, cfg.redistance);
    state.t += dt;
    ++state.step_index;
    state.last_solutions = std::move(solutions);

    // diagnostics on the advanced state; the geometry is cached for the next step
    DistanceBundle new_bundle = build_bundle(state.d, eps, ReachPolicy::Drop);
    TopologyReport new_topo =
        analyze_topology(state.d, new_bundle, ReachPolicy::Drop);
    SeriesRecord rec = measure_record(state, new_bundle, new_topo);
    double vmin = 0.0, vmax = 0.0;
    bool first = true;
    for (std::size_t p = 0; p < bundle.size(); ++p) {
        double val = v.values[bundle.grid_index(p)];
        if (first) {
            vmin = vmax = val;
            first = false;
        }
        vmin = std::min(vmin, val);
        vmax = std::max(vmax, val);
    }
    rec.v_min = vmin;
    rec.v_max = vmax;
    rec.residual = rep.max_residual;
    state.series.append(rec);
    state.bundle_cache = std::move(new_bundle);
    state.topology_cache = std::move(new_topo);

    rep.dt = dt;
    rep.t = state.t;
    rep.components = rec.components;
    rep.pieces = rec.pieces;
    rep.v_min = vmin;
    rep.v_max = vmax;
    rep.dropped_band_points = bundle.dropped;
    rep.one_sided_mirrors = jstats.one_sided;
    return rep;
}

}  // namespace msibim
