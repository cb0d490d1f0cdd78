#include "msibim/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "msibim/stencils.hpp"

namespace msibim {

namespace {

constexpr double kBig = std::numeric_limits<double>::max() / 4.0;

// Distance estimate for a point adjacent to the interface, from the linear
// zero crossings along each axis: 1/d^2 = sum_a 1/d_a^2 (exact for a plane).
double plane_formula_distance(const ScalarField& phi, int i, int j, int k) {
    const Grid& g = phi.grid;
    double pc = phi.at(i, j, k);
    double apc = std::abs(pc);
    if (apc == 0.0) return 0.0;
    double inv2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
        double best = kBig;
        for (int s = -1; s <= 1; s += 2) {
            int ii = i + (a == 0 ? s : 0);
            int jj = j + (a == 1 ? s : 0);
            int kk = k + (a == 2 ? s : 0);
            if (!g.in_bounds(ii, jj, kk)) continue;
            double pn = phi.at(ii, jj, kk);
            if ((pc > 0.0) == (pn > 0.0)) continue;
            double theta = apc / (apc + std::abs(pn));
            best = std::min(best, theta * g.h);
        }
        if (best < kBig) {
            if (best == 0.0) return 0.0;
            inv2 += 1.0 / (best * best);
        }
    }
    return inv2 > 0.0 ? 1.0 / std::sqrt(inv2) : kBig;
}

// Newton projection onto the zero set of the quadratic interpolant. Falls
// back to the plane formula when the iteration leaves the cell neighborhood.
double cut_point_distance(const ScalarField& phi, int i, int j, int k) {
    const Grid& g = phi.grid;
    double pc = phi.at(i, j, k);
    if (pc == 0.0) return 0.0;
    Vec3 x0 = g.point(i, j, k);
    if (g.margin_cells(i, j, k) < 2) return plane_formula_distance(phi, i, j, k);

    Vec3 p = x0;
    for (int it = 0; it < 4; ++it) {
        InterpValue iv = interp_quadratic(phi, p);
        double g2 = norm2(iv.gradient);
        if (g2 < 1e-30) return plane_formula_distance(phi, i, j, k);
        Vec3 step = (iv.value / g2) * iv.gradient;
        double len = norm(step);
        if (len > g.h) step = (g.h / len) * step;
        p = p - step;
        if (norm(p - x0) > 1.8 * g.h)
            return plane_formula_distance(phi, i, j, k);
    }
    double dist = norm(p - x0);
    // residual check: accept only if the projected point is nearly on the
    // interpolated zero set
    if (std::abs(interp_quadratic(phi, p).value) >
        1e-3 * (std::abs(pc) + 1e-300))
        return plane_formula_distance(phi, i, j, k);
    return dist;
}

// Single Gauss-Seidel update of the Godunov upwind eikonal solver.
inline double eikonal_update(double a, double b, double c, double h, int dim) {
    // sort ascending, ignore kBig entries implicitly
    if (a > b) std::swap(a, b);
    if (dim == 3) {
        if (b > c) std::swap(b, c);
        if (a > b) std::swap(a, b);
    }
    double x = a + h;
    if (x <= b) return x;
    double s = a + b;
    double disc = 2.0 * h * h - (a - b) * (a - b);
    x = 0.5 * (s + std::sqrt(std::max(disc, 0.0)));
    if (dim == 2 || x <= c) return x;
    s = a + b + c;
    disc = s * s - 3.0 * (a * a + b * b + c * c - h * h);
    return (s + std::sqrt(std::max(disc, 0.0))) / 3.0;
}

void fast_sweep(ScalarField& u, const std::vector<std::uint8_t>& frozen,
                double tol, int max_cycles) {
    const Grid& g = u.grid;
    const int ni = g.n[0], nj = g.n[1], nk = g.n[2];
    const double h = g.h;
    const int orders = 1 << g.dim;

    for (int cycle = 0; cycle < max_cycles; ++cycle) {
        double max_change = 0.0;
        for (int ord = 0; ord < orders; ++ord) {
            const bool ri = ord & 1, rj = ord & 2, rk = ord & 4;
            for (int ii = 0; ii < ni; ++ii) {
                int i = ri ? ni - 1 - ii : ii;
                for (int jj = 0; jj < nj; ++jj) {
                    int j = rj ? nj - 1 - jj : jj;
                    for (int kk = 0; kk < nk; ++kk) {
                        int k = rk ? nk - 1 - kk : kk;
                        std::size_t idx = g.flat(i, j, k);
                        if (frozen[idx]) continue;
                        double ax = kBig, ay = kBig, az = kBig;
                        if (i > 0) ax = std::min(ax, u.at(i - 1, j, k));
                        if (i < ni - 1) ax = std::min(ax, u.at(i + 1, j, k));
                        if (j > 0) ay = std::min(ay, u.at(i, j - 1, k));
                        if (j < nj - 1) ay = std::min(ay, u.at(i, j + 1, k));
                        if (g.dim == 3) {
                            if (k > 0) az = std::min(az, u.at(i, j, k - 1));
                            if (k < nk - 1) az = std::min(az, u.at(i, j, k + 1));
                        }
                        double cand = eikonal_update(ax, ay, az, h, g.dim);
                        double& val = u.values[idx];
                        if (cand < val) {
                            max_change = std::max(max_change, val - cand);
                            val = cand;
                        }
                    }
                }
            }
        }
        if (max_change <= tol) break;
    }
}

// A few pseudo-time iterations of d_t + s0 (|grad d| - 1) = 0 with WENO3
// Godunov gradients, keeping the cut cells fixed. Sharpens |grad d| near the
// interface beyond the first-order sweep.
void polish(ScalarField& d, const std::vector<std::uint8_t>& frozen,
            const std::vector<std::int8_t>& sgn, int iters) {
    const Grid& g = d.grid;
    const double h = g.h;
    const double width = 10.0 * h;
    const double dtau = 0.25 * h;

    std::vector<std::size_t> pts;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k) {
                std::size_t idx = g.flat(i, j, k);
                if (frozen[idx]) continue;
                if (std::abs(d.values[idx]) >= width) continue;
                if (g.margin_cells(i, j, k) < 2) continue;
                pts.push_back(idx);
            }

    std::vector<double> upd(pts.size());
    const std::size_t si = static_cast<std::size_t>(g.n[1]) * g.n[2];
    const std::size_t sj = g.n[2];
    for (int it = 0; it < iters; ++it) {
#pragma omp parallel for schedule(static)
        for (long long p = 0; p < static_cast<long long>(pts.size()); ++p) {
            std::size_t idx = pts[p];
            const double* v = d.values.data() + idx;
            double line[5];
            double dm[3] = {0, 0, 0}, dp[3] = {0, 0, 0};
            const std::size_t strides[3] = {si, sj, 1};
            for (int a = 0; a < g.dim; ++a) {
                std::ptrdiff_t s = static_cast<std::ptrdiff_t>(strides[a]);
                for (int q = -2; q <= 2; ++q) line[q + 2] = v[q * s];
                dm[a] = weno3_minus(line + 2, h);
                dp[a] = weno3_plus(line + 2, h);
            }
            double s0 = static_cast<double>(sgn[idx]);
            double gn = godunov_norm(dm, dp, g.dim, s0);
            upd[p] = d.values[idx] - dtau * s0 * (gn - 1.0);
        }
        for (std::size_t p = 0; p < pts.size(); ++p) d.values[pts[p]] = upd[p];
    }
}

}  // namespace

ScalarField redistance(const ScalarField& phi, const RedistanceOptions& opts) {
    const Grid& g = phi.grid;
    const std::size_t total = g.size();

    std::vector<std::int8_t> sgn(total);
    for (std::size_t idx = 0; idx < total; ++idx)
        sgn[idx] = phi.values[idx] > 0.0 ? 1 : -1;

    // Locate cells cut by the interface and freeze their distances.
    ScalarField u(g, kBig);
    std::vector<std::uint8_t> frozen(total, 0);
    bool any_cut = false;
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k) {
                std::size_t idx = g.flat(i, j, k);
                double pc = phi.values[idx];
                bool cut = pc == 0.0;
                for (int a = 0; a < g.dim && !cut; ++a)
                    for (int s = -1; s <= 1 && !cut; s += 2) {
                        int ii = i + (a == 0 ? s : 0);
                        int jj = j + (a == 1 ? s : 0);
                        int kk = k + (a == 2 ? s : 0);
                        if (!g.in_bounds(ii, jj, kk)) continue;
                        if ((pc > 0.0) != (phi.at(ii, jj, kk) > 0.0)) cut = true;
                    }
                if (cut) {
                    u.values[idx] = cut_point_distance(phi, i, j, k);
                    frozen[idx] = 1;
                    any_cut = true;
                }
            }
    if (!any_cut) throw SimError("interface vanished");

    fast_sweep(u, frozen, opts.sweep_tol, opts.max_sweep_cycles);

    ScalarField d(g);
    for (std::size_t idx = 0; idx < total; ++idx)
        d.values[idx] = sgn[idx] * u.values[idx];

    if (opts.polish_iters > 0) polish(d, frozen, sgn, opts.polish_iters);
    return d;
}

double averaging_kernel(double t, double eps) {
    if (std::abs(t) >= eps) return 0.0;
    return (0.5 / eps) * (1.0 + std::cos(M_PI * t / eps));
}

InterpValue interp_quadratic(const ScalarField& f, Vec3 p) {
    const Grid& g = f.grid;
    int base[3] = {0, 0, 0};
    double xi[3] = {0, 0, 0};
    for (int a = 0; a < g.dim; ++a) {
        double u = (p[a] - g.origin[a]) / g.h;
        int m = static_cast<int>(std::lround(u));
        m = std::max(1, std::min(m, g.n[a] - 2));
        base[a] = m;
        xi[a] = u - m;
    }
    // 1D quadratic Lagrange weights on nodes {-1, 0, +1} and their derivatives
    double w[3][3], dw[3][3];
    for (int a = 0; a < 3; ++a) {
        double t = xi[a];
        w[a][0] = 0.5 * t * (t - 1.0);
        w[a][1] = 1.0 - t * t;
        w[a][2] = 0.5 * t * (t + 1.0);
        dw[a][0] = t - 0.5;
        dw[a][1] = -2.0 * t;
        dw[a][2] = t + 0.5;
    }
    if (g.dim == 2) {
        w[2][0] = dw[2][0] = 0.0;
        w[2][1] = 1.0;
        dw[2][1] = 0.0;
        w[2][2] = dw[2][2] = 0.0;
    }
    InterpValue out{0.0, {0, 0, 0}};
    int kr = g.dim == 3 ? 1 : 0;
    for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj)
            for (int dk = -kr; dk <= kr; ++dk) {
                double v = f.at(base[0] + di, base[1] + dj,
                                g.dim == 3 ? base[2] + dk : 0);
                double wi = w[0][di + 1], wj = w[1][dj + 1], wk = w[2][dk + 1];
                out.value += v * wi * wj * wk;
                out.gradient.x += v * dw[0][di + 1] * wj * wk;
                out.gradient.y += v * wi * dw[1][dj + 1] * wk;
                if (g.dim == 3) out.gradient.z += v * wi * wj * dw[2][dk + 1];
            }
    out.gradient = (1.0 / g.h) * out.gradient;
    return out;
}

DistanceBundle closest_point_map(const ScalarField& d, const NarrowBand& band,
                                 ReachPolicy policy) {
    const Grid& g = d.grid;
    DistanceBundle b;
    b.grid = g;
    b.band = band;
    const std::size_t n = band.size();
    b.d.resize(n);
    b.grad.resize(n);
    b.proj.resize(n);
    b.kappa1.resize(n);
    b.kappa2.resize(n);
    b.jacobian.assign(n, 0.0);
    b.delta.assign(n, 0.0);
    b.weight.assign(n, 0.0);
    b.usable.assign(n, 1);

    const double h = g.h;
    const double h2 = h * h;
    double max_res = 0.0;
    std::size_t dropped = 0;

    for (std::size_t p = 0; p < n; ++p) {
        std::size_t idx = band.indices[p];
        auto [i, j, k] = g.unflat(idx);
        double dv = d.values[idx];
        b.d[p] = dv;

        auto at = [&](int di, int dj, int dk) { return d.at(i + di, j + dj, k + dk); };

        Vec3 gr;
        gr.x = (at(1, 0, 0) - at(-1, 0, 0)) / (2 * h);
        gr.y = (at(0, 1, 0) - at(0, -1, 0)) / (2 * h);
        if (g.dim == 3) gr.z = (at(0, 0, 1) - at(0, 0, -1)) / (2 * h);

        double gn = norm(gr);
        max_res = std::max(max_res, std::abs(gn - 1.0));
        if (gn < 0.5) {
            // kinked distance field (skeleton inside the band)
            if (policy == ReachPolicy::Throw) throw SimError("band exceeds reach");
            b.usable[p] = 0;
            ++dropped;
            b.grad[p] = Vec3{1, 0, 0};
            b.proj[p] = g.point(idx);
            continue;
        }
        Vec3 nrm = (1.0 / gn) * gr;
        b.grad[p] = nrm;
        b.proj[p] = g.point(idx) - dv * nrm;

        // Hessian of d (second-order centrals).
        double H[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        H[0][0] = (at(1, 0, 0) - 2 * dv + at(-1, 0, 0)) / h2;
        H[1][1] = (at(0, 1, 0) - 2 * dv + at(0, -1, 0)) / h2;
        H[0][1] = H[1][0] =
            (at(1, 1, 0) - at(1, -1, 0) - at(-1, 1, 0) + at(-1, -1, 0)) / (4 * h2);
        if (g.dim == 3) {
            H[2][2] = (at(0, 0, 1) - 2 * dv + at(0, 0, -1)) / h2;
            H[0][2] = H[2][0] =
                (at(1, 0, 1) - at(1, 0, -1) - at(-1, 0, 1) + at(-1, 0, -1)) / (4 * h2);
            H[1][2] = H[2][1] =
                (at(0, 1, 1) - at(0, 1, -1) - at(0, -1, 1) + at(0, -1, -1)) / (4 * h2);
        }

        double k1 = 0.0, k2 = 0.0;  // curvatures of the level set through x
        if (g.dim == 2) {
            double num = H[0][0] * gr.y * gr.y - 2.0 * gr.x * gr.y * H[0][1] +
                         H[1][1] * gr.x * gr.x;
            k1 = -num / (gn * gn * gn);
        } else {
            // tangential part M = (I - nn^T) H (I - nn^T); eigenvalues of M on
            // the tangent plane are minus the principal curvatures
            double nv[3] = {nrm.x, nrm.y, nrm.z};
            double Hn[3], nHn = 0.0;
            for (int r = 0; r < 3; ++r) {
                Hn[r] = H[r][0] * nv[0] + H[r][1] * nv[1] + H[r][2] * nv[2];
            }
            nHn = nv[0] * Hn[0] + nv[1] * Hn[1] + nv[2] * Hn[2];
            double M[3][3];
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    M[r][c] = H[r][c] - nv[r] * Hn[c] - Hn[r] * nv[c] +
                              nv[r] * nv[c] * nHn;
            double tr = M[0][0] + M[1][1] + M[2][2];
            double tr2 = 0.0;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) tr2 += M[r][c] * M[c][r];
            double s2 = 0.5 * (tr * tr - tr2);
            double disc = std::sqrt(std::max(tr * tr - 4.0 * s2, 0.0));
            k1 = -0.5 * (tr + disc);
            k2 = -0.5 * (tr - disc);
        }

        // transport curvature from the level set through x to the interface
        double den1 = 1.0 + dv * k1;
        double den2 = g.dim == 3 ? 1.0 + dv * k2 : 1.0;
        double floor = policy == ReachPolicy::Throw ? 1e-12 : 0.1;
        if (den1 <= floor || den2 <= floor) {
            if (policy == ReachPolicy::Throw) throw SimError("band exceeds reach");
            b.usable[p] = 0;
            ++dropped;
            den1 = std::max(den1, floor);
            den2 = std::max(den2, floor);
        }
        b.kappa1[p] = k1 / den1;
        b.kappa2[p] = g.dim == 3 ? k2 / den2 : 0.0;
    }

    b.max_eikonal_residual = max_res;
    b.dropped = dropped;
    return b;
}

void jacobian_and_kernel_weights(DistanceBundle& bundle, double eps,
                                 ReachPolicy policy) {
    const int dim = bundle.grid.dim;
    const double hm = dim == 3 ? bundle.grid.h * bundle.grid.h * bundle.grid.h
                               : bundle.grid.h * bundle.grid.h;
    for (std::size_t p = 0; p < bundle.size(); ++p) {
        if (!bundle.usable[p]) continue;
        double dv = bundle.d[p];
        double f1 = 1.0 - dv * bundle.kappa1[p];
        double f2 = dim == 3 ? 1.0 - dv * bundle.kappa2[p] : 1.0;
        if (f1 <= 0.0 || f2 <= 0.0) {
            if (policy == ReachPolicy::Throw) throw SimError("band exceeds reach");
            bundle.usable[p] = 0;
            ++bundle.dropped;
            continue;
        }
        double J = 1.0 / (f1 * f2);
        bundle.jacobian[p] = J;
        bundle.delta[p] = averaging_kernel(dv, eps);
        bundle.weight[p] = J * bundle.delta[p] * hm;
    }
}

DistanceBundle build_bundle(const ScalarField& d, double eps, ReachPolicy policy) {
    NarrowBand band = build_band(d, eps);
    DistanceBundle bundle = closest_point_map(d, band, policy);
    jacobian_and_kernel_weights(bundle, eps, policy);
    return bundle;
}

}  // namespace msibim
