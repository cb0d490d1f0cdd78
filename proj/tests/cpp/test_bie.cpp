#include "doctest.h"

#include <cmath>

#include "msibim/bie.hpp"
#include "test_helpers.hpp"

using namespace msibim;
using namespace msibim::testing;

namespace {

struct DiskSetup {
    ScalarField d;
    DistanceBundle bundle;
    TopologyReport topology;
};

DiskSetup disk_setup(double h, double R = 1.0) {
    Grid g = square_grid(2.0, h);
    DiskSetup s{disk_sdf(g, {0, 0, 0}, R), {}, {}};
    s.bundle = build_bundle(s.d, 6 * h);
    s.topology = analyze_topology(s.d, s.bundle);
    return s;
}

DiskSetup sphere_setup(double h, double R, double eps_over_h = 4.0) {
    Grid g = cube_grid(2.0, h);
    DiskSetup s{disk_sdf(g, {0, 0, 0}, R), {}, {}};
    s.bundle = build_bundle(s.d, eps_over_h * h);
    s.topology = analyze_topology(s.d, s.bundle);
    return s;
}

// discrete Gauss identity: double layer of a unit density
double gauss_sum(const DistanceBundle& b, Vec3 x, double on_kappa = 0.0,
                 double h = 0.0) {
    double acc = 0.0;
    for (std::size_t p = 0; p < b.size(); ++p) {
        if (!b.usable[p]) continue;
        Vec3 n_out = -1.0 * b.grad[p];
        double r2 = norm2(b.proj[p] - x);
        double kern = r2 < 0.25 * h * h
                          ? double_layer_diagonal(on_kappa)
                          : double_layer_kernel(b.grid.dim, x, b.proj[p], n_out);
        acc += kern * b.weight[p];
    }
    return acc;
}

}  // namespace

TEST_CASE("double layer kernel point values") {
    // 2D plug-in: x=(2,0), y=(1,0), n_y=(1,0) -> ((y-x).n)/2pi|x-y|^2 = -1/2pi
    CHECK(double_layer_kernel(2, {2, 0, 0}, {1, 0, 0}, {1, 0, 0}) ==
          doctest::Approx(-1.0 / (2 * M_PI)));
    // on the unit circle the kernel is constant 1/(4 pi) for every pair
    for (double t : {0.3, 1.0, 2.5}) {
        Vec3 y{std::cos(t), std::sin(t), 0};
        CHECK(double_layer_kernel(2, {1, 0, 0}, y, y) ==
              doctest::Approx(1.0 / (4 * M_PI)).epsilon(1e-12));
    }
    // diagonal limit approached along the circle matches kappa/(4 pi)
    for (double t : {1e-3, 1e-4}) {
        Vec3 y{std::cos(t), std::sin(t), 0};
        CHECK(double_layer_kernel(2, {1, 0, 0}, y, y) ==
              doctest::Approx(double_layer_diagonal(1.0)).epsilon(1e-9));
    }
}

TEST_CASE("hypersingular kernel matches finite differences of the double layer") {
    for (int dim : {2, 3}) {
        Vec3 x{0.7, -0.4, dim == 3 ? 0.3 : 0.0};
        Vec3 y{-0.2, 0.5, dim == 3 ? -0.1 : 0.0};
        Vec3 n_x = normalized(Vec3{1.0, 2.0, dim == 3 ? -0.5 : 0.0});
        Vec3 n_y = normalized(Vec3{-0.3, 1.0, dim == 3 ? 0.8 : 0.0});
        double delta = 1e-6;
        double fd = (double_layer_kernel(dim, x + delta * n_x, y, n_y) -
                     double_layer_kernel(dim, x - delta * n_x, y, n_y)) /
                    (2 * delta);
        CHECK(hypersingular_kernel(dim, x, y, n_x, n_y) ==
              doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("Gauss identity on the unit circle band") {
    double h = 4.0 / 512;
    DiskSetup s = disk_setup(h);
    // +1 inside, 0 outside, +1/2 on the interface for the chosen kernel sign
    CHECK(gauss_sum(s.bundle, {0.2, 0.1, 0}) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(gauss_sum(s.bundle, {1.7, 0.4, 0}) == doctest::Approx(0.0).epsilon(1e-3));
    CHECK(gauss_sum(s.bundle, {std::cos(0.7), std::sin(0.7), 0}, 1.0, h) ==
          doctest::Approx(0.5).epsilon(2e-2));
}

TEST_CASE("interior disk with constant data reproduces the constant") {
    double h = 4.0 / 256;
    DiskSetup s = disk_setup(h);
    const double c = 2.0;
    BieProblem prob = make_component_problem(s.bundle, s.topology, 1,
                                             BoundaryData([&](Vec3) { return c; }));
    CHECK(prob.kind == BieKind::interior);
    CHECK(prob.num_holes() == 0);
    BieSolution sol = solve(prob);
    double err = 0.0;
    for (Vec3 x : {Vec3{0, 0, 0}, Vec3{0.4, 0.3, 0}, Vec3{-0.6, 0.2, 0}})
        err = std::max(err, std::abs(eval_potential(sol, x) - c));
    CHECK(err < 1e-3);
}

TEST_CASE("interior disk with a harmonic polynomial") {
    auto run = [](double h) {
        DiskSetup s = disk_setup(h);
        BieProblem prob = make_component_problem(
            s.bundle, s.topology, 1,
            BoundaryData([](Vec3 p) { return p.x * p.x - p.y * p.y; }));
        BieSolution sol = solve(prob);
        double err = 0.0;
        // deep interior points plus a ring near the boundary, where the
        // evaluation error is resolution-limited
        for (Vec3 x : {Vec3{0, 0, 0}, Vec3{0.5, 0.1, 0}, Vec3{-0.3, -0.55, 0}})
            err = std::max(err,
                           std::abs(eval_potential(sol, x) - (x.x * x.x - x.y * x.y)));
        for (int q = 0; q < 32; ++q) {
            double t = 2 * M_PI * q / 32.0;
            Vec3 x{0.9 * std::cos(t), 0.9 * std::sin(t), 0};
            err = std::max(err,
                           std::abs(eval_potential(sol, x) - (x.x * x.x - x.y * x.y)));
        }
        return err;
    };
    double e1 = run(4.0 / 128);
    double e2 = run(4.0 / 256);
    CHECK(e1 < 5e-2);
    CHECK(e2 < e1 / 2.0);  // at least first-order convergence
}

TEST_CASE("annulus interior problem recovers the log source strength") {
    double h = 4.0 / 256;
    Grid g = square_grid(2.0, h);
    ScalarField d0 = fill(g, [](Vec3 p) {
        double r = norm(p);
        return std::min(1.3 - r, r - 0.55);
    });
    ScalarField d = redistance(d0);
    DistanceBundle bundle = build_bundle(d, 6 * h);
    TopologyReport topo = analyze_topology(d, bundle);

    // harmonic in the ring with unit circulation around the hole
    auto exact = [](Vec3 p) { return std::log(norm(p)) / (2 * M_PI); };
    BieProblem prob =
        make_component_problem(bundle, topo, 1, BoundaryData(exact));
    REQUIRE(prob.num_holes() == 1);
    BieSolution sol = solve(prob);

    CHECK(sol.constants[0] == doctest::Approx(1.0).epsilon(5e-3));
    double err = 0.0;
    for (double r : {0.8, 0.92, 1.1})
        for (double t : {0.0, 1.1, 3.9})
            err = std::max(err, std::abs(eval_potential(sol, {r * std::cos(t),
                                                              r * std::sin(t), 0}) -
                                         std::log(r) / (2 * M_PI)));
    CHECK(err < 5e-3);

    // constraint row satisfied: weighted mean of beta over the hole piece
    double mean = 0.0, measure = 0.0;
    for (int r : prob.piece_rows[0]) {
        mean += prob.weight[r] * sol.beta[r];
        measure += prob.weight[r];
    }
    CHECK(std::abs(mean / measure) < 1e-8);

    // normal derivative mid-ring matches d/dr of log(r)/2pi
    Vec3 xm{0.92, 0, 0};
    double dn = eval_normal_derivative(sol, xm, {1, 0, 0});
    CHECK(dn == doctest::Approx(1.0 / (2 * M_PI * 0.92)).epsilon(2e-2));
}

TEST_CASE("exterior disk with constant data: the stationary configuration") {
    double h = 4.0 / 256;
    DiskSetup s = disk_setup(h);
    BieProblem prob = make_component_problem(s.bundle, s.topology, 0,
                                             BoundaryData([](Vec3) { return -1.0; }));
    CHECK(prob.kind == BieKind::exterior_bounded_2d);
    REQUIRE(prob.num_holes() == 1);
    BieSolution sol = solve(prob);
    // the sum-A constraint pins the lone source to zero
    CHECK(std::abs(sol.constants[0]) < 1e-10);
    double err = 0.0;
    for (Vec3 x : {Vec3{1.5, 0, 0}, Vec3{-1.2, 0.9, 0}, Vec3{0, 1.7, 0}})
        err = std::max(err, std::abs(eval_potential(sol, x) - (-1.0)));
    CHECK(err < 1e-3);
    // zero flux on both sides
    Vec3 xe{1.3, 0, 0};
    CHECK(std::abs(eval_normal_derivative(sol, xe, {1, 0, 0})) < 2e-2);
}

TEST_CASE("exterior sphere: u = -2/r") {
    auto run = [](double h) {
        DiskSetup s = sphere_setup(h, 1.0);
        BieProblem prob = make_component_problem(
            s.bundle, s.topology, 0, BoundaryData([](Vec3) { return -2.0; }));
        BieSolution sol = solve(prob);
        double err = 0.0;
        for (Vec3 x : {Vec3{1.5, 0, 0}, Vec3{0, -1.7, 0.2}, Vec3{1.0, 1.0, 0.8}})
            err = std::max(err,
                           std::abs(eval_potential(sol, x) - (-2.0 / norm(x))));
        return err;
    };
    double e1 = run(4.0 / 48);
    CHECK(e1 < 0.05);

    // normal derivative of -2/r at r = 1.5 along the radial direction
    DiskSetup s = sphere_setup(4.0 / 64, 1.0);
    BieProblem prob = make_component_problem(s.bundle, s.topology, 0,
                                             BoundaryData([](Vec3) { return -2.0; }));
    BieSolution sol = solve(prob);
    double dn = eval_normal_derivative(sol, {1.5, 0, 0}, {1, 0, 0});
    CHECK(dn == doctest::Approx(2.0 / (1.5 * 1.5)).epsilon(5e-2));
}

TEST_CASE("exterior sphere with matching far field is constant") {
    DiskSetup s = sphere_setup(4.0 / 48, 1.0);
    BieProblem prob =
        make_component_problem(s.bundle, s.topology, 0,
                               BoundaryData([](Vec3) { return -2.0; }), -2.0);
    CHECK(prob.kind == BieKind::exterior_farfield_3d);
    BieSolution sol = solve(prob);
    for (Vec3 x : {Vec3{1.4, 0, 0}, Vec3{0, 1.8, 0.1}})
        CHECK(eval_potential(sol, x) == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(std::abs(eval_normal_derivative(sol, {1.45, 0, 0}, {1, 0, 0})) < 1e-6);
}

TEST_CASE("identity-dominated system: zero kernel weights give beta = f / lambda") {
    double h = 4.0 / 64;
    DiskSetup s = disk_setup(h);
    BieProblem prob = make_component_problem(s.bundle, s.topology, 1,
                                             BoundaryData([](Vec3 p) { return p.x; }));
    for (auto& w : prob.weight) w = 0.0;
    BieSolution sol = solve(prob);
    for (std::size_t k = 0; k < prob.num_nodes(); ++k)
        CHECK(sol.beta[k] == doctest::Approx(prob.rhs[k] / prob.lambda).epsilon(1e-10));
}

TEST_CASE("GMRES agrees with dense factorization on the annulus system") {
    double h = 4.0 / 128;
    Grid g = square_grid(2.0, h);
    ScalarField d = redistance(fill(g, [](Vec3 p) {
        double r = norm(p);
        return std::min(1.3 - r, r - 0.55);
    }));
    DistanceBundle bundle = build_bundle(d, 6 * h);
    TopologyReport topo = analyze_topology(d, bundle);
    BieProblem prob = make_component_problem(
        bundle, topo, 1, BoundaryData([](Vec3 p) { return std::log(norm(p)) / (2 * M_PI); }));

    BieSolveOptions dense_opts;
    dense_opts.force_dense_direct = true;
    dense_opts.dense_direct_max = 8000;
    BieSolution dense_sol = solve(prob, dense_opts);

    BieSolveOptions krylov_opts;
    krylov_opts.dense_direct_max = 0;  // no LU fallback
    BieSolution kry_sol = solve(prob, krylov_opts);
    CHECK(kry_sol.iterations < 200);

    double diff = 0.0;
    for (std::size_t k = 0; k < prob.num_nodes(); ++k)
        diff = std::max(diff, std::abs(dense_sol.beta[k] - kry_sol.beta[k]));
    CHECK(diff < 1e-6);
    CHECK(std::abs(dense_sol.constants[0] - kry_sol.constants[0]) < 1e-7);
}

TEST_CASE("unmodified exterior kernel on two disks is rank deficient") {
    double h = 4.0 / 128;
    Grid g = square_grid(2.0, h);
    ScalarField d = redistance(fill(g, [](Vec3 p) {
        return std::max(0.5 - norm(p - Vec3{-0.9, 0, 0}),
                        0.6 - norm(p - Vec3{0.9, 0, 0}));
    }));
    DistanceBundle bundle = build_bundle(d, 6 * h);
    TopologyReport topo = analyze_topology(d, bundle);
    BieProblem prob = make_component_problem(bundle, topo, 0,
                                             BoundaryData([](Vec3 p) { return p.x; }));

    BieSolveOptions good;
    good.dense_direct_max = 0;
    BieSolution ok = solve(prob, good);
    CHECK(ok.residual <= good.tol);

    BieSolveOptions broken = good;
    broken.disable_exterior_modification = true;
    broken.max_iters = 150;
    bool failed = false;
    double recon_err = 0.0;
    try {
        BieSolution bad = solve(prob, broken);
        // converged anyway: the reconstruction must then violate the data
        Vec3 probe{1.8, 0.3, 0};
        recon_err = std::abs(eval_potential(bad, probe) - eval_potential(ok, probe));
    } catch (const SolverError&) {
        failed = true;
    }
    CHECK((failed || recon_err > 0.05));
}

TEST_CASE("2D compatibility: exterior flux integral vanishes") {
    double h = 4.0 / 128;
    Grid g = square_grid(2.0, h);
    ScalarField d = redistance(fill(g, [](Vec3 p) {
        return std::max(0.5 - norm(p - Vec3{-0.9, 0, 0}),
                        0.75 - norm(p - Vec3{0.9, 0, 0}));
    }));
    DistanceBundle bundle = build_bundle(d, 6 * h);
    TopologyReport topo = analyze_topology(d, bundle);
    // curvature data drives nontrivial fluxes between the two disks
    std::vector<double> f(bundle.size());
    for (std::size_t p = 0; p < bundle.size(); ++p) f[p] = -bundle.kappa1[p];
    BieProblem prob = make_component_problem(bundle, topo, 0, f);
    BieSolution sol = solve(prob);

    // integrate the liquid-side normal derivative over the interface with the
    // tube quadrature; evaluation offset 2h outside the interface
    double integral = 0.0, total_flux = 0.0;
    for (std::size_t k = 0; k < prob.num_nodes(); ++k) {
        Vec3 n = prob.normal[k];
        Vec3 x = prob.node[k] + 2.0 * h * n;
        double dn = eval_normal_derivative(sol, x, n);
        integral += dn * prob.weight[k];
        total_flux += std::abs(dn) * prob.weight[k];
    }
    CHECK(std::abs(integral) < 5 * h * std::max(total_flux, 1.0));
}
