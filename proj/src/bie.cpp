#include "msibim/bie.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "msibim/gmres.hpp"

namespace msibim {

double fundamental_solution(int dim, double r) {
    if (dim == 2) return std::log(r) / (2.0 * M_PI);
    return -1.0 / (4.0 * M_PI * r);
}

double double_layer_kernel(int dim, Vec3 x, Vec3 y, Vec3 n_y) {
    Vec3 diff = y - x;
    double r2 = norm2(diff);
    if (dim == 2) return dot(diff, n_y) / (2.0 * M_PI * r2);
    double r = std::sqrt(r2);
    return dot(diff, n_y) / (4.0 * M_PI * r2 * r);
}

double double_layer_diagonal(double kappa_oriented) {
    return kappa_oriented / (4.0 * M_PI);
}

double hypersingular_kernel(int dim, Vec3 x, Vec3 y, Vec3 n_x, Vec3 n_y) {
    Vec3 diff = y - x;
    double r2 = norm2(diff);
    double a = dot(n_x, diff), b = dot(n_y, diff), c = dot(n_x, n_y);
    if (dim == 2) return (-c / r2 + 2.0 * a * b / (r2 * r2)) / (2.0 * M_PI);
    double r = std::sqrt(r2);
    return (-c / (r2 * r) + 3.0 * a * b / (r2 * r2 * r)) / (4.0 * M_PI);
}

double point_source_normal_derivative(int dim, Vec3 x, Vec3 z, Vec3 n_x) {
    Vec3 diff = x - z;
    double r2 = norm2(diff);
    if (dim == 2) return dot(n_x, diff) / (2.0 * M_PI * r2);
    double r = std::sqrt(r2);
    return dot(n_x, diff) / (4.0 * M_PI * r2 * r);
}

std::size_t BieProblem::system_size() const { return num_nodes() + num_holes(); }

namespace {

bool is_exterior(BieKind kind) { return kind != BieKind::interior; }

// Kernel block entry M_jk: double layer (with the exterior well-posedness
// correction) times the quadrature weight of node k. Pairs of nodes whose
// projections nearly coincide use the smooth diagonal limit when they sample
// the same interface piece, and are dropped otherwise (unresolved contact or
// the weakly singular 3D case).
struct EntryGen {
    const BieProblem& p;
    bool modified;
    double near2;  // (h/2)^2

    double operator()(std::size_t j, std::size_t k) const {
        Vec3 xj = p.node[j], yk = p.node[k];
        double r2 = norm2(yk - xj);
        double kernel;
        if (r2 < near2) {
            if (p.dim == 3) return 0.0;
            kernel = p.node_piece_equal(j, k) ? double_layer_diagonal(p.kappa[k]) : 0.0;
            return (kernel - (modified ? 1.0 : 0.0)) * p.weight[k];
        }
        kernel = double_layer_kernel(p.dim, xj, yk, p.normal[k]);
        if (modified)
            kernel -= p.dim == 2 ? 1.0 : 1.0 / std::sqrt(r2);
        return kernel * p.weight[k];
    }
};

}  // namespace

BieProblem make_component_problem(const DistanceBundle& bundle,
                                  const TopologyReport& topology, int label,
                                  const std::vector<double>& f_band,
                                  double u_inf) {
    const ComponentInfo& comp = topology.component(label);
    BieProblem prob;
    prob.dim = bundle.grid.dim;
    prob.h = bundle.grid.h;
    prob.component_label = label;
    prob.u_inf = u_inf;
    if (comp.bounded) {
        prob.kind = BieKind::interior;
        prob.lambda = 0.5;
    } else {
        prob.kind = prob.dim == 2 ? BieKind::exterior_bounded_2d
                                  : (u_inf != 0.0 ? BieKind::exterior_farfield_3d
                                                  : BieKind::exterior_decay_3d);
        prob.lambda = -0.5;
    }
    // normals oriented outward from the component; for the unbounded
    // component, outward from the islands (into the component)
    double sigma = (label < 0) ? -1.0 : 1.0;

    // hole pieces: pieces whose opposite component is contained in this one
    std::vector<int> hole_piece_ids;
    for (std::size_t q = 0; q < topology.pieces.size(); ++q) {
        const PieceInfo& piece = topology.pieces[q];
        if (piece.solid_label != label && piece.liquid_label != label) continue;
        int other = piece.solid_label == label ? piece.liquid_label : piece.solid_label;
        if (topology.component(other).parent == label)
            hole_piece_ids.push_back(static_cast<int>(q));
    }
    prob.piece_ids = hole_piece_ids;
    prob.piece_rows.assign(hole_piece_ids.size(), {});
    for (int pid : hole_piece_ids) {
        const PieceInfo& piece = topology.pieces[pid];
        int other = piece.solid_label == label ? piece.liquid_label : piece.solid_label;
        prob.anchors.push_back(bundle.grid.point(topology.component(other).anchor));
    }

    for (std::size_t p = 0; p < bundle.size(); ++p) {
        if (!bundle.usable[p]) continue;
        int piece = topology.band_piece[p];
        if (piece < 0) continue;
        const PieceInfo& info = topology.pieces[piece];
        if (info.solid_label != label && info.liquid_label != label) continue;
        int row = static_cast<int>(prob.node.size());
        prob.node.push_back(bundle.proj[p]);
        prob.normal.push_back(sigma * -1.0 * bundle.grad[p]);
        prob.weight.push_back(bundle.weight[p]);
        prob.kappa.push_back(sigma * bundle.kappa1[p]);
        prob.rhs.push_back(f_band[p]);
        prob.bundle_index.push_back(p);
        prob.node_grid.push_back(bundle.grid_index(p));
        prob.node_piece.push_back(piece);
        for (std::size_t c = 0; c < hole_piece_ids.size(); ++c)
            if (hole_piece_ids[c] == piece) prob.piece_rows[c].push_back(row);
    }
    if (prob.node.empty())
        throw SimError("component has no usable band points");

    // point sources must stay clear of the quadrature nodes
    for (const Vec3& z : prob.anchors)
        for (const Vec3& nd : prob.node)
            if (norm(nd - z) < 2.0 * prob.h)
                throw SimError("anchor singularity guard: hole too thin for a point source");
    return prob;
}

BieProblem make_component_problem(const DistanceBundle& bundle,
                                  const TopologyReport& topology, int label,
                                  const BoundaryData& f, double u_inf) {
    std::vector<double> fb(bundle.size(), 0.0);
    for (std::size_t p = 0; p < bundle.size(); ++p)
        if (bundle.usable[p]) fb[p] = f(bundle.proj[p]);
    return make_component_problem(bundle, topology, label, fb, u_inf);
}

BieSolution solve(const BieProblem& problem, const BieSolveOptions& opts,
                  const BieSolution* warm_start) {
    const std::size_t N = problem.num_nodes();
    const std::size_t L = problem.num_holes();
    const std::size_t size = N + L;
    const bool modified =
        is_exterior(problem.kind) && !opts.disable_exterior_modification;
    EntryGen entry{problem, modified, 0.25 * problem.h * problem.h};

    // constraint rows are normalized by the piece quadrature measure
    std::vector<double> piece_measure(L, 0.0);
    for (std::size_t c = 0; c < L; ++c) {
        for (int r : problem.piece_rows[c]) piece_measure[c] += problem.weight[r];
        if (piece_measure[c] <= 0.0) piece_measure[c] = 1.0;
    }
    // 2D exterior: zero mean on all hole pieces but the last, plus sum A = 0;
    // interior and 3D exterior: zero mean on every hole piece
    const bool sum_a_row = problem.kind == BieKind::exterior_bounded_2d;

    std::vector<double> rhs(size, 0.0);
    const double u_shift =
        problem.kind == BieKind::exterior_farfield_3d ? problem.u_inf : 0.0;
    for (std::size_t j = 0; j < N; ++j) rhs[j] = problem.rhs[j] - u_shift;

    auto body_row = [&](std::size_t j, const double* x) {
        double acc = problem.lambda * x[j];
        for (std::size_t k = 0; k < N; ++k) acc += entry(j, k) * x[k];
        for (std::size_t i = 0; i < L; ++i)
            acc += fundamental_solution(problem.dim,
                                        norm(problem.node[j] - problem.anchors[i])) *
                   x[N + i];
        return acc;
    };
    auto constraint_row = [&](std::size_t c, const double* x) {
        if (sum_a_row && c == L - 1) {
            double acc = 0.0;
            for (std::size_t i = 0; i < L; ++i) acc += x[N + i];
            return acc;
        }
        double acc = 0.0;
        for (int r : problem.piece_rows[c]) acc += problem.weight[r] * x[r];
        return acc / piece_measure[c];
    };

    BieSolution sol;
    sol.problem = problem;

    auto dense_direct = [&]() {
        if (size > opts.dense_direct_max)
            throw SolverError("solver failure: system too large for dense factorization",
                              sol.residual);
        Eigen::MatrixXd A(size, size);
#pragma omp parallel for schedule(static)
        for (long long j = 0; j < static_cast<long long>(N); ++j) {
            for (std::size_t k = 0; k < N; ++k) A(j, k) = entry(j, k);
            A(j, j) += problem.lambda;
            for (std::size_t i = 0; i < L; ++i)
                A(j, N + i) = fundamental_solution(
                    problem.dim, norm(problem.node[j] - problem.anchors[i]));
        }
        for (std::size_t c = 0; c < L; ++c) {
            std::size_t j = N + c;
            for (std::size_t k = 0; k < size; ++k) A(j, k) = 0.0;
            if (sum_a_row && c == L - 1) {
                for (std::size_t i = 0; i < L; ++i) A(j, N + i) = 1.0;
            } else {
                for (int r : problem.piece_rows[c])
                    A(j, r) = problem.weight[r] / piece_measure[c];
            }
        }
        Eigen::Map<const Eigen::VectorXd> b(rhs.data(), size);
        Eigen::VectorXd x = A.partialPivLu().solve(b);
        double rnorm = (A * x - b).norm();
        double bnorm = b.norm();
        sol.residual = bnorm > 0 ? rnorm / bnorm : rnorm;
        if (!(sol.residual < 1e-6))
            throw SolverError("solver failure: dense factorization residual too large",
                              sol.residual);
        sol.beta.assign(x.data(), x.data() + N);
        sol.constants.assign(x.data() + N, x.data() + size);
        return sol;
    };
    if (opts.force_dense_direct) return dense_direct();

    // restarted GMRES on the (stored or matrix-free) operator
    bool store = size <= opts.dense_store_max;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> M;
    if (store) {
        M.resize(N, N);
#pragma omp parallel for schedule(static)
        for (long long j = 0; j < static_cast<long long>(N); ++j)
            for (std::size_t k = 0; k < N; ++k) M(j, k) = entry(j, k);
    }
    auto apply = [&](const double* x, double* y) {
#pragma omp parallel for schedule(static)
        for (long long j = 0; j < static_cast<long long>(N); ++j) {
            double acc;
            if (store) {
                acc = problem.lambda * x[j];
                const double* row = M.data() + static_cast<std::size_t>(j) * N;
                for (std::size_t k = 0; k < N; ++k) acc += row[k] * x[k];
                for (std::size_t i = 0; i < L; ++i)
                    acc += fundamental_solution(
                               problem.dim,
                               norm(problem.node[j] - problem.anchors[i])) *
                           x[N + i];
            } else {
                acc = body_row(j, x);
            }
            y[j] = acc;
        }
        for (std::size_t c = 0; c < L; ++c) y[N + c] = constraint_row(c, x);
    };

    std::vector<double> x0;
    if (warm_start && !warm_start->beta.empty() &&
        warm_start->problem.node_grid.size() == warm_start->beta.size()) {
        std::map<std::size_t, double> prev;
        for (std::size_t k = 0; k < warm_start->beta.size(); ++k)
            prev[warm_start->problem.node_grid[k]] = warm_start->beta[k];
        x0.assign(size, 0.0);
        for (std::size_t k = 0; k < N; ++k) {
            auto it = prev.find(problem.node_grid[k]);
            if (it != prev.end()) x0[k] = it->second;
        }
        for (std::size_t i = 0;
             i < std::min(L, warm_start->constants.size()); ++i)
            x0[N + i] = warm_start->constants[i];
    }

    GmresResult res = gmres(apply, rhs, opts.tol, opts.restart, opts.max_iters,
                            x0.empty() ? nullptr : &x0);
    sol.iterations = res.iterations;
    sol.residual = res.residual;
    if (!res.converged) {
        if (size <= opts.dense_direct_max) return dense_direct();
        throw SolverError("solver failure: GMRES did not reach tolerance",
                          res.residual);
    }
    sol.beta.assign(res.x.begin(), res.x.begin() + N);
    sol.constants.assign(res.x.begin() + N, res.x.end());
    return sol;
}

double eval_potential(const BieSolution& sol, Vec3 x) {
    const BieProblem& p = sol.problem;
    const bool modified = is_exterior(p.kind);
    const double near2 = 0.25 * p.h * p.h;
    double acc = 0.0;
    for (std::size_t k = 0; k < p.num_nodes(); ++k) {
        double r2 = norm2(p.node[k] - x);
        double kernel;
        if (r2 < near2) {
            kernel = p.dim == 2 ? double_layer_diagonal(p.kappa[k]) : 0.0;
            if (modified && p.dim == 2) kernel -= 1.0;
        } else {
            kernel = double_layer_kernel(p.dim, x, p.node[k], p.normal[k]);
            if (modified) kernel -= p.dim == 2 ? 1.0 : 1.0 / std::sqrt(r2);
        }
        acc += sol.beta[k] * kernel * p.weight[k];
    }
    for (std::size_t i = 0; i < p.num_holes(); ++i)
        acc += sol.constants[i] *
               fundamental_solution(p.dim, norm(x - p.anchors[i]));
    if (p.kind == BieKind::exterior_farfield_3d) acc += p.u_inf;
    return acc;
}

double eval_normal_derivative(const BieSolution& sol, Vec3 x, Vec3 n) {
    const BieProblem& p = sol.problem;
    const bool modified = is_exterior(p.kind);
    const double guard2 = 0.25 * p.h * p.h;
    double acc = 0.0;
    for (std::size_t k = 0; k < p.num_nodes(); ++k) {
        Vec3 diff = x - p.node[k];
        double r2 = norm2(diff);
        if (r2 < guard2) throw SimError("too close to interface");
        double kernel = hypersingular_kernel(p.dim, x, p.node[k], n, p.normal[k]);
        if (modified && p.dim == 3) {
            // d/dn_x of -1/|x-y|
            double r = std::sqrt(r2);
            kernel += dot(n, diff) / (r2 * r);
        }
        acc += sol.beta[k] * kernel * p.weight[k];
    }
    for (std::size_t i = 0; i < p.num_holes(); ++i)
        acc += sol.constants[i] *
               point_source_normal_derivative(p.dim, x, p.anchors[i], n);
    return acc;
}

}  // namespace msibim
