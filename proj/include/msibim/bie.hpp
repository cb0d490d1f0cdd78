#pragma once

#include <functional>
#include <string>
#include <vector>

#include "msibim/topology.hpp"

namespace msibim {

// --- free-space kernels ----------------------------------------------------
//
// Fundamental solution (Laplacian of Phi is the delta distribution):
//   2D  Phi(r) =  ln(r) / (2 pi)
//   3D  Phi(r) = -1 / (4 pi r)
// Double layer kernel dPhi/dn_y = ((y - x) . n_y) / (2 pi |x-y|^2)  (2D)
//                               = ((y - x) . n_y) / (4 pi |x-y|^3)  (3D)
// With n_y the outward normal, the Gauss identity for the double layer of a
// unit density is +1 inside, +1/2 on, 0 outside the enclosed region.

double fundamental_solution(int dim, double r);
double double_layer_kernel(int dim, Vec3 x, Vec3 y, Vec3 n_y);
// diagonal limit along a smooth curve (2D): kappa(y)/(4 pi), with kappa
// oriented positive when the curve bends away from n_y
double double_layer_diagonal(double kappa_oriented);
// d^2 Phi / dn_x dn_y
double hypersingular_kernel(int dim, Vec3 x, Vec3 y, Vec3 n_x, Vec3 n_y);
// gradient of Phi(x - z) dotted with n_x
double point_source_normal_derivative(int dim, Vec3 x, Vec3 z, Vec3 n_x);

enum class BieKind {
    interior,            // bounded component, lambda = +1/2
    exterior_bounded_2d, // unbounded 2D component, solution bounded at infinity
    exterior_decay_3d,   // unbounded 3D component, solution decays
    exterior_farfield_3d // unbounded 3D component, solution tends to u_inf
};

// Dense Dirichlet system for one connected component, discretized on the
// narrow-band tube quadrature. Unknowns: the density beta at the component's
// band points plus one constant per hole.
struct BieProblem {
    BieKind kind = BieKind::interior;
    int dim = 2;
    double h = 0.0;
    double lambda = 0.5;
    double u_inf = 0.0;
    int component_label = 0;

    // one entry per collocation/quadrature node (band points of the
    // component's interface pieces, both sides of the tube)
    std::vector<Vec3> node;          // closest points P(x_k) on the interface
    std::vector<Vec3> normal;        // problem-oriented normal at the node
    std::vector<double> weight;      // J * delta_eps * h^m
    std::vector<double> kappa;       // oriented curvature sum at the node
    std::vector<double> rhs;         // boundary data f(P(x_k))
    std::vector<std::size_t> bundle_index;  // node -> band position
    std::vector<std::size_t> node_grid;     // node -> grid index (warm starts)
    std::vector<int> node_piece;     // report piece index per node

    bool node_piece_equal(std::size_t j, std::size_t k) const {
        return node_piece[j] == node_piece[k];
    }

    // holes: anchor points z_i and the rows of each hole piece
    std::vector<Vec3> anchors;
    std::vector<std::vector<int>> piece_rows;  // per hole piece
    std::vector<int> piece_ids;                // report piece indices (hole pieces)

    std::size_t num_nodes() const { return node.size(); }
    std::size_t num_holes() const { return anchors.size(); }
    std::size_t system_size() const;
};

struct BieSolveOptions {
    double tol = 1e-8;
    int restart = 80;
    int max_iters = 400;
    std::size_t dense_direct_max = 4000;   // LU fallback allowed below this size
    std::size_t dense_store_max = 8000;    // precompute the matrix below this
    bool force_dense_direct = false;       // skip Krylov (cross-checks)
    bool disable_exterior_modification = false;  // regression testing only
};

struct BieSolution {
    BieProblem problem;          // geometry kept for evaluation
    std::vector<double> beta;    // density at the nodes
    std::vector<double> constants;  // one per hole
    double residual = 0.0;
    int iterations = 0;
};

// Boundary values f(P) for the Laplace problem of one component.
using BoundaryData = std::function<double(Vec3)>;

// Builds the problem for `label` from the topology report: selects the band
// points of every piece bounding the component, orients normals outward from
// the component (for the unbounded component: outward from the islands),
// attaches hole anchors and constraint groups. Boundary data is given either
// per band point or as a function of the closest point.
BieProblem make_component_problem(const DistanceBundle& bundle,
                                  const TopologyReport& topology, int label,
                                  const std::vector<double>& f_band,
                                  double u_inf = 0.0);
BieProblem make_component_problem(const DistanceBundle& bundle,
                                  const TopologyReport& topology, int label,
                                  const BoundaryData& f, double u_inf = 0.0);

// Solves the second-kind system. Dense factorization for small systems,
// restarted GMRES on the (possibly matrix-free) operator otherwise.
// A previous solution of the same component warm-starts the iteration
// (matched through the grid indices of the nodes).
// Throws SolverError on non-convergence.
BieSolution solve(const BieProblem& problem, const BieSolveOptions& opts = {},
                  const BieSolution* warm_start = nullptr);

// Double layer reconstruction at x (plus hole sources, the exterior kernel
// correction and the far-field constant where applicable). Intended for
// points at least ~2h away from the interface.
double eval_potential(const BieSolution& sol, Vec3 x);

// Directional derivative of the reconstruction along n at x.
// Throws SimError("too close to interface") when x is within h/2 of the
// interface sample points.
double eval_normal_derivative(const BieSolution& sol, Vec3 x, Vec3 n);

}  // namespace msibim
