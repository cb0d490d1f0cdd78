#pragma once

#include <cstdint>
#include <vector>

#include "msibim/grid.hpp"

namespace msibim {

// Eikonal residual allowed on the band (first-order sweeping dominates).
inline constexpr double kTolEikonal = 5e-2;

struct RedistanceOptions {
    // High-order polish iterations after the sweep (Godunov/WENO3 pseudo-time
    // relaxation with the cut cells held fixed). Information travels one cell
    // per four iterations; the default covers a band of ~7h.
    int polish_iters = 30;
    // Restrict sweeping/polish output validity checks to |d| < check_width*h.
    double sweep_tol = 1e-13;
    int max_sweep_cycles = 12;
};

// Replaces phi by the signed distance to its zero level set. The sign layout
// of phi is preserved; cells cut by the interface are initialized from the
// axis zero crossings and held fixed, so the zero set moves by O(h^2) at most.
// Throws SimError("interface vanished") when phi has no sign change.
ScalarField redistance(const ScalarField& phi, const RedistanceOptions& opts = {});

enum class ReachPolicy {
    Throw,  // raise SimError("band exceeds reach")
    Drop,   // mark the point unusable (weight 0); counts reported
};

// Signed distance plus the per-band-point geometry: unit gradient, closest
// point on the interface, principal curvature(s) transported to the closest
// point, and the surface-measure weights of the tube quadrature.
//
// Sign conventions (solid phase has d > 0):
//   outward normal        n+ = -grad d
//   curvature             kappa > 0 for a convex solid (unit circle: +1)
//   transport to surface  kappa* = kappa(x) / (1 + d kappa(x))
//   level-set Jacobian    J = prod_i 1 / (1 - d kappa_i*)  (== 1 on the surface)
//
// J is the change-of-variables factor of the closest-point map restricted to
// the level set through x: with it, the tube quadrature sum J * delta * h^m
// reproduces |Gamma| exactly in the continuum for any unit-mass kernel.
// (The ratio of level-set measures is 1 - d kappa*; the quadrature needs its
// reciprocal, which the circle oracle in the tests pins down.)
struct DistanceBundle {
    Grid grid;
    NarrowBand band;
    std::vector<double> d;        // signed distance at band points
    std::vector<Vec3> grad;       // normalized grad d
    std::vector<Vec3> proj;       // closest point P(x) = x - d * grad
    std::vector<double> kappa1;   // transported curvature (2D: the curvature)
    std::vector<double> kappa2;   // second principal curvature (3D), 0 in 2D
    std::vector<double> jacobian; // J(x; d)
    std::vector<double> delta;    // averaging kernel value at d(x)
    std::vector<double> weight;   // J * delta * h^m
    std::vector<std::uint8_t> usable; // 0 where the reach guard dropped the point

    std::size_t size() const { return band.size(); }
    std::size_t grid_index(std::size_t b) const { return band.indices[b]; }
    double mean_curvature_sum(std::size_t b) const { return kappa1[b] + kappa2[b]; }

    double max_eikonal_residual = 0.0; // max | |grad d| - 1 | over the band
    std::size_t dropped = 0;           // points excluded by ReachPolicy::Drop
};

// Builds grad, proj and transported curvatures for each band point.
// Second-order central differences; curvatures from the Hessian of d
// restricted to the tangent plane, then moved along the normal line.
DistanceBundle closest_point_map(const ScalarField& d, const NarrowBand& band,
                                 ReachPolicy policy = ReachPolicy::Throw);

// Cosine averaging kernel, unit mass, supported in [-eps, eps].
double averaging_kernel(double t, double eps);

// Tensor-quadratic interpolation of a grid field; also returns the gradient
// of the interpolant. The point must stay one cell away from the window edge.
struct InterpValue {
    double value;
    Vec3 gradient;
};
InterpValue interp_quadratic(const ScalarField& f, Vec3 p);

// Fills jacobian/delta/weight. Throws (or drops) when J <= 0: the band is
// wider than the local reach of the closest-point map.
void jacobian_and_kernel_weights(DistanceBundle& bundle, double eps,
                                 ReachPolicy policy = ReachPolicy::Throw);

// Convenience: redistanced field -> band -> bundle with weights.
DistanceBundle build_bundle(const ScalarField& d, double eps,
                            ReachPolicy policy = ReachPolicy::Throw);

}  // namespace msibim
