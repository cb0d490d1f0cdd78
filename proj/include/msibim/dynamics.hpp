#pragma once

#include <functional>
#include <map>
#include <optional>

#include "msibim/bie.hpp"
#include "msibim/diagnostics.hpp"

namespace msibim {

// Normal velocity on the band. Positive values move the interface into the
// solid phase under phi_t + v |grad phi| = 0 with the inside-positive sign
// convention (a melting sphere has v > 0).
struct VelocityField {
    ScalarField values;  // zero outside the band
    double clamp = 0.0;
    double max_abs = 0.0;
};

enum class ClampMode {
    symmetric,      // v <- sign(v) min(|v|, v_clamp)
    literal_floor,  // v <- max(v, -v_clamp): one-sided floor
};

struct DynamicsConfig {
    double eps_over_h = 6.0;
    double cfl = 0.5;
    double v_clamp = 10.0;
    ClampMode clamp_mode = ClampMode::symmetric;
    double u_inf = 0.0;       // 3D far-field temperature
    double max_dt = 1e9;
    double inner_lo = 0.5;    // inner mirror layer: inner_lo*h <= |d| <= inner_hi*h
    double inner_hi = 3.0;
    // Stiffness cap dt <= stiff_factor * h^3. The curvature boundary data
    // makes the flow third order: a surface mode k feeds back into the
    // velocity as ~ 2 k^3 exp(-2 k h) per unit time, so explicit stepping is
    // stable only for dt of order h^3 (the velocity CFL alone lets grid-scale
    // ripples grow by ~10x per step).
    double stiff_factor = 6.0;
    BieSolveOptions solver;
    RedistanceOptions redistance;
};

// Normal-derivative oracle: component label, evaluation point, direction.
// Production wraps the per-component boundary integral solutions; tests can
// substitute analytic two-sided fields.
using FluxEvaluator = std::function<double(int label, Vec3 x, Vec3 n)>;

struct JumpStats {
    std::size_t evaluated = 0;
    std::size_t one_sided = 0;  // mirror landed in a same-sign component
};

// Flux-jump velocity on the inner band layer via the mirror construction:
//   v(x) = sign(d) * ( du/dn(mirror) - du/dn(x) ),   mirror = x - 2 d grad d,
// each side evaluated with the solution of the component containing it and
// the shared normal direction n = -grad d. Realizes v = -[du/dn].
// Pairs closer to the interface than 2h are slid outward along their normal
// line before evaluation: the flux quadrature cannot resolve the kernel peak
// below that distance, and the jump is constant along normals.
VelocityField jump_velocity_near_band(const DistanceBundle& bundle,
                                      const TopologyReport& topology,
                                      const FluxEvaluator& flux,
                                      const DynamicsConfig& cfg, JumpStats* stats = nullptr);

// Extends the inner-layer velocity to the whole band along normal lines
// (steady state of the one-sided transport equation), then clamps.
void extend_velocity(VelocityField& v, const DistanceBundle& bundle,
                     const DynamicsConfig& cfg);

// One TVD-RK3 step of phi_t + v |grad phi| = 0 with Godunov/WENO3 fluxes,
// updated on the band only. Requires dt <= cfl * h / max|v|.
ScalarField advect(const ScalarField& phi, const VelocityField& v, double dt,
                   const NarrowBand& band, double cfl = 0.5);

struct StepReport {
    double dt = 0.0;
    double t = 0.0;
    int components = 0;
    int pieces = 0;
    double v_min = 0.0, v_max = 0.0;
    double max_residual = 0.0;
    int max_iterations = 0;
    std::size_t dropped_band_points = 0;
    std::size_t one_sided_mirrors = 0;
};

struct SimState {
    ScalarField d;    // signed distance, inside-positive
    double t = 0.0;
    int step_index = 0;
    TimeSeries series;

    // caches carried between steps (geometry of the current d, and the last
    // densities for warm-starting the solver); safe to discard at any time
    std::optional<DistanceBundle> bundle_cache;
    std::optional<TopologyReport> topology_cache;
    std::map<int, BieSolution> last_solutions;
};

// One full cycle: topology -> per-component Dirichlet solves with f = -kappa
// -> mirror jump velocity -> extension and clamp -> advection -> redistance
// -> diagnostics. Throws SimError("interface vanished") when the solid phase
// disappears; the caller treats that as normal termination.
StepReport step(SimState& state, const DynamicsConfig& cfg);

}  // namespace msibim
