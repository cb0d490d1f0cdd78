#pragma once

#include <cstdint>
#include <vector>

#include "msibim/levelset.hpp"

namespace msibim {

// One sign-connected region of the grid. Label 0 is the unbounded liquid
// component; solid components (d > 0) get positive labels, bounded liquid
// components negative labels.
struct ComponentInfo {
    int label = 0;
    bool solid = false;
    bool bounded = true;
    std::size_t cells = 0;
    std::size_t anchor = 0;      // grid index of the max-|d| point
    double anchor_depth = 0.0;   // |d| at the anchor
    bool thin = false;           // no interior point deeper than h
    int parent = 0;              // containing component (tree rooted at 0)
};

// One closed interface piece, identified by the solid/liquid components it
// separates.
struct PieceInfo {
    int solid_label = 0;
    int liquid_label = 0;   // 0 or negative
    std::size_t band_points = 0;
};

struct TopologyReport {
    std::vector<int> labels;                // per grid point
    std::vector<ComponentInfo> components;  // [0] is the unbounded component
    std::vector<PieceInfo> pieces;
    std::vector<int> band_piece;            // per band point, index into pieces
                                            // (-1 where unusable)

    const ComponentInfo& component(int label) const;
    int piece_index(int solid_label, int liquid_label) const;
    std::size_t piece_count() const { return pieces.size(); }
};

// Two-pass connected component labeling of the sign regions of d with
// face (2m) connectivity. The component containing the window boundary is
// labeled 0; exactly one component may touch the window.
TopologyReport label_components(const ScalarField& d);

// Chooses per-component anchors: the grid point maximizing |d|, ties broken
// by the raster order. Marks holes narrower than 2h as thin.
void select_anchors(TopologyReport& report, const ScalarField& d);

// Assigns each usable band point the interface piece separating its own
// component from the opposite-sign component at its closest point, and
// derives the component containment tree from the piece adjacencies.
// A band point whose projection cell has no opposite-sign vertex (even after
// widening the search to the 3^m neighborhood) occurs at pinch-offs: with
// ReachPolicy::Throw this raises SimError("ambiguous projection"), with
// ReachPolicy::Drop the point is excluded from the quadrature.
void assign_boundary_pieces(TopologyReport& report, DistanceBundle& bundle,
                            ReachPolicy policy = ReachPolicy::Throw);

// label_components + select_anchors + assign_boundary_pieces.
TopologyReport analyze_topology(const ScalarField& d, DistanceBundle& bundle,
                                ReachPolicy policy = ReachPolicy::Throw);

}  // namespace msibim
