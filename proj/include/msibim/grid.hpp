#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msibim/errors.hpp"
#include "msibim/geom.hpp"

namespace msibim {

// Uniform isotropic Cartesian grid over a rectangular window. The window is a
// numerical viewport into an unbounded physical domain; the interface and its
// tubular band must stay away from the window edges.
struct Grid {
    int dim = 2;                       // 2 or 3
    std::array<int, 3> n = {0, 0, 1};  // points per axis, n[2] == 1 in 2D
    Vec3 origin;                       // coordinates of grid point (0,0,0)
    double h = 0.0;                    // isotropic spacing

    Grid() = default;
    Grid(int dim_, std::array<int, 3> extents, Vec3 origin_, double spacing);

    // Grid covering the box [lo, lo + span] with the requested spacing.
    static Grid covering(int dim, Vec3 lo, Vec3 hi, double spacing);

    std::size_t size() const {
        return static_cast<std::size_t>(n[0]) * n[1] * n[2];
    }
    std::size_t flat(int i, int j, int k = 0) const {
        return (static_cast<std::size_t>(i) * n[1] + j) * n[2] + k;
    }
    std::array<int, 3> unflat(std::size_t idx) const {
        int k = static_cast<int>(idx % n[2]);
        std::size_t r = idx / n[2];
        int j = static_cast<int>(r % n[1]);
        int i = static_cast<int>(r / n[1]);
        return {i, j, k};
    }
    Vec3 point(int i, int j, int k = 0) const {
        return {origin.x + i * h, origin.y + j * h, origin.z + k * h};
    }
    Vec3 point(std::size_t idx) const {
        auto ijk = unflat(idx);
        return point(ijk[0], ijk[1], ijk[2]);
    }
    bool in_bounds(int i, int j, int k) const {
        return i >= 0 && i < n[0] && j >= 0 && j < n[1] && k >= 0 && k < n[2];
    }
    // Distance (in cells) from the window edge; used to keep stencils valid.
    int margin_cells(int i, int j, int k) const;

    bool same_layout(const Grid& o) const {
        return dim == o.dim && n == o.n && h == o.h &&
               origin.x == o.origin.x && origin.y == o.origin.y && origin.z == o.origin.z;
    }
};

// One real value per grid point, row-major with the last axis fastest.
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), values(g.size(), fill) {}

    double& operator[](std::size_t idx) { return values[idx]; }
    double operator[](std::size_t idx) const { return values[idx]; }
    double& at(int i, int j, int k = 0) { return values[grid.flat(i, j, k)]; }
    double at(int i, int j, int k = 0) const { return values[grid.flat(i, j, k)]; }

    bool all_finite() const;
};

// Sorted, duplicate-free list of grid indices with |d| < eps. The raster-scan
// build order makes downstream system assembly deterministic.
struct NarrowBand {
    double eps = 0.0;
    std::vector<std::size_t> indices;

    std::size_t size() const { return indices.size(); }
};

// Collects exactly the grid points with |field| < eps.
// Throws SimError("interface vanished") when the band is empty and
// SimError("window too small") when the band reaches the stencil margin of
// the grid window.
NarrowBand build_band(const ScalarField& field, double eps);

// Number of cells the band must keep clear of the window edge (WENO stencils
// plus closest-point lookups).
inline constexpr int kWindowMargin = 3;

// --- Grid snapshot files -------------------------------------------------
//
// Text format, stable across versions:
//   msibim-grid 1
//   dim <2|3>
//   extents <nx> <ny> [nz]
//   origin <x> <y> [z]
//   spacing <h>
//   time <t>
//   meta <key> <value>      (zero or more)
//   field <name>
//   values ascii
//   <one value per line, row-major, last axis fastest, %.17g>
void write_snapshot(const std::string& path, const ScalarField& field,
                    const std::string& field_name, double time,
                    const std::map<std::string, std::string>& meta = {});

struct Snapshot {
    ScalarField field;
    std::string field_name;
    double time = 0.0;
    std::map<std::string, std::string> meta;
};
Snapshot read_snapshot(const std::string& path);

}  // namespace msibim
