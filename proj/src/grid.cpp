#include "msibim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace msibim {

Grid::Grid(int dim_, std::array<int, 3> extents, Vec3 origin_, double spacing)
    : dim(dim_), n(extents), origin(origin_), h(spacing) {
    if (dim != 2 && dim != 3)
        throw std::invalid_argument("Grid: dim must be 2 or 3");
    if (!(h > 0.0))
        throw std::invalid_argument("Grid: spacing must be positive");
    if (dim == 2) n[2] = 1;
    for (int a = 0; a < dim; ++a)
        if (n[a] < 8)
            throw std::invalid_argument("Grid: need at least 8 points per axis");
    if (dim == 3 && n[2] < 8)
        throw std::invalid_argument("Grid: need at least 8 points per axis");
}

Grid Grid::covering(int dim, Vec3 lo, Vec3 hi, double spacing) {
    std::array<int, 3> ext = {1, 1, 1};
    for (int a = 0; a < dim; ++a) {
        double span = hi[a] - lo[a];
        ext[a] = static_cast<int>(std::lround(span / spacing)) + 1;
    }
    return Grid(dim, ext, lo, spacing);
}

int Grid::margin_cells(int i, int j, int k) const {
    int m = std::min(i, n[0] - 1 - i);
    m = std::min(m, std::min(j, n[1] - 1 - j));
    if (dim == 3) m = std::min(m, std::min(k, n[2] - 1 - k));
    return m;
}

bool ScalarField::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

NarrowBand build_band(const ScalarField& field, double eps) {
    const Grid& g = field.grid;
    if (!(eps >= 2.0 * g.h))
        throw std::invalid_argument("build_band: eps must be at least 2h");

    NarrowBand band;
    band.eps = eps;
    band.indices.reserve(1024);
    bool touches_edge = false;
    // Raster scan yields the lexicographically sorted index order.
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k) {
                std::size_t idx = g.flat(i, j, k);
                if (std::abs(field.values[idx]) < eps) {
                    if (g.margin_cells(i, j, k) < kWindowMargin) touches_edge = true;
                    band.indices.push_back(idx);
                }
            }
    if (band.indices.empty())
        throw SimError("interface vanished");
    if (touches_edge)
        throw SimError("window too small: narrow band reaches the grid boundary");
    return band;
}

void write_snapshot(const std::string& path, const ScalarField& field,
                    const std::string& field_name, double time,
                    const std::map<std::string, std::string>& meta) {
    std::ofstream out(path);
    if (!out) throw SimError("cannot open snapshot file for writing: " + path);
    const Grid& g = field.grid;
    char buf[64];
    out << "msibim-grid 1\n";
    out << "dim " << g.dim << "\n";
    out << "extents " << g.n[0] << " " << g.n[1];
    if (g.dim == 3) out << " " << g.n[2];
    out << "\n";
    std::snprintf(buf, sizeof buf, "%.17g %.17g", g.origin.x, g.origin.y);
    out << "origin " << buf;
    if (g.dim == 3) {
        std::snprintf(buf, sizeof buf, " %.17g", g.origin.z);
        out << buf;
    }
    out << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", g.h);
    out << "spacing " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", time);
    out << "time " << buf << "\n";
    for (const auto& [k, v] : meta) out << "meta " << k << " " << v << "\n";
    out << "field " << field_name << "\n";
    out << "values ascii\n";
    for (double v : field.values) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf << "\n";
    }
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open snapshot file: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "msibim-grid" || version != 1)
        throw SimError("unrecognized snapshot header in " + path);

    Snapshot snap;
    int dim = 0;
    std::array<int, 3> ext = {0, 0, 1};
    Vec3 origin;
    double spacing = 0.0;
    std::string key;
    while (in >> key) {
        if (key == "dim") {
            in >> dim;
        } else if (key == "extents") {
            in >> ext[0] >> ext[1];
            if (dim == 3) in >> ext[2];
        } else if (key == "origin") {
            in >> origin.x >> origin.y;
            if (dim == 3) in >> origin.z;
        } else if (key == "spacing") {
            in >> spacing;
        } else if (key == "time") {
            in >> snap.time;
        } else if (key == "meta") {
            std::string mk, mv;
            in >> mk >> mv;
            snap.meta[mk] = mv;
        } else if (key == "field") {
            in >> snap.field_name;
        } else if (key == "values") {
            std::string mode;
            in >> mode;
            if (mode != "ascii") throw SimError("unsupported snapshot value mode");
            break;
        } else {
            throw SimError("unknown snapshot key: " + key);
        }
    }
    Grid g(dim, ext, origin, spacing);
    snap.field = ScalarField(g);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!(in >> snap.field.values[i]))
            throw SimError("snapshot truncated: " + path);
    return snap;
}

}  // namespace msibim
