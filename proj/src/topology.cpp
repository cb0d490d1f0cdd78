#include "msibim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace msibim {

namespace {

struct UnionFind {
    std::vector<int> parent;

    int make() {
        parent.push_back(static_cast<int>(parent.size()));
        return parent.back();
    }
    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    // root of the merged class is the smaller id (the earlier label)
    int merge(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (b < a) std::swap(a, b);
        parent[b] = a;
        return a;
    }
};

}  // namespace

const ComponentInfo& TopologyReport::component(int label) const {
    for (const auto& c : components)
        if (c.label == label) return c;
    throw SimError("unknown component label");
}

int TopologyReport::piece_index(int solid_label, int liquid_label) const {
    for (std::size_t i = 0; i < pieces.size(); ++i)
        if (pieces[i].solid_label == solid_label &&
            pieces[i].liquid_label == liquid_label)
            return static_cast<int>(i);
    return -1;
}

TopologyReport label_components(const ScalarField& d) {
    const Grid& g = d.grid;
    const std::size_t total = g.size();

    TopologyReport rep;
    std::vector<int> provisional(total);
    UnionFind uf;
    std::vector<bool> positive_class;

    // first pass: raster scan, union with the already-visited face neighbors
    // of the same sign (previous point along each axis)
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k) {
                std::size_t idx = g.flat(i, j, k);
                bool pos = d.values[idx] > 0.0;
                int lab = -1;
                const int off[3][3] = {{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}};
                for (int a = 0; a < g.dim; ++a) {
                    int ii = i + off[a][0], jj = j + off[a][1], kk = k + off[a][2];
                    if (ii < 0 || jj < 0 || kk < 0) continue;
                    std::size_t nidx = g.flat(ii, jj, kk);
                    if ((d.values[nidx] > 0.0) != pos) continue;
                    int nlab = uf.find(provisional[nidx]);
                    lab = lab < 0 ? nlab : uf.merge(lab, nlab);
                }
                if (lab < 0) {
                    lab = uf.make();
                    positive_class.push_back(pos);
                }
                provisional[idx] = lab;
            }

    // second pass: flatten to roots, renumber canonically. The unbounded
    // component is the class of the window boundary; verify the whole window
    // frame is one class.
    int boundary_root = uf.find(provisional[0]);
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k) {
                if (g.margin_cells(i, j, k) > 0) continue;
                std::size_t idx = g.flat(i, j, k);
                if (uf.find(provisional[idx]) != boundary_root)
                    throw SimError(
                        "window too small: multiple components touch the grid boundary");
            }
    if (positive_class[boundary_root])
        throw SimError("window too small: solid phase touches the grid boundary");

    std::map<int, int> final_label;  // root -> canonical label
    final_label[boundary_root] = 0;
    rep.components.push_back(ComponentInfo{0, false, false, 0, 0, 0.0, false, 0});
    int next_pos = 1, next_neg = -1;

    rep.labels.resize(total);
    std::map<int, std::size_t> slot_of = {{0, 0}};
    for (std::size_t idx = 0; idx < total; ++idx) {
        int root = uf.find(provisional[idx]);
        auto it = final_label.find(root);
        if (it == final_label.end()) {
            int lab = positive_class[root] ? next_pos++ : next_neg--;
            it = final_label.emplace(root, lab).first;
            ComponentInfo info;
            info.label = lab;
            info.solid = positive_class[root];
            info.bounded = true;
            slot_of[lab] = rep.components.size();
            rep.components.push_back(info);
        }
        rep.labels[idx] = it->second;
        ++rep.components[slot_of[it->second]].cells;
    }
    return rep;
}

void select_anchors(TopologyReport& report, const ScalarField& d) {
    const Grid& g = d.grid;
    std::map<int, std::size_t> slot_of;
    std::vector<double> best(report.components.size(), -1.0);
    for (std::size_t s = 0; s < report.components.size(); ++s)
        slot_of[report.components[s].label] = s;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        std::size_t s = slot_of[report.labels[idx]];
        ComponentInfo& comp = report.components[s];
        if (!comp.bounded) continue;
        double a = std::abs(d.values[idx]);
        if (a > best[s]) {  // strict: the first (raster-lowest) index wins ties
            best[s] = a;
            comp.anchor = idx;
            comp.anchor_depth = a;
        }
    }
    for (auto& comp : report.components)
        if (comp.bounded) comp.thin = comp.anchor_depth <= g.h;
}

void assign_boundary_pieces(TopologyReport& report, DistanceBundle& bundle,
                            ReachPolicy policy) {
    const Grid& g = bundle.grid;
    report.band_piece.assign(bundle.size(), -1);
    std::map<std::pair<int, int>, int> piece_of;  // (solid, liquid) -> index

    for (std::size_t p = 0; p < bundle.size(); ++p) {
        if (!bundle.usable[p]) continue;
        int own = report.labels[bundle.grid_index(p)];
        bool own_pos = own > 0;

        // scan the cell vertices at the projection for the opposite sign,
        // then widen to the 3^m neighborhood
        Vec3 pr = bundle.proj[p];
        int ci = static_cast<int>(std::floor((pr.x - g.origin.x) / g.h));
        int cj = static_cast<int>(std::floor((pr.y - g.origin.y) / g.h));
        int ck = g.dim == 3
                     ? static_cast<int>(std::floor((pr.z - g.origin.z) / g.h))
                     : 0;
        int opp = 0;
        bool found = false;
        for (int pass = 0; pass < 2 && !found; ++pass) {
            int lo = pass == 0 ? 0 : -1;
            int hi = pass == 0 ? 1 : 2;
            int klo = g.dim == 3 ? lo : 0, khi = g.dim == 3 ? hi : 0;
            for (int di = lo; di <= hi && !found; ++di)
                for (int dj = lo; dj <= hi && !found; ++dj)
                    for (int dk = klo; dk <= khi && !found; ++dk) {
                        int ii = ci + di, jj = cj + dj, kk = ck + dk;
                        if (!g.in_bounds(ii, jj, kk)) continue;
                        int lab = report.labels[g.flat(ii, jj, kk)];
                        if ((lab > 0) != own_pos) {
                            opp = lab;
                            found = true;
                        }
                    }
        }
        if (!found) {
            if (policy == ReachPolicy::Throw) throw SimError("ambiguous projection");
            bundle.usable[p] = 0;  // pinch-off: drop the point
            bundle.weight[p] = 0.0;
            ++bundle.dropped;
            continue;
        }

        std::pair<int, int> key = own_pos ? std::make_pair(own, opp)
                                          : std::make_pair(opp, own);
        auto it = piece_of.find(key);
        if (it == piece_of.end()) {
            PieceInfo info;
            info.solid_label = key.first;
            info.liquid_label = key.second;
            report.pieces.push_back(info);
            it = piece_of.emplace(key, static_cast<int>(report.pieces.size() - 1)).first;
        }
        ++report.pieces[it->second].band_points;
        report.band_piece[p] = it->second;
    }

    // containment tree: components and pieces form a tree rooted at the
    // unbounded component (each closed interface separates the space)
    std::size_t ncomp = report.components.size();
    if (report.pieces.size() + 1 < ncomp)
        throw SimError("ambiguous projection: interface pieces missing for some components");

    std::vector<int> order;           // BFS from label 0 over piece adjacency
    std::vector<int> seen;
    order.push_back(0);
    seen.push_back(0);
    for (std::size_t q = 0; q < order.size(); ++q) {
        int cur = order[q];
        for (const auto& piece : report.pieces) {
            int other;
            if (piece.solid_label == cur)
                other = piece.liquid_label;
            else if (piece.liquid_label == cur)
                other = piece.solid_label;
            else
                continue;
            if (std::find(seen.begin(), seen.end(), other) != seen.end()) continue;
            seen.push_back(other);
            order.push_back(other);
            for (auto& c : report.components)
                if (c.label == other) c.parent = cur;
        }
    }
    if (seen.size() != ncomp)
        throw SimError("ambiguous projection: component adjacency is not connected");
}

TopologyReport analyze_topology(const ScalarField& d, DistanceBundle& bundle,
                                ReachPolicy policy) {
    TopologyReport rep = label_components(d);
    select_anchors(rep, d);
    assign_boundary_pieces(rep, bundle, policy);
    return rep;
}

}  // namespace msibim
