#include "doctest.h"

#include <algorithm>
#include <map>
#include <queue>
#include <random>

#include "msibim/topology.hpp"
#include "test_helpers.hpp"

using namespace msibim;
using namespace msibim::testing;

namespace {

// independent oracle: BFS flood fill with face connectivity over sign regions
std::vector<int> flood_fill_labels(const ScalarField& d) {
    const Grid& g = d.grid;
    std::vector<int> lab(g.size(), 0);
    std::vector<bool> seen(g.size(), false);
    int next = 1;
    for (std::size_t start = 0; start < g.size(); ++start) {
        if (seen[start]) continue;
        int mine = next++;
        bool pos = d.values[start] > 0.0;
        std::queue<std::size_t> q;
        q.push(start);
        seen[start] = true;
        while (!q.empty()) {
            auto idx = q.front();
            q.pop();
            lab[idx] = mine;
            auto [i, j, k] = g.unflat(idx);
            const int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                   {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
            for (int a = 0; a < 2 * g.dim; ++a) {
                int ii = i + off[a][0], jj = j + off[a][1], kk = k + off[a][2];
                if (!g.in_bounds(ii, jj, kk)) continue;
                std::size_t n = g.flat(ii, jj, kk);
                if (seen[n] || (d.values[n] > 0.0) != pos) continue;
                seen[n] = true;
                q.push(n);
            }
        }
    }
    return lab;
}

// partitions agree up to renaming
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<int, int> a2b, b2a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto ia = a2b.find(a[i]);
        if (ia == a2b.end())
            a2b[a[i]] = b[i];
        else if (ia->second != b[i])
            return false;
        auto ib = b2a.find(b[i]);
        if (ib == b2a.end())
            b2a[b[i]] = a[i];
        else if (ib->second != a[i])
            return false;
    }
    return true;
}

ScalarField annulus_field(const Grid& g, double r_in, double r_out) {
    // solid ring: positive between the radii
    return fill(g, [=](Vec3 p) {
        double r = norm(p);
        return std::min(r_out - r, r - r_in);
    });
}

}  // namespace

TEST_CASE("single circle: two components, one piece") {
    double h = 4.0 / 64;
    Grid g = square_grid(2.0, h);
    ScalarField d = disk_sdf(g, {0, 0, 0}, 1.0);
    DistanceBundle b = build_bundle(d, 6 * h);
    TopologyReport rep = analyze_topology(d, b);

    REQUIRE(rep.components.size() == 2);
    CHECK(rep.components[0].label == 0);
    CHECK_FALSE(rep.components[0].bounded);
    CHECK(rep.component(1).solid);
    CHECK(rep.piece_count() == 1);
    CHECK(rep.pieces[0].solid_label == 1);
    CHECK(rep.pieces[0].liquid_label == 0);
}

TEST_CASE("annulus: ring with hole, two pieces, anchor at hole center") {
    double h = 4.0 / 96;
    Grid g = square_grid(2.0, h);
    ScalarField d0 = annulus_field(g, 0.5, 1.2);
    ScalarField d = redistance(d0);
    DistanceBundle b = build_bundle(d, 6 * h);
    TopologyReport rep = analyze_topology(d, b);

    REQUIRE(rep.components.size() == 3);
    CHECK(rep.component(1).solid);
    CHECK(rep.component(-1).bounded);
    CHECK_FALSE(rep.component(-1).solid);
    CHECK(rep.piece_count() == 2);
    CHECK(rep.piece_index(1, 0) >= 0);   // outer boundary
    CHECK(rep.piece_index(1, -1) >= 0);  // hole boundary

    // hole anchor: center of the core, |d| = inner radius up to h
    const ComponentInfo& core = rep.component(-1);
    Vec3 z = g.point(core.anchor);
    CHECK(norm(z) <= h * 1.5);
    CHECK(core.anchor_depth == doctest::Approx(0.5).epsilon(2 * h));

    // containment tree: 0 -> ring -> core
    CHECK(rep.component(1).parent == 0);
    CHECK(rep.component(-1).parent == 1);

    // piece classification of band points
    for (std::size_t p = 0; p < b.size(); ++p) {
        if (!b.usable[p]) continue;
        double r = norm(g.point(b.grid_index(p)));
        int piece = rep.band_piece[p];
        REQUIRE(piece >= 0);
        if (r > 0.85)
            CHECK(rep.pieces[piece].liquid_label == 0);
        else
            CHECK(rep.pieces[piece].liquid_label == -1);
    }
}

TEST_CASE("two disks: three components, two pieces, one anchor each") {
    double h = 4.0 / 96;
    Grid g = square_grid(2.0, h);
    ScalarField d0 = fill(g, [](Vec3 p) {
        double d1 = 0.5 - norm(p - Vec3{-0.9, 0, 0});
        double d2 = 0.6 - norm(p - Vec3{0.9, 0.1, 0});
        return std::max(d1, d2);
    });
    ScalarField d = redistance(d0);
    DistanceBundle b = build_bundle(d, 6 * h);
    TopologyReport rep = analyze_topology(d, b);

    REQUIRE(rep.components.size() == 3);
    CHECK(rep.piece_count() == 2);
    CHECK(same_partition(rep.labels, flood_fill_labels(d)));

    for (const auto& c : rep.components) {
        if (!c.bounded) continue;
        Vec3 z = g.point(c.anchor);
        Vec3 center = c.label == 1 ? Vec3{-0.9, 0, 0} : Vec3{0.9, 0.1, 0};
        CHECK(norm(z - center) <= 1.5 * h);
    }
}

TEST_CASE("labeling matches the flood-fill oracle on random multi-shape fields") {
    std::mt19937 rng(12345);
    for (int dim = 2; dim <= 3; ++dim) {
        int cases = dim == 2 ? 12 : 6;
        double h = dim == 2 ? 4.0 / 96 : 4.0 / 40;
        for (int t = 0; t < cases; ++t) {
            Grid g = dim == 2 ? square_grid(2.0, h) : cube_grid(2.0, h);
            std::uniform_real_distribution<double> cpos(-0.9, 0.9), rad(0.25, 0.7);
            std::uniform_int_distribution<int> nshapes(1, 4);
            int ns = nshapes(rng);
            std::vector<Vec3> centers(ns);
            std::vector<double> radii(ns);
            for (int s = 0; s < ns; ++s) {
                centers[s] = {cpos(rng), cpos(rng), dim == 3 ? cpos(rng) : 0.0};
                radii[s] = rad(rng);
            }
            ScalarField d = fill(g, [&](Vec3 p) {
                double best = -1e9;
                for (int s = 0; s < ns; ++s)
                    best = std::max(best, radii[s] - norm(p - centers[s]));
                return best;
            });
            TopologyReport rep = label_components(d);
            CHECK(same_partition(rep.labels, flood_fill_labels(d)));

            // exactly one unbounded label and it owns all corners
            for (int ci = 0; ci < 2; ++ci)
                for (int cj = 0; cj < 2; ++cj)
                    for (int ck = 0; ck < (dim == 3 ? 2 : 1); ++ck)
                        CHECK(rep.labels[g.flat(ci * (g.n[0] - 1), cj * (g.n[1] - 1),
                                                ck * (g.n[2] - 1))] == 0);
        }
    }
}

TEST_CASE("solid reaching the window boundary is rejected") {
    double h = 4.0 / 64;
    Grid g = square_grid(2.0, h);
    ScalarField d = fill(g, [](Vec3 p) { return 1.0 - std::abs(p.y); });
    CHECK_THROWS_WITH_AS(label_components(d), doctest::Contains("window too small"),
                         SimError);
}
