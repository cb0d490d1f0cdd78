#include "msibim/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace msibim {

DynamicsConfig RunConfig::dynamics() const {
    DynamicsConfig d;
    d.eps_over_h = eps_over_h;
    d.cfl = cfl;
    d.v_clamp = v_clamp;
    d.clamp_mode = clamp_mode;
    d.u_inf = u_inf;
    d.max_dt = max_dt;
    return d;
}

Grid RunConfig::make_grid() const {
    Vec3 lo{box_lo, box_lo, dim == 3 ? box_lo : 0.0};
    Vec3 hi{box_hi, box_hi, dim == 3 ? box_hi : 0.0};
    return Grid::covering(dim, lo, hi, h);
}

std::string RunConfig::canonical_text() const {
    std::ostringstream out;
    char buf[256];
    auto num = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, v);
        out << buf;
    };
    out << "dim = " << dim << "\n";
    num("box_lo", box_lo);
    num("box_hi", box_hi);
    num("h", h);
    num("eps_over_h", eps_over_h);
    num("cfl", cfl);
    num("v_clamp", v_clamp);
    out << "clamp_mode = "
        << (clamp_mode == ClampMode::symmetric ? "symmetric" : "floor") << "\n";
    num("u_inf", u_inf);
    num("final_time", final_time);
    num("max_dt", max_dt);
    out << "max_steps = " << max_steps << "\n";
    out << "stop_after_merge_steps = " << stop_after_merge_steps << "\n";
    out << "snapshot_every = " << snapshot_every << "\n";
    out << "dump_labels = " << (dump_labels ? "true" : "false") << "\n";
    out << "seed = " << seed << "\n";
    for (const auto& s : shapes) {
        switch (s.kind) {
            case ShapeSpec::Kind::circle:
                std::snprintf(buf, sizeof buf, "shape = circle %.17g %.17g %.17g\n",
                              s.center.x, s.center.y, s.radii.x);
                break;
            case ShapeSpec::Kind::ellipse:
                std::snprintf(buf, sizeof buf,
                              "shape = ellipse %.17g %.17g %.17g %.17g\n",
                              s.center.x, s.center.y, s.radii.x, s.radii.y);
                break;
            case ShapeSpec::Kind::sphere:
                std::snprintf(buf, sizeof buf,
                              "shape = sphere %.17g %.17g %.17g %.17g\n",
                              s.center.x, s.center.y, s.center.z, s.radii.x);
                break;
            case ShapeSpec::Kind::ellipsoid:
                std::snprintf(buf, sizeof buf,
                              "shape = ellipsoid %.17g %.17g %.17g %.17g %.17g %.17g\n",
                              s.center.x, s.center.y, s.center.z, s.radii.x,
                              s.radii.y, s.radii.z);
                break;
            case ShapeSpec::Kind::tube:
                std::snprintf(buf, sizeof buf,
                              "shape = tube %.17g %.17g %.17g %.17g\n", s.center.x,
                              s.center.y, s.extra, s.radii.x);
                break;
            case ShapeSpec::Kind::perturbed_sphere:
                std::snprintf(buf, sizeof buf,
                              "shape = perturbed_sphere %.17g %.17g %.17g %.17g %.17g\n",
                              s.center.x, s.center.y, s.center.z, s.radii.x,
                              s.extra);
                break;
        }
        out << buf;
    }
    if (!distance_file.empty()) out << "distance_file = " << distance_file << "\n";
    return out.str();
}

std::string RunConfig::config_hash() const {
    std::string text = canonical_text();
    unsigned long long hash = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", hash);
    return buf;
}

namespace {

struct Parser {
    std::vector<std::string> errors;

    void fail(const std::string& msg) { errors.push_back(msg); }

    double number(const std::string& key, const std::string& val) {
        try {
            std::size_t pos = 0;
            double v = std::stod(val, &pos);
            if (pos != val.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (...) {
            fail(key + ": not a number: '" + val + "'");
            return 0.0;
        }
    }

    std::optional<ShapeSpec> shape(const std::string& val) {
        std::istringstream in(val);
        std::string kind;
        in >> kind;
        ShapeSpec s{};
        std::vector<double> args;
        double a;
        while (in >> a) args.push_back(a);
        auto need = [&](std::size_t n) {
            if (args.size() != n) {
                fail("shape " + kind + ": expected " + std::to_string(n) +
                     " numbers, got " + std::to_string(args.size()));
                return false;
            }
            return true;
        };
        if (kind == "circle") {
            if (!need(3)) return std::nullopt;
            s.kind = ShapeSpec::Kind::circle;
            s.center = {args[0], args[1], 0};
            s.radii = {args[2], args[2], 0};
        } else if (kind == "ellipse") {
            if (!need(4)) return std::nullopt;
            s.kind = ShapeSpec::Kind::ellipse;
            s.center = {args[0], args[1], 0};
            s.radii = {args[2], args[3], 0};
        } else if (kind == "sphere") {
            if (!need(4)) return std::nullopt;
            s.kind = ShapeSpec::Kind::sphere;
            s.center = {args[0], args[1], args[2]};
            s.radii = {args[3], args[3], args[3]};
        } else if (kind == "ellipsoid") {
            if (!need(6)) return std::nullopt;
            s.kind = ShapeSpec::Kind::ellipsoid;
            s.center = {args[0], args[1], args[2]};
            s.radii = {args[3], args[4], args[5]};
        } else if (kind == "tube") {
            if (!need(4)) return std::nullopt;
            s.kind = ShapeSpec::Kind::tube;
            s.center = {args[0], args[1], 0};
            s.radii = {args[3], args[3], 0};
            s.extra = args[2];
        } else if (kind == "perturbed_sphere") {
            if (!need(5)) return std::nullopt;
            s.kind = ShapeSpec::Kind::perturbed_sphere;
            s.center = {args[0], args[1], args[2]};
            s.radii = {args[3], args[3], args[3]};
            s.extra = args[4];
        } else {
            fail("shape: unknown kind '" + kind + "'");
            return std::nullopt;
        }
        return s;
    }
};

void validate(RunConfig& cfg, Parser& p) {
    if (cfg.dim != 2 && cfg.dim != 3) p.fail("dim: must be 2 or 3");
    if (!(cfg.h > 0)) p.fail("h: must be positive");
    if (!(cfg.box_hi > cfg.box_lo)) p.fail("box: box_hi must exceed box_lo");
    if (!(cfg.eps_over_h >= 2)) p.fail("eps_over_h: band needs at least 2 cells");
    if (!(cfg.cfl > 0 && cfg.cfl <= 1)) p.fail("cfl: must lie in (0, 1]");
    if (!(cfg.v_clamp > 0)) p.fail("v_clamp: must be positive");
    if (!(cfg.final_time > 0)) p.fail("final_time: must be positive");
    if (!(cfg.max_dt > 0)) p.fail("max_dt: must be positive");
    if (cfg.max_steps < 1) p.fail("max_steps: must be at least 1");
    if (cfg.snapshot_every < 0) p.fail("snapshot_every: must be >= 0");
    if (cfg.dim == 2 && cfg.u_inf != 0.0)
        p.fail("u_inf: the far-field value applies to 3D runs only");
    if (cfg.shapes.empty() && cfg.distance_file.empty())
        p.fail("shape: at least one shape or a distance_file is required");

    // every shape must fit in the window with room for the band
    double margin = cfg.eps_over_h * cfg.h + 4 * cfg.h;
    for (const auto& s : cfg.shapes) {
        double reach = std::max({s.radii.x, s.radii.y, s.radii.z}) +
                       std::abs(s.extra);
        for (int a = 0; a < cfg.dim; ++a) {
            if (s.center[a] - reach < cfg.box_lo + margin ||
                s.center[a] + reach > cfg.box_hi - margin) {
                p.fail("shape: does not fit inside the window with margin eps+4h");
                break;
            }
        }
        if (cfg.dim == 2 && (s.kind == ShapeSpec::Kind::sphere ||
                             s.kind == ShapeSpec::Kind::ellipsoid ||
                             s.kind == ShapeSpec::Kind::perturbed_sphere))
            p.fail("shape: 3D shape in a 2D run");
        if (cfg.dim == 3 && (s.kind == ShapeSpec::Kind::circle ||
                             s.kind == ShapeSpec::Kind::ellipse ||
                             s.kind == ShapeSpec::Kind::tube))
            p.fail("shape: 2D shape in a 3D run");
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    Parser p;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto notspace = [](unsigned char c) { return !std::isspace(c); };
        line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
        line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(),
                   line.end());
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            p.fail("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
        val.erase(val.begin(), std::find_if(val.begin(), val.end(), notspace));

        if (key == "dim")
            cfg.dim = static_cast<int>(p.number(key, val));
        else if (key == "box_lo")
            cfg.box_lo = p.number(key, val);
        else if (key == "box_hi")
            cfg.box_hi = p.number(key, val);
        else if (key == "h")
            cfg.h = p.number(key, val);
        else if (key == "eps_over_h")
            cfg.eps_over_h = p.number(key, val);
        else if (key == "cfl")
            cfg.cfl = p.number(key, val);
        else if (key == "v_clamp")
            cfg.v_clamp = p.number(key, val);
        else if (key == "clamp_mode") {
            if (val == "symmetric")
                cfg.clamp_mode = ClampMode::symmetric;
            else if (val == "floor")
                cfg.clamp_mode = ClampMode::literal_floor;
            else
                p.fail("clamp_mode: expected 'symmetric' or 'floor'");
        } else if (key == "u_inf")
            cfg.u_inf = p.number(key, val);
        else if (key == "final_time")
            cfg.final_time = p.number(key, val);
        else if (key == "max_dt")
            cfg.max_dt = p.number(key, val);
        else if (key == "max_steps")
            cfg.max_steps = static_cast<int>(p.number(key, val));
        else if (key == "stop_after_merge_steps")
            cfg.stop_after_merge_steps = static_cast<int>(p.number(key, val));
        else if (key == "snapshot_every")
            cfg.snapshot_every = static_cast<int>(p.number(key, val));
        else if (key == "dump_labels")
            cfg.dump_labels = val == "true" || val == "1";
        else if (key == "out_dir")
            cfg.out_dir = val;
        else if (key == "preset")
            cfg.preset = val;
        else if (key == "distance_file")
            cfg.distance_file = val;
        else if (key == "seed")
            cfg.seed = static_cast<unsigned long>(p.number(key, val));
        else if (key == "shape") {
            auto s = p.shape(val);
            if (s) cfg.shapes.push_back(*s);
        } else
            p.fail("unknown key: '" + key + "'");
    }
    validate(cfg, p);
    if (!p.errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : p.errors) msg += "\n  - " + e;
        throw SimError(msg);
    }
    return cfg;
}

std::vector<std::string> preset_names() {
    return {"stationary-circle", "stationary-circles",  "ellipse-conservation",
            "merging-ellipses",  "thin-tube",           "two-spheres-farfield",
            "sphere-melt",       "perturbed-sphere"};
}

RunConfig preset_config(const std::string& name) {
    RunConfig cfg;
    cfg.preset = name;
    if (name == "stationary-circle") {
        cfg.dim = 2;
        cfg.h = 4.0 / 128;
        cfg.final_time = 0.5;
        cfg.max_dt = 0.0025;  // 200 steps
        cfg.max_steps = 200;
        cfg.shapes.push_back({ShapeSpec::Kind::circle, {0, 0, 0}, {1.0, 1.0, 0}, 0});
    } else if (name == "stationary-circles") {
        cfg.dim = 2;
        cfg.h = 4.0 / 128;
        cfg.final_time = 0.5;
        cfg.max_dt = 0.0025;
        cfg.max_steps = 200;
        cfg.shapes.push_back(
            {ShapeSpec::Kind::circle, {-1.0, 0, 0}, {0.62, 0.62, 0}, 0});
        cfg.shapes.push_back(
            {ShapeSpec::Kind::circle, {1.0, 0, 0}, {0.62, 0.62, 0}, 0});
    } else if (name == "ellipse-conservation") {
        cfg.dim = 2;
        cfg.h = 4.0 / 128;
        cfg.final_time = 0.25;
        cfg.max_steps = 400;
        cfg.shapes.push_back({ShapeSpec::Kind::ellipse, {0, 0, 0}, {1.0, 0.5, 0}, 0});
    } else if (name == "merging-ellipses") {
        cfg.dim = 2;
        cfg.h = 4.0 / 128;
        cfg.final_time = 1.0;
        cfg.max_steps = 4000;
        cfg.stop_after_merge_steps = 5;
        // two upright ellipses; combined area 2 * pi * 0.55 * 0.78 = 2.6955
        cfg.shapes.push_back(
            {ShapeSpec::Kind::ellipse, {-0.62, 0, 0}, {0.55, 0.78, 0}, 0});
        cfg.shapes.push_back(
            {ShapeSpec::Kind::ellipse, {0.62, 0, 0}, {0.55, 0.78, 0}, 0});
    } else if (name == "thin-tube") {
        cfg.dim = 2;
        cfg.h = 4.0 / 128;
        cfg.eps_over_h = 4.0;  // the band must fit inside the tube radius
        cfg.final_time = 0.4;
        cfg.max_steps = 2000;
        cfg.shapes.push_back({ShapeSpec::Kind::tube, {0, 0, 0}, {0.2, 0.2, 0}, 1.4});
    } else if (name == "two-spheres-farfield") {
        cfg.dim = 3;
        cfg.h = 4.0 / 64;
        cfg.box_lo = -2.2;
        cfg.box_hi = 2.2;
        cfg.eps_over_h = 3.0;
        cfg.u_inf = -3.2;  // between the equilibria -2/0.5 and -2/0.8
        cfg.final_time = 0.05;
        cfg.max_steps = 10;
        cfg.shapes.push_back(
            {ShapeSpec::Kind::sphere, {-1.05, 0, 0}, {0.5, 0.5, 0.5}, 0});
        cfg.shapes.push_back(
            {ShapeSpec::Kind::sphere, {0.85, 0, 0}, {0.8, 0.8, 0.8}, 0});
    } else if (name == "sphere-melt") {
        cfg.dim = 3;
        cfg.h = 4.0 / 64;
        cfg.eps_over_h = 4.0;
        cfg.final_time = 0.02;
        cfg.max_steps = 8;
        cfg.shapes.push_back({ShapeSpec::Kind::sphere, {0, 0, 0}, {0.8, 0.8, 0.8}, 0});
    } else if (name == "perturbed-sphere") {
        cfg.dim = 3;
        cfg.h = 4.0 / 64;
        cfg.eps_over_h = 4.0;
        cfg.u_inf = -3.0;  // undercooled: the bumps amplify
        cfg.final_time = 0.1;
        cfg.max_steps = 20;
        cfg.shapes.push_back(
            {ShapeSpec::Kind::perturbed_sphere, {0, 0, 0}, {1.0, 1.0, 1.0}, 0.08});
    } else {
        throw SimError("unknown preset: " + name);
    }
    return cfg;
}

namespace {

double shape_level(const ShapeSpec& s, Vec3 p) {
    Vec3 rel = p - s.center;
    switch (s.kind) {
        case ShapeSpec::Kind::circle:
        case ShapeSpec::Kind::sphere:
            return s.radii.x - norm(rel);
        case ShapeSpec::Kind::ellipse:
            return 1.0 - std::sqrt(rel.x * rel.x / (s.radii.x * s.radii.x) +
                                   rel.y * rel.y / (s.radii.y * s.radii.y));
        case ShapeSpec::Kind::ellipsoid:
            return 1.0 - std::sqrt(rel.x * rel.x / (s.radii.x * s.radii.x) +
                                   rel.y * rel.y / (s.radii.y * s.radii.y) +
                                   rel.z * rel.z / (s.radii.z * s.radii.z));
        case ShapeSpec::Kind::tube: {
            // capsule: distance to the segment of half-length `extra` along x
            double cx = std::clamp(rel.x, -s.extra, s.extra);
            Vec3 q{rel.x - cx, rel.y, rel.z};
            return s.radii.x - norm(q);
        }
        case ShapeSpec::Kind::perturbed_sphere: {
            double r = norm(rel);
            if (r < 1e-12) return s.radii.x;
            Vec3 n = (1.0 / r) * rel;
            // cubic-symmetry bump (degree-4 harmonic on the sphere)
            double c = n.x * n.x * n.x * n.x + n.y * n.y * n.y * n.y +
                       n.z * n.z * n.z * n.z - 0.6;
            return s.radii.x * (1.0 + s.extra * c) - r;
        }
    }
    return 0.0;
}

}  // namespace

ScalarField initial_distance(const RunConfig& cfg) {
    Grid g = cfg.make_grid();
    if (!cfg.distance_file.empty()) {
        Snapshot snap = read_snapshot(cfg.distance_file);
        if (!snap.field.grid.same_layout(g))
            throw SimError("distance_file grid does not match the configuration");
        return redistance(snap.field);
    }
    ScalarField phi(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec3 p = g.point(i);
        double best = -1e9;
        for (const auto& s : cfg.shapes) best = std::max(best, shape_level(s, p));
        phi.values[i] = best;
    }
    return redistance(phi);
}

}  // namespace msibim
