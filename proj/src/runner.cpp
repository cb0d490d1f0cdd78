#include <cstdio>
#include <filesystem>

#include "msibim/config.hpp"

namespace msibim {

namespace {

void write_checkpoint(const RunConfig& cfg, const SimState& state,
                      const std::string& name) {
    std::map<std::string, std::string> meta;
    meta["step"] = std::to_string(state.step_index);
    meta["config"] = cfg.config_hash();
    write_snapshot(cfg.out_dir + "/" + name, state.d, "d", state.t, meta);
}

void dump_labels_snapshot(const RunConfig& cfg, const SimState& state) {
    DistanceBundle bundle =
        build_bundle(state.d, cfg.eps_over_h * cfg.h, ReachPolicy::Drop);
    TopologyReport topo = analyze_topology(state.d, bundle);
    ScalarField lab(state.d.grid);
    for (std::size_t i = 0; i < lab.grid.size(); ++i)
        lab.values[i] = static_cast<double>(topo.labels[i]);
    char name[64];
    std::snprintf(name, sizeof name, "labels_%06d.msg", state.step_index);
    write_snapshot(cfg.out_dir + "/" + name, lab, "labels", state.t);
}

}  // namespace

RunResult run(const RunConfig& cfg, bool quiet) {
    RunResult result;
    std::filesystem::create_directories(cfg.out_dir);

    SimState& state = result.state;
    state.d = initial_distance(cfg);
    state.t = 0.0;

    DynamicsConfig dyn = cfg.dynamics();
    try {
        // initial record; the geometry doubles as the first step's cache
        {
            state.bundle_cache =
                build_bundle(state.d, cfg.eps_over_h * cfg.h, ReachPolicy::Drop);
            state.topology_cache =
                analyze_topology(state.d, *state.bundle_cache, ReachPolicy::Drop);
            SeriesRecord rec;
            rec.t = 0.0;
            rec.volume = measure_volume(state.d);
            rec.area = measure_area(*state.bundle_cache);
            rec.components =
                static_cast<int>(state.topology_cache->components.size());
            rec.pieces = static_cast<int>(state.topology_cache->piece_count());
            state.series.append(rec);
        }
        write_checkpoint(cfg, state, "initial.msg");

        int merge_countdown = -1;
        int initial_pieces = state.series.records.front().pieces;
        while (state.t < cfg.final_time && state.step_index < cfg.max_steps) {
            if (merge_countdown == 0) break;
            DynamicsConfig step_cfg = dyn;
            step_cfg.max_dt = std::min(dyn.max_dt, cfg.final_time - state.t);
            StepReport rep = step(state, step_cfg);
            if (cfg.stop_after_merge_steps >= 0 && merge_countdown < 0 &&
                rep.pieces < initial_pieces)
                merge_countdown = cfg.stop_after_merge_steps;
            else if (merge_countdown > 0)
                --merge_countdown;
            if (!quiet)
                std::printf(
                    "step %5d  t=%.6f dt=%.3e  pieces=%d  v in [%+.3f, %+.3f]  "
                    "res=%.1e\n",
                    state.step_index, state.t, rep.dt, rep.pieces, rep.v_min,
                    rep.v_max, rep.max_residual);
            if (cfg.snapshot_every > 0 && state.step_index % cfg.snapshot_every == 0) {
                char name[64];
                std::snprintf(name, sizeof name, "snapshot_%06d.msg",
                              state.step_index);
                write_checkpoint(cfg, state, name);
                if (cfg.dump_labels) dump_labels_snapshot(cfg, state);
            }
        }
    } catch (const SimError& err) {
        std::string what = err.what();
        if (what.find("interface vanished") != std::string::npos) {
            result.vanished = true;  // all solid melted: a normal ending
        } else {
            result.exit_code = dynamic_cast<const SolverError*>(&err) ? 2 : 1;
            result.error = "step " + std::to_string(state.step_index) + ": " + what;
        }
    }

    write_checkpoint(cfg, state, "final.msg");
    result.series_path = cfg.out_dir + "/series.csv";
    state.series.write_csv(result.series_path);

    MergingReport merge = merging_report(state.series);
    result.merge_report_path = cfg.out_dir + "/merge_report.csv";
    merge.write_csv(result.merge_report_path);

    if (!quiet && !result.error.empty())
        std::fprintf(stderr, "error: %s\n", result.error.c_str());
    return result;
}

}  // namespace msibim
