#include "permlens/pipeline.hpp"

#include <algorithm>

namespace permlens {

analysis_run run_analysis(const framework_model& fw, const analysis_run_options& opts) {
    analysis_run run;
    run.rf = run_pipeline(fw, opts.mode, opts.rewrites, opts.cfg);
    run.diags = run.rf.diags;
    if (has_errors(run.diags))
        return run;

    std::vector<unsound_point> unsound = run.rf.unsound;

    if (opts.mode == analysis_mode::cha) {
        run.graph = build_cha(run.rf, &run.diags);
        for (const auto& u : run.graph.dangling)
            unsound.push_back(u);
    } else {
        pta_options po = opts.pta;
        po.timeout_ms = opts.cfg.timeout_ms;
        run.pta = build_pta(run.rf, po);
        run.timed_out = run.pta->timed_out;
        run.graph = run.pta->graph;
        for (const auto& d : run.pta->diags)
            run.diags.push_back(d);
        for (const auto& u : run.pta->suppressed)
            unsound.push_back(u);
    }

    run.map.framework = run.rf.base_name;
    run.map.hash = run.rf.base_hash;
    run.map.analysis = opts.mode == analysis_mode::cha ? "cha" : "pta";
    run.map.rewrites = run.rf.applied;

    auto entries = entry_points(run.rf.model, opts.mode);
    if (run.timed_out) {
        for (const auto& e : entries) {
            run.map.entries[e.str()] = {};
            run.map.timeouts.insert(e.str());
        }
        unsound.push_back({"timeout", "<solver>", -1, "points-to budget exceeded"});
    } else {
        run.prop = extract_and_propagate(run.graph, run.rf, opts.cfg, opts.prop);
        for (const auto& u : run.prop.unsound)
            unsound.push_back(u);
        for (const auto& e : entries) {
            auto it = run.prop.method_perms.find(e);
            run.map.entries[e.str()] =
                it == run.prop.method_perms.end() ? std::set<std::string>{} : it->second;
        }
    }

    std::sort(unsound.begin(), unsound.end());
    unsound.erase(std::unique(unsound.begin(), unsound.end()), unsound.end());
    run.map.unsound = std::move(unsound);
    return run;
}

}  // namespace permlens
