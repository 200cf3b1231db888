#pragma once

#include <optional>

#include "permlens/callgraph.hpp"
#include "permlens/propagate.hpp"
#include "permlens/pta.hpp"
#include "permlens/report.hpp"
#include "permlens/rewrite.hpp"

namespace permlens {

struct analysis_run_options {
    analysis_mode mode = analysis_mode::cha;
    rewrite_options rewrites;
    analysis_config cfg;
    propagation_options prop;
    pta_options pta;
};

struct analysis_run {
    rewritten_framework rf;
    call_graph graph;
    permission_map map;
    propagation_result prop;
    std::optional<pta_result> pta;  // pta mode only
    diagnostic_list diags;          // everything, all stages
    bool timed_out = false;

    bool ok() const { return !has_errors(diags); }
};

// Parse-to-map: rewrite pipeline for the chosen mode, graph construction,
// extraction and propagation, map assembly.
analysis_run run_analysis(const framework_model& fw, const analysis_run_options& opts = {});

}  // namespace permlens
