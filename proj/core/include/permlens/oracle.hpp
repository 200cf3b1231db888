#pragma once

#include <map>
#include <set>
#include <string>

#include "permlens/callgraph.hpp"
#include "permlens/pta.hpp"
#include "permlens/rewrite.hpp"

namespace permlens {

// Test-side oracles. These deliberately share no dispatch or traversal code
// with the production analyses; agreement between the two routes is the
// point. Enforced desk scale: models above 200 methods are rejected.

// Naive per-entry permission collection under class-hierarchy dispatch:
// plain recursive DFS from the entry, no condensation, no sharing across
// entry points, string resolution run with the DFS path as its stack.
std::set<std::string> oracle_permissions(const rewritten_framework& fw,
                                         const method_id& entry,
                                         const analysis_config& cfg = {},
                                         bool identity_filter = true);

// The same collection over an already-built call graph's edges; used to
// cross-check propagation over the points-to graph.
std::set<std::string> oracle_graph_permissions(const call_graph& g,
                                               const rewritten_framework& fw,
                                               const method_id& entry,
                                               const analysis_config& cfg = {},
                                               bool identity_filter = true);

// Points-to by chaotic iteration: full re-sweeps over every statement of
// every reachable method until nothing changes. No worklist, no difference
// propagation.
struct naive_pta_state {
    std::map<std::pair<method_id, std::string>, std::set<alloc_site>> var_pts;
    std::map<std::pair<alloc_site, std::string>, std::set<alloc_site>> field_pts;
    std::set<call_edge> edges;
};

naive_pta_state oracle_pta(const rewritten_framework& fw);

}  // namespace permlens
