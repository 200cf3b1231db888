#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "permlens/callgraph.hpp"
#include "permlens/rewrite.hpp"
#include "permlens/string_analysis.hpp"

namespace permlens {

struct condensed_graph {
    std::map<method_id, int> scc_id;
    std::vector<std::set<std::string>> component_perms;  // after propagation
    std::map<int, std::set<int>> dag;                    // edges between components
    int component_count = 0;
};

struct propagation_options {
    bool identity_filter = true;  // discard PEPs inside clear/restore regions
    bool condense = true;         // false: memoized-DFS propagation instead
};

struct propagation_result {
    std::map<method_id, std::set<std::string>> method_perms;  // accumulated per node
    std::map<method_id, std::set<std::string>> own_perms;     // extracted at the node
    condensed_graph cg;
    std::map<method_id, int> visit_counts;  // step-1 expansions per node
    std::vector<permission_resolution> resolutions;
    std::vector<unsound_point> unsound;
};

// Algorithm 2. Step 1: one depth-first pass from the roots with a global
// visited set, resolving permissions at every PEP call site outside an
// identity region. Step 2: Tarjan condensation. Step 3: reverse-topological
// accumulation over the component DAG.
propagation_result extract_and_propagate(const call_graph& g,
                                         const rewritten_framework& fw,
                                         const analysis_config& cfg = {},
                                         const propagation_options& opts = {});

// Visit counts of the step-1 traversal alone; every reachable node is
// expanded at most once.
std::map<method_id, int> assert_linear(const call_graph& g);

// Tarjan over the call graph; exposed for tests.
std::map<method_id, int> tarjan_scc(const call_graph& g, int* component_count);

}  // namespace permlens
