#include "permlens/propagate.hpp"

#include <algorithm>

namespace permlens {

namespace {

// Successor lists keyed and ordered by (site, callee) so traversal order is a
// pure function of the graph content.
std::map<method_id, std::vector<std::pair<int, method_id>>> sorted_succ(
    const call_graph& g) {
    std::map<method_id, std::vector<std::pair<int, method_id>>> out;
    for (const auto& n : g.nodes)
        out[n];
    for (const auto& e : g.edges)
        out[e.caller].push_back({e.site, e.callee});
    for (auto& [n, v] : out)
        std::sort(v.begin(), v.end());
    return out;
}

struct dfs_frame {
    method_id node;
    const std::vector<std::pair<int, method_id>>* succ;
    size_t next = 0;
    int via_site = -1;  // call site in the parent through which we entered
};

}  // namespace

std::map<method_id, int> assert_linear(const call_graph& g) {
    auto succ = sorted_succ(g);
    std::map<method_id, int> visits;
    std::set<method_id> visited;
    for (const auto& root : g.roots) {
        std::vector<dfs_frame> stack;
        if (visited.insert(root).second) {
            visits[root]++;
            stack.push_back({root, &succ[root], 0, -1});
        }
        while (!stack.empty()) {
            dfs_frame& f = stack.back();
            if (f.next >= f.succ->size()) {
                stack.pop_back();
                continue;
            }
            auto [site, callee] = (*f.succ)[f.next++];
            if (visited.insert(callee).second) {
                visits[callee]++;
                stack.push_back({callee, &succ[callee], 0, site});
            }
        }
    }
    return visits;
}

std::map<method_id, int> tarjan_scc(const call_graph& g, int* component_count) {
    auto succ = sorted_succ(g);
    std::map<method_id, int> index, lowlink, comp;
    std::vector<method_id> scc_stack;
    std::set<method_id> on_stack;
    int next_index = 0;
    int next_comp = 0;

    struct frame {
        method_id node;
        const std::vector<std::pair<int, method_id>>* succ;
        size_t next = 0;
    };

    for (const auto& start : g.nodes) {
        if (index.count(start))
            continue;
        std::vector<frame> stack;
        index[start] = lowlink[start] = next_index++;
        scc_stack.push_back(start);
        on_stack.insert(start);
        stack.push_back({start, &succ[start], 0});
        while (!stack.empty()) {
            frame& f = stack.back();
            if (f.next < f.succ->size()) {
                const method_id& w = (*f.succ)[f.next++].second;
                if (!index.count(w)) {
                    index[w] = lowlink[w] = next_index++;
                    scc_stack.push_back(w);
                    on_stack.insert(w);
                    stack.push_back({w, &succ[w], 0});
                } else if (on_stack.count(w)) {
                    lowlink[f.node] = std::min(lowlink[f.node], index[w]);
                }
                continue;
            }
            // node finished
            if (lowlink[f.node] == index[f.node]) {
                int c = next_comp++;
                while (true) {
                    method_id w = scc_stack.back();
                    scc_stack.pop_back();
                    on_stack.erase(w);
                    comp[w] = c;
                    if (w == f.node)
                        break;
                }
            }
            method_id done = f.node;
            stack.pop_back();
            if (!stack.empty())
                lowlink[stack.back().node] =
                    std::min(lowlink[stack.back().node], lowlink[done]);
        }
    }
    if (component_count)
        *component_count = next_comp;
    return comp;
}

propagation_result extract_and_propagate(const call_graph& g,
                                         const rewritten_framework& fw,
                                         const analysis_config& cfg,
                                         const propagation_options& opts) {
    propagation_result res;
    auto succ = sorted_succ(g);

    // ---- step 1: depth-first extraction, each method analyzed once --------
    std::set<method_id> visited;
    for (const auto& root : g.roots) {
        if (!visited.insert(root).second)
            continue;
        std::vector<dfs_frame> stack;
        stack.push_back({root, &succ[root], 0, -1});

        auto on_visit = [&](const method_id& node, const std::vector<dfs_frame>& path) {
            res.visit_counts[node]++;
            const method_def* def = fw.find_method(node);
            if (!def)
                return;
            const std::vector<stmt_interval>* regions = nullptr;
            if (opts.identity_filter) {
                auto rit = fw.identity_regions.find(node);
                if (rit != fw.identity_regions.end())
                    regions = &rit->second;
            }
            for (int i = 0; i < static_cast<int>(def->body.size()); ++i) {
                const statement& st = def->body[i];
                if (!st.pep || st.kind != stmt_kind::virtual_call)
                    continue;
                if (regions) {
                    bool inside = false;
                    for (const auto& iv : *regions)
                        if (iv.covers(i)) {
                            inside = true;
                            break;
                        }
                    if (inside)
                        continue;  // executed with the service's own identity
                }
                int arg_idx = cfg.peps.param_index(st.sig.name);
                if (arg_idx >= static_cast<int>(st.args.size())) {
                    res.unsound.push_back({"unresolved-permission", node.str(), i,
                                           "PEP call has no argument at the permission index"});
                    continue;
                }
                std::vector<stack_frame> frames;
                for (size_t k = 1; k < path.size(); ++k)
                    frames.push_back({path[k - 1].node, path[k].via_site});
                frames.push_back({node, i});
                permission_resolution r = resolve_permission(fw.model, frames, arg_idx, cfg);
                if (r.status == res_status::resolved) {
                    res.own_perms[node].insert(r.permissions.begin(), r.permissions.end());
                } else {
                    res.unsound.push_back(
                        {"unresolved-permission", node.str(), i,
                         r.parameter_dependent ? "parameter-dependent" : "opaque source"});
                }
                res.resolutions.push_back(std::move(r));
            }
        };

        on_visit(root, stack);
        while (!stack.empty()) {
            dfs_frame& f = stack.back();
            if (f.next >= f.succ->size()) {
                stack.pop_back();
                continue;
            }
            auto [site, callee] = (*f.succ)[f.next++];
            if (visited.insert(callee).second) {
                stack.push_back({callee, &succ[callee], 0, site});
                on_visit(callee, stack);
            }
        }
    }

    // ---- steps 2+3: condensation and linear propagation -------------------
    if (opts.condense) {
        res.cg.scc_id = tarjan_scc(g, &res.cg.component_count);
        res.cg.component_perms.assign(res.cg.component_count, {});
        // A PEP-bearing method's permissions stay attached to its component.
        for (const auto& [node, perms] : res.own_perms) {
            auto it = res.cg.scc_id.find(node);
            if (it != res.cg.scc_id.end())
                res.cg.component_perms[it->second].insert(perms.begin(), perms.end());
        }
        for (const auto& e : g.edges) {
            int a = res.cg.scc_id[e.caller];
            int b = res.cg.scc_id[e.callee];
            if (a != b)
                res.cg.dag[a].insert(b);
        }
        // Tarjan numbers components in reverse topological order: every
        // successor component has a smaller id, so one ascending pass is the
        // whole propagation.
        for (int c = 0; c < res.cg.component_count; ++c) {
            auto dit = res.cg.dag.find(c);
            if (dit == res.cg.dag.end())
                continue;
            for (int s : dit->second)
                res.cg.component_perms[c].insert(res.cg.component_perms[s].begin(),
                                                 res.cg.component_perms[s].end());
        }
        for (const auto& [node, c] : res.cg.scc_id)
            res.method_perms[node] = res.cg.component_perms[c];
    } else {
        // Condensation disabled: memoized DFS, iterated to a fixed point so
        // cycles converge.
        for (const auto& n : g.nodes)
            res.method_perms[n] = res.own_perms.count(n) ? res.own_perms[n]
                                                         : std::set<std::string>{};
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& [n, sl] : succ) {
                auto& acc = res.method_perms[n];
                size_t before = acc.size();
                for (const auto& [site, s] : sl) {
                    const auto& sp = res.method_perms[s];
                    acc.insert(sp.begin(), sp.end());
                }
                if (acc.size() != before)
                    changed = true;
            }
        }
    }
    return res;
}

}  // namespace permlens
