#include "permlens/callgraph.hpp"

#include <sstream>

namespace permlens {

const char* edge_kind_name(edge_kind k) {
    switch (k) {
    case edge_kind::dispatch: return "dispatch";
    case edge_kind::static_call: return "static";
    case edge_kind::redirected: return "redirected";
    case edge_kind::synthetic_init: return "synthetic-init";
    }
    return "?";
}

std::map<method_id, std::vector<method_id>> call_graph::successors() const {
    std::map<method_id, std::vector<method_id>> out;
    for (const auto& n : nodes)
        out[n];
    for (const auto& e : edges)
        out[e.caller].push_back(e.callee);
    return out;
}

std::string call_graph::dump() const {
    std::ostringstream os;
    for (const auto& e : edges)
        os << e.caller.str() << " -> " << e.callee.str() << " [" << edge_kind_name(e.kind)
           << "]\n";
    return os.str();
}

std::string call_graph::to_dot() const {
    std::ostringstream os;
    os << "digraph callgraph {\n";
    for (const auto& n : nodes)
        os << "  \"" << n.str() << "\";\n";
    for (const auto& e : edges)
        os << "  \"" << e.caller.str() << "\" -> \"" << e.callee.str() << "\" [label=\""
           << edge_kind_name(e.kind) << "\"];\n";
    os << "}\n";
    return os.str();
}

std::set<method_id> reachable_from(const call_graph& g, const method_id& root) {
    if (!g.nodes.count(root))
        throw std::runtime_error("reachable_from: unknown root " + root.str());
    auto succ = g.successors();
    std::set<method_id> seen;
    std::vector<method_id> work{root};
    while (!work.empty()) {
        method_id m = work.back();
        work.pop_back();
        if (!seen.insert(m).second)
            continue;
        for (const auto& s : succ[m])
            work.push_back(s);
    }
    return seen;
}

}  // namespace permlens
