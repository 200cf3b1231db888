#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "permlens/ir.hpp"
#include "permlens/rewrite.hpp"

namespace permlens {

enum class edge_kind { dispatch, static_call, redirected, synthetic_init };

const char* edge_kind_name(edge_kind k);

struct call_edge {
    method_id caller;
    int site;  // statement index in the caller's body
    method_id callee;
    edge_kind kind;

    // Provenance does not participate in identity.
    auto operator<=>(const call_edge& o) const {
        if (auto c = caller <=> o.caller; c != 0) return c;
        if (auto c = site <=> o.site; c != 0) return c;
        return callee <=> o.callee;
    }
    bool operator==(const call_edge& o) const {
        return caller == o.caller && site == o.site && callee == o.callee;
    }
};

struct call_graph {
    std::set<method_id> nodes;
    std::set<call_edge> edges;
    std::set<method_id> roots;
    std::vector<unsound_point> dangling;  // unresolved dispatches

    void add_edge(call_edge e) {
        nodes.insert(e.caller);
        nodes.insert(e.callee);
        edges.insert(std::move(e));
    }

    std::map<method_id, std::vector<method_id>> successors() const;

    // Line-oriented `caller -> callee [provenance]` dump, sorted.
    std::string dump() const;
    // Graphviz rendering for visualization tools.
    std::string to_dot() const;
};

// Class Hierarchy Analysis: worklist closure from the synthetic main. A
// virtual call on declared type T resolves to every same-signature concrete
// method in T's cone, with inherited lookup.
call_graph build_cha(const rewritten_framework& fw, diagnostic_list* diags = nullptr);

// Forward transitive closure, including the root.
std::set<method_id> reachable_from(const call_graph& g, const method_id& root);

// CHA dispatch targets for one call site; exposed for the app-side access
// vector extraction which uses the same cone rule.
std::set<method_id> cha_targets(const hierarchy& h, const sem_type& recv_type,
                                const method_sig& sig);

}  // namespace permlens
