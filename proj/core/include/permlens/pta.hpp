#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "permlens/callgraph.hpp"
#include "permlens/ir.hpp"
#include "permlens/rewrite.hpp"

namespace permlens {

// An allocation: a new-site, a string constant, or a literal argument
// (sub > 0 distinguishes per-argument sites at one statement).
struct alloc_site {
    method_id method;
    int stmt = 0;
    int sub = 0;
    sem_type type;
    bool synthetic = false;
    std::optional<std::string> literal;

    std::string str() const;

    auto operator<=>(const alloc_site& o) const {
        if (auto c = method <=> o.method; c != 0) return c;
        if (auto c = stmt <=> o.stmt; c != 0) return c;
        return sub <=> o.sub;
    }
    bool operator==(const alloc_site& o) const {
        return method == o.method && stmt == o.stmt && sub == o.sub;
    }
};

struct points_to_state {
    std::map<std::pair<method_id, std::string>, std::set<alloc_site>> var_pts;
    std::map<std::pair<alloc_site, std::string>, std::set<alloc_site>> field_pts;

    const std::set<alloc_site>& at(const method_id& m, const std::string& var) const;

    // `method::var -> {site, ...}` lines, sorted; golden-test format.
    std::string dump() const;
};

enum class worklist_order { fifo, lifo, shuffled };

struct pta_options {
    worklist_order order = worklist_order::fifo;
    uint64_t shuffle_seed = 0;
    int timeout_ms = 60000;
};

struct pta_result {
    points_to_state state;
    call_graph graph;
    std::vector<unsound_point> suppressed;  // call sites with empty receivers
    diagnostic_list diags;
    bool timed_out = false;
};

// Field-sensitive, flow- and context-insensitive inclusion-based points-to
// analysis with on-the-fly call graph construction from the synthetic main.
pta_result build_pta(const rewritten_framework& fw, const pta_options& opts = {});

// Dispatch for one virtual call site: union over the receiver's allocation
// sites of exact-type lookup, walking up the superclass chain.
std::set<method_id> resolve_call(const points_to_state& pts, const hierarchy& h,
                                 const method_id& caller, const statement& site,
                                 diagnostic_list* diags = nullptr);

}  // namespace permlens
