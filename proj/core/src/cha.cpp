#include "permlens/callgraph.hpp"

namespace permlens {

std::set<method_id> cha_targets(const hierarchy& h, const sem_type& recv_type,
                                const method_sig& sig) {
    std::set<method_id> out;
    if (!recv_type.is_class())
        return out;
    // Constructors dispatch exactly; they are not virtual.
    if (sig.name == "<init>") {
        std::string found_in;
        if (h.resolve_up(recv_type.cls, sig, &found_in))
            out.insert({found_in, sig});
        return out;
    }
    for (const auto& sub : h.cone(recv_type.cls)) {
        const class_def* cd = h.find(sub);
        if (!cd)
            continue;
        if (cd->methods.count(sig))
            out.insert({sub, sig});
    }
    // Inherited lookup: the declaration may sit above the declared type.
    const class_def* self = h.find(recv_type.cls);
    if (self && !self->methods.count(sig)) {
        std::string found_in;
        if (h.resolve_up(recv_type.cls, sig, &found_in))
            out.insert({found_in, sig});
    }
    return out;
}

call_graph build_cha(const rewritten_framework& fw, diagnostic_list* diags) {
    call_graph g;
    if (!fw.synthetic_main)
        throw std::runtime_error("build_cha: model has no synthetic main");

    hierarchy h(fw.model.classes);
    g.roots.insert(*fw.synthetic_main);
    g.nodes.insert(*fw.synthetic_main);

    std::set<method_id> processed;
    std::vector<method_id> work{*fw.synthetic_main};
    while (!work.empty()) {
        method_id m = work.back();
        work.pop_back();
        if (!processed.insert(m).second)
            continue;
        const method_def* def = fw.find_method(m);
        if (!def)
            continue;
        for (int i = 0; i < static_cast<int>(def->body.size()); ++i) {
            const statement& st = def->body[i];
            std::set<method_id> targets;
            edge_kind kind = edge_kind::dispatch;
            if (st.kind == stmt_kind::virtual_call || st.kind == stmt_kind::transact) {
                if (st.pep)
                    continue;  // enforcement points are terminal
                if (st.direct_target) {
                    targets.insert(*st.direct_target);
                    kind = edge_kind::redirected;
                } else {
                    targets = cha_targets(h, st.recv_type, st.sig);
                    if (targets.empty()) {
                        if (diags)
                            diags->push_back({severity::warning, "", st.line, st.col,
                                              "cha",
                                              "unresolved dispatch: " + st.sig.str() +
                                                  " on " + st.recv_type.str()});
                        g.dangling.push_back(
                            {"dangling-dispatch", m.str(), i, st.sig.str()});
                        continue;
                    }
                }
            } else if (st.kind == stmt_kind::static_call) {
                std::string found_in;
                if (h.resolve_up(st.cls, st.sig, &found_in)) {
                    targets.insert({found_in, st.sig});
                    kind = is_synthetic_class(found_in) ? edge_kind::synthetic_init
                                                        : edge_kind::static_call;
                } else {
                    if (diags)
                        diags->push_back({severity::warning, "", st.line, st.col, "cha",
                                          "unresolved static call: " + st.cls +
                                              "::" + st.sig.str()});
                    g.dangling.push_back({"dangling-dispatch", m.str(), i, st.sig.str()});
                    continue;
                }
            } else {
                continue;
            }
            for (const auto& t : targets) {
                g.add_edge({m, i, t, kind});
                work.push_back(t);
            }
        }
    }
    return g;
}

}  // namespace permlens
