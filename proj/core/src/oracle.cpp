#include "permlens/oracle.hpp"

#include <functional>
#include <stdexcept>

#include "permlens/string_analysis.hpp"

namespace permlens {

namespace {

size_t method_count(const framework_model& fw) {
    size_t n = 0;
    for (const auto& [name, cd] : fw.classes)
        n += cd.methods.size();
    return n;
}

void check_scale(const rewritten_framework& fw) {
    if (method_count(fw.model) > 200)
        throw std::runtime_error("oracle: model exceeds the 200-method bound");
}

// Subtyping rebuilt from scratch with repeated scans; intentionally not the
// hierarchy class the analyses use.
struct naive_types {
    const framework_model& fw;

    bool derives_from(const std::string& sub, const std::string& super) const {
        if (sub == super)
            return true;
        auto it = fw.classes.find(sub);
        if (it == fw.classes.end())
            return false;
        if (it->second.superclass && derives_from(*it->second.superclass, super))
            return true;
        for (const auto& i : it->second.interfaces)
            if (derives_from(i, super))
                return true;
        return false;
    }

    std::set<std::string> subtypes_of(const std::string& base) const {
        std::set<std::string> out;
        for (const auto& [name, cd] : fw.classes)
            if (derives_from(name, base))
                out.insert(name);
        return out;
    }

    const method_def* lookup_upward(const std::string& cls, const method_sig& sig,
                                    std::string* owner) const {
        std::string cur = cls;
        int guard = 0;
        while (guard++ < 1000) {
            auto it = fw.classes.find(cur);
            if (it == fw.classes.end())
                return nullptr;
            auto m = it->second.methods.find(sig);
            if (m != it->second.methods.end()) {
                if (owner)
                    *owner = cur;
                return &m->second;
            }
            if (!it->second.superclass)
                return nullptr;
            cur = *it->second.superclass;
        }
        return nullptr;
    }

    std::set<method_id> virtual_targets(const sem_type& recv, const method_sig& sig) const {
        std::set<method_id> out;
        if (!recv.is_class())
            return out;
        if (sig.name == "<init>") {
            std::string owner;
            if (lookup_upward(recv.cls, sig, &owner))
                out.insert({owner, sig});
            return out;
        }
        for (const auto& sub : subtypes_of(recv.cls)) {
            auto it = fw.classes.find(sub);
            if (it != fw.classes.end() && it->second.methods.count(sig))
                out.insert({sub, sig});
        }
        auto self = fw.classes.find(recv.cls);
        if (self != fw.classes.end() && !self->second.methods.count(sig)) {
            std::string owner;
            if (lookup_upward(recv.cls, sig, &owner))
                out.insert({owner, sig});
        }
        return out;
    }
};

// Identity intervals by a plain marker scan, separate from the rewrite
// module's matcher.
bool inside_identity_region(const method_def& m, int site) {
    bool open = false;
    for (int i = 0; i < site; ++i) {
        if (m.body[i].kind == stmt_kind::clear_identity)
            open = true;
        else if (m.body[i].kind == stmt_kind::restore_identity)
            open = false;
    }
    if (!open)
        return false;
    for (int i = site + 1; i < static_cast<int>(m.body.size()); ++i)
        if (m.body[i].kind == stmt_kind::restore_identity)
            return true;
    return false;
}

struct collector {
    const rewritten_framework& fw;
    const analysis_config& cfg;
    bool identity_filter;
    std::set<std::string> perms;
    std::set<method_id> visited;  // cycle guard, per entry

    // Targets of one call under CHA dispatch; null when using a prebuilt graph.
    const naive_types* types;
    const std::map<method_id, std::map<int, std::set<method_id>>>* graph_succ;

    void walk(const method_id& m, std::vector<stack_frame>& path) {
        if (!visited.insert(m).second)
            return;
        auto cit = fw.model.classes.find(m.cls);
        if (cit == fw.model.classes.end())
            return;
        auto mit = cit->second.methods.find(m.sig);
        if (mit == cit->second.methods.end())
            return;
        const method_def& def = mit->second;
        for (int i = 0; i < static_cast<int>(def.body.size()); ++i) {
            const statement& st = def.body[i];
            if (st.pep && st.kind == stmt_kind::virtual_call) {
                if (identity_filter && inside_identity_region(def, i))
                    continue;
                int arg = cfg.peps.param_index(st.sig.name);
                if (arg >= static_cast<int>(st.args.size()))
                    continue;
                path.push_back({m, i});
                permission_resolution r = resolve_permission(fw.model, path, arg, cfg);
                path.pop_back();
                if (r.status == res_status::resolved)
                    perms.insert(r.permissions.begin(), r.permissions.end());
                continue;
            }
            std::set<method_id> targets;
            if (graph_succ) {
                auto git = graph_succ->find(m);
                if (git != graph_succ->end()) {
                    auto sit = git->second.find(i);
                    if (sit != git->second.end())
                        targets = sit->second;
                }
            } else if (st.kind == stmt_kind::virtual_call ||
                       st.kind == stmt_kind::transact) {
                if (st.direct_target)
                    targets.insert(*st.direct_target);
                else
                    targets = types->virtual_targets(st.recv_type, st.sig);
            } else if (st.kind == stmt_kind::static_call) {
                std::string owner;
                if (types->lookup_upward(st.cls, st.sig, &owner))
                    targets.insert({owner, st.sig});
            }
            for (const auto& t : targets) {
                path.push_back({m, i});
                walk(t, path);
                path.pop_back();
            }
        }
    }
};

}  // namespace

std::set<std::string> oracle_permissions(const rewritten_framework& fw,
                                         const method_id& entry,
                                         const analysis_config& cfg,
                                         bool identity_filter) {
    check_scale(fw);
    naive_types types{fw.model};
    collector c{fw, cfg, identity_filter, {}, {}, &types, nullptr};
    std::vector<stack_frame> path;
    c.walk(entry, path);
    return c.perms;
}

std::set<std::string> oracle_graph_permissions(const call_graph& g,
                                               const rewritten_framework& fw,
                                               const method_id& entry,
                                               const analysis_config& cfg,
                                               bool identity_filter) {
    check_scale(fw);
    std::map<method_id, std::map<int, std::set<method_id>>> succ;
    for (const auto& e : g.edges)
        succ[e.caller][e.site].insert(e.callee);
    collector c{fw, cfg, identity_filter, {}, {}, nullptr, &succ};
    std::vector<stack_frame> path;
    c.walk(entry, path);
    return c.perms;
}

naive_pta_state oracle_pta(const rewritten_framework& fw) {
    check_scale(fw);
    if (!fw.synthetic_main)
        throw std::runtime_error("oracle_pta: no synthetic main");
    naive_types types{fw.model};
    hierarchy h(fw.model.classes);
    naive_pta_state st;
    std::set<method_id> reachable{*fw.synthetic_main};

    auto site_of = [&](const method_id& m, int idx, int sub, sem_type t,
                       std::optional<std::string> lit) {
        return alloc_site{m, idx, sub, std::move(t), is_synthetic_class(m.cls),
                          std::move(lit)};
    };
    auto admits = [&](const sem_type& filter, const alloc_site& s) {
        switch (filter.kind) {
        case type_kind::cls:
            return s.type.is_class() && h.assignable(s.type.cls, filter.cls);
        case type_kind::string_t: return s.type.kind == type_kind::string_t;
        case type_kind::string_array_t:
            return s.type.kind == type_kind::string_array_t;
        case type_kind::opaque_t: return true;
        case type_kind::void_t: return false;
        }
        return false;
    };
    auto merge_filtered = [&](std::set<alloc_site>& dst, const std::set<alloc_site>& src,
                              const sem_type& filter) {
        bool grew = false;
        for (const auto& s : src)
            if (admits(filter, s))
                grew |= dst.insert(s).second;
        return grew;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        std::set<method_id> snapshot = reachable;
        for (const auto& m : snapshot) {
            const method_def* def = fw.find_method(m);
            if (!def)
                continue;
            auto& self = st;
            auto var = [&](const std::string& v) -> std::set<alloc_site>& {
                return self.var_pts[{m, v}];
            };
            for (int i = 0; i < static_cast<int>(def->body.size()); ++i) {
                const statement& s = def->body[i];
                switch (s.kind) {
                case stmt_kind::alloc:
                    changed |= var(s.target)
                                   .insert(site_of(m, i, 0, sem_type::of_class(s.cls),
                                                   std::nullopt))
                                   .second;
                    break;
                case stmt_kind::string_const:
                    changed |= var(s.target)
                                   .insert(site_of(m, i, 0, sem_type::string(), s.literal))
                                   .second;
                    break;
                case stmt_kind::string_array_const:
                    changed |= var(s.target)
                                   .insert(site_of(m, i, 0, sem_type::string_array(),
                                                   std::nullopt))
                                   .second;
                    break;
                case stmt_kind::copy: {
                    auto src = var(s.source);
                    for (const auto& x : src)
                        changed |= var(s.target).insert(x).second;
                    break;
                }
                case stmt_kind::field_store: {
                    auto bases = var(s.receiver);
                    auto srcs = var(s.source);
                    for (const auto& b : bases) {
                        if (!b.type.is_class())
                            continue;
                        std::string cur = b.type.cls;
                        std::optional<sem_type> ft;
                        while (!cur.empty()) {
                            auto cit = fw.model.classes.find(cur);
                            if (cit == fw.model.classes.end())
                                break;
                            auto fit = cit->second.fields.find(s.field);
                            if (fit != cit->second.fields.end()) {
                                ft = fit->second;
                                break;
                            }
                            if (!cit->second.superclass)
                                break;
                            cur = *cit->second.superclass;
                        }
                        if (ft)
                            changed |= merge_filtered(st.field_pts[{b, s.field}], srcs, *ft);
                    }
                    break;
                }
                case stmt_kind::field_load: {
                    auto bases = var(s.receiver);
                    for (const auto& b : bases) {
                        auto it = st.field_pts.find({b, s.field});
                        if (it == st.field_pts.end())
                            continue;
                        for (const auto& x : it->second)
                            changed |= var(s.target).insert(x).second;
                    }
                    break;
                }
                case stmt_kind::virtual_call:
                case stmt_kind::transact: {
                    if (s.pep)
                        break;
                    auto recv = var(s.receiver);
                    std::set<method_id> targets;
                    if (s.direct_target) {
                        if (!recv.empty())
                            targets.insert(*s.direct_target);
                    } else {
                        for (const auto& r : recv) {
                            if (!r.type.is_class())
                                continue;
                            std::string owner;
                            if (types.lookup_upward(r.type.cls, s.sig, &owner))
                                targets.insert({owner, s.sig});
                        }
                    }
                    for (const auto& t : targets) {
                        changed |= st.edges
                                       .insert({m, i, t,
                                                s.direct_target ? edge_kind::redirected
                                                                : edge_kind::dispatch})
                                       .second;
                        changed |= reachable.insert(t).second;
                        const method_def* tdef = fw.find_method(t);
                        if (!tdef)
                            continue;
                        if (!tdef->is_static)
                            changed |= merge_filtered(st.var_pts[{t, "this"}], recv,
                                                      sem_type::of_class(t.cls));
                        for (size_t a = 0;
                             a < s.args.size() && a < tdef->param_names.size(); ++a) {
                            auto& pset = st.var_pts[{t, tdef->param_names[a]}];
                            if (s.args[a].literal) {
                                alloc_site lit = site_of(m, i, static_cast<int>(a) + 1,
                                                         sem_type::string(),
                                                         s.args[a].value);
                                if (admits(tdef->sig.params[a], lit))
                                    changed |= pset.insert(lit).second;
                            } else {
                                changed |= merge_filtered(pset, var(s.args[a].value),
                                                          tdef->sig.params[a]);
                            }
                        }
                        if (!s.target.empty()) {
                            for (const auto& rs : tdef->body)
                                if (rs.kind == stmt_kind::ret && !rs.source.empty())
                                    changed |= merge_filtered(var(s.target),
                                                              st.var_pts[{t, rs.source}],
                                                              tdef->sig.ret);
                        }
                    }
                    break;
                }
                case stmt_kind::static_call: {
                    std::string owner;
                    if (!types.lookup_upward(s.cls, s.sig, &owner))
                        break;
                    method_id t{owner, s.sig};
                    changed |= st.edges
                                   .insert({m, i, t,
                                            is_synthetic_class(owner)
                                                ? edge_kind::synthetic_init
                                                : edge_kind::static_call})
                                   .second;
                    changed |= reachable.insert(t).second;
                    const method_def* tdef = fw.find_method(t);
                    if (!tdef)
                        break;
                    for (size_t a = 0; a < s.args.size() && a < tdef->param_names.size();
                         ++a) {
                        auto& pset = st.var_pts[{t, tdef->param_names[a]}];
                        if (s.args[a].literal) {
                            alloc_site lit = site_of(m, i, static_cast<int>(a) + 1,
                                                     sem_type::string(), s.args[a].value);
                            if (admits(tdef->sig.params[a], lit))
                                changed |= pset.insert(lit).second;
                        } else {
                            changed |= merge_filtered(pset, var(s.args[a].value),
                                                      tdef->sig.params[a]);
                        }
                    }
                    if (!s.target.empty()) {
                        for (const auto& rs : tdef->body)
                            if (rs.kind == stmt_kind::ret && !rs.source.empty())
                                changed |= merge_filtered(var(s.target),
                                                          st.var_pts[{t, rs.source}],
                                                          tdef->sig.ret);
                    }
                    break;
                }
                default:
                    break;
                }
            }
        }
    }
    return st;
}

}  // namespace permlens
