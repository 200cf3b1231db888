#include "permlens/pta.hpp"

#include <chrono>
#include <deque>
#include <random>
#include <sstream>

namespace permlens {

std::string alloc_site::str() const {
    std::ostringstream os;
    os << method.str() << "@" << stmt;
    if (sub)
        os << "." << sub;
    os << ":" << type.str();
    if (literal)
        os << "=\"" << *literal << "\"";
    return os.str();
}

const std::set<alloc_site>& points_to_state::at(const method_id& m,
                                                const std::string& var) const {
    static const std::set<alloc_site> empty;
    auto it = var_pts.find({m, var});
    return it == var_pts.end() ? empty : it->second;
}

std::string points_to_state::dump() const {
    std::ostringstream os;
    for (const auto& [key, sites] : var_pts) {
        os << key.first.str() << "::" << key.second << " -> {";
        size_t i = 0;
        for (const auto& s : sites)
            os << (i++ ? ", " : "") << s.str();
        os << "}\n";
    }
    for (const auto& [key, sites] : field_pts) {
        os << key.first.str() << "." << key.second << " -> {";
        size_t i = 0;
        for (const auto& s : sites)
            os << (i++ ? ", " : "") << s.str();
        os << "}\n";
    }
    return os.str();
}

namespace {

struct solver {
    const rewritten_framework& fw;
    const pta_options& opts;
    hierarchy h;
    pta_result* res;
    std::chrono::steady_clock::time_point deadline;

    // Node space: variables and field slots, interned to dense ids.
    struct var_key {
        method_id m;
        std::string name;
        auto operator<=>(const var_key&) const = default;
    };
    struct slot_key {
        int site;  // site id
        std::string field;
        auto operator<=>(const slot_key&) const = default;
    };

    std::map<var_key, int> var_ids;
    std::map<slot_key, int> slot_ids;
    std::vector<var_key> var_of;             // node -> var (nodes < n_vars())
    std::vector<slot_key> slot_of_;          // node - var_of.size()
    std::vector<std::set<int>> pts;          // node -> site ids
    std::vector<std::set<int>> pending;      // node -> unprocessed delta

    struct copy_edge {
        int dst;
        std::optional<sem_type> filter;
        bool operator<(const copy_edge& o) const {
            return std::tie(dst, filter) < std::tie(o.dst, o.filter);
        }
    };
    std::vector<std::set<copy_edge>> out_edges;

    std::vector<alloc_site> sites;
    std::map<std::tuple<method_id, int, int>, int> site_ids;

    // Per-node statement hooks, wired when the owning method is processed.
    struct store_hook { std::string field; int src_node; };
    struct load_hook { std::string field; int dst_node; };
    struct call_hook { method_id caller; int stmt; };
    std::map<int, std::vector<store_hook>> stores;
    std::map<int, std::vector<load_hook>> loads;
    std::map<int, std::vector<call_hook>> calls;

    std::map<method_id, std::vector<std::string>> returns;  // return locals
    std::set<method_id> reachable;
    std::set<std::pair<int, method_sig>> dispatch_failures;
    std::deque<int> worklist;
    std::set<int> queued;
    std::mt19937_64 rng;

    solver(const rewritten_framework& f, const pta_options& o, pta_result* r)
        : fw(f), opts(o), h(f.model.classes), res(r), rng(o.shuffle_seed) {
        deadline = std::chrono::steady_clock::now() +
                   std::chrono::milliseconds(opts.timeout_ms);
    }

    int var_node(const method_id& m, const std::string& name) {
        auto [it, fresh] = var_ids.try_emplace({m, name}, -1);
        if (fresh) {
            it->second = static_cast<int>(pts.size());
            var_of.push_back(it->first);
            pts.emplace_back();
            pending.emplace_back();
            out_edges.emplace_back();
        }
        return it->second;
    }

    int slot_node(int site, const std::string& field) {
        auto [it, fresh] = slot_ids.try_emplace({site, field}, -1);
        if (fresh) {
            it->second = static_cast<int>(pts.size());
            pts.emplace_back();
            pending.emplace_back();
            out_edges.emplace_back();
        }
        return it->second;
    }

    int intern_site(const method_id& m, int stmt, int sub, sem_type type, bool synthetic,
                    std::optional<std::string> lit) {
        auto [it, fresh] = site_ids.try_emplace(std::tuple{m, stmt, sub}, -1);
        if (fresh) {
            it->second = static_cast<int>(sites.size());
            sites.push_back({m, stmt, sub, std::move(type), synthetic, std::move(lit)});
        }
        return it->second;
    }

    bool admits(const std::optional<sem_type>& filter, int site) const {
        if (!filter)
            return true;
        const sem_type& t = sites[site].type;
        switch (filter->kind) {
        case type_kind::cls:
            return t.is_class() && h.assignable(t.cls, filter->cls);
        case type_kind::string_t:
            return t.kind == type_kind::string_t;
        case type_kind::string_array_t:
            return t.kind == type_kind::string_array_t;
        case type_kind::opaque_t:
            return true;
        case type_kind::void_t:
            return false;
        }
        return false;
    }

    void enqueue(int node) {
        if (queued.insert(node).second)
            worklist.push_back(node);
    }

    void add_sites(int node, const std::set<int>& add,
                   const std::optional<sem_type>& filter = std::nullopt) {
        bool changed = false;
        for (int s : add) {
            if (!admits(filter, s))
                continue;
            if (pts[node].insert(s).second) {
                pending[node].insert(s);
                changed = true;
            }
        }
        if (changed)
            enqueue(node);
    }

    void add_copy(int src, int dst, std::optional<sem_type> filter) {
        if (out_edges[src].insert({dst, filter}).second)
            add_sites(dst, pts[src], filter);
    }

    const method_def* find(const method_id& m) const { return fw.find_method(m); }

    void bind_call(const method_id& caller, int stmt_idx, const statement& st,
                   const method_id& target, edge_kind kind,
                   std::optional<int> receiver_node) {
        call_edge e{caller, stmt_idx, target, kind};
        if (res->graph.edges.count(e))
            return;
        res->graph.add_edge(e);
        const method_def* tdef = find(target);
        if (!tdef) {
            process(target);  // marks reachable even if bodyless
            return;
        }
        // arguments -> parameters
        for (size_t i = 0; i < st.args.size() && i < tdef->param_names.size(); ++i) {
            int pnode = var_node(target, tdef->param_names[i]);
            const sem_type& pt = tdef->sig.params[i];
            if (st.args[i].literal) {
                int s = intern_site(caller, stmt_idx, static_cast<int>(i) + 1,
                                    sem_type::string(), false, st.args[i].value);
                add_sites(pnode, {s}, pt);
            } else {
                add_copy(var_node(caller, st.args[i].value), pnode, pt);
            }
        }
        // receiver -> this
        if (receiver_node && !tdef->is_static)
            add_copy(*receiver_node, var_node(target, "this"),
                     sem_type::of_class(target.cls));
        // returns -> result
        process(target);
        if (!st.target.empty()) {
            int rnode = var_node(caller, st.target);
            for (const auto& rv : returns[target])
                add_copy(var_node(target, rv), rnode, tdef->sig.ret);
        }
    }

    void dispatch(const method_id& caller, int stmt_idx, const statement& st,
                  int recv_node, int site) {
        const sem_type& t = sites[site].type;
        if (!t.is_class())
            return;
        if (st.direct_target) {
            bind_call(caller, stmt_idx, st, *st.direct_target, edge_kind::redirected,
                      recv_node);
            return;
        }
        std::string found_in;
        if (h.resolve_up(t.cls, st.sig, &found_in)) {
            bind_call(caller, stmt_idx, st, {found_in, st.sig}, edge_kind::dispatch,
                      recv_node);
        } else if (dispatch_failures.insert({site, st.sig}).second) {
            res->diags.push_back({severity::warning, "", st.line, st.col, "pta",
                                  "no method " + st.sig.str() + " on allocation type " +
                                      t.str()});
        }
    }

    void process(const method_id& m) {
        if (!reachable.insert(m).second)
            return;
        res->graph.nodes.insert(m);
        const method_def* def = find(m);
        if (!def)
            return;
        for (int i = 0; i < static_cast<int>(def->body.size()); ++i) {
            const statement& st = def->body[i];
            switch (st.kind) {
            case stmt_kind::alloc: {
                int s = intern_site(m, i, 0, sem_type::of_class(st.cls),
                                    is_synthetic_class(m.cls), std::nullopt);
                add_sites(var_node(m, st.target), {s});
                break;
            }
            case stmt_kind::string_const: {
                int s = intern_site(m, i, 0, sem_type::string(), false, st.literal);
                add_sites(var_node(m, st.target), {s});
                break;
            }
            case stmt_kind::string_array_const: {
                int s = intern_site(m, i, 0, sem_type::string_array(), false,
                                    std::nullopt);
                add_sites(var_node(m, st.target), {s});
                break;
            }
            case stmt_kind::copy:
                add_copy(var_node(m, st.source), var_node(m, st.target), std::nullopt);
                break;
            case stmt_kind::field_store: {
                int base = var_node(m, st.receiver);
                int src = var_node(m, st.source);
                stores[base].push_back({st.field, src});
                for (int s : pts[base])
                    wire_store(s, st.field, src);
                break;
            }
            case stmt_kind::field_load: {
                int base = var_node(m, st.receiver);
                int dst = var_node(m, st.target);
                loads[base].push_back({st.field, dst});
                for (int s : pts[base])
                    wire_load(s, st.field, dst);
                break;
            }
            case stmt_kind::virtual_call:
            case stmt_kind::transact: {
                if (st.pep)
                    break;  // terminal, never dispatched
                int recv = var_node(m, st.receiver);
                calls[recv].push_back({m, i});
                for (int s : pts[recv])
                    dispatch(m, i, st, recv, s);
                break;
            }
            case stmt_kind::static_call: {
                std::string found_in;
                if (h.resolve_up(st.cls, st.sig, &found_in)) {
                    edge_kind k = is_synthetic_class(found_in)
                                      ? edge_kind::synthetic_init
                                      : edge_kind::static_call;
                    bind_call(m, i, st, {found_in, st.sig}, k, std::nullopt);
                }
                break;
            }
            case stmt_kind::ret:
                if (!st.source.empty())
                    returns[m].push_back(st.source);
                break;
            default:
                break;  // opaque, identity markers, unrewritten service lookups
            }
        }
    }

    std::optional<sem_type> field_decl_type(const sem_type& base,
                                            const std::string& field) const {
        if (!base.is_class())
            return std::nullopt;
        std::string cur = base.cls;
        std::set<std::string> seen;
        while (!cur.empty() && seen.insert(cur).second) {
            const class_def* cd = h.find(cur);
            if (!cd)
                return std::nullopt;
            auto it = cd->fields.find(field);
            if (it != cd->fields.end())
                return it->second;
            cur = cd->superclass.value_or("");
        }
        return std::nullopt;
    }

    void wire_store(int site, const std::string& field, int src) {
        auto ft = field_decl_type(sites[site].type, field);
        if (!ft)
            return;  // field not present on this allocation type
        add_copy(src, slot_node(site, field), ft);
    }

    void wire_load(int site, const std::string& field, int dst) {
        if (!field_decl_type(sites[site].type, field))
            return;
        add_copy(slot_node(site, field), dst, std::nullopt);
    }

    int take() {
        size_t pick = 0;
        switch (opts.order) {
        case worklist_order::fifo: pick = 0; break;
        case worklist_order::lifo: pick = worklist.size() - 1; break;
        case worklist_order::shuffled: pick = rng() % worklist.size(); break;
        }
        int node = worklist[pick];
        worklist.erase(worklist.begin() + static_cast<long>(pick));
        queued.erase(node);
        return node;
    }

    bool run() {
        if (!fw.synthetic_main)
            throw std::runtime_error("build_pta: model has no synthetic main");
        res->graph.roots.insert(*fw.synthetic_main);
        process(*fw.synthetic_main);

        int steps = 0;
        while (!worklist.empty()) {
            if (++steps % 256 == 0 && std::chrono::steady_clock::now() > deadline)
                return false;
            int node = take();
            std::set<int> delta;
            delta.swap(pending[node]);
            if (delta.empty())
                continue;
            for (const auto& e : out_edges[node])
                add_sites(e.dst, delta, e.filter);
            auto sit = stores.find(node);
            if (sit != stores.end())
                for (int s : delta)
                    for (const auto& hk : sit->second)
                        wire_store(s, hk.field, hk.src_node);
            auto lit = loads.find(node);
            if (lit != loads.end())
                for (int s : delta)
                    for (const auto& hk : lit->second)
                        wire_load(s, hk.field, hk.dst_node);
            auto cit = calls.find(node);
            if (cit != calls.end()) {
                // hooks may grow while dispatch processes new methods
                for (size_t k = 0; k < cit->second.size(); ++k) {
                    call_hook hk = cit->second[k];
                    const method_def* def = find(hk.caller);
                    if (!def)
                        continue;
                    const statement& st = def->body[hk.stmt];
                    for (int s : delta)
                        dispatch(hk.caller, hk.stmt, st, node, s);
                }
            }
        }
        return true;
    }

    void finalize() {
        for (const auto& [key, id] : var_ids) {
            std::set<alloc_site> out;
            for (int s : pts[id])
                out.insert(sites[s]);
            res->state.var_pts[{key.m, key.name}] = std::move(out);
        }
        for (const auto& [key, id] : slot_ids) {
            std::set<alloc_site> out;
            for (int s : pts[id])
                out.insert(sites[s]);
            res->state.field_pts[{sites[key.site], key.field}] = std::move(out);
        }
        // Empty-receiver call sites never produced edges; report them.
        for (const auto& m : reachable) {
            const method_def* def = find(m);
            if (!def)
                continue;
            for (int i = 0; i < static_cast<int>(def->body.size()); ++i) {
                const statement& st = def->body[i];
                if ((st.kind != stmt_kind::virtual_call &&
                     st.kind != stmt_kind::transact) ||
                    st.pep)
                    continue;
                auto vit = var_ids.find({m, st.receiver});
                if (vit == var_ids.end() || pts[vit->second].empty())
                    res->suppressed.push_back({"suppressed-call", m.str(), i,
                                               "receiver '" + st.receiver +
                                                   "' has empty points-to set"});
            }
        }
    }
};

}  // namespace

pta_result build_pta(const rewritten_framework& fw, const pta_options& opts) {
    pta_result res;
    solver s(fw, opts, &res);
    res.timed_out = !s.run();
    if (!res.timed_out)
        s.finalize();
    return res;
}

std::set<method_id> resolve_call(const points_to_state& pts, const hierarchy& h,
                                 const method_id& caller, const statement& site,
                                 diagnostic_list* diags) {
    std::set<method_id> out;
    if (site.direct_target) {
        if (!pts.at(caller, site.receiver).empty())
            out.insert(*site.direct_target);
        return out;
    }
    for (const auto& s : pts.at(caller, site.receiver)) {
        if (!s.type.is_class())
            continue;
        std::string found_in;
        if (h.resolve_up(s.type.cls, site.sig, &found_in))
            out.insert({found_in, site.sig});
        else if (diags)
            diags->push_back({severity::warning, "", site.line, site.col, "pta",
                              "no method " + site.sig.str() + " on allocation type " +
                                  s.type.str()});
    }
    return out;
}

}  // namespace permlens
