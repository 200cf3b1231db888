#include "permlens/ir.hpp"

#include <algorithm>
#include <functional>

#include "permlens/printer.hpp"

namespace permlens {

bool permission_like(const std::string& lit) {
    if (lit.empty() || lit[0] < 'A' || lit[0] > 'Z')
        return false;
    for (char c : lit) {
        bool ok = (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
        if (!ok)
            return false;
    }
    return true;
}

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string content_hash(const framework_model& fw) {
    char buf[20];
    snprintf(buf, sizeof buf, "%016llx",
             static_cast<unsigned long long>(fnv1a64(print_framework(fw))));
    return std::string("fnv1a64:") + buf;
}

// ---------------------------------------------------------------------------
// hierarchy
// ---------------------------------------------------------------------------

hierarchy::hierarchy(const std::map<std::string, class_def>& classes) : classes_(&classes) {
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& [name, cd] : classes) {
        if (cd.superclass)
            children[*cd.superclass].push_back(name);
        for (const auto& i : cd.interfaces)
            children[i].push_back(name);
    }
    for (const auto& [name, cd] : classes) {
        // cone: down
        std::set<std::string>& cone = cones_[name];
        std::vector<std::string> work{name};
        while (!work.empty()) {
            std::string c = work.back();
            work.pop_back();
            if (!cone.insert(c).second)
                continue;
            auto it = children.find(c);
            if (it != children.end())
                for (const auto& k : it->second)
                    work.push_back(k);
        }
        // supers: up
        std::set<std::string>& sup = supers_[name];
        work = {name};
        while (!work.empty()) {
            std::string c = work.back();
            work.pop_back();
            if (!sup.insert(c).second)
                continue;
            auto it = classes.find(c);
            if (it == classes.end())
                continue;
            if (it->second.superclass)
                work.push_back(*it->second.superclass);
            for (const auto& i : it->second.interfaces)
                work.push_back(i);
        }
    }
}

const std::set<std::string>& hierarchy::cone(const std::string& c) const {
    auto it = cones_.find(c);
    return it == cones_.end() ? empty_ : it->second;
}

const std::set<std::string>& hierarchy::supers(const std::string& c) const {
    auto it = supers_.find(c);
    return it == supers_.end() ? empty_ : it->second;
}

bool hierarchy::assignable(const std::string& from, const std::string& to) const {
    return supers(from).count(to) > 0;
}

const class_def* hierarchy::find(const std::string& c) const {
    auto it = classes_->find(c);
    return it == classes_->end() ? nullptr : &it->second;
}

const method_def* hierarchy::resolve_up(const std::string& c, const method_sig& sig,
                                        std::string* found_in) const {
    std::string cur = c;
    std::set<std::string> seen;
    while (!cur.empty() && seen.insert(cur).second) {
        const class_def* cd = find(cur);
        if (!cd)
            return nullptr;
        auto it = cd->methods.find(sig);
        if (it != cd->methods.end()) {
            if (found_in)
                *found_in = cur;
            return &it->second;
        }
        cur = cd->superclass.value_or("");
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

namespace {

// Looks up classes across the framework and, for apps, the app's own classes.
struct class_view {
    const std::map<std::string, class_def>* primary = nullptr;
    const std::map<std::string, class_def>* secondary = nullptr;

    const class_def* find(const std::string& name) const {
        if (primary) {
            auto it = primary->find(name);
            if (it != primary->end())
                return &it->second;
        }
        if (secondary) {
            auto it = secondary->find(name);
            if (it != secondary->end())
                return &it->second;
        }
        return nullptr;
    }
};

struct validator {
    class_view view;
    const framework_model* fw;  // may be null for standalone app validation
    const analysis_config* cfg;
    diagnostic_list* diags;
    std::map<std::string, std::set<std::string>> cones;
    std::map<std::string, std::set<std::string>> supers;

    void err(int line, int col, const std::string& msg) {
        diags->push_back({severity::error, "", line, col, "validate", msg});
    }
    void warn(int line, int col, const std::string& msg) {
        diags->push_back({severity::warning, "", line, col, "validate", msg});
    }

    void build_relations(const std::map<std::string, class_def>& classes) {
        std::map<std::string, std::vector<std::string>> children;
        auto add_class = [&](const std::map<std::string, class_def>& m) {
            for (const auto& [name, cd] : m) {
                if (cd.superclass)
                    children[*cd.superclass].push_back(name);
                for (const auto& i : cd.interfaces)
                    children[i].push_back(name);
            }
        };
        add_class(classes);
        if (view.secondary)
            add_class(*view.secondary);
        std::set<std::string> all;
        for (const auto& [name, cd] : classes)
            all.insert(name);
        if (view.secondary)
            for (const auto& [name, cd] : *view.secondary)
                all.insert(name);
        for (const auto& name : all) {
            auto& cone = cones[name];
            std::vector<std::string> work{name};
            while (!work.empty()) {
                std::string c = work.back();
                work.pop_back();
                if (!cone.insert(c).second)
                    continue;
                auto it = children.find(c);
                if (it != children.end())
                    for (const auto& k : it->second)
                        work.push_back(k);
            }
            auto& sup = supers[name];
            work = {name};
            while (!work.empty()) {
                std::string c = work.back();
                work.pop_back();
                if (!sup.insert(c).second)
                    continue;
                const class_def* cd = view.find(c);
                if (!cd)
                    continue;
                if (cd->superclass)
                    work.push_back(*cd->superclass);
                for (const auto& i : cd->interfaces)
                    work.push_back(i);
            }
        }
    }

    bool class_is_context(const std::string& c) const {
        auto it = supers.find(c);
        if (it == supers.end())
            return false;
        for (const auto& s : it->second) {
            std::string base = s;
            auto dot = base.rfind('.');
            if (dot != std::string::npos)
                base = base.substr(dot + 1);
            if (base == "Context" || base == "ContextWrapper")
                return true;
        }
        return false;
    }

    // All candidate signatures named `name` with `arity` params, searching the
    // superclass chain of `cls` and then its cone.
    std::set<method_sig> candidate_sigs(const std::string& cls, const std::string& name,
                                        size_t arity) const {
        std::set<method_sig> out;
        auto scan = [&](const std::string& c) {
            const class_def* cd = view.find(c);
            if (!cd)
                return;
            for (const auto& [sig, def] : cd->methods)
                if (sig.name == name && sig.params.size() == arity)
                    out.insert(sig);
        };
        auto su = supers.find(cls);
        if (su != supers.end())
            for (const auto& c : su->second)
                scan(c);
        auto co = cones.find(cls);
        if (co != cones.end())
            for (const auto& c : co->second)
                scan(c);
        return out;
    }

    sem_type resolve_named_type(const std::string& t, int line, int col, bool lenient) {
        if (t == "String")
            return sem_type::string();
        if (t == "StringArray")
            return sem_type::string_array();
        if (t == "Opaque")
            return sem_type::opaque();
        if (!view.find(t) && !lenient)
            err(line, col, "unresolved class reference '" + t + "'");
        return sem_type::of_class(t);
    }

    void check_permission_literal(const std::string& lit, int line, int col) {
        if (fw && permission_like(lit) && !fw->permissions.count(lit))
            err(line, col, "permission-like literal '" + lit + "' is not a declared permission");
    }

    // Flow-insensitive lexical resolution of a string-valued local to a single
    // constant, used for service keys.
    std::optional<std::string> lexical_key(const method_def& m, const std::string& local) {
        std::set<std::string> found;
        std::set<std::string> visited;
        std::function<void(const std::string&)> chase = [&](const std::string& v) {
            if (!visited.insert(v).second)
                return;
            for (const auto& st : m.body) {
                if (st.target != v)
                    continue;
                if (st.kind == stmt_kind::string_const)
                    found.insert(st.literal);
                else if (st.kind == stmt_kind::copy)
                    chase(st.source);
                else
                    found.insert(std::string());  // non-constant source poisons
            }
        };
        chase(local);
        if (found.size() == 1 && !found.begin()->empty())
            return *found.begin();
        return std::nullopt;
    }

    std::optional<sem_type> field_type(const std::string& cls, const std::string& field) const {
        std::string cur = cls;
        std::set<std::string> seen;
        while (!cur.empty() && seen.insert(cur).second) {
            const class_def* cd = view.find(cur);
            if (!cd)
                return std::nullopt;
            auto it = cd->fields.find(field);
            if (it != cd->fields.end())
                return it->second;
            cur = cd->superclass.value_or("");
        }
        return std::nullopt;
    }

    void validate_method(const std::string& cls, method_def& m, bool lenient_classes) {
        std::map<std::string, sem_type> env;
        if (!m.is_static)
            env["this"] = sem_type::of_class(cls);
        for (size_t i = 0; i < m.param_names.size(); ++i)
            env[m.param_names[i]] = m.sig.params[i];

        bool identity_open = false;
        auto require = [&](const std::string& v, int line, int col) -> sem_type {
            auto it = env.find(v);
            if (it == env.end()) {
                err(line, col, "use of unassigned local '" + v + "'");
                return sem_type::opaque();
            }
            return it->second;
        };

        for (auto& st : m.body) {
            switch (st.kind) {
            case stmt_kind::alloc: {
                if (!view.find(st.cls) && !lenient_classes)
                    err(st.line, st.col, "unresolved class reference '" + st.cls + "'");
                env[st.target] = sem_type::of_class(st.cls);
                break;
            }
            case stmt_kind::copy:
                env[st.target] = require(st.source, st.line, st.col);
                break;
            case stmt_kind::field_store: {
                sem_type base = require(st.receiver, st.line, st.col);
                require(st.source, st.line, st.col);
                if (base.is_class() && !field_type(base.cls, st.field) && !lenient_classes)
                    err(st.line, st.col,
                        "unresolved field '" + st.field + "' on " + base.str());
                break;
            }
            case stmt_kind::field_load: {
                sem_type base = require(st.receiver, st.line, st.col);
                std::optional<sem_type> ft;
                if (base.is_class())
                    ft = field_type(base.cls, st.field);
                if (!ft && base.is_class() && !lenient_classes)
                    err(st.line, st.col,
                        "unresolved field '" + st.field + "' on " + base.str());
                env[st.target] = ft.value_or(sem_type::opaque());
                break;
            }
            case stmt_kind::string_const:
                check_permission_literal(st.literal, st.line, st.col);
                env[st.target] = sem_type::string();
                break;
            case stmt_kind::string_array_const:
                for (const auto& l : st.literals)
                    check_permission_literal(l, st.line, st.col);
                env[st.target] = sem_type::string_array();
                break;
            case stmt_kind::opaque_source:
                env[st.target] = sem_type::opaque();
                break;
            case stmt_kind::virtual_call:
            case stmt_kind::transact: {
                sem_type recv = require(st.receiver, st.line, st.col);
                st.recv_type = recv;
                for (const auto& a : st.args) {
                    if (a.literal)
                        check_permission_literal(a.value, st.line, st.col);
                    else
                        require(a.value, st.line, st.col);
                }
                std::string name = st.kind == stmt_kind::transact ? "transact" : st.sig.name;
                std::set<method_sig> cands;
                if (recv.is_class())
                    cands = candidate_sigs(recv.cls, name, st.args.size());
                if (cands.size() == 1) {
                    st.sig = *cands.begin();
                } else if (cands.size() > 1) {
                    err(st.line, st.col, "ambiguous call '" + name + "' (" +
                                             std::to_string(st.args.size()) +
                                             " args) in hierarchy of " + recv.str());
                } else {
                    st.sig.name = name;
                    st.sig.params.assign(st.args.size(), sem_type::opaque());
                    st.sig.ret = sem_type::opaque();
                }
                if (st.kind == stmt_kind::virtual_call && cfg->peps.contains(name)) {
                    st.pep = !cfg->strict_pep ||
                             (recv.is_class() && class_is_context(recv.cls));
                }
                if (!st.target.empty())
                    env[st.target] = st.sig.ret;
                break;
            }
            case stmt_kind::static_call: {
                if (!view.find(st.cls) && !lenient_classes)
                    err(st.line, st.col, "unresolved class reference '" + st.cls + "'");
                for (const auto& a : st.args) {
                    if (a.literal)
                        check_permission_literal(a.value, st.line, st.col);
                    else
                        require(a.value, st.line, st.col);
                }
                std::set<method_sig> cands;
                std::string cur = st.cls;
                std::set<std::string> seen;
                while (!cur.empty() && seen.insert(cur).second) {
                    const class_def* cd = view.find(cur);
                    if (!cd)
                        break;
                    for (const auto& [sig, def] : cd->methods)
                        if (sig.name == st.sig.name && sig.params.size() == st.args.size())
                            cands.insert(sig);
                    if (!cands.empty())
                        break;
                    cur = cd->superclass.value_or("");
                }
                if (cands.size() == 1) {
                    st.sig = *cands.begin();
                } else if (cands.size() > 1) {
                    err(st.line, st.col, "ambiguous static call '" + st.sig.name + "'");
                } else {
                    st.sig.params.assign(st.args.size(), sem_type::opaque());
                    st.sig.ret = sem_type::opaque();
                }
                if (!st.target.empty())
                    env[st.target] = st.sig.ret;
                break;
            }
            case stmt_kind::get_service:
            case stmt_kind::get_system_service: {
                std::optional<std::string> key;
                if (st.key.literal)
                    key = st.key.value;
                else {
                    require(st.key.value, st.line, st.col);
                    key = lexical_key(m, st.key.value);
                }
                st.resolved_key = key;
                sem_type t = sem_type::opaque();
                if (key && fw) {
                    const auto& reg =
                        st.kind == stmt_kind::get_service ? fw->services : fw->managers;
                    auto it = reg.find(*key);
                    if (it != reg.end())
                        t = sem_type::of_class(it->second);
                }
                env[st.target] = t;
                break;
            }
            case stmt_kind::clear_identity:
                if (identity_open)
                    err(st.line, st.col, "unbalanced identity region: nested clearIdentity");
                identity_open = true;
                break;
            case stmt_kind::restore_identity:
                if (!identity_open)
                    err(st.line, st.col,
                        "unbalanced identity region: restoreIdentity without clearIdentity");
                identity_open = false;
                break;
            case stmt_kind::ret:
                if (!st.source.empty())
                    require(st.source, st.line, st.col);
                break;
            }
        }
        if (identity_open)
            err(m.body.empty() ? 0 : m.body.back().line, 0,
                "unbalanced identity region: clearIdentity without restoreIdentity");
    }

    void validate_classes(std::map<std::string, class_def>& classes, bool lenient_classes) {
        // superclass/interface resolution and cycle detection
        for (auto& [name, cd] : classes) {
            if (cd.superclass && !view.find(*cd.superclass) && !lenient_classes)
                err(0, 0, "unresolved class reference '" + *cd.superclass +
                              "' (superclass of " + name + ")");
            for (const auto& i : cd.interfaces)
                if (!view.find(i) && !lenient_classes)
                    err(0, 0, "unresolved class reference '" + i + "' (interface of " +
                                  name + ")");
            std::set<std::string> chain;
            std::string cur = name;
            while (true) {
                if (!chain.insert(cur).second) {
                    err(0, 0, "cyclic superclass chain through '" + cur + "'");
                    break;
                }
                const class_def* c = view.find(cur);
                if (!c || !c->superclass)
                    break;
                cur = *c->superclass;
            }
            for (auto& [fname, ft] : cd.fields) {
                if (ft.is_class() && !view.find(ft.cls) && !lenient_classes)
                    err(0, 0, "unresolved class reference '" + ft.cls + "' (field " +
                                  name + "." + fname + ")");
            }
        }
        build_relations(classes);
        for (auto& [name, cd] : classes) {
            for (auto& [sig, m] : cd.methods) {
                for (auto& pt : m.sig.params)
                    if (pt.is_class() && !view.find(pt.cls) && !lenient_classes)
                        err(0, 0, "unresolved class reference '" + pt.cls +
                                      "' (parameter of " + name + "." + sig.str() + ")");
                if (m.sig.ret.is_class() && !view.find(m.sig.ret.cls) && !lenient_classes)
                    err(0, 0, "unresolved class reference '" + m.sig.ret.cls +
                                  "' (return of " + name + "." + sig.str() + ")");
                validate_method(name, m, lenient_classes);
            }
        }
    }
};

}  // namespace

diagnostic_list validate(framework_model& fw, const analysis_config& cfg) {
    diagnostic_list diags;
    validator v;
    v.view.primary = &fw.classes;
    v.fw = &fw;
    v.cfg = &cfg;
    v.diags = &diags;

    for (const auto& [key, cls] : fw.services)
        if (!fw.classes.count(cls))
            v.err(0, 0, "service '" + key + "' targets unknown class '" + cls + "'");
    for (const auto& [key, cls] : fw.managers)
        if (!fw.classes.count(cls))
            v.err(0, 0, "manager '" + key + "' targets unknown class '" + cls + "'");
    for (const auto& [proxy, svc] : fw.proxies) {
        if (!fw.classes.count(proxy))
            v.err(0, 0, "proxy declaration references unknown class '" + proxy + "'");
        if (!fw.classes.count(svc))
            v.err(0, 0, "proxy '" + proxy + "' fronts unknown class '" + svc + "'");
    }

    v.validate_classes(fw.classes, /*lenient_classes=*/false);
    return diags;
}

diagnostic_list validate(app_model& app, const framework_model* fw,
                         const analysis_config& cfg) {
    diagnostic_list diags;
    validator v;
    v.view.primary = &app.classes;
    v.view.secondary = fw ? &fw->classes : nullptr;
    v.fw = fw;
    v.cfg = &cfg;
    v.diags = &diags;

    if (fw) {
        for (const auto& p : app.declared)
            if (!fw->permissions.count(p))
                v.err(0, 0, "declared permission '" + p +
                                "' is not in the framework universe");
    }
    // Standalone apps defer class-reference resolution to bind time.
    v.validate_classes(app.classes, /*lenient_classes=*/fw == nullptr);
    return diags;
}

std::vector<method_id> entry_points(const framework_model& fw, analysis_mode mode) {
    std::vector<method_id> out;
    for (const auto& [name, cd] : fw.classes) {
        if (is_synthetic_class(name))
            continue;
        for (const auto& [sig, m] : cd.methods) {
            if (!m.is_public)
                continue;
            if (mode == analysis_mode::pta && cd.is_abstract && !m.is_static)
                continue;
            out.push_back({name, sig});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const method_id& a, const method_id& b) { return a.str() < b.str(); });
    return out;
}

}  // namespace permlens
