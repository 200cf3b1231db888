#include "permlens/rewrite.hpp"

#include <algorithm>

namespace permlens {

namespace {

const char* kMainClass = "$synthetic.Main";
const char* kServicesClass = "$synthetic.Services";
const char* kGenerateClass = "$synthetic.Generate";

std::string mangle(const std::string& cls) {
    std::string out = cls;
    for (char& c : out)
        if (c == '.')
            c = '$';
    return out;
}

statement make_alloc(const std::string& target, const std::string& cls) {
    statement st;
    st.kind = stmt_kind::alloc;
    st.target = target;
    st.cls = cls;
    return st;
}

statement make_return(const std::string& source = "") {
    statement st;
    st.kind = stmt_kind::ret;
    st.source = source;
    return st;
}

statement make_static_call(const std::string& target, const std::string& cls,
                           const std::string& name, std::vector<operand> args = {}) {
    statement st;
    st.kind = stmt_kind::static_call;
    st.target = target;
    st.cls = cls;
    st.sig.name = name;
    st.args = std::move(args);
    return st;
}

statement make_virtual_call(const std::string& target, const std::string& recv,
                            const std::string& name, std::vector<operand> args = {}) {
    statement st;
    st.kind = stmt_kind::virtual_call;
    st.target = target;
    st.receiver = recv;
    st.sig.name = name;
    st.args = std::move(args);
    return st;
}

statement make_opaque(const std::string& target) {
    statement st;
    st.kind = stmt_kind::opaque_source;
    st.target = target;
    return st;
}

// Re-validates the transformed model and refreshes derived interval data.
void refresh(rewritten_framework& rf, const char* stage) {
    auto diags = validate(rf.model);
    for (auto& d : diags) {
        d.stage = stage;
        rf.diags.push_back(d);
    }
    if (!rf.identity_regions.empty()) {
        rf.identity_regions.clear();
        for (const auto& [cname, cd] : rf.model.classes)
            for (const auto& [sig, m] : cd.methods) {
                auto iv = compute_identity_regions(m);
                if (!iv.empty())
                    rf.identity_regions[{cname, sig}] = std::move(iv);
            }
    }
}

class_def& ensure_class(framework_model& fw, const std::string& name) {
    auto it = fw.classes.find(name);
    if (it != fw.classes.end())
        return it->second;
    class_def cd;
    cd.name = name;
    return fw.classes.emplace(name, std::move(cd)).first->second;
}

method_id add_method(class_def& cd, method_def m) {
    method_id id{cd.name, m.sig};
    cd.methods[m.sig] = std::move(m);
    return id;
}

// The synthetic main is derived state: service inits first, then drivers.
void rebuild_main(rewritten_framework& rf) {
    class_def& mc = ensure_class(rf.model, kMainClass);
    method_def main_m;
    main_m.sig.name = "main";
    main_m.is_public = true;
    main_m.is_static = true;
    int n = 0;
    for (const auto& [key, id] : rf.service_inits) {
        std::string v = "s" + std::to_string(n++);
        main_m.body.push_back(make_static_call(v, id.cls, id.sig.name));
    }
    for (const auto& [cls, id] : rf.drivers)
        main_m.body.push_back(make_static_call("", id.cls, id.sig.name));
    main_m.body.push_back(make_return());
    rf.synthetic_main = add_method(mc, std::move(main_m));
}

}  // namespace

bool glob_match(const std::string& pattern, const std::string& text) {
    size_t p = 0, t = 0, star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*')
        ++p;
    return p == pattern.size();
}

std::vector<stmt_interval> compute_identity_regions(const method_def& m) {
    std::vector<stmt_interval> out;
    int open = -1;
    for (int i = 0; i < static_cast<int>(m.body.size()); ++i) {
        if (m.body[i].kind == stmt_kind::clear_identity)
            open = i;
        else if (m.body[i].kind == stmt_kind::restore_identity && open >= 0) {
            out.push_back({open, i});
            open = -1;
        }
    }
    return out;
}

const method_def* rewritten_framework::find_method(const method_id& id) const {
    auto it = model.classes.find(id.cls);
    if (it == model.classes.end())
        return nullptr;
    auto mit = it->second.methods.find(id.sig);
    return mit == it->second.methods.end() ? nullptr : &mit->second;
}

rewritten_framework wrap(const framework_model& fw) {
    rewritten_framework rf;
    rf.model = fw;
    rf.base_name = fw.name;
    rf.base_hash = content_hash(fw);
    // Models built programmatically may not have resolved signatures yet.
    auto diags = validate(rf.model);
    for (auto& d : diags)
        rf.diags.push_back(d);
    return rf;
}

rewritten_framework redirect_services(const rewritten_framework& in) {
    rewritten_framework rf = in;
    rf.applied.push_back("redirect");
    if (rf.model.proxies.empty())
        return rf;

    hierarchy h(rf.model.classes);

    // Receiver static type resolves to a proxy when the type itself or any
    // of its supertypes is registered.
    auto proxy_for = [&](const sem_type& t) -> const std::string* {
        if (!t.is_class())
            return nullptr;
        for (const auto& s : h.supers(t.cls)) {
            auto it = rf.model.proxies.find(s);
            if (it != rf.model.proxies.end())
                return &it->first;
        }
        return nullptr;
    };

    for (auto& [cname, cd] : rf.model.classes) {
        bool is_proxy_class = rf.model.proxies.count(cname) > 0;
        for (auto& [sig, m] : cd.methods) {
            if (is_proxy_class) {
                std::vector<statement> kept;
                for (auto& st : m.body)
                    if (st.kind != stmt_kind::transact)
                        kept.push_back(st);
                m.body = std::move(kept);
            }
            for (auto& st : m.body) {
                if (st.kind != stmt_kind::virtual_call || st.direct_target || st.pep)
                    continue;
                const std::string* proxy = proxy_for(st.recv_type);
                if (!proxy)
                    continue;
                const std::string& svc = rf.model.proxies.at(*proxy);
                std::string found_in;
                const method_def* target = h.resolve_up(svc, st.sig, &found_in);
                if (!target) {
                    rf.diags.push_back(
                        {severity::error, "", st.line, st.col, "rewrite",
                         "unmatched proxy method: " + *proxy + "." + st.sig.str() +
                             " has no counterpart in service " + svc});
                    continue;
                }
                st.direct_target = method_id{found_in, st.sig};
                rf.redirections[{*proxy, st.sig}] = *st.direct_target;
            }
        }
    }
    refresh(rf, "redirect");
    return rf;
}

rewritten_framework mark_identity_regions(const rewritten_framework& in) {
    rewritten_framework rf = in;
    rf.applied.push_back("identity");
    rf.identity_regions.clear();
    for (const auto& [cname, cd] : rf.model.classes)
        for (const auto& [sig, m] : cd.methods) {
            auto iv = compute_identity_regions(m);
            if (!iv.empty())
                rf.identity_regions[{cname, sig}] = std::move(iv);
        }
    return rf;
}

rewritten_framework empty_methods(const rewritten_framework& in,
                                  const std::vector<std::string>& patterns) {
    rewritten_framework rf = in;
    for (const auto& p : patterns)
        rf.applied.push_back("empty:" + p);
    if (patterns.empty())
        return rf;

    for (const auto& pat : patterns) {
        bool matched = false;
        for (auto& [cname, cd] : rf.model.classes) {
            if (is_synthetic_class(cname) || !glob_match(pat, cname))
                continue;
            matched = true;
            for (auto& [sig, m] : cd.methods) {
                m.body.clear();
                m.body.push_back(make_return());
                rf.emptied_methods.insert({cname, sig});
            }
        }
        if (!matched)
            rf.diags.push_back({severity::warning, "", 0, 0, "rewrite",
                                "empty pattern '" + pat + "' matched no classes"});
    }
    refresh(rf, "empty");
    return rf;
}

rewritten_framework initialize_services(const rewritten_framework& in) {
    rewritten_framework rf = in;
    rf.applied.push_back("service-init");
    if (rf.model.services.empty())
        return rf;

    // One init method per concrete service; its single allocation statement
    // is the static singleton site, shared by every rewritten lookup.
    class_def& sc = ensure_class(rf.model, kServicesClass);
    for (const auto& [key, svc_cls] : rf.model.services) {
        method_def init;
        init.sig.name = "init_" + mangle(key);
        init.sig.ret = sem_type::of_class(svc_cls);
        init.is_public = true;
        init.is_static = true;
        init.body.push_back(make_alloc("o", svc_cls));
        init.body.push_back(make_return("o"));
        rf.service_inits[key] = add_method(sc, std::move(init));
    }

    for (auto& [cname, cd] : rf.model.classes) {
        if (cname == kServicesClass)
            continue;
        for (auto& [sig, m] : cd.methods) {
            for (auto& st : m.body) {
                if (st.kind != stmt_kind::get_service)
                    continue;
                if (!st.resolved_key) {
                    rf.diags.push_back({severity::warning, "", st.line, st.col, "rewrite",
                                        "dynamic service key; lookup left in place"});
                    rf.unsound.push_back({"dynamic-service-key",
                                          method_id{cname, sig}.str(), -1, st.key.value});
                    continue;
                }
                auto it = rf.service_inits.find(*st.resolved_key);
                if (it == rf.service_inits.end()) {
                    rf.diags.push_back({severity::error, "", st.line, st.col, "rewrite",
                                        "unknown service key '" + *st.resolved_key + "'"});
                    continue;
                }
                statement repl = make_static_call(st.target, it->second.cls,
                                                  it->second.sig.name);
                repl.line = st.line;
                repl.col = st.col;
                st = repl;
            }
        }
    }
    rebuild_main(rf);
    refresh(rf, "service-init");
    return rf;
}

rewritten_framework initialize_managers(const rewritten_framework& in) {
    rewritten_framework rf = in;
    rf.applied.push_back("manager-init");
    if (rf.model.managers.empty())
        return rf;

    hierarchy h(rf.model.classes);
    class_def& sc = ensure_class(rf.model, kServicesClass);

    for (const auto& [key, mgr_cls] : rf.model.managers) {
        method_def fac;
        fac.sig.name = "make_" + mangle(key);
        fac.sig.ret = sem_type::of_class(mgr_cls);
        fac.is_public = true;
        fac.is_static = true;
        fac.body.push_back(make_alloc("m", mgr_cls));
        // Wire the manager's service field to the service singleton for the
        // same key, when both exist.
        auto svc = rf.model.services.find(key);
        auto init = rf.service_inits.find(key);
        if (svc != rf.model.services.end() && init != rf.service_inits.end()) {
            const class_def* mgr = h.find(mgr_cls);
            std::string service_field;
            for (std::string cur = mgr_cls; !cur.empty();) {
                const class_def* cd = h.find(cur);
                if (!cd)
                    break;
                for (const auto& [fname, ft] : cd->fields)
                    if (ft.is_class() && h.assignable(svc->second, ft.cls)) {
                        service_field = fname;
                        break;
                    }
                if (!service_field.empty() || !cd->superclass)
                    break;
                cur = *cd->superclass;
            }
            if (!service_field.empty()) {
                fac.body.push_back(
                    make_static_call("s", init->second.cls, init->second.sig.name));
                statement store;
                store.kind = stmt_kind::field_store;
                store.receiver = "m";
                store.field = service_field;
                store.source = "s";
                fac.body.push_back(store);
            } else if (mgr) {
                rf.diags.push_back({severity::warning, "", 0, 0, "rewrite",
                                    "manager " + mgr_cls +
                                        " has no field assignable from service " +
                                        svc->second});
            }
        } else if (svc == rf.model.services.end()) {
            rf.diags.push_back({severity::warning, "", 0, 0, "rewrite",
                                "manager key '" + key + "' has no registered service"});
        }
        fac.body.push_back(make_return("m"));
        rf.manager_factories[key] = add_method(sc, std::move(fac));
    }

    for (auto& [cname, cd] : rf.model.classes) {
        if (cname == kServicesClass)
            continue;
        for (auto& [sig, m] : cd.methods) {
            for (auto& st : m.body) {
                if (st.kind != stmt_kind::get_system_service)
                    continue;
                if (!st.resolved_key) {
                    rf.diags.push_back({severity::warning, "", st.line, st.col, "rewrite",
                                        "dynamic system-service key; call left in place"});
                    rf.unsound.push_back({"dynamic-service-key",
                                          method_id{cname, sig}.str(), -1, st.key.value});
                    continue;
                }
                auto it = rf.manager_factories.find(*st.resolved_key);
                if (it == rf.manager_factories.end()) {
                    rf.diags.push_back({severity::error, "", st.line, st.col, "rewrite",
                                        "unknown system-service key '" +
                                            *st.resolved_key + "'"});
                    continue;
                }
                statement repl = make_static_call(st.target, it->second.cls,
                                                  it->second.sig.name);
                repl.line = st.line;
                repl.col = st.col;
                st = repl;
            }
        }
    }
    rebuild_main(rf);
    refresh(rf, "manager-init");
    return rf;
}

rewritten_framework generate_entry_drivers(const rewritten_framework& in,
                                           analysis_mode mode) {
    rewritten_framework rf = in;
    rf.applied.push_back(mode == analysis_mode::cha ? "drivers:cha" : "drivers:pta");

    hierarchy h(rf.model.classes);

    // generate_p: one factory per parameter type, allocating every concrete
    // subtype (over-approximation). Created on demand, pta mode only.
    std::map<std::string, method_id> generators;
    auto generator_for = [&](const std::string& cls) -> method_id {
        auto it = generators.find(cls);
        if (it != generators.end())
            return it->second;
        class_def& gc = ensure_class(rf.model, kGenerateClass);
        method_def gen;
        gen.sig.name = "gen_" + mangle(cls);
        gen.sig.ret = sem_type::of_class(cls);
        gen.is_public = true;
        gen.is_static = true;
        int n = 0;
        for (const auto& sub : h.cone(cls)) {
            const class_def* cd = h.find(sub);
            if (!cd || cd->is_abstract || is_synthetic_class(sub))
                continue;
            std::string v = "x" + std::to_string(n++);
            gen.body.push_back(make_alloc(v, sub));
            gen.body.push_back(make_return(v));
        }
        if (n == 0) {
            rf.diags.push_back({severity::warning, "", 0, 0, "rewrite",
                                "no concrete subtype of '" + cls +
                                    "'; generator yields an opaque unknown"});
            gen.body.push_back(make_opaque("x0"));
            gen.body.push_back(make_return("x0"));
        }
        method_id id = add_method(gc, std::move(gen));
        generators[cls] = id;
        return id;
    };

    // Snapshot class list before adding synthetic ones.
    std::vector<std::string> user_classes;
    for (const auto& [name, cd] : rf.model.classes)
        if (!is_synthetic_class(name))
            user_classes.push_back(name);

    class_def& mc = ensure_class(rf.model, kMainClass);
    for (const auto& cname : user_classes) {
        const class_def& cd = rf.model.classes.at(cname);
        std::vector<const method_def*> entries;
        for (const auto& [sig, m] : cd.methods) {
            if (!m.is_public)
                continue;
            if (mode == analysis_mode::pta && cd.is_abstract && !m.is_static)
                continue;
            entries.push_back(&m);
        }
        if (entries.empty())
            continue;

        method_def drv;
        drv.sig.name = "m_" + mangle(cname);
        drv.is_public = true;
        drv.is_static = true;
        int n = 0;
        bool need_receiver = false;
        for (const auto* m : entries)
            if (!m->is_static)
                need_receiver = true;
        if (need_receiver)
            drv.body.push_back(make_alloc("o", cname));
        for (const auto* m : entries) {
            std::vector<operand> args;
            for (const auto& pt : m->sig.params) {
                std::string v = "a" + std::to_string(n++);
                if (mode == analysis_mode::pta && pt.is_class()) {
                    method_id gen = generator_for(pt.cls);
                    drv.body.push_back(make_static_call(v, gen.cls, gen.sig.name));
                } else {
                    // Opaque unknowns; in pta mode this is the top string for
                    // String parameters.
                    drv.body.push_back(make_opaque(v));
                }
                args.push_back({false, v});
            }
            std::string result;
            if (m->sig.ret.kind != type_kind::void_t)
                result = "r" + std::to_string(n++);
            if (m->is_static)
                drv.body.push_back(
                    make_static_call(result, cname, m->sig.name, std::move(args)));
            else
                drv.body.push_back(
                    make_virtual_call(result, "o", m->sig.name, std::move(args)));
        }
        drv.body.push_back(make_return());
        rf.drivers[cname] = add_method(mc, std::move(drv));
    }

    rebuild_main(rf);
    refresh(rf, "drivers");
    return rf;
}

rewritten_framework run_pipeline(const framework_model& fw, analysis_mode mode,
                                 const rewrite_options& opts,
                                 const analysis_config& cfg) {
    (void)cfg;
    rewritten_framework rf = wrap(fw);
    if (opts.redirect)
        rf = redirect_services(rf);
    if (opts.identity)
        rf = mark_identity_regions(rf);
    if (!opts.empty_patterns.empty())
        rf = empty_methods(rf, opts.empty_patterns);
    if (mode == analysis_mode::pta) {
        if (opts.service_init)
            rf = initialize_services(rf);
        if (opts.manager_init)
            rf = initialize_managers(rf);
    }
    rf = generate_entry_drivers(rf, mode);
    return rf;
}

}  // namespace permlens
