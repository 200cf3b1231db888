#include "permlens/corpus.hpp"

#include <random>
#include <stdexcept>

#include "permlens/printer.hpp"
#include "permlens/string_analysis.hpp"

namespace permlens {

void corpus_spec::check() const {
    auto range_ok = [](std::pair<int, int> r) { return r.first >= 1 && r.second >= r.first; };
    if (model_count < 1)
        throw std::invalid_argument("corpus_spec: model_count must be >= 1");
    if (!range_ok(class_count) || !range_ok(methods_per_class))
        throw std::invalid_argument("corpus_spec: empty range");
    for (double d : {call_density, pep_density, cycle_probability})
        if (d < 0.0 || d > 1.0)
            throw std::invalid_argument("corpus_spec: density out of [0,1]");
    if (permission_count < 1)
        throw std::invalid_argument("corpus_spec: need at least one permission");
}

namespace {

// Explicit modulo draws; distribution objects are not portable across
// standard library implementations.
struct dice {
    std::mt19937_64 rng;
    explicit dice(uint64_t seed) : rng(seed) {}
    int below(int n) { return n <= 1 ? 0 : static_cast<int>(rng() % n); }
    int in(std::pair<int, int> r) { return r.first + below(r.second - r.first + 1); }
    bool chance(double p) { return (rng() % 10000) < static_cast<uint64_t>(p * 10000); }
};

struct builder {
    const corpus_spec& spec;
    dice& d;
    framework_model fw;
    int pep_counter = 0;
    int local_counter = 0;

    std::string fresh(const char* prefix) {
        return std::string(prefix) + std::to_string(local_counter++);
    }

    std::string perm(int i) { return "P" + std::to_string(i % spec.permission_count); }
    std::string random_perm() { return perm(d.below(spec.permission_count)); }

    statement stmt_alloc(const std::string& t, const std::string& c) {
        statement s;
        s.kind = stmt_kind::alloc;
        s.target = t;
        s.cls = c;
        return s;
    }
    statement stmt_opaque(const std::string& t) {
        statement s;
        s.kind = stmt_kind::opaque_source;
        s.target = t;
        return s;
    }
    statement stmt_const(const std::string& t, const std::string& lit) {
        statement s;
        s.kind = stmt_kind::string_const;
        s.target = t;
        s.literal = lit;
        return s;
    }
    statement stmt_copy(const std::string& t, const std::string& src) {
        statement s;
        s.kind = stmt_kind::copy;
        s.target = t;
        s.source = src;
        return s;
    }
    statement stmt_vcall(const std::string& recv, const std::string& name,
                         std::vector<operand> args = {}) {
        statement s;
        s.kind = stmt_kind::virtual_call;
        s.receiver = recv;
        s.sig.name = name;
        s.args = std::move(args);
        return s;
    }
    statement stmt_scall(const std::string& cls, const std::string& name) {
        statement s;
        s.kind = stmt_kind::static_call;
        s.cls = cls;
        s.sig.name = name;
        return s;
    }
    statement stmt_ret() {
        statement s;
        s.kind = stmt_kind::ret;
        return s;
    }

    // A PEP of the given category appended to the body; the receiver is an
    // opaque local since enforcement points are recognized by name.
    void add_pep(class_def& cls, method_def& m, res_category cat) {
        std::string cx = fresh("cx");
        m.body.push_back(stmt_opaque(cx));
        switch (cat) {
        case res_category::literal:
            m.body.push_back(stmt_vcall(cx, "checkCallingPermission",
                                        {{true, random_perm()}}));
            break;
        case res_category::flow: {
            std::string v0 = fresh("v"), v1 = fresh("v");
            m.body.push_back(stmt_const(v0, random_perm()));
            m.body.push_back(stmt_copy(v1, v0));
            m.body.push_back(stmt_vcall(cx, "checkCallingPermission", {{false, v1}}));
            break;
        }
        case res_category::array: {
            std::string va = fresh("va");
            statement arr;
            arr.kind = stmt_kind::string_array_const;
            arr.target = va;
            arr.literals = {random_perm(), random_perm()};
            m.body.push_back(arr);
            m.body.push_back(
                stmt_vcall(cx, "enforceCallingOrSelfPermission", {{false, va}}));
            break;
        }
        case res_category::parameter_descent: {
            // A helper with exactly one caller, so the descent target is
            // unambiguous regardless of traversal order.
            method_def helper;
            helper.sig.name = "pdh" + std::to_string(pep_counter++);
            helper.sig.params = {sem_type::string()};
            helper.param_names = {"p"};
            helper.is_public = false;
            helper.is_static = true;
            std::string hx = fresh("hx");
            helper.body.push_back(stmt_opaque(hx));
            helper.body.push_back(stmt_vcall(hx, "enforceCallingPermission", {{false, "p"}}));
            helper.body.push_back(stmt_ret());
            statement call = stmt_scall(cls.name, helper.sig.name);
            call.args = {{true, random_perm()}};
            cls.methods[helper.sig] = helper;
            m.body.push_back(call);
            break;
        }
        case res_category::unresolved: {
            std::string vu = fresh("vu");
            m.body.push_back(stmt_opaque(vu));
            m.body.push_back(stmt_vcall(cx, "checkPermission", {{false, vu}}));
            break;
        }
        }
    }

    // Call from m to callee, materializing an exact-typed receiver.
    void add_call(method_def& m, const std::string& callee_cls, const method_def& callee) {
        std::vector<operand> args;
        for (size_t i = 0; i < callee.sig.params.size(); ++i) {
            std::string a = fresh("a");
            if (callee.sig.params[i].kind == type_kind::string_t) {
                m.body.push_back(stmt_const(a, "arg" + std::to_string(i)));
            } else {
                m.body.push_back(stmt_opaque(a));
            }
            args.push_back({false, a});
        }
        if (callee.is_static) {
            statement s = stmt_scall(callee_cls, callee.sig.name);
            s.args = std::move(args);
            m.body.push_back(s);
        } else {
            std::string r = fresh("r");
            m.body.push_back(stmt_alloc(r, callee_cls));
            if (callee.is_ctor()) {
                m.body.push_back(stmt_vcall(r, "<init>", std::move(args)));
            } else {
                m.body.push_back(stmt_vcall(r, callee.sig.name, std::move(args)));
            }
        }
    }
};

void add_services(builder& b) {
    for (int s = 0; s < b.spec.service_count; ++s) {
        std::string svc_cls = "g.Svc" + std::to_string(s);
        std::string key = "svc" + std::to_string(s);
        class_def svc;
        svc.name = svc_cls;
        method_def call;
        call.sig.name = "call" + std::to_string(s);
        call.is_public = true;
        std::string cx = b.fresh("cx");
        call.body.push_back(b.stmt_opaque(cx));
        call.body.push_back(
            b.stmt_vcall(cx, "checkCallingPermission", {{true, b.random_perm()}}));
        call.body.push_back(b.stmt_ret());
        svc.methods[call.sig] = call;
        b.fw.classes[svc_cls] = svc;
        b.fw.services[key] = svc_cls;

        class_def user;
        user.name = "g.SvcUser" + std::to_string(s);
        method_def um;
        um.sig.name = "use" + std::to_string(s);
        um.is_public = true;
        statement gs;
        gs.kind = stmt_kind::get_service;
        gs.target = "h";
        gs.key = {true, key};
        um.body.push_back(gs);
        um.body.push_back(b.stmt_vcall("h", call.sig.name));
        um.body.push_back(b.stmt_ret());
        user.methods[um.sig] = um;
        b.fw.classes[user.name] = user;
    }
}

void add_proxies(builder& b) {
    if (b.spec.proxy_count <= 0)
        return;
    class_def binder;
    binder.name = "g.Binder";
    {
        method_def tr;
        tr.sig.name = "transact";
        tr.sig.params = {sem_type::opaque()};
        tr.param_names = {"d"};
        tr.is_public = true;
        statement t;
        t.kind = stmt_kind::virtual_call;
        t.receiver = "this";
        t.sig.name = "onTransact";
        t.args = {{false, "d"}};
        tr.body.push_back(t);
        tr.body.push_back(b.stmt_ret());
        binder.methods[tr.sig] = tr;

        method_def ot;
        ot.sig.name = "onTransact";
        ot.sig.params = {sem_type::opaque()};
        ot.param_names = {"d"};
        ot.is_public = true;
        ot.body.push_back(b.stmt_ret());
        binder.methods[ot.sig] = ot;
    }
    b.fw.classes[binder.name] = binder;

    for (int i = 0; i < b.spec.proxy_count; ++i) {
        std::string svc_cls = "g.PSvc" + std::to_string(i);
        std::string proxy_cls = "g.Proxy" + std::to_string(i);
        class_def svc;
        svc.name = svc_cls;
        svc.superclass = "g.Binder";
        method_def pm;
        pm.sig.name = "pm" + std::to_string(i);
        pm.is_public = true;
        std::string cx = b.fresh("cx");
        pm.body.push_back(b.stmt_opaque(cx));
        pm.body.push_back(
            b.stmt_vcall(cx, "checkCallingPermission", {{true, b.random_perm()}}));
        pm.body.push_back(b.stmt_ret());
        svc.methods[pm.sig] = pm;
        method_def ot;
        ot.sig.name = "onTransact";
        ot.sig.params = {sem_type::opaque()};
        ot.param_names = {"d"};
        ot.is_public = true;
        ot.body.push_back(b.stmt_vcall("this", pm.sig.name));
        ot.body.push_back(b.stmt_ret());
        svc.methods[ot.sig] = ot;
        b.fw.classes[svc_cls] = svc;

        class_def proxy;
        proxy.name = proxy_cls;
        proxy.fields["rem"] = sem_type::of_class("g.Binder");
        method_def ctor;
        ctor.sig.name = "<init>";
        ctor.is_public = true;
        ctor.body.push_back(b.stmt_alloc("bb", "g.Binder"));
        statement fs;
        fs.kind = stmt_kind::field_store;
        fs.receiver = "this";
        fs.field = "rem";
        fs.source = "bb";
        ctor.body.push_back(fs);
        ctor.body.push_back(b.stmt_ret());
        proxy.methods[ctor.sig] = ctor;
        method_def fwd;
        fwd.sig.name = pm.sig.name;
        fwd.is_public = true;
        fwd.body.push_back(b.stmt_opaque("d"));
        statement fl;
        fl.kind = stmt_kind::field_load;
        fl.target = "rm";
        fl.receiver = "this";
        fl.field = "rem";
        fwd.body.push_back(fl);
        statement tx;
        tx.kind = stmt_kind::transact;
        tx.receiver = "rm";
        tx.args = {{false, "d"}};
        fwd.body.push_back(tx);
        fwd.body.push_back(b.stmt_ret());
        proxy.methods[fwd.sig] = fwd;
        b.fw.classes[proxy_cls] = proxy;
        b.fw.proxies[proxy_cls] = svc_cls;

        class_def api;
        api.name = "g.ProxyUser" + std::to_string(i);
        method_def am;
        am.sig.name = "api" + std::to_string(i);
        am.is_public = true;
        am.body.push_back(b.stmt_alloc("px", proxy_cls));
        am.body.push_back(b.stmt_vcall("px", "<init>"));
        am.body.push_back(b.stmt_vcall("px", pm.sig.name));
        am.body.push_back(b.stmt_ret());
        api.methods[am.sig] = am;
        b.fw.classes[api.name] = api;
    }
}

generated_model generate_one(const corpus_spec& spec, dice& d, int index,
                             bool guarantee_coverage) {
    builder b{spec, d, {}, 0, 0};
    b.fw.name = "gen" + std::to_string(index);
    for (int p = 0; p < spec.permission_count; ++p)
        b.fw.permissions.insert(b.perm(p));

    int n_classes = d.in(spec.class_count);
    std::vector<std::string> names;
    for (int c = 0; c < n_classes; ++c)
        names.push_back("g.C" + std::to_string(c));

    // Skeleton classes with hierarchy links to earlier ones.
    for (int c = 0; c < n_classes; ++c) {
        class_def cd;
        cd.name = names[c];
        if (c > 0 && d.chance(0.35))
            cd.superclass = names[d.below(c)];
        if (c > 0 && d.chance(0.15))
            cd.is_abstract = true;
        b.fw.classes[cd.name] = cd;
    }

    // Method skeletons first so calls can target anything.
    struct mslot {
        std::string cls;
        method_sig sig;
    };
    std::vector<mslot> slots;
    for (int c = 0; c < n_classes; ++c) {
        class_def& cd = b.fw.classes[names[c]];
        int n_methods = d.in(spec.methods_per_class);
        for (int k = 0; k < n_methods; ++k) {
            method_def m;
            m.sig.name = "m" + std::to_string(k);
            m.is_public = d.chance(0.75);
            m.is_static = d.chance(0.1);
            cd.methods[m.sig] = m;
            slots.push_back({cd.name, m.sig});
        }
    }

    // Polymorphic override pairs: a subclass redeclares a superclass method.
    for (int c = 0; c < n_classes; ++c) {
        class_def& cd = b.fw.classes[names[c]];
        if (!cd.superclass || !d.chance(0.4))
            continue;
        const class_def& sup = b.fw.classes[*cd.superclass];
        if (sup.methods.empty())
            continue;
        auto it = sup.methods.begin();
        std::advance(it, d.below(static_cast<int>(sup.methods.size())));
        if (!cd.methods.count(it->first)) {
            method_def m;
            m.sig = it->first;
            m.is_public = it->second.is_public;
            m.is_static = false;
            if (!m.is_static && !it->second.is_static) {
                cd.methods[m.sig] = m;
                slots.push_back({cd.name, m.sig});
            }
        }
    }

    // Bodies: calls, PEPs, poly sites.
    std::vector<res_category> cats{res_category::literal, res_category::flow,
                                   res_category::array,
                                   res_category::parameter_descent,
                                   res_category::unresolved};
    size_t cat_rotor = 0;
    for (const auto& slot : slots) {
        class_def& cd = b.fw.classes[slot.cls];
        method_def& m = cd.methods[slot.sig];
        int n_calls = d.chance(spec.call_density) ? 1 + d.below(3) : 0;
        for (int k = 0; k < n_calls; ++k) {
            const mslot& t = slots[d.below(static_cast<int>(slots.size()))];
            const method_def& callee = b.fw.classes[t.cls].methods[t.sig];
            if (callee.is_static || !b.fw.classes[t.cls].is_abstract)
                b.add_call(m, t.cls, callee);
        }
        if (d.chance(spec.pep_density)) {
            res_category cat = cats[d.below(5)];
            b.add_pep(cd, m, cat);
            (void)cat_rotor;
        }
        // Field-routed polymorphic dispatch when a super override pair exists.
        if (cd.superclass && d.chance(0.3)) {
            const class_def& sup = b.fw.classes[*cd.superclass];
            for (const auto& [sig, sm] : sup.methods) {
                if (sm.is_static || sig.name == "<init>" || !cd.methods.count(sig))
                    continue;
                cd.fields.emplace("pf", sem_type::of_class(*cd.superclass));
                std::string t = b.fresh("t"), u = b.fresh("u");
                m.body.push_back(b.stmt_alloc(t, cd.name));
                statement fs;
                fs.kind = stmt_kind::field_store;
                fs.receiver = "this";
                fs.field = "pf";
                fs.source = t;
                m.body.push_back(fs);
                statement fl;
                fl.kind = stmt_kind::field_load;
                fl.target = u;
                fl.receiver = "this";
                fl.field = "pf";
                m.body.push_back(fl);
                m.body.push_back(b.stmt_vcall(u, sig.name));
                break;
            }
        }
        m.body.push_back(b.stmt_ret());
    }

    // Cycles between two concrete-class methods.
    bool want_cycle = spec.cycle_probability >= 1.0 || d.chance(spec.cycle_probability);
    if (want_cycle) {
        std::vector<mslot> eligible;
        for (const auto& s : slots)
            if (!b.fw.classes[s.cls].methods[s.sig].is_static && s.sig.name != "<init>")
                eligible.push_back(s);
        if (eligible.size() >= 2) {
            const mslot& a = eligible[d.below(static_cast<int>(eligible.size()))];
            const mslot& bb = eligible[d.below(static_cast<int>(eligible.size()))];
            if (!(a.cls == bb.cls && a.sig == bb.sig)) {
                auto& ma = b.fw.classes[a.cls].methods[a.sig];
                auto& mb = b.fw.classes[bb.cls].methods[bb.sig];
                std::string ra = b.fresh("cy"), rb = b.fresh("cy");
                ma.body.insert(ma.body.end() - 1, b.stmt_alloc(ra, bb.cls));
                ma.body.insert(ma.body.end() - 1, b.stmt_vcall(ra, bb.sig.name));
                mb.body.insert(mb.body.end() - 1, b.stmt_alloc(rb, a.cls));
                mb.body.insert(mb.body.end() - 1, b.stmt_vcall(rb, a.sig.name));
            } else {
                auto& ma = b.fw.classes[a.cls].methods[a.sig];
                std::string ra = b.fresh("cy");
                ma.body.insert(ma.body.end() - 1, b.stmt_alloc(ra, a.cls));
                ma.body.insert(ma.body.end() - 1, b.stmt_vcall(ra, a.sig.name));
            }
        }
    }

    // Category coverage: the first model carries one PEP of every category in
    // a dedicated class.
    if (guarantee_coverage) {
        class_def cov;
        cov.name = "g.Coverage";
        int k = 0;
        for (res_category cat : cats) {
            method_def m;
            m.sig.name = "cov" + std::to_string(k++);
            m.is_public = true;
            b.add_pep(cov, m, cat);
            m.body.push_back(b.stmt_ret());
            cov.methods[m.sig] = m;
        }
        b.fw.classes[cov.name] = cov;
    }

    add_services(b);
    add_proxies(b);

    auto diags = validate(b.fw);
    if (has_errors(diags)) {
        std::string msg = "generated model failed validation:";
        for (const auto& dg : diags)
            if (dg.sev == severity::error)
                msg += "\n  " + dg.str();
        msg += "\n" + print_framework(b.fw);
        throw std::logic_error(msg);
    }

    generated_model out;
    out.fw = std::move(b.fw);

    // Apps calling random entries with random declared sets.
    auto entries = entry_points(out.fw, analysis_mode::cha);
    for (int a = 0; a < spec.apps_per_model; ++a) {
        app_model app;
        app.name = out.fw.name + "-app" + std::to_string(a);
        for (int p = 0; p < spec.permission_count; ++p)
            if (d.chance(0.4))
                app.declared.insert(b.perm(p));
        class_def main_cls;
        main_cls.name = "app.Main";
        method_def run;
        run.sig.name = "run";
        run.is_public = true;
        int n_calls = entries.empty() ? 0 : 1 + d.below(4);
        int lc = 0;
        for (int k = 0; k < n_calls; ++k) {
            const method_id& e = entries[d.below(static_cast<int>(entries.size()))];
            const class_def& ec = out.fw.classes.at(e.cls);
            const method_def& em = ec.methods.at(e.sig);
            std::vector<operand> args;
            for (size_t i = 0; i < em.sig.params.size(); ++i) {
                std::string v = "x" + std::to_string(lc++);
                statement s;
                s.kind = stmt_kind::opaque_source;
                s.target = v;
                run.body.push_back(s);
                args.push_back({false, v});
            }
            if (em.is_static) {
                statement s;
                s.kind = stmt_kind::static_call;
                s.cls = e.cls;
                s.sig.name = e.sig.name;
                s.args = std::move(args);
                run.body.push_back(s);
            } else if (!ec.is_abstract) {
                std::string r = "o" + std::to_string(lc++);
                statement al;
                al.kind = stmt_kind::alloc;
                al.target = r;
                al.cls = e.cls;
                run.body.push_back(al);
                statement s;
                s.kind = stmt_kind::virtual_call;
                s.receiver = r;
                s.sig.name = e.sig.name;
                s.args = std::move(args);
                run.body.push_back(s);
            }
        }
        run.body.push_back(b.stmt_ret());
        main_cls.methods[run.sig] = run;
        app.classes[main_cls.name] = main_cls;
        auto adiags = validate(app, &out.fw);
        if (has_errors(adiags))
            throw std::logic_error("generated app failed validation");
        out.apps.push_back(std::move(app));
    }
    return out;
}

}  // namespace

std::vector<generated_model> generate_corpus(const corpus_spec& spec) {
    spec.check();
    dice d(spec.seed);
    std::vector<generated_model> out;
    for (int i = 0; i < spec.model_count; ++i)
        out.push_back(generate_one(spec, d, i, i == 0));
    return out;
}

}  // namespace permlens
