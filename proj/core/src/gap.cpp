#include "permlens/gap.hpp"

#include <algorithm>
#include <stdexcept>

#include "permlens/callgraph.hpp"

namespace permlens {

std::optional<size_t> access_matrix::entry_index(const std::string& sig) const {
    auto it = std::lower_bound(entry_order.begin(), entry_order.end(), sig);
    if (it == entry_order.end() || *it != sig)
        return std::nullopt;
    return static_cast<size_t>(it - entry_order.begin());
}

access_matrix build_matrix(const permission_map& pm) {
    access_matrix m;
    for (const auto& [sig, perms] : pm.entries)
        m.entry_order.push_back(sig);  // map iteration is already lexicographic
    std::set<std::string> perms_seen;
    for (const auto& [sig, perms] : pm.entries)
        perms_seen.insert(perms.begin(), perms.end());
    m.perm_order.assign(perms_seen.begin(), perms_seen.end());
    m.timeout_entries = pm.timeouts;

    m.bits.assign(m.entry_order.size(),
                  std::vector<bool>(m.perm_order.size(), false));
    for (size_t i = 0; i < m.entry_order.size(); ++i) {
        const auto& perms = pm.entries.at(m.entry_order[i]);
        for (size_t j = 0; j < m.perm_order.size(); ++j)
            m.bits[i][j] = perms.count(m.perm_order[j]) > 0;
    }
    return m;
}

av_result extract_av(const app_model& app, const framework_model& fw,
                     const std::vector<std::string>& entry_order) {
    av_result out;
    if (app.uses_reflection) {
        out.discard_reason = "reflection";
        return out;
    }
    if (app.uses_dynamic_loading) {
        out.discard_reason = "dynamic-loading";
        return out;
    }

    // Combined universe: app calls resolve against framework classes too.
    std::map<std::string, class_def> all = fw.classes;
    for (const auto& [name, cd] : app.classes)
        all[name] = cd;
    hierarchy h(all);

    access_vector av;
    av.entry_order = entry_order;
    av.bits.assign(entry_order.size(), false);
    std::set<std::string> entry_set(entry_order.begin(), entry_order.end());

    auto set_bit = [&](const method_id& target, const statement& st,
                       size_t candidates) {
        std::string sig = target.str();
        auto it = std::lower_bound(av.entry_order.begin(), av.entry_order.end(), sig);
        if (it == av.entry_order.end() || *it != sig)
            return;
        size_t i = static_cast<size_t>(it - av.entry_order.begin());
        av.bits[i] = true;
        if (candidates > 1)
            av.ambiguous[sig].insert("cone of " + st.recv_type.str());
    };

    for (const auto& [cname, cd] : app.classes) {
        for (const auto& [sig, m] : cd.methods) {
            for (const auto& st : m.body) {
                if (st.kind == stmt_kind::virtual_call || st.kind == stmt_kind::transact) {
                    auto targets = cha_targets(h, st.recv_type, st.sig);
                    for (const auto& t : targets)
                        if (!app.classes.count(t.cls))
                            set_bit(t, st, targets.size());
                } else if (st.kind == stmt_kind::static_call) {
                    std::string found_in;
                    if (h.resolve_up(st.cls, st.sig, &found_in) &&
                        !app.classes.count(found_in))
                        set_bit({found_in, st.sig}, st, 1);
                }
            }
        }
    }
    out.av = std::move(av);
    return out;
}

std::set<std::string> infer_permissions(const access_vector& av, const access_matrix& m) {
    if (av.bits.size() != m.bits.size() || av.entry_order != m.entry_order)
        throw std::invalid_argument("infer_permissions: vector/matrix dimension mismatch");
    std::set<std::string> out;
    for (size_t j = 0; j < m.perm_order.size(); ++j) {
        bool bit = false;
        for (size_t i = 0; i < av.bits.size() && !bit; ++i)
            bit = av.bits[i] && m.bits[i][j];
        if (bit)
            out.insert(m.perm_order[j]);
    }
    return out;
}

gap_report gap(const app_model& app, const std::set<std::string>& inferred,
               const access_matrix& m, const access_vector& av) {
    gap_report r;
    r.app = app.name;
    r.declared = app.declared;
    r.inferred = inferred;
    for (const auto& p : r.declared)
        if (!inferred.count(p))
            r.gap.insert(p);
    for (const auto& p : inferred)
        if (!r.declared.count(p))
            r.missing.insert(p);
    // Witness: the first entry whose row justified the permission bit.
    for (const auto& p : inferred) {
        auto jt = std::find(m.perm_order.begin(), m.perm_order.end(), p);
        if (jt == m.perm_order.end())
            continue;
        size_t j = static_cast<size_t>(jt - m.perm_order.begin());
        for (size_t i = 0; i < m.entry_order.size(); ++i) {
            if (av.bits[i] && m.bits[i][j]) {
                r.witnesses[p] = m.entry_order[i];
                break;
            }
        }
    }
    return r;
}

gap_report analyze_app(const app_model& app, const framework_model& fw,
                       const permission_map& pm) {
    access_matrix m = build_matrix(pm);
    gap_report r;
    r.app = app.name;
    r.framework = pm.framework;
    r.hash = pm.hash;
    r.analysis = pm.analysis;
    r.declared = app.declared;

    av_result avr = extract_av(app, fw, m.entry_order);
    if (!avr.av) {
        r.discarded = true;
        r.discard_reason = avr.discard_reason;
        return r;
    }
    // Apps touching TIMEOUT entries are excluded from gap claims.
    for (size_t i = 0; i < m.entry_order.size(); ++i) {
        if (avr.av->bits[i] && m.timeout_entries.count(m.entry_order[i])) {
            r.discarded = true;
            r.discard_reason = "timeout";
            return r;
        }
    }
    std::set<std::string> ip = infer_permissions(*avr.av, m);
    gap_report g = gap(app, ip, m, *avr.av);
    g.framework = r.framework;
    g.hash = r.hash;
    g.analysis = r.analysis;
    return g;
}

diff_report diff_maps(const permission_map& a, const permission_map& b) {
    if (a.hash != b.hash)
        throw std::invalid_argument("diff_maps: framework hash mismatch (" + a.hash +
                                    " vs " + b.hash + ")");
    diff_report r;
    for (const auto& [sig, pa] : a.entries) {
        auto it = b.entries.find(sig);
        if (it == b.entries.end()) {
            r.only_a.push_back(sig);
            continue;
        }
        const auto& pb = it->second;
        bool a_sub = std::includes(pb.begin(), pb.end(), pa.begin(), pa.end());
        bool b_sub = std::includes(pa.begin(), pa.end(), pb.begin(), pb.end());
        entry_diff d;
        if (a_sub && b_sub)
            d = entry_diff::identical;
        else if (a_sub)
            d = entry_diff::a_smaller;
        else if (b_sub)
            d = entry_diff::b_smaller;
        else
            d = entry_diff::incomparable;
        r.per_entry[sig] = d;
        switch (d) {
        case entry_diff::identical: r.identical++; break;
        case entry_diff::a_smaller: r.a_smaller++; break;
        case entry_diff::b_smaller: r.b_smaller++; break;
        case entry_diff::incomparable: r.incomparable++; break;
        }
    }
    for (const auto& [sig, pb] : b.entries)
        if (!a.entries.count(sig))
            r.only_b.push_back(sig);
    return r;
}

}  // namespace permlens
