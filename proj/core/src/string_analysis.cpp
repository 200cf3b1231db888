#include "permlens/string_analysis.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace permlens {

const char* category_name(res_category c) {
    switch (c) {
    case res_category::literal: return "literal";
    case res_category::flow: return "flow";
    case res_category::array: return "array";
    case res_category::parameter_descent: return "parameter-descent";
    case res_category::unresolved: return "unresolved";
    }
    return "?";
}

namespace {

struct search_result {
    std::set<std::string> perms;
    bool used_array = false;
    int max_copies = 0;
    std::set<int> params_reached;
};

const method_def* find_method(const framework_model& fw, const method_id& id) {
    auto cit = fw.classes.find(id.cls);
    if (cit == fw.classes.end())
        return nullptr;
    auto mit = cit->second.methods.find(id.sig);
    return mit == cit->second.methods.end() ? nullptr : &mit->second;
}

struct searcher {
    const framework_model& fw;
    const method_def& m;
    search_result out;
    std::set<std::string> visiting;

    void add_perm(const std::string& lit, int copies) {
        if (is_permission(fw, lit)) {
            out.perms.insert(lit);
            out.max_copies = std::max(out.max_copies, copies);
        }
    }

    void chase(const std::string& var, int copies) {
        if (!visiting.insert(var).second)
            return;
        // Flow-insensitive ambiguity: all definitions in the body contribute,
        // over-estimating rather than missing.
        for (const auto& st : m.body) {
            if (st.target != var)
                continue;
            switch (st.kind) {
            case stmt_kind::string_const:
                add_perm(st.literal, copies);
                break;
            case stmt_kind::string_array_const:
                for (const auto& l : st.literals)
                    if (is_permission(fw, l)) {
                        out.perms.insert(l);
                        out.used_array = true;
                    }
                break;
            case stmt_kind::copy:
                chase(st.source, copies + 1);
                break;
            default:
                break;  // non-constant source: nothing to extract
            }
        }
        for (size_t i = 0; i < m.param_names.size(); ++i)
            if (m.param_names[i] == var)
                out.params_reached.insert(static_cast<int>(i));
    }
};

search_result find_in_method(const framework_model& fw, const method_def& m,
                             const operand& seed) {
    searcher s{fw, m, {}, {}};
    if (seed.literal) {
        s.add_perm(seed.value, 0);
    } else {
        s.chase(seed.value, 0);
    }
    return s.out;
}

}  // namespace

permission_resolution resolve_permission(const framework_model& fw,
                                         const std::vector<stack_frame>& stack,
                                         int arg_index, const analysis_config& cfg) {
    if (stack.empty())
        throw std::invalid_argument("resolve_permission: empty stack");

    // Validate frame linkage: frame i's site must call frame i+1's method.
    for (size_t i = 0; i + 1 < stack.size(); ++i) {
        const method_def* def = find_method(fw, stack[i].method);
        if (!def || stack[i].site < 0 ||
            stack[i].site >= static_cast<int>(def->body.size()))
            throw std::invalid_argument("resolve_permission: malformed stack frame " +
                                        std::to_string(i));
        const statement& st = def->body[stack[i].site];
        bool calls_next =
            st.is_call() &&
            (st.sig == stack[i + 1].method.sig ||
             (st.direct_target && *st.direct_target == stack[i + 1].method));
        if (!calls_next)
            throw std::invalid_argument("resolve_permission: frame " + std::to_string(i) +
                                        " does not call frame " + std::to_string(i + 1));
    }

    permission_resolution res;
    res.pep_method = stack.back().method;
    res.pep_site = stack.back().site;

    const method_def* pep_def = find_method(fw, res.pep_method);
    if (!pep_def || res.pep_site < 0 ||
        res.pep_site >= static_cast<int>(pep_def->body.size()))
        throw std::invalid_argument("resolve_permission: bad PEP frame");
    const statement& pep = pep_def->body[res.pep_site];
    if (!pep.is_call() || arg_index < 0 ||
        arg_index >= static_cast<int>(pep.args.size()))
        throw std::invalid_argument("resolve_permission: PEP argument out of range");

    // Backward search with descent: when nothing is found in the current
    // method and the value traces to a parameter, re-seed the search at the
    // caller's argument expression one frame down the stack.
    bool used_array = false;
    int max_copies = 0;
    bool parameter_dependent = false;
    int found_depth = 0;
    const int top = static_cast<int>(stack.size()) - 1;

    std::function<std::set<std::string>(int, const operand&)> search =
        [&](int frame, const operand& seed) -> std::set<std::string> {
        const method_def* cur = find_method(fw, stack[frame].method);
        search_result r = find_in_method(fw, *cur, seed);
        used_array |= r.used_array;
        max_copies = std::max(max_copies, r.max_copies);
        int depth = top - frame;
        if (!r.perms.empty()) {
            found_depth = std::max(found_depth, depth);
            return r.perms;
        }
        if (r.params_reached.empty())
            return {};
        if (frame == 0) {
            parameter_dependent = true;  // ran off the entry point itself
            return {};
        }
        if (cfg.max_descent >= 0 && depth >= cfg.max_descent)
            return {};  // truncated by the bound: never a partial set
        const method_def* caller = find_method(fw, stack[frame - 1].method);
        const statement& call = caller->body[stack[frame - 1].site];
        std::set<std::string> merged;
        for (int p : r.params_reached) {
            if (p >= static_cast<int>(call.args.size()))
                continue;
            auto sub = search(frame - 1, call.args[p]);
            merged.insert(sub.begin(), sub.end());
        }
        if (!merged.empty())
            found_depth = std::max(found_depth, depth + 1);
        return merged;
    };

    std::set<std::string> perms = search(top, pep.args[arg_index]);
    if (!perms.empty()) {
        res.status = res_status::resolved;
        res.permissions = std::move(perms);
        res.descent_depth = found_depth;
        if (found_depth > 0)
            res.category = res_category::parameter_descent;
        else if (used_array)
            res.category = res_category::array;
        else if (max_copies > 0)
            res.category = res_category::flow;
        else
            res.category = res_category::literal;
        return res;
    }
    res.status = res_status::unresolved;
    res.category = res_category::unresolved;
    res.parameter_dependent = parameter_dependent;
    return res;
}

resolution_histogram classify_resolutions(const std::vector<permission_resolution>& rs) {
    resolution_histogram h;
    h.total = static_cast<int>(rs.size());
    for (const auto& r : rs) {
        h.by_category[r.category]++;
        if (r.status == res_status::resolved) {
            h.resolved++;
            if (r.permissions.size() == 1)
                h.with_1_permission++;
            else if (r.permissions.size() == 2)
                h.with_2_permissions++;
            else
                h.with_more_permissions++;
        } else {
            h.unresolved++;
        }
    }
    return h;
}

std::string resolution_histogram::table() const {
    std::ostringstream os;
    auto count = [&](res_category c) {
        auto it = by_category.find(c);
        return it == by_category.end() ? 0 : it->second;
    };
    os << "total analyses: " << total << "\n";
    os << "string found: " << resolved << "\n";
    os << "  with 1 permission: " << with_1_permission << "\n";
    os << "  with 2 permissions: " << with_2_permissions << "\n";
    os << "  with >2 permissions: " << with_more_permissions << "\n";
    os << "  with only direct strings: " << count(res_category::literal) << "\n";
    os << "  with flow analysis: " << count(res_category::flow) << "\n";
    os << "  with strings in array: " << count(res_category::array) << "\n";
    os << "  with parameter descent: " << count(res_category::parameter_descent) << "\n";
    os << "string not found: " << unresolved << "\n";
    return os.str();
}

}  // namespace permlens
