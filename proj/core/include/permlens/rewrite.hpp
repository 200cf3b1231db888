#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "permlens/ir.hpp"

namespace permlens {

// A point where the model is known to under-approximate; carried through to
// the final map metadata.
struct unsound_point {
    std::string kind;     // dynamic-service-key, suppressed-call, unresolved-permission,
                          // dangling-dispatch, parameter-dependent-entry
    std::string where;    // method id string
    int site = -1;        // statement index, -1 when not site specific
    std::string detail;

    auto operator<=>(const unsound_point&) const = default;
};

struct stmt_interval {
    int clear_idx;
    int restore_idx;

    bool covers(int i) const { return i > clear_idx && i < restore_idx; }
    auto operator<=>(const stmt_interval&) const = default;
};

// The framework after zero or more pre-analysis transformations. The base
// model is never mutated; every operation produces a fresh copy that still
// satisfies all ir invariants.
struct rewritten_framework {
    framework_model model;
    std::string base_name;
    std::string base_hash;

    std::optional<method_id> synthetic_main;
    std::map<std::string, method_id> drivers;  // class -> driver method
    std::map<std::pair<std::string, method_sig>, method_id> redirections;
    std::map<method_id, std::vector<stmt_interval>> identity_regions;
    std::set<method_id> emptied_methods;
    std::map<std::string, method_id> service_inits;      // key -> init method
    std::map<std::string, method_id> manager_factories;  // key -> factory method
    std::vector<std::string> applied;  // rewrite names, in application order

    diagnostic_list diags;
    std::vector<unsound_point> unsound;

    const method_def* find_method(const method_id& id) const;
};

rewritten_framework wrap(const framework_model& fw);

// Fig. 3 steps. Each takes and returns a value; composition order matters
// only in that drivers should come last so the synthetic main can call the
// service init methods first.
rewritten_framework redirect_services(const rewritten_framework& in);
rewritten_framework mark_identity_regions(const rewritten_framework& in);
rewritten_framework empty_methods(const rewritten_framework& in,
                                  const std::vector<std::string>& patterns);
rewritten_framework initialize_services(const rewritten_framework& in);
rewritten_framework initialize_managers(const rewritten_framework& in);
rewritten_framework generate_entry_drivers(const rewritten_framework& in,
                                           analysis_mode mode);

struct rewrite_options {
    bool redirect = true;
    bool identity = true;
    bool service_init = true;   // applied in pta mode only unless forced
    bool manager_init = true;   // likewise
    std::vector<std::string> empty_patterns;
};

// Runs the steps appropriate to the analysis mode, in Fig. 3 order.
// cha: redirection, identity, emptying, drivers.
// pta: redirection, identity, emptying, service init, manager init, drivers.
rewritten_framework run_pipeline(const framework_model& fw, analysis_mode mode,
                                 const rewrite_options& opts = {},
                                 const analysis_config& cfg = {});

// Shell-style glob: '*' and '?'.
bool glob_match(const std::string& pattern, const std::string& text);

// Statement intervals between each clearIdentity and its matching
// restoreIdentity; bodies are straight-line so interval matching is exact.
std::vector<stmt_interval> compute_identity_regions(const method_def& m);

}  // namespace permlens
