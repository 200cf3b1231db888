#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "permlens/ir.hpp"

namespace permlens {

struct stack_frame {
    method_id method;
    int site;  // for inner frames: the call site into the next frame;
               // for the last frame: the PEP call site itself

    auto operator<=>(const stack_frame&) const = default;
};

enum class res_status { resolved, unresolved };
enum class res_category { literal, flow, array, parameter_descent, unresolved };

const char* category_name(res_category c);

struct permission_resolution {
    method_id pep_method;
    int pep_site = -1;
    res_status status = res_status::unresolved;
    std::set<std::string> permissions;
    res_category category = res_category::unresolved;
    int descent_depth = 0;           // stack frames consumed
    bool parameter_dependent = false;  // chain ran off the top of the stack

    auto operator<=>(const permission_resolution&) const = default;
};

// Algorithm 1: backward intra-method search for the concrete permission
// name(s) passed at a PEP call site, descending into the caller stack when
// the value comes from a method parameter. Throws std::invalid_argument on a
// malformed stack (frame i does not call frame i+1, or the last frame's site
// is not a call with the given argument).
permission_resolution resolve_permission(const framework_model& fw,
                                         const std::vector<stack_frame>& stack,
                                         int arg_index,
                                         const analysis_config& cfg = {});

struct resolution_histogram {
    std::map<res_category, int> by_category;
    int with_1_permission = 0;
    int with_2_permissions = 0;
    int with_more_permissions = 0;
    int resolved = 0;
    int unresolved = 0;
    int total = 0;

    std::string table() const;  // mirrors the permission-specification table shape
};

resolution_histogram classify_resolutions(const std::vector<permission_resolution>& rs);

}  // namespace permlens
