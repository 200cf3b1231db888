#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "permlens/ir.hpp"
#include "permlens/report.hpp"

namespace permlens {

// Dense boolean matrix entry-points x permissions. bits[i][j] is true iff
// entry entry_order[i] reaches a check of perm_order[j].
struct access_matrix {
    std::vector<std::string> entry_order;  // entry point signature strings
    std::vector<std::string> perm_order;
    std::vector<std::vector<bool>> bits;
    std::set<std::string> timeout_entries;  // rows excluded from any claim

    std::optional<size_t> entry_index(const std::string& sig) const;
};

struct access_vector {
    std::vector<std::string> entry_order;  // same ordering as the paired matrix
    std::vector<bool> bits;
    std::map<std::string, std::set<std::string>> ambiguous;  // entry -> candidate set
};

struct gap_report {
    std::string app;
    std::string framework;
    std::string hash;
    std::string analysis;
    std::set<std::string> declared;
    std::set<std::string> inferred;
    std::set<std::string> gap;      // declared \ inferred
    std::set<std::string> missing;  // inferred \ declared
    std::map<std::string, std::string> witnesses;  // permission -> entry signature
    bool discarded = false;
    std::string discard_reason;  // reflection, dynamic-loading, timeout
};

access_matrix build_matrix(const permission_map& pm);

// Syntactic access-vector extraction: bit i set iff some call statement in
// the app matches entry i under the framework's hierarchy (virtual calls use
// the subtype cone, an over-approximation reported per bit). Returns nullopt
// with reason when the app must be discarded.
struct av_result {
    std::optional<access_vector> av;
    std::string discard_reason;
};
av_result extract_av(const app_model& app, const framework_model& fw,
                     const std::vector<std::string>& entry_order);

// IP = AV x M under boolean AND/OR. Throws std::invalid_argument on a
// dimension mismatch.
std::set<std::string> infer_permissions(const access_vector& av, const access_matrix& m);

gap_report gap(const app_model& app, const std::set<std::string>& inferred,
               const access_matrix& m, const access_vector& av);

// Full app analysis against a map; handles discard and timeout tainting.
gap_report analyze_app(const app_model& app, const framework_model& fw,
                       const permission_map& pm);

enum class entry_diff { identical, a_smaller, b_smaller, incomparable };

struct diff_report {
    std::map<std::string, entry_diff> per_entry;  // over the common entry domain
    int identical = 0;
    int a_smaller = 0;
    int b_smaller = 0;
    int incomparable = 0;
    std::vector<std::string> only_a;  // entries present in one map only
    std::vector<std::string> only_b;

    int total() const { return identical + a_smaller + b_smaller + incomparable; }
};

// Per-entry classification of two maps over the same framework; throws
// std::invalid_argument when the framework hashes differ.
diff_report diff_maps(const permission_map& a, const permission_map& b);

}  // namespace permlens
