#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "permlens/rewrite.hpp"

namespace permlens {

// The deliverable of one analysis run: entry point -> permission set, plus
// everything a consumer needs to trust or distrust it.
struct permission_map {
    std::string framework;
    std::string hash;      // content hash of the unrewritten model
    std::string analysis;  // "cha" | "pta"
    std::vector<std::string> rewrites;  // applied rewrite steps, in order
    std::map<std::string, std::set<std::string>> entries;  // sig -> permissions
    std::set<std::string> timeouts;  // entries with TIMEOUT instead of a set
    std::vector<unsound_point> unsound;

    bool operator==(const permission_map&) const = default;
};

// Byte-stable JSON: {framework, hash, analysis, rewrites, map, unsound}.
std::string map_to_json(const permission_map& pm);
permission_map map_from_json(const std::string& text);

// Entry counts by permission-set size: "0 perms: 1, 1 perm: 3".
std::string map_summary_line(const permission_map& pm);
// Table-shaped breakdown of the same counts.
std::string map_summary_table(const permission_map& pm);

struct gap_report;
std::string gap_to_json(const gap_report& r);
std::string gap_to_text(const gap_report& r);

std::string unsound_to_string(const unsound_point& u);

}  // namespace permlens
