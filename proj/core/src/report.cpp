#include "permlens/report.hpp"

#include <sstream>

#include <json.hpp>

#include "permlens/gap.hpp"

namespace permlens {

using nlohmann::json;

namespace {

json unsound_json(const unsound_point& u) {
    json j;
    j["kind"] = u.kind;
    j["where"] = u.where;
    if (u.site >= 0)
        j["site"] = u.site;
    if (!u.detail.empty())
        j["detail"] = u.detail;
    return j;
}

unsound_point unsound_from(const json& j) {
    unsound_point u;
    u.kind = j.value("kind", "");
    u.where = j.value("where", "");
    u.site = j.value("site", -1);
    u.detail = j.value("detail", "");
    return u;
}

}  // namespace

std::string unsound_to_string(const unsound_point& u) {
    std::ostringstream os;
    os << u.kind << " at " << u.where;
    if (u.site >= 0)
        os << "#" << u.site;
    if (!u.detail.empty())
        os << " (" << u.detail << ")";
    return os.str();
}

std::string map_to_json(const permission_map& pm) {
    json j;
    j["framework"] = pm.framework;
    j["hash"] = pm.hash;
    j["analysis"] = pm.analysis;
    j["rewrites"] = pm.rewrites;
    json m = json::object();
    for (const auto& [sig, perms] : pm.entries) {
        if (pm.timeouts.count(sig))
            m[sig] = "TIMEOUT";
        else
            m[sig] = perms;
    }
    j["map"] = m;
    json un = json::array();
    for (const auto& u : pm.unsound)
        un.push_back(unsound_json(u));
    j["unsound"] = un;
    return j.dump(2) + "\n";
}

permission_map map_from_json(const std::string& text) {
    json j = json::parse(text);
    permission_map pm;
    pm.framework = j.value("framework", "");
    pm.hash = j.value("hash", "");
    pm.analysis = j.value("analysis", "");
    for (const auto& r : j.value("rewrites", json::array()))
        pm.rewrites.push_back(r.get<std::string>());
    for (const auto& [sig, v] : j.at("map").items()) {
        if (v.is_string() && v.get<std::string>() == "TIMEOUT") {
            pm.entries[sig] = {};
            pm.timeouts.insert(sig);
        } else {
            std::set<std::string> perms;
            for (const auto& p : v)
                perms.insert(p.get<std::string>());
            pm.entries[sig] = std::move(perms);
        }
    }
    for (const auto& u : j.value("unsound", json::array()))
        pm.unsound.push_back(unsound_from(u));
    return pm;
}

namespace {
std::map<size_t, int> size_histogram(const permission_map& pm) {
    std::map<size_t, int> hist;
    for (const auto& [sig, perms] : pm.entries) {
        if (pm.timeouts.count(sig))
            continue;
        hist[perms.size()]++;
    }
    return hist;
}
}  // namespace

std::string map_summary_line(const permission_map& pm) {
    auto hist = size_histogram(pm);
    std::ostringstream os;
    size_t i = 0;
    for (const auto& [size, count] : hist) {
        if (i++)
            os << ", ";
        os << size << (size == 1 ? " perm: " : " perms: ") << count;
    }
    if (!pm.timeouts.empty())
        os << (i ? ", " : "") << "timeout: " << pm.timeouts.size();
    return os.str();
}

std::string map_summary_table(const permission_map& pm) {
    auto hist = size_histogram(pm);
    std::ostringstream os;
    os << "Permission Set          | # entry points\n";
    for (const auto& [size, count] : hist)
        os << "with " << size << (size == 1 ? " permission " : " permissions")
           << std::string(size >= 10 ? 8 : 9, ' ') << "| " << count << "\n";
    if (!pm.timeouts.empty())
        os << "TIMEOUT                 | " << pm.timeouts.size() << "\n";
    os << "total                   | " << pm.entries.size() << "\n";
    return os.str();
}

std::string gap_to_json(const gap_report& r) {
    json j;
    j["app"] = r.app;
    j["framework"] = r.framework;
    j["hash"] = r.hash;
    j["analysis"] = r.analysis;
    j["declared"] = r.declared;
    j["inferred"] = r.inferred;
    j["gap"] = r.gap;
    j["missing"] = r.missing;
    j["witnesses"] = r.witnesses;
    j["discarded"] = r.discarded;
    if (r.discarded)
        j["reason"] = r.discard_reason;
    return j.dump(2) + "\n";
}

std::string gap_to_text(const gap_report& r) {
    std::ostringstream os;
    os << "app " << r.app << " against " << r.framework << " (" << r.analysis << ")\n";
    if (r.discarded) {
        os << "  discarded: " << r.discard_reason << "\n";
        return os.str();
    }
    auto set_line = [&](const char* label, const std::set<std::string>& s) {
        os << "  " << label << ": {";
        size_t i = 0;
        for (const auto& p : s)
            os << (i++ ? ", " : "") << p;
        os << "}\n";
    };
    set_line("declared", r.declared);
    set_line("inferred", r.inferred);
    set_line("gap", r.gap);
    set_line("missing", r.missing);
    for (const auto& [perm, entry] : r.witnesses)
        os << "  witness " << perm << " <- " << entry << "\n";
    return os.str();
}

}  // namespace permlens
