#pragma once

#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace permlens {

enum class severity { note, warning, error };

struct diagnostic {
    severity sev = severity::error;
    std::string file;   // empty when the source is not file-backed
    int line = 0;
    int col = 0;
    std::string stage;  // parse, validate, rewrite, cha, pta, extract, report
    std::string message;

    std::string str() const {
        std::ostringstream os;
        os << (file.empty() ? "<input>" : file) << ':' << line << ':' << col << ": ";
        switch (sev) {
        case severity::note: os << "note: "; break;
        case severity::warning: os << "warning: "; break;
        case severity::error: os << "error: "; break;
        }
        if (!stage.empty())
            os << '[' << stage << "] ";
        os << message;
        return os.str();
    }
};

inline std::ostream& operator<<(std::ostream& os, const diagnostic& d) {
    return os << d.str();
}

using diagnostic_list = std::vector<diagnostic>;

inline bool has_errors(const diagnostic_list& ds) {
    for (const auto& d : ds)
        if (d.sev == severity::error)
            return true;
    return false;
}

}  // namespace permlens
