#pragma once

#include <optional>
#include <string>

#include "permlens/diagnostics.hpp"
#include "permlens/ir.hpp"

namespace permlens {

template <typename T>
struct parse_result {
    std::optional<T> value;
    diagnostic_list diags;

    bool ok() const { return value.has_value() && !has_errors(diags); }
};

// Parses and validates a framework in the PBIR text format (see docs/pbir.md).
parse_result<framework_model> parse_framework(const std::string& text,
                                              const std::string& filename = "",
                                              const analysis_config& cfg = {});

// Parses an application model. Class references that are not defined in the
// app itself are presumed to target the framework and are checked when the
// app is bound to one.
parse_result<app_model> parse_app(const std::string& text,
                                  const std::string& filename = "",
                                  const analysis_config& cfg = {});

parse_result<framework_model> parse_framework_file(const std::string& path,
                                                   const analysis_config& cfg = {});
parse_result<app_model> parse_app_file(const std::string& path,
                                       const analysis_config& cfg = {});

}  // namespace permlens
