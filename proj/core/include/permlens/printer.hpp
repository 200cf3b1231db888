#pragma once

#include <string>

#include "permlens/ir.hpp"

namespace permlens {

// Canonical pretty-printers. parse(print(m)) == m for every valid model.
std::string print_framework(const framework_model& fw);
std::string print_app(const app_model& app);
std::string print_statement(const statement& st);

}  // namespace permlens
