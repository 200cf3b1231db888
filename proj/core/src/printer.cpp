#include "permlens/printer.hpp"

#include <sstream>

namespace permlens {

namespace {

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string operand_str(const operand& op) {
    return op.literal ? quoted(op.value) : op.value;
}

void print_body(std::ostringstream& os, const std::vector<statement>& body,
                const char* indent) {
    for (const auto& st : body)
        os << indent << print_statement(st) << "\n";
}

void print_method(std::ostringstream& os, const method_def& m) {
    os << "    " << (m.is_public ? "public" : "private");
    if (m.is_static)
        os << " static";
    if (m.is_ctor())
        os << " constructor(";
    else
        os << " method " << m.sig.name << "(";
    for (size_t i = 0; i < m.sig.params.size(); ++i) {
        if (i)
            os << ", ";
        os << m.param_names[i] << ": " << m.sig.params[i].str();
    }
    os << ")";
    if (!m.is_ctor() && m.sig.ret.kind != type_kind::void_t)
        os << ": " << m.sig.ret.str();
    os << " {\n";
    print_body(os, m.body, "      ");
    os << "    }\n";
}

void print_class(std::ostringstream& os, const class_def& cd) {
    os << "  ";
    if (cd.is_abstract)
        os << "abstract ";
    os << "class " << cd.name;
    if (cd.superclass)
        os << " extends " << *cd.superclass;
    if (!cd.interfaces.empty()) {
        os << " implements ";
        for (size_t i = 0; i < cd.interfaces.size(); ++i) {
            if (i)
                os << ", ";
            os << cd.interfaces[i];
        }
    }
    os << " {\n";
    for (const auto& [fname, ft] : cd.fields)
        os << "    field " << fname << ": " << ft.str() << ";\n";
    for (const auto& [sig, m] : cd.methods)
        print_method(os, m);
    os << "  }\n";
}

}  // namespace

std::string print_statement(const statement& st) {
    std::ostringstream os;
    auto lhs = [&] {
        if (!st.target.empty())
            os << st.target << " = ";
    };
    auto args = [&] {
        os << "(";
        for (size_t i = 0; i < st.args.size(); ++i) {
            if (i)
                os << ", ";
            os << operand_str(st.args[i]);
        }
        os << ")";
    };
    switch (st.kind) {
    case stmt_kind::alloc:
        os << st.target << " = new " << st.cls;
        break;
    case stmt_kind::copy:
        os << st.target << " = " << st.source;
        break;
    case stmt_kind::field_store:
        os << st.receiver << "." << st.field << " = " << st.source;
        break;
    case stmt_kind::field_load:
        os << st.target << " = " << st.receiver << "." << st.field;
        break;
    case stmt_kind::string_const:
        os << st.target << " = " << quoted(st.literal);
        break;
    case stmt_kind::string_array_const:
        os << st.target << " = [";
        for (size_t i = 0; i < st.literals.size(); ++i) {
            if (i)
                os << ", ";
            os << quoted(st.literals[i]);
        }
        os << "]";
        break;
    case stmt_kind::opaque_source:
        os << st.target << " = opaque";
        break;
    case stmt_kind::virtual_call:
        lhs();
        os << st.receiver << "." << st.sig.name;
        args();
        break;
    case stmt_kind::static_call:
        lhs();
        os << st.cls << "::" << st.sig.name;
        args();
        break;
    case stmt_kind::get_service:
        os << st.target << " = getService(" << operand_str(st.key) << ")";
        break;
    case stmt_kind::get_system_service:
        os << st.target << " = getSystemService(" << operand_str(st.key) << ")";
        break;
    case stmt_kind::transact:
        lhs();
        os << st.receiver << ".transact";
        args();
        break;
    case stmt_kind::clear_identity:
        os << "clearIdentity";
        break;
    case stmt_kind::restore_identity:
        os << "restoreIdentity";
        break;
    case stmt_kind::ret:
        os << "return";
        if (!st.source.empty())
            os << " " << st.source;
        break;
    }
    os << ";";
    return os.str();
}

std::string print_framework(const framework_model& fw) {
    std::ostringstream os;
    os << "framework " << quoted(fw.name) << " {\n";
    for (const auto& p : fw.permissions)
        os << "  permission " << p << ";\n";
    for (const auto& [key, cls] : fw.services)
        os << "  service " << quoted(key) << " -> " << cls << ";\n";
    for (const auto& [key, cls] : fw.managers)
        os << "  manager " << quoted(key) << " -> " << cls << ";\n";
    for (const auto& [proxy, svc] : fw.proxies)
        os << "  proxy " << proxy << " for " << svc << ";\n";
    for (const auto& [name, cd] : fw.classes)
        print_class(os, cd);
    os << "}\n";
    return os.str();
}

std::string print_app(const app_model& app) {
    std::ostringstream os;
    os << "app " << quoted(app.name) << " declares [";
    size_t i = 0;
    for (const auto& p : app.declared)
        os << (i++ ? ", " : "") << p;
    os << "] {\n";
    if (app.uses_reflection)
        os << "  reflect;\n";
    if (app.uses_dynamic_loading)
        os << "  dynload;\n";
    for (const auto& [name, cd] : app.classes)
        print_class(os, cd);
    os << "}\n";
    return os.str();
}

}  // namespace permlens
