#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "permlens/diagnostics.hpp"

namespace permlens {

// ---------------------------------------------------------------------------
// Semantic types. Classes plus three builtins; primitives other than strings
// are opaque values that no analysis inspects.
// ---------------------------------------------------------------------------

enum class type_kind { cls, string_t, string_array_t, opaque_t, void_t };

struct sem_type {
    type_kind kind = type_kind::opaque_t;
    std::string cls;  // set iff kind == cls

    static sem_type of_class(std::string name) { return {type_kind::cls, std::move(name)}; }
    static sem_type string() { return {type_kind::string_t, {}}; }
    static sem_type string_array() { return {type_kind::string_array_t, {}}; }
    static sem_type opaque() { return {type_kind::opaque_t, {}}; }
    static sem_type void_type() { return {type_kind::void_t, {}}; }

    bool is_class() const { return kind == type_kind::cls; }

    std::string str() const {
        switch (kind) {
        case type_kind::cls: return cls;
        case type_kind::string_t: return "String";
        case type_kind::string_array_t: return "StringArray";
        case type_kind::opaque_t: return "Opaque";
        case type_kind::void_t: return "void";
        }
        return "?";
    }

    auto operator<=>(const sem_type&) const = default;
};

struct method_sig {
    std::string name;
    std::vector<sem_type> params;
    sem_type ret = sem_type::void_type();

    std::string str() const {
        std::string s = name + "(";
        for (size_t i = 0; i < params.size(); ++i) {
            if (i) s += ",";
            s += params[i].str();
        }
        s += ")";
        if (ret.kind != type_kind::void_t)
            s += ":" + ret.str();
        return s;
    }

    auto operator<=>(const method_sig&) const = default;
};

// A method identity: class plus signature. Call graph nodes use this.
struct method_id {
    std::string cls;
    method_sig sig;

    std::string str() const { return cls + "." + sig.str(); }

    auto operator<=>(const method_id&) const = default;
};

// ---------------------------------------------------------------------------
// Statements. One flat kind enum; straight-line bodies, no branches.
// ---------------------------------------------------------------------------

enum class stmt_kind {
    alloc,               // x = new C
    copy,                // x = y
    field_store,         // base.f = y
    field_load,          // x = base.f
    string_const,        // x = "LIT"
    string_array_const,  // x = ["A", "B"]
    opaque_source,       // x = opaque   (parcel/URI-like value; never resolves)
    virtual_call,        // [x =] recv.m(args)
    static_call,         // [x =] C::m(args)
    get_service,         // x = getService(key)
    get_system_service,  // x = getSystemService(key)
    transact,            // [x =] recv.transact(args)
    clear_identity,      // clearIdentity
    restore_identity,    // restoreIdentity
    ret,                 // return [x]
};

// A call argument or service key: either a local name or a string literal.
struct operand {
    bool literal = false;
    std::string value;

    auto operator<=>(const operand&) const = default;
};

struct statement {
    stmt_kind kind{};
    std::string target;               // lhs local, empty if none
    std::string receiver;             // virtual_call/transact receiver, field base
    std::string cls;                  // alloc class, static_call class
    std::string field;                // field_store/field_load
    std::string source;               // copy/field_store/ret source local
    std::string literal;              // string_const
    std::vector<std::string> literals;  // string_array_const
    std::vector<operand> args;        // call arguments
    operand key;                      // get_service/get_system_service key
    int line = 0;
    int col = 0;

    // Filled in by validation / rewriting.
    method_sig sig;                        // resolved callee signature
    bool pep = false;                      // virtual_call whose name is a PEP
    std::optional<method_id> direct_target;  // set by service redirection
    sem_type recv_type;                    // receiver static type at the call site
    std::optional<std::string> resolved_key;  // get_service/get_system_service

    bool is_call() const {
        return kind == stmt_kind::virtual_call || kind == stmt_kind::static_call ||
               kind == stmt_kind::transact;
    }

    bool operator==(const statement& o) const {
        return kind == o.kind && target == o.target && receiver == o.receiver &&
               cls == o.cls && field == o.field && source == o.source &&
               literal == o.literal && literals == o.literals && args == o.args &&
               key == o.key && direct_target == o.direct_target;
    }
};

struct method_def {
    method_sig sig;
    bool is_public = true;
    bool is_static = false;
    std::vector<std::string> param_names;
    std::vector<statement> body;

    bool is_ctor() const { return sig.name == "<init>"; }

    bool operator==(const method_def& o) const {
        return sig == o.sig && is_public == o.is_public && is_static == o.is_static &&
               param_names == o.param_names && body == o.body;
    }
};

struct class_def {
    std::string name;
    std::optional<std::string> superclass;
    std::vector<std::string> interfaces;
    bool is_abstract = false;
    std::map<std::string, sem_type> fields;
    std::map<method_sig, method_def> methods;

    bool operator==(const class_def& o) const = default;
};

struct framework_model {
    std::string name;
    std::set<std::string> permissions;
    std::map<std::string, class_def> classes;
    std::map<std::string, std::string> services;  // key -> concrete service class
    std::map<std::string, std::string> managers;  // key -> manager wrapper class
    std::map<std::string, std::string> proxies;   // proxy class -> fronted service class

    bool operator==(const framework_model&) const = default;
};

struct app_model {
    std::string name;
    std::set<std::string> declared;  // P_d(app)
    std::map<std::string, class_def> classes;
    bool uses_reflection = false;
    bool uses_dynamic_loading = false;

    bool operator==(const app_model&) const = default;
};

// ---------------------------------------------------------------------------
// Permission enforcement points. The six check methods of the context class;
// the permission string is always the first parameter. The set is closed
// unless extended through analysis_config.
// ---------------------------------------------------------------------------

struct pep_table {
    std::map<std::string, int> entries;  // method name -> permission parameter index

    static pep_table standard() {
        pep_table t;
        t.entries = {
            {"checkPermission", 0},
            {"checkCallingPermission", 0},
            {"checkCallingOrSelfPermission", 0},
            {"enforcePermission", 0},
            {"enforceCallingPermission", 0},
            {"enforceCallingOrSelfPermission", 0},
        };
        return t;
    }

    bool contains(const std::string& name) const { return entries.count(name) > 0; }
    int param_index(const std::string& name) const { return entries.at(name); }
};

struct analysis_config {
    pep_table peps = pep_table::standard();
    bool strict_pep = false;   // require receiver typed as a context class
    int max_descent = -1;      // -1 = full stack
    int timeout_ms = 60000;    // points-to solver guard
};

// True iff the literal has the shape of a permission name.
bool permission_like(const std::string& lit);

// Membership in the framework universe is checked where it matters.
inline bool is_permission(const framework_model& fw, const std::string& lit) {
    return permission_like(lit) && fw.permissions.count(lit) > 0;
}

// ---------------------------------------------------------------------------
// Hierarchy queries shared by validation, the analyses and the tests.
// ---------------------------------------------------------------------------

class hierarchy {
public:
    explicit hierarchy(const std::map<std::string, class_def>& classes);

    // Direct and transitive subtypes (extends or implements), including c.
    const std::set<std::string>& cone(const std::string& c) const;
    // c itself, its superclass chain, and all interfaces, transitively.
    const std::set<std::string>& supers(const std::string& c) const;
    bool assignable(const std::string& from, const std::string& to) const;
    bool known(const std::string& c) const { return classes_->count(c) > 0; }
    const class_def* find(const std::string& c) const;

    // Nearest declaration of sig walking up the superclass chain from c.
    const method_def* resolve_up(const std::string& c, const method_sig& sig,
                                 std::string* found_in = nullptr) const;

private:
    const std::map<std::string, class_def>* classes_;
    std::map<std::string, std::set<std::string>> cones_;
    std::map<std::string, std::set<std::string>> supers_;
    std::set<std::string> empty_;
};

// Validates the model in place: resolves call signatures, computes static
// types, flags PEP call sites, and checks every ir invariant. Appends
// diagnostics; the model is usable iff none are errors.
diagnostic_list validate(framework_model& fw, const analysis_config& cfg = {});

// App validation binds class references against the framework lazily; a
// standalone app only gets structural checks.
diagnostic_list validate(app_model& app, const framework_model* fw = nullptr,
                         const analysis_config& cfg = {});

// Entry points: public methods and constructors of public classes, in
// lexicographic order. In pta mode instance methods of abstract classes are
// excluded; statics are retained. Synthetic classes never contribute.
enum class analysis_mode { cha, pta };

std::vector<method_id> entry_points(const framework_model& fw, analysis_mode mode);

// FNV-1a 64-bit over the canonical printed form; used as the model hash.
std::string content_hash(const framework_model& fw);
uint64_t fnv1a64(const std::string& data);

inline const char* synthetic_prefix() { return "$synthetic."; }
inline bool is_synthetic_class(const std::string& name) {
    return name.rfind(synthetic_prefix(), 0) == 0;
}

}  // namespace permlens
