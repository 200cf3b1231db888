#include "permlens/parse.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace permlens {

namespace {

enum class tok_kind { ident, string_lit, punct, end };

struct token {
    tok_kind kind;
    std::string text;
    int line;
    int col;
};

struct lexer {
    const std::string& src;
    std::string file;
    size_t pos = 0;
    int line = 1;
    int col = 1;
    diagnostic_list* diags;

    void advance() {
        if (src[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void skip_ws() {
        while (pos < src.size()) {
            char c = src[pos];
            if (c == '#') {
                while (pos < src.size() && src[pos] != '\n')
                    advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    static bool ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
               c == '<';
    }
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
               c == '.' || c == '<' || c == '>';
    }

    token next() {
        skip_ws();
        if (pos >= src.size())
            return {tok_kind::end, "", line, col};
        int l = line, c = col;
        char ch = src[pos];
        if (ch == '"') {
            advance();
            std::string s;
            while (pos < src.size() && src[pos] != '"') {
                if (src[pos] == '\\' && pos + 1 < src.size()) {
                    advance();
                    s += src[pos];
                } else {
                    s += src[pos];
                }
                advance();
            }
            if (pos >= src.size())
                diags->push_back({severity::error, file, l, c, "parse",
                                  "unterminated string literal"});
            else
                advance();
            return {tok_kind::string_lit, s, l, c};
        }
        if (ident_start(ch)) {
            std::string s;
            while (pos < src.size() && ident_char(src[pos])) {
                s += src[pos];
                advance();
            }
            return {tok_kind::ident, s, l, c};
        }
        if (ch == ':' && pos + 1 < src.size() && src[pos + 1] == ':') {
            advance();
            advance();
            return {tok_kind::punct, "::", l, c};
        }
        if (ch == '-' && pos + 1 < src.size() && src[pos + 1] == '>') {
            advance();
            advance();
            return {tok_kind::punct, "->", l, c};
        }
        advance();
        return {tok_kind::punct, std::string(1, ch), l, c};
    }
};

struct parser {
    std::vector<token> toks;
    size_t idx = 0;
    std::string file;
    diagnostic_list* diags;
    bool in_app = false;
    bool saw_reflect = false;
    bool saw_dynload = false;

    const token& peek(size_t off = 0) const {
        size_t i = idx + off;
        return i < toks.size() ? toks[i] : toks.back();
    }
    token take() { return toks[idx < toks.size() - 1 ? idx++ : idx]; }

    void err(const token& t, const std::string& msg) {
        diags->push_back({severity::error, file, t.line, t.col, "parse", msg});
    }

    bool accept(const std::string& text) {
        if (peek().text == text && peek().kind != tok_kind::string_lit) {
            take();
            return true;
        }
        return false;
    }

    bool expect(const std::string& text, const char* what) {
        if (accept(text))
            return true;
        err(peek(), std::string("expected '") + text + "' " + what + ", got '" +
                        peek().text + "'");
        return false;
    }

    std::optional<std::string> expect_ident(const char* what) {
        if (peek().kind == tok_kind::ident)
            return take().text;
        err(peek(), std::string("expected ") + what + ", got '" + peek().text + "'");
        return std::nullopt;
    }

    std::optional<std::string> expect_string(const char* what) {
        if (peek().kind == tok_kind::string_lit)
            return take().text;
        err(peek(), std::string("expected string literal ") + what);
        return std::nullopt;
    }

    // Skips to the next ';' or '}' so one bad statement yields one diagnostic.
    void recover() {
        while (peek().kind != tok_kind::end && peek().text != ";" && peek().text != "}")
            take();
        accept(";");
    }

    sem_type parse_type() {
        auto n = expect_ident("type name");
        if (!n)
            return sem_type::opaque();
        if (*n == "String")
            return sem_type::string();
        if (*n == "StringArray")
            return sem_type::string_array();
        if (*n == "Opaque")
            return sem_type::opaque();
        return sem_type::of_class(*n);
    }

    std::vector<operand> parse_args() {
        std::vector<operand> args;
        expect("(", "to open argument list");
        if (!accept(")")) {
            do {
                if (peek().kind == tok_kind::string_lit)
                    args.push_back({true, take().text});
                else if (peek().kind == tok_kind::ident)
                    args.push_back({false, take().text});
                else {
                    err(peek(), "expected argument");
                    break;
                }
            } while (accept(","));
            expect(")", "to close argument list");
        }
        return args;
    }

    // One statement; returns nullopt for app marker statements, which only
    // set flags and are not represented in the body.
    std::optional<statement> parse_statement() {
        statement st;
        st.line = peek().line;
        st.col = peek().col;

        if (accept("clearIdentity")) {
            st.kind = stmt_kind::clear_identity;
            expect(";", "after clearIdentity");
            return st;
        }
        if (accept("restoreIdentity")) {
            st.kind = stmt_kind::restore_identity;
            expect(";", "after restoreIdentity");
            return st;
        }
        if (accept("return")) {
            st.kind = stmt_kind::ret;
            if (peek().kind == tok_kind::ident && peek().text != ";")
                st.source = take().text;
            expect(";", "after return");
            return st;
        }
        if (in_app && peek().text == "reflect" && peek(1).text == ";") {
            take();
            take();
            saw_reflect = true;
            return std::nullopt;
        }
        if (in_app && peek().text == "dynload" && peek(1).text == ";") {
            take();
            take();
            saw_dynload = true;
            return std::nullopt;
        }

        // Call without assignment: recv.m(...), C::m(...).
        if (peek().kind == tok_kind::ident && peek(1).text == "::") {
            st.kind = stmt_kind::static_call;
            st.cls = take().text;
            take();  // ::
            auto m = expect_ident("method name");
            st.sig.name = m.value_or("?");
            st.args = parse_args();
            expect(";", "after call");
            return st;
        }
        if (peek().kind == tok_kind::ident && peek(1).text == ".") {
            st.receiver = take().text;
            take();  // .
            auto m = expect_ident("method name");
            if (peek().text == "(") {
                st.kind = *m == "transact" ? stmt_kind::transact : stmt_kind::virtual_call;
                if (*m != "transact")
                    st.sig.name = *m;
                st.args = parse_args();
                expect(";", "after call");
                return st;
            }
            // base.f = y
            st.kind = stmt_kind::field_store;
            st.field = m.value_or("?");
            expect("=", "in field store");
            auto src = expect_ident("source local");
            st.source = src.value_or("?");
            expect(";", "after field store");
            return st;
        }

        // Assignments.
        auto lhs = expect_ident("statement");
        if (!lhs) {
            recover();
            return std::nullopt;
        }
        st.target = *lhs;
        if (!expect("=", "in assignment")) {
            recover();
            return std::nullopt;
        }

        if (accept("new")) {
            st.kind = stmt_kind::alloc;
            auto c = expect_ident("class name");
            st.cls = c.value_or("?");
            expect(";", "after allocation");
            return st;
        }
        if (accept("opaque")) {
            st.kind = stmt_kind::opaque_source;
            expect(";", "after opaque");
            return st;
        }
        if (peek().kind == tok_kind::string_lit) {
            st.kind = stmt_kind::string_const;
            st.literal = take().text;
            expect(";", "after string constant");
            return st;
        }
        if (accept("[")) {
            st.kind = stmt_kind::string_array_const;
            if (!accept("]")) {
                do {
                    auto s = expect_string("in array");
                    if (s)
                        st.literals.push_back(*s);
                } while (accept(","));
                expect("]", "to close array");
            }
            expect(";", "after array constant");
            return st;
        }
        if (peek().text == "getService" || peek().text == "getSystemService") {
            st.kind = peek().text == "getService" ? stmt_kind::get_service
                                                  : stmt_kind::get_system_service;
            take();
            expect("(", "to open key");
            if (peek().kind == tok_kind::string_lit)
                st.key = {true, take().text};
            else {
                auto k = expect_ident("service key");
                st.key = {false, k.value_or("?")};
            }
            expect(")", "to close key");
            expect(";", "after service lookup");
            return st;
        }
        if (peek().kind == tok_kind::ident && peek(1).text == "::") {
            st.kind = stmt_kind::static_call;
            st.cls = take().text;
            take();
            auto m = expect_ident("method name");
            st.sig.name = m.value_or("?");
            st.args = parse_args();
            expect(";", "after call");
            return st;
        }
        if (peek().kind == tok_kind::ident && peek(1).text == ".") {
            st.receiver = take().text;
            take();
            auto m = expect_ident("member name");
            if (peek().text == "(") {
                st.kind = *m == "transact" ? stmt_kind::transact : stmt_kind::virtual_call;
                if (*m != "transact")
                    st.sig.name = *m;
                st.args = parse_args();
                expect(";", "after call");
                return st;
            }
            st.kind = stmt_kind::field_load;
            st.field = m.value_or("?");
            expect(";", "after field load");
            return st;
        }
        if (peek().kind == tok_kind::ident) {
            st.kind = stmt_kind::copy;
            st.source = take().text;
            expect(";", "after copy");
            return st;
        }
        err(peek(), "malformed statement");
        recover();
        return std::nullopt;
    }

    method_def parse_method(bool is_public, bool is_static, bool ctor) {
        method_def m;
        m.is_public = is_public;
        m.is_static = is_static;
        if (ctor) {
            m.sig.name = "<init>";
        } else {
            auto n = expect_ident("method name");
            m.sig.name = n.value_or("?");
        }
        expect("(", "to open parameter list");
        if (!accept(")")) {
            do {
                auto pn = expect_ident("parameter name");
                expect(":", "after parameter name");
                sem_type pt = parse_type();
                m.param_names.push_back(pn.value_or("?"));
                m.sig.params.push_back(pt);
            } while (accept(","));
            expect(")", "to close parameter list");
        }
        if (!ctor && accept(":"))
            m.sig.ret = parse_type();
        expect("{", "to open method body");
        while (peek().kind != tok_kind::end && peek().text != "}") {
            auto st = parse_statement();
            if (st)
                m.body.push_back(*st);
        }
        expect("}", "to close method body");
        return m;
    }

    std::optional<class_def> parse_class() {
        class_def cd;
        bool is_interface = false;
        if (accept("abstract")) {
            cd.is_abstract = true;
            if (!expect("class", "after 'abstract'"))
                return std::nullopt;
        } else if (accept("interface")) {
            cd.is_abstract = true;
            is_interface = true;
        } else if (!expect("class", "to begin class")) {
            return std::nullopt;
        }
        auto name = expect_ident("class name");
        if (!name)
            return std::nullopt;
        cd.name = *name;
        if (accept("extends")) {
            auto s = expect_ident("superclass name");
            if (s) {
                if (is_interface)
                    cd.interfaces.push_back(*s);  // interface extension
                else
                    cd.superclass = *s;
            }
        }
        if (accept("implements")) {
            do {
                auto i = expect_ident("interface name");
                if (i)
                    cd.interfaces.push_back(*i);
            } while (accept(","));
        }
        expect("{", "to open class body");
        while (peek().kind != tok_kind::end && peek().text != "}") {
            if (accept("field")) {
                auto fn = expect_ident("field name");
                expect(":", "after field name");
                sem_type ft = parse_type();
                expect(";", "after field");
                if (fn) {
                    if (!cd.fields.emplace(*fn, ft).second)
                        err(peek(), "duplicate field '" + *fn + "'");
                }
                continue;
            }
            bool is_public;
            if (accept("public"))
                is_public = true;
            else if (accept("private"))
                is_public = false;
            else {
                err(peek(), "expected 'field', 'public' or 'private' in class body");
                take();
                continue;
            }
            bool is_static = accept("static");
            token at = peek();
            bool ctor = false;
            if (accept("constructor"))
                ctor = true;
            else if (!expect("method", "after visibility"))
                continue;
            method_def m = parse_method(is_public, is_static, ctor);
            if (!cd.methods.emplace(m.sig, m).second)
                err(at, "duplicate signature '" + m.sig.str() + "' in class " + cd.name);
        }
        expect("}", "to close class body");
        return cd;
    }
};

std::vector<token> tokenize(const std::string& text, const std::string& file,
                            diagnostic_list& diags) {
    lexer lx{text, file, 0, 1, 1, &diags};
    std::vector<token> toks;
    while (true) {
        token t = lx.next();
        toks.push_back(t);
        if (t.kind == tok_kind::end)
            break;
    }
    return toks;
}

}  // namespace

parse_result<framework_model> parse_framework(const std::string& text,
                                              const std::string& filename,
                                              const analysis_config& cfg) {
    parse_result<framework_model> res;
    parser p;
    p.toks = tokenize(text, filename, res.diags);
    p.file = filename;
    p.diags = &res.diags;

    framework_model fw;
    if (!p.expect("framework", "at top level"))
        return res;
    auto name = p.expect_string("as framework name");
    fw.name = name.value_or("");
    p.expect("{", "to open framework");
    while (p.peek().kind != tok_kind::end && p.peek().text != "}") {
        if (p.accept("permission")) {
            auto perm = p.expect_ident("permission name");
            if (perm) {
                if (!permission_like(*perm))
                    p.err(p.peek(), "permission '" + *perm +
                                        "' must match [A-Z][A-Z0-9_]*");
                fw.permissions.insert(*perm);
            }
            p.expect(";", "after permission");
        } else if (p.peek().text == "service" || p.peek().text == "manager") {
            bool is_service = p.take().text == "service";
            auto key = p.expect_string("as service key");
            p.expect("->", "in registry entry");
            auto cls = p.expect_ident("target class");
            if (key && cls) {
                if (is_service)
                    fw.services[*key] = *cls;
                else
                    fw.managers[*key] = *cls;
            }
            p.expect(";", "after registry entry");
        } else if (p.accept("proxy")) {
            auto proxy = p.expect_ident("proxy class");
            p.expect("for", "in proxy declaration");
            auto svc = p.expect_ident("fronted class");
            if (proxy && svc)
                fw.proxies[*proxy] = *svc;
            p.expect(";", "after proxy declaration");
        } else if (p.peek().text == "class" || p.peek().text == "abstract" ||
                   p.peek().text == "interface") {
            auto cd = p.parse_class();
            if (cd) {
                if (!fw.classes.emplace(cd->name, *cd).second)
                    p.err(p.peek(), "duplicate class '" + cd->name + "'");
            }
        } else {
            p.err(p.peek(), "unexpected '" + p.peek().text + "' in framework body");
            p.take();
        }
    }
    p.expect("}", "to close framework");

    if (has_errors(res.diags))
        return res;
    auto vdiags = validate(fw, cfg);
    for (auto& d : vdiags) {
        d.file = filename;
        res.diags.push_back(d);
    }
    if (!has_errors(res.diags))
        res.value = std::move(fw);
    return res;
}

parse_result<app_model> parse_app(const std::string& text, const std::string& filename,
                                  const analysis_config& cfg) {
    parse_result<app_model> res;
    parser p;
    p.toks = tokenize(text, filename, res.diags);
    p.file = filename;
    p.diags = &res.diags;
    p.in_app = true;

    app_model app;
    if (!p.expect("app", "at top level"))
        return res;
    auto name = p.expect_string("as app name");
    app.name = name.value_or("");
    p.expect("declares", "after app name");
    p.expect("[", "to open declared permissions");
    if (!p.accept("]")) {
        do {
            auto perm = p.expect_ident("permission name");
            if (perm)
                app.declared.insert(*perm);
        } while (p.accept(","));
        p.expect("]", "to close declared permissions");
    }
    p.expect("{", "to open app");
    while (p.peek().kind != tok_kind::end && p.peek().text != "}") {
        if (p.peek().text == "reflect" && p.peek(1).text == ";") {
            p.take();
            p.take();
            p.saw_reflect = true;
        } else if (p.peek().text == "dynload" && p.peek(1).text == ";") {
            p.take();
            p.take();
            p.saw_dynload = true;
        } else if (p.peek().text == "class" || p.peek().text == "abstract" ||
                   p.peek().text == "interface") {
            auto cd = p.parse_class();
            if (cd) {
                if (!app.classes.emplace(cd->name, *cd).second)
                    p.err(p.peek(), "duplicate class '" + cd->name + "'");
            }
        } else {
            p.err(p.peek(), "unexpected '" + p.peek().text + "' in app body");
            p.take();
        }
    }
    p.expect("}", "to close app");
    app.uses_reflection = p.saw_reflect;
    app.uses_dynamic_loading = p.saw_dynload;

    if (has_errors(res.diags))
        return res;
    auto vdiags = validate(app, nullptr, cfg);
    for (auto& d : vdiags) {
        d.file = filename;
        res.diags.push_back(d);
    }
    if (!has_errors(res.diags))
        res.value = std::move(app);
    return res;
}

namespace {
std::optional<std::string> slurp(const std::string& path, diagnostic_list& diags) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        diags.push_back({severity::error, path, 0, 0, "parse", "cannot open file"});
        return std::nullopt;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace

parse_result<framework_model> parse_framework_file(const std::string& path,
                                                   const analysis_config& cfg) {
    parse_result<framework_model> res;
    auto text = slurp(path, res.diags);
    if (!text)
        return res;
    return parse_framework(*text, path, cfg);
}

parse_result<app_model> parse_app_file(const std::string& path,
                                       const analysis_config& cfg) {
    parse_result<app_model> res;
    auto text = slurp(path, res.diags);
    if (!text)
        return res;
    return parse_app(*text, path, cfg);
}

}  // namespace permlens
