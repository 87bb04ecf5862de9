#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corec.hpp"
#include "diag.hpp"
#include "semantics.hpp"
#include "translate.hpp"

namespace offshore {

// Renders lifted trees as C99. Requires block-normal input (declarations on
// the statement spine only); a declaration left in expression position is
// reported as UnliftedDeclaration.
//
// Unit is represented as int 0 in value positions, so unit-typed cells and
// variables are ordinary int storage; effectful unit expressions are coerced
// with the comma operator where a value is required.

enum class ResultFormat { Int, Bool, Unit, Ptr };

struct CSourceUnit {
    std::vector<std::string> includes;     // headers the body needs
    std::string body;                      // statements plus result expression
    ResultFormat result_format = ResultFormat::Unit;

    std::vector<std::string> stmt_lines;   // individual statements
    std::string final_expr;                // result expression (value form), empty for unit
    std::string final_stmt;                // result rendered as a statement (unit results)
    std::vector<std::string> decl_names;   // every declared variable, in order
    bool uses_incr = false;
};

struct EmitOptions {
    bool abbreviate_staraddr = true;  // print *&x as x
};

namespace detail {

// C operator precedence levels used by the renderer.
enum CEmitLevel { kEmComma = 1, kEmAssign = 2, kEmAdd = 3, kEmUnary = 4 };

inline const std::set<std::string>& c_reserved_words() {
    static const std::set<std::string> words = {
        "auto", "break", "case", "char", "const", "continue", "default", "do", "double",
        "else", "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long",
        "register", "restrict", "return", "short", "signed", "sizeof", "static", "struct",
        "switch", "typedef", "union", "unsigned", "void", "volatile", "while", "_Bool",
        "bool", "true", "false", "main", "printf", "incr"};
    return words;
}

// Programs are closed, so every name is a binder; rename any that would
// collide with a C keyword or a name the wrapper uses.
inline CExprPtr c_safe_names(const CExprPtr& e) {
    std::set<std::string> names;
    collect_names(e, names);
    std::map<std::string, std::string> rename;
    for (const auto& n : names) {
        if (!c_reserved_words().count(n)) continue;
        std::string cand = n + "_";
        while (names.count(cand) || rename.count(cand)) cand += "_";
        rename[n] = cand;
    }
    if (rename.empty()) return e;
    struct Sub {
        const std::map<std::string, std::string>& map;
        std::string operator()(const std::string& n) const {
            auto it = map.find(n);
            return it == map.end() ? n : it->second;
        }
        CExprPtr walk(const CExprPtr& x) const {
            return std::visit(
                overloaded{
                    [&](const CVar& v) { return make_cexpr(CVar{(*this)(v.name)}, x->span, x->type); },
                    [&](const CConst& c) { return make_cexpr(CConst{c.name}, x->span, x->type); },
                    [&](const CApp1& a) {
                        return make_cexpr(CApp1{a.cname, walk(a.arg)}, x->span, x->type);
                    },
                    [&](const CApp2& a) {
                        return make_cexpr(CApp2{a.cname, walk(a.lhs), walk(a.rhs)}, x->span, x->type);
                    },
                    [&](const CSeq& s) {
                        return make_cexpr(CSeq{walk(s.head), walk(s.tail)}, x->span, x->type);
                    },
                    [&](const CDecl& d) {
                        return make_cexpr(CDecl{d.binder, (*this)(d.name),
                                                d.init ? walk(d.init) : nullptr, walk(d.body)},
                                          x->span, x->type);
                    },
                    [&](const CAssign& a) {
                        return make_cexpr(CAssign{(*this)(a.name), walk(a.rhs)}, x->span, x->type);
                    },
                    [&](const CAddrOf& ao) {
                        return make_cexpr(CAddrOf{(*this)(ao.name)}, x->span, x->type);
                    },
                },
                x->node);
        }
    } sub{rename};
    return sub.walk(e);
}

inline std::string c_base_type(const CType& t) {
    switch (t.kind()) {
        case CType::Kind::Unit: return "int";  // unit storage is int 0
        case CType::Kind::Int: return "int";
        case CType::Kind::Bool: return "bool";
        case CType::Kind::Ptr: return c_base_type(t.pointee());
    }
    return "int";
}

inline int ptr_depth(const CType& t) {
    return t.is_ptr() ? 1 + ptr_depth(t.pointee()) : 0;
}

struct CRenderer {
    EmitOptions opts;
    std::set<std::string> arrays;  // one-cell array binders (names decay to pointers)
    bool uses_bool = false;
    bool uses_incr = false;

    void note_type(const CType& t) {
        if (t.kind() == CType::Kind::Bool) uses_bool = true;
        if (t.is_ptr()) note_type(t.pointee());
    }

    std::string paren(int node_level, int min_level, std::string s) const {
        if (node_level < min_level) return "(" + std::move(s) + ")";
        return s;
    }

    // Renders an expression whose value is discarded (comma-operator operand
    // or expression statement): bare effects, (void)-cast otherwise.
    std::string discarded(const CExprPtr& e) {
        if (const auto* a = cas<CAssign>(e)) return a->name + " = " + value(a->rhs, kEmAssign);
        if (const auto* a2 = cas<CApp2>(e); a2 && a2->cname == "<-") return store_expr(*a2);
        if (const auto* a1 = cas<CApp1>(e); a1 && a1->cname == "incr") {
            uses_incr = true;
            return "incr(" + value(a1->arg, kEmAssign) + ")";
        }
        if (const auto* s = cas<CSeq>(e))
            return discarded(s->head) + ", " + discarded(s->tail);  // flat comma chain
        return "(void)(" + value(e, kEmComma) + ")";
    }

    // Renders an expression in value position at the given precedence level.
    std::string value(const CExprPtr& e, int min_level) {
        return std::visit(
            overloaded{
                [&](const CVar& v) -> std::string {
                    note_type(e->ty());
                    return v.name;
                },
                [&](const CConst& c) -> std::string {
                    if (c.name == "()") return "0";
                    if (c.name == "true" || c.name == "false") {
                        uses_bool = true;
                        return c.name;
                    }
                    return c.name;
                },
                [&](const CApp1& a) -> std::string {
                    if (a.cname == "*") {
                        if (const auto* ao = cas<CAddrOf>(a.arg)) {
                            if (arrays.count(ao->name))
                                return paren(kEmUnary, min_level, "*" + ao->name);
                            if (opts.abbreviate_staraddr) return ao->name;
                            return paren(kEmUnary, min_level, "*&" + ao->name);
                        }
                        return paren(kEmUnary, min_level, "*" + value(a.arg, kEmUnary));
                    }
                    if (a.cname == "incr") {
                        uses_incr = true;
                        std::string call = "incr(" + value(a.arg, kEmAssign) + ")";
                        // unit value: coerce the void call where a value is needed
                        return paren(kEmComma, min_level, "(" + call + ", 0)");
                    }
                    fail(DiagKind::Internal, e->span, "unknown constant '" + a.cname + "'");
                },
                [&](const CApp2& a) -> std::string {
                    if (a.cname == "+")
                        return paren(kEmAdd, min_level,
                                     value(a.lhs, kEmAdd) + " + " + value(a.rhs, kEmUnary));
                    if (a.cname == "<-") {
                        std::string s = store_expr(a);
                        // assignment value is the stored value, not unit: wrap
                        return paren(kEmComma, min_level, "(" + s + ", 0)");
                    }
                    fail(DiagKind::Internal, e->span, "unknown constant '" + a.cname + "'");
                },
                [&](const CSeq& s) -> std::string {
                    std::string out = discarded(s.head) + ", " + value(s.tail, kEmAssign);
                    return paren(kEmComma, min_level, out);
                },
                [&](const CDecl&) -> std::string {
                    fail(DiagKind::UnliftedDeclaration, e->span,
                         "declaration in expression position; run lift_declarations first");
                },
                [&](const CAssign& a) -> std::string {
                    std::string s = a.name + " = " + value(a.rhs, kEmAssign);
                    return paren(kEmComma, min_level, "(" + s + ", 0)");
                },
                [&](const CAddrOf& ao) -> std::string {
                    if (arrays.count(ao.name)) return ao.name;  // arrays decay
                    return paren(kEmUnary, min_level, "&" + ao.name);
                },
            },
            e->node);
    }

    // `p <- v` prints as *P = V, with *&x abbreviated to x.
    std::string store_expr(const CApp2& a) {
        std::string lhs;
        if (const auto* ao = cas<CAddrOf>(a.lhs)) {
            if (arrays.count(ao->name))
                lhs = "*" + ao->name;
            else if (opts.abbreviate_staraddr)
                lhs = ao->name;
            else
                lhs = "*&" + ao->name;
        } else {
            lhs = "*" + value(a.lhs, kEmUnary);
        }
        return lhs + " = " + value(a.rhs, kEmAssign);
    }

    // Renders an expression as a full statement.
    std::string statement(const CExprPtr& e) { return discarded(e) + ";"; }

    std::string decl_line(const CBinder& u, const std::string& name, const CExprPtr& init) {
        note_type(u.type);
        std::string line;
        if (u.array1) {
            line = c_base_type(u.type) + " ";
            for (int i = 0; i < ptr_depth(u.type); ++i) line += "* ";
            line += name + "[1]";
            if (init) line += " = {" + value(init, kEmAssign) + "}";
            return line + ";";
        }
        int depth = ptr_depth(u.type);
        if (depth == 0) {
            line = u.is_const ? "const " + c_base_type(u.type) : c_base_type(u.type);
            line += " " + name;
        } else {
            line = c_base_type(u.type) + " ";
            for (int i = 0; i < depth; ++i) line += "* ";
            if (u.is_const) line += "const ";
            line += name;
        }
        if (init) line += " = " + value(init, kEmAssign);
        return line + ";";
    }
};

}  // namespace detail

inline CSourceUnit emit_c(const CExprPtr& lifted, const EmitOptions& opts = {}) {
    CExprPtr e = detail::c_safe_names(lifted);
    detail::CRenderer r;
    r.opts = opts;
    detail::collect_array1(e, r.arrays);

    CSourceUnit unit;
    CExprPtr cur = e;
    for (;;) {
        if (const auto* d = cas<CDecl>(cur)) {
            unit.stmt_lines.push_back(r.decl_line(d->binder, d->name, d->init));
            unit.decl_names.push_back(d->name);
            cur = d->body;
            continue;
        }
        if (const auto* s = cas<CSeq>(cur)) {
            unit.stmt_lines.push_back(r.statement(s->head));
            cur = s->tail;
            continue;
        }
        break;
    }

    switch (cur->ty().kind()) {
        case CType::Kind::Unit:
            unit.result_format = ResultFormat::Unit;
            unit.final_stmt = r.statement(cur);
            break;
        case CType::Kind::Int:
            unit.result_format = ResultFormat::Int;
            unit.final_expr = r.value(cur, detail::kEmComma);
            break;
        case CType::Kind::Bool:
            unit.result_format = ResultFormat::Bool;
            unit.final_expr = r.value(cur, detail::kEmComma);
            break;
        case CType::Kind::Ptr:
            unit.result_format = ResultFormat::Ptr;
            unit.final_expr = r.value(cur, detail::kEmComma);
            break;
    }

    std::string body;
    for (const auto& line : unit.stmt_lines) body += line + "\n";
    if (unit.result_format == ResultFormat::Unit)
        body += unit.final_stmt + "\n";
    else
        body += unit.final_expr + "\n";
    unit.body = body;
    unit.uses_incr = r.uses_incr;
    if (r.uses_bool) unit.includes.push_back("stdbool.h");
    return unit;
}

// Wraps a source unit into a complete translation unit whose main evaluates
// the program and prints the result: ints in decimal, bools as 0/1, unit as
// "()" followed by a newline.
inline std::string wrap_main(const CSourceUnit& u) {
    if (u.result_format == ResultFormat::Ptr)
        fail(DiagKind::Untranslatable, {}, "program result has pointer type; cannot print it");
    std::string out = "#include <stdio.h>\n";
    for (const auto& inc : u.includes) out += "#include <" + inc + ">\n";
    out += "\n";
    if (u.uses_incr) out += "static void incr(int * p) { *p = *p + 1; }\n\n";
    out += "int main(void) {\n";
    for (const auto& line : u.stmt_lines) out += "    " + line + "\n";
    if (u.result_format == ResultFormat::Unit) out += "    " + u.final_stmt + "\n";
    for (const auto& name : u.decl_names) out += "    (void)" + name + ";\n";
    switch (u.result_format) {
        case ResultFormat::Int:
            out += "    printf(\"%d\\n\", (" + u.final_expr + "));\n";
            break;
        case ResultFormat::Bool:
            out += "    printf(\"%d\\n\", (int)(" + u.final_expr + "));\n";
            break;
        case ResultFormat::Unit:
            out += "    printf(\"()\\n\");\n";
            break;
        case ResultFormat::Ptr: break;
    }
    out += "    return 0;\n}\n";
    return out;
}

// How the wrapped binary prints a given interpreter value.
inline std::string c_output_format(const Value& v) {
    switch (v.kind) {
        case Value::Kind::Unit: return "()";
        case Value::Kind::Int: return std::to_string(v.int_val);
        case Value::Kind::Bool: return v.bool_val ? "1" : "0";
        default: return "<" + v.str() + ">";
    }
}

// ---------------------------------------------------------------------------
// Compile-and-run helper. Uses the compiler named by $CC (default cc) with
// -std=c99 -Wall -Werror; each invocation works in a private temp directory.

struct CcResult {
    enum class Status { Ok, NoCompiler, CompileError, RunError };
    Status status = Status::Ok;
    std::string output;  // binary stdout
    std::string detail;  // compiler or runtime log
    int exit_code = 0;
};

namespace detail {

inline std::string cc_command() {
    const char* cc = std::getenv("CC");
    return cc && *cc ? cc : "cc";
}

inline int run_shell(const std::string& cmd) {
    int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    if (WIFEXITED(rc)) return WEXITSTATUS(rc);
    return -1;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace detail

inline bool cc_available() {
    static const bool ok = [] {
        return detail::run_shell(detail::cc_command() + " --version >/dev/null 2>&1") == 0;
    }();
    return ok;
}

inline CcResult compile_and_run(const std::string& c_source) {
    CcResult res;
    if (!cc_available()) {
        res.status = CcResult::Status::NoCompiler;
        res.detail = "no C compiler available (set CC)";
        return res;
    }
    char tmpl[] = "/tmp/offshore-cc.XXXXXX";
    char* dir = mkdtemp(tmpl);
    if (!dir) {
        res.status = CcResult::Status::RunError;
        res.detail = "could not create temporary directory";
        return res;
    }
    std::filesystem::path work(dir);
    {
        std::ofstream out(work / "prog.c");
        out << c_source;
    }
    std::string compile = detail::cc_command() + " -std=c99 -Wall -Werror -o '" +
                          (work / "prog").string() + "' '" + (work / "prog.c").string() + "' >'" +
                          (work / "cc.log").string() + "' 2>&1";
    if (detail::run_shell(compile) != 0) {
        res.status = CcResult::Status::CompileError;
        res.detail = detail::slurp(work / "cc.log");
        std::filesystem::remove_all(work);
        return res;
    }
    std::string run = "'" + (work / "prog").string() + "' >'" + (work / "out.txt").string() +
                      "' 2>&1";
    int rc = detail::run_shell(run);
    res.output = detail::slurp(work / "out.txt");
    res.exit_code = rc;
    if (rc != 0) {
        res.status = CcResult::Status::RunError;
        res.detail = "binary exited with code " + std::to_string(rc);
    }
    std::filesystem::remove_all(work);
    return res;
}

}  // namespace offshore
