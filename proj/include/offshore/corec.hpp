#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "diag.hpp"

namespace offshore {

// The two modeled C subsets share one tree type; constructors are
// mode-checked by the typecheckers.
//
//   CoreC:  types unit|int|bool, assignment `x := e` is a special form.
//   CoreCE: adds pointer types, &x, the constants * and <-, and const
//           binders; assignment is an ordinary application of <-.
enum class CMode { CoreC, CoreCE };

class CType {
public:
    enum class Kind { Unit, Int, Bool, Ptr };

    CType() = default;
    static CType unit() { return CType(Kind::Unit, nullptr); }
    static CType integer() { return CType(Kind::Int, nullptr); }
    static CType boolean() { return CType(Kind::Bool, nullptr); }
    static CType ptr(CType inner) {
        return CType(Kind::Ptr, std::make_shared<CType>(std::move(inner)));
    }

    Kind kind() const { return kind_; }
    bool is_base() const { return kind_ == Kind::Int || kind_ == Kind::Bool; }
    bool is_ptr() const { return kind_ == Kind::Ptr; }
    const CType& pointee() const { return *inner_; }

    friend bool operator==(const CType& a, const CType& b) {
        if (a.kind_ != b.kind_) return false;
        if (a.kind_ == Kind::Ptr) return *a.inner_ == *b.inner_;
        return true;
    }
    friend bool operator!=(const CType& a, const CType& b) { return !(a == b); }

    std::string str() const {
        switch (kind_) {
            case Kind::Unit: return "unit";
            case Kind::Int: return "int";
            case Kind::Bool: return "bool";
            case Kind::Ptr: return "ptr " + inner_->str();
        }
        return "?";
    }

private:
    CType(Kind k, std::shared_ptr<const CType> inner) : kind_(k), inner_(std::move(inner)) {}

    Kind kind_ = Kind::Unit;
    std::shared_ptr<const CType> inner_;
};

// Binder type attached to a declaration. `array1` marks the one-cell array
// storage produced by the pointer translation of cell allocation: it is
// declared `t x[1] = {init};` and the name decays to a pointer at use sites.
struct CBinder {
    CType type;            // cell/value type (element type for array1)
    bool is_const = false;  // CoreCE only
    bool array1 = false;    // CoreCE only

    friend bool operator==(const CBinder& a, const CBinder& b) {
        return a.type == b.type && a.is_const == b.is_const && a.array1 == b.array1;
    }
};

struct CExpr;
using CExprPtr = std::shared_ptr<const CExpr>;

struct CVar {
    std::string name;
};
struct CConst {
    std::string name;
};
struct CApp1 {
    std::string cname;
    CExprPtr arg;
};
struct CApp2 {
    std::string cname;
    CExprPtr lhs, rhs;
};
struct CSeq {
    CExprPtr head, tail;
};
struct CDecl {
    CBinder binder;
    std::string name;
    CExprPtr init;  // null after lifting splits a declaration
    CExprPtr body;
};
struct CAssign {  // CoreC `x := e`
    std::string name;
    CExprPtr rhs;
};
struct CAddrOf {  // CoreCE `&x`; applies to a variable name only, by construction
    std::string name;
};

struct CExpr {
    std::variant<CVar, CConst, CApp1, CApp2, CSeq, CDecl, CAssign, CAddrOf> node;
    std::optional<CType> type;
    Span span;

    const CType& ty() const {
        if (!type) fail(DiagKind::Internal, span, "expression missing its type annotation");
        return *type;
    }
};

template <class Node>
CExprPtr make_cexpr(Node n, Span sp = {}, std::optional<CType> ty = {}) {
    auto e = std::make_shared<CExpr>();
    e->node = std::move(n);
    e->span = sp;
    e->type = std::move(ty);
    return e;
}

template <class Node>
const Node* cas(const CExprPtr& e) {
    return std::get_if<Node>(&e->node);
}

namespace cb {

inline CExprPtr var(std::string n, Span sp = {}) { return make_cexpr(CVar{std::move(n)}, sp); }
inline CExprPtr lit(long long v, Span sp = {}) { return make_cexpr(CConst{std::to_string(v)}, sp); }
inline CExprPtr boolean(bool b, Span sp = {}) { return make_cexpr(CConst{b ? "true" : "false"}, sp); }
inline CExprPtr unit(Span sp = {}) { return make_cexpr(CConst{"()"}, sp); }
inline CExprPtr app1(std::string c, CExprPtr a, Span sp = {}) {
    return make_cexpr(CApp1{std::move(c), std::move(a)}, sp);
}
inline CExprPtr app2(std::string c, CExprPtr l, CExprPtr r, Span sp = {}) {
    return make_cexpr(CApp2{std::move(c), std::move(l), std::move(r)}, sp);
}
inline CExprPtr seq(CExprPtr a, CExprPtr b, Span sp = {}) {
    return make_cexpr(CSeq{std::move(a), std::move(b)}, sp);
}
inline CExprPtr decl(CBinder u, std::string x, CExprPtr init, CExprPtr body, Span sp = {}) {
    return make_cexpr(CDecl{std::move(u), std::move(x), std::move(init), std::move(body)}, sp);
}
inline CExprPtr assign(std::string x, CExprPtr rhs, Span sp = {}) {
    return make_cexpr(CAssign{std::move(x), std::move(rhs)}, sp);
}
inline CExprPtr addr_of(std::string x, Span sp = {}) {
    return make_cexpr(CAddrOf{std::move(x)}, sp);
}
inline CExprPtr store(CExprPtr ptr, CExprPtr val, Span sp = {}) {
    return make_cexpr(CApp2{"<-", std::move(ptr), std::move(val)}, sp);
}
inline CExprPtr deref(CExprPtr ptr, Span sp = {}) {
    return make_cexpr(CApp1{"*", std::move(ptr)}, sp);
}

}  // namespace cb

// ---------------------------------------------------------------------------
// Typechecking.

using CTypeEnv = std::map<std::string, CBinder>;

namespace detail {

inline bool ctype_in_corec(const CType& t) { return !t.is_ptr(); }

inline std::optional<CType> c_const_type(const std::string& name) {
    if (name == "()") return CType::unit();
    if (name == "true" || name == "false") return CType::boolean();
    bool digits = !name.empty();
    for (char c : name)
        if (c < '0' || c > '9') digits = false;
    if (digits) return CType::integer();
    return std::nullopt;
}

inline CExprPtr tc_c(const CExprPtr& e, const CTypeEnv& env, CMode mode) {
    const bool ext = mode == CMode::CoreCE;
    return std::visit(
        overloaded{
            [&](const CVar& v) -> CExprPtr {
                auto it = env.find(v.name);
                if (it == env.end())
                    fail(DiagKind::UnboundVariable, e->span, "unbound variable '" + v.name + "'");
                return make_cexpr(CVar{v.name}, e->span, it->second.type);
            },
            [&](const CConst& c) -> CExprPtr {
                auto t = c_const_type(c.name);
                if (!t) fail(DiagKind::UnknownConstant, e->span, "unknown constant '" + c.name + "'");
                return make_cexpr(CConst{c.name}, e->span, *t);
            },
            [&](const CApp1& a) -> CExprPtr {
                if (!ext)
                    fail(DiagKind::ModeViolation, e->span,
                         "1-arity constant '" + a.cname + "' is not available here");
                CExprPtr arg = tc_c(a.arg, env, mode);
                if (a.cname == "*") {
                    if (!arg->ty().is_ptr())
                        fail(DiagKind::TypeMismatch, a.arg->span,
                             "argument of '*': expected a pointer, found " + arg->ty().str());
                    return make_cexpr(CApp1{a.cname, arg}, e->span, arg->ty().pointee());
                }
                if (a.cname == "incr") {
                    if (arg->ty() != CType::ptr(CType::integer()))
                        fail(DiagKind::TypeMismatch, a.arg->span,
                             "argument of 'incr': expected ptr int, found " + arg->ty().str());
                    return make_cexpr(CApp1{a.cname, arg}, e->span, CType::unit());
                }
                fail(DiagKind::UnknownConstant, e->span, "unknown constant '" + a.cname + "'");
            },
            [&](const CApp2& a) -> CExprPtr {
                CExprPtr lhs = tc_c(a.lhs, env, mode);
                CExprPtr rhs = tc_c(a.rhs, env, mode);
                if (a.cname == "+") {
                    if (lhs->ty() != CType::integer())
                        fail(DiagKind::TypeMismatch, a.lhs->span,
                             "argument 1 of '+': expected int, found " + lhs->ty().str());
                    if (rhs->ty() != CType::integer())
                        fail(DiagKind::TypeMismatch, a.rhs->span,
                             "argument 2 of '+': expected int, found " + rhs->ty().str());
                    return make_cexpr(CApp2{a.cname, lhs, rhs}, e->span, CType::integer());
                }
                if (a.cname == "<-") {
                    if (!ext)
                        fail(DiagKind::ModeViolation, e->span, "pointer store is not available here");
                    if (!lhs->ty().is_ptr())
                        fail(DiagKind::TypeMismatch, a.lhs->span,
                             "argument 1 of '<-': expected a pointer, found " + lhs->ty().str());
                    if (rhs->ty() != lhs->ty().pointee())
                        fail(DiagKind::TypeMismatch, a.rhs->span,
                             "argument 2 of '<-': expected " + lhs->ty().pointee().str() +
                                 ", found " + rhs->ty().str());
                    // Constness forbids re-pointing the binder itself; the direct
                    // form `&x <- e` is the rebinding-equivalent spelling.
                    if (const auto* ao = cas<CAddrOf>(a.lhs)) {
                        auto it = env.find(ao->name);
                        if (it != env.end() && it->second.is_const)
                            fail(DiagKind::ConstViolation, e->span,
                                 "store to const-bound variable '" + ao->name + "'");
                    }
                    return make_cexpr(CApp2{a.cname, lhs, rhs}, e->span, CType::unit());
                }
                fail(DiagKind::UnknownConstant, e->span, "unknown constant '" + a.cname + "'");
            },
            [&](const CSeq& s) -> CExprPtr {
                CExprPtr head = tc_c(s.head, env, mode);
                CExprPtr tail = tc_c(s.tail, env, mode);
                CType t = tail->ty();
                return make_cexpr(CSeq{head, tail}, e->span, std::move(t));
            },
            [&](const CDecl& d) -> CExprPtr {
                if (!ext && (d.binder.is_const || d.binder.array1))
                    fail(DiagKind::ModeViolation, e->span,
                         "const/array binders are not available here");
                if (!ext && !ctype_in_corec(d.binder.type))
                    fail(DiagKind::ModeViolation, e->span, "pointer types are not available here");
                CExprPtr init;
                if (d.init) {
                    init = tc_c(d.init, env, mode);
                    if (init->ty() != d.binder.type)
                        fail(DiagKind::TypeMismatch, d.init->span,
                             "initializer of '" + d.name + "': expected " + d.binder.type.str() +
                                 ", found " + init->ty().str());
                }
                CTypeEnv inner = env;
                inner.insert_or_assign(d.name, d.binder);
                CExprPtr body = tc_c(d.body, inner, mode);
                CType t = body->ty();
                return make_cexpr(CDecl{d.binder, d.name, init, body}, e->span, std::move(t));
            },
            [&](const CAssign& a) -> CExprPtr {
                if (ext)
                    fail(DiagKind::ModeViolation, e->span,
                         "special-form assignment is not available here");
                auto it = env.find(a.name);
                if (it == env.end())
                    fail(DiagKind::UnboundVariable, e->span, "unbound variable '" + a.name + "'");
                if (it->second.is_const)
                    fail(DiagKind::ConstViolation, e->span,
                         "assignment to const-bound variable '" + a.name + "'");
                CExprPtr rhs = tc_c(a.rhs, env, mode);
                if (rhs->ty() != it->second.type)
                    fail(DiagKind::TypeMismatch, a.rhs->span,
                         "assignment to '" + a.name + "': expected " + it->second.type.str() +
                             ", found " + rhs->ty().str());
                return make_cexpr(CAssign{a.name, rhs}, e->span, CType::unit());
            },
            [&](const CAddrOf& ao) -> CExprPtr {
                if (!ext)
                    fail(DiagKind::ModeViolation, e->span, "address-of is not available here");
                auto it = env.find(ao.name);
                if (it == env.end())
                    fail(DiagKind::UnboundVariable, e->span, "unbound variable '" + ao.name + "'");
                return make_cexpr(CAddrOf{ao.name}, e->span, CType::ptr(it->second.type));
            },
        },
        e->node);
}

}  // namespace detail

inline CExprPtr typecheck_corec(const CExprPtr& e, const CTypeEnv& env = {}) {
    return detail::tc_c(e, env, CMode::CoreC);
}

inline CExprPtr typecheck_corece(const CExprPtr& e, const CTypeEnv& env = {}) {
    return detail::tc_c(e, env, CMode::CoreCE);
}

// Every CoreC tree embeds into CoreCE: `x := e` becomes `&x <- e`.
inline CExprPtr embed_corece(const CExprPtr& e) {
    return std::visit(
        detail::overloaded{
            [&](const CVar& v) { return make_cexpr(CVar{v.name}, e->span); },
            [&](const CConst& c) { return make_cexpr(CConst{c.name}, e->span); },
            [&](const CApp1& a) { return make_cexpr(CApp1{a.cname, embed_corece(a.arg)}, e->span); },
            [&](const CApp2& a) {
                return make_cexpr(CApp2{a.cname, embed_corece(a.lhs), embed_corece(a.rhs)}, e->span);
            },
            [&](const CSeq& s) {
                return make_cexpr(CSeq{embed_corece(s.head), embed_corece(s.tail)}, e->span);
            },
            [&](const CDecl& d) {
                return make_cexpr(CDecl{d.binder, d.name, d.init ? embed_corece(d.init) : nullptr,
                                        embed_corece(d.body)},
                                  e->span);
            },
            [&](const CAssign& a) {
                return cb::store(cb::addr_of(a.name, e->span), embed_corece(a.rhs), e->span);
            },
            [&](const CAddrOf& ao) { return make_cexpr(CAddrOf{ao.name}, e->span); },
        },
        e->node);
}

inline bool cexpr_equal(const CExprPtr& a, const CExprPtr& b) {
    if (!a || !b) return a == b;
    if (a->node.index() != b->node.index()) return false;
    return std::visit(
        detail::overloaded{
            [&](const CVar& v) { return v.name == cas<CVar>(b)->name; },
            [&](const CConst& c) { return c.name == cas<CConst>(b)->name; },
            [&](const CApp1& x) {
                const auto* y = cas<CApp1>(b);
                return x.cname == y->cname && cexpr_equal(x.arg, y->arg);
            },
            [&](const CApp2& x) {
                const auto* y = cas<CApp2>(b);
                return x.cname == y->cname && cexpr_equal(x.lhs, y->lhs) &&
                       cexpr_equal(x.rhs, y->rhs);
            },
            [&](const CSeq& x) {
                const auto* y = cas<CSeq>(b);
                return cexpr_equal(x.head, y->head) && cexpr_equal(x.tail, y->tail);
            },
            [&](const CDecl& x) {
                const auto* y = cas<CDecl>(b);
                return x.name == y->name && x.binder == y->binder && cexpr_equal(x.init, y->init) &&
                       cexpr_equal(x.body, y->body);
            },
            [&](const CAssign& x) {
                const auto* y = cas<CAssign>(b);
                return x.name == y->name && cexpr_equal(x.rhs, y->rhs);
            },
            [&](const CAddrOf& x) { return x.name == cas<CAddrOf>(b)->name; },
        },
        a->node);
}

// ---------------------------------------------------------------------------
// Calculus-notation printer (declarations inline, `<-` printed as an arrow).
// The C renderer lives in emit.hpp.

namespace detail {

enum CPrintLevel { kCLevStmt = 0, kCLevAsn = 1, kCLevAdd = 2, kCLevUnary = 3 };

inline void collect_array1(const CExprPtr& e, std::set<std::string>& out) {
    std::visit(overloaded{
                   [&](const CVar&) {},
                   [&](const CConst&) {},
                   [&](const CApp1& a) { collect_array1(a.arg, out); },
                   [&](const CApp2& a) {
                       collect_array1(a.lhs, out);
                       collect_array1(a.rhs, out);
                   },
                   [&](const CSeq& s) {
                       collect_array1(s.head, out);
                       collect_array1(s.tail, out);
                   },
                   [&](const CDecl& d) {
                       if (d.binder.array1) out.insert(d.name);
                       if (d.init) collect_array1(d.init, out);
                       collect_array1(d.body, out);
                   },
                   [&](const CAssign& a) { collect_array1(a.rhs, out); },
                   [&](const CAddrOf&) {},
               },
               e->node);
}

inline void print_ce(const CExprPtr& e, int min_level, const std::set<std::string>& arrays,
                     std::string& out) {
    auto paren = [&](int node_level, auto&& inner) {
        if (node_level < min_level) {
            out += "(";
            inner();
            out += ")";
        } else {
            inner();
        }
    };
    std::visit(
        overloaded{
            [&](const CVar& v) { out += v.name; },
            [&](const CConst& c) { out += c.name; },
            [&](const CApp1& a) {
                paren(kCLevUnary, [&] {
                    if (a.cname == "*") {
                        out += "*";
                        print_ce(a.arg, kCLevUnary, arrays, out);
                    } else {
                        out += a.cname + " ";
                        print_ce(a.arg, kCLevUnary, arrays, out);
                    }
                });
            },
            [&](const CApp2& a) {
                if (a.cname == "+") {
                    paren(kCLevAdd, [&] {
                        print_ce(a.lhs, kCLevAdd, arrays, out);
                        out += " + ";
                        print_ce(a.rhs, kCLevUnary, arrays, out);
                    });
                } else {  // "<-"
                    paren(kCLevAsn, [&] {
                        print_ce(a.lhs, kCLevAdd, arrays, out);
                        out += " ← ";
                        print_ce(a.rhs, kCLevAsn, arrays, out);
                    });
                }
            },
            [&](const CSeq& s) {
                paren(kCLevStmt, [&] {
                    print_ce(s.head, kCLevAsn, arrays, out);
                    out += "; ";
                    print_ce(s.tail, kCLevStmt, arrays, out);
                });
            },
            [&](const CDecl& d) {
                paren(kCLevStmt, [&] {
                    if (d.binder.is_const) out += "const ";
                    out += d.binder.type.str() + " " + d.name;
                    if (d.binder.array1) out += "[1]";
                    if (d.init) {
                        out += " = ";
                        if (d.binder.array1) out += "{";
                        print_ce(d.init, kCLevAsn, arrays, out);
                        if (d.binder.array1) out += "}";
                    }
                    out += "; ";
                    print_ce(d.body, kCLevStmt, arrays, out);
                });
            },
            [&](const CAssign& a) {
                paren(kCLevAsn, [&] {
                    out += a.name + " := ";
                    print_ce(a.rhs, kCLevAsn, arrays, out);
                });
            },
            [&](const CAddrOf& ao) {
                // A one-cell array already denotes its own address.
                out += arrays.count(ao.name) ? ao.name : "&" + ao.name;
            },
        },
        e->node);
}

}  // namespace detail

inline std::string print_calculus(const CExprPtr& e) {
    std::set<std::string> arrays;
    detail::collect_array1(e, arrays);
    std::string out;
    detail::print_ce(e, detail::kCLevStmt, arrays, out);
    return out;
}

}  // namespace offshore
