#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "diag.hpp"

namespace offshore {

// The source calculus: a first-order imperative language with reference
// cells. Types are unit, the base types int/bool, and arbitrarily nested
// `ref t`. Arrow types exist only in constant signatures, never in
// expression annotations.

class IType {
public:
    enum class Kind { Unit, Int, Bool, Ref };

    IType() = default;
    static IType unit() { return IType(Kind::Unit, nullptr); }
    static IType integer() { return IType(Kind::Int, nullptr); }
    static IType boolean() { return IType(Kind::Bool, nullptr); }
    static IType ref(IType inner) {
        return IType(Kind::Ref, std::make_shared<IType>(std::move(inner)));
    }

    Kind kind() const { return kind_; }
    bool is_base() const { return kind_ == Kind::Int || kind_ == Kind::Bool; }
    bool is_ref() const { return kind_ == Kind::Ref; }
    const IType& pointee() const { return *inner_; }

    int ref_depth() const { return kind_ == Kind::Ref ? 1 + inner_->ref_depth() : 0; }

    friend bool operator==(const IType& a, const IType& b) {
        if (a.kind_ != b.kind_) return false;
        if (a.kind_ == Kind::Ref) return *a.inner_ == *b.inner_;
        return true;
    }
    friend bool operator!=(const IType& a, const IType& b) { return !(a == b); }

    std::string str() const {
        switch (kind_) {
            case Kind::Unit: return "unit";
            case Kind::Int: return "int";
            case Kind::Bool: return "bool";
            case Kind::Ref: return "ref " + inner_->str();
        }
        return "?";
    }

private:
    IType(Kind k, std::shared_ptr<const IType> inner) : kind_(k), inner_(std::move(inner)) {}

    Kind kind_ = Kind::Unit;
    std::shared_ptr<const IType> inner_;
};

// ---------------------------------------------------------------------------
// Constant signatures.
//
// Signature types may mention one schematic parameter (for ref / ! / :=,
// which are polymorphic in the cell type); every signature type has the
// shape ref^n base, so a base tag plus a ref depth is enough.

struct SchemeType {
    enum class Base { Unit, Int, Bool, Param };

    Base base = Base::Unit;
    int ref_depth = 0;

    bool mentions_param() const { return base == Base::Param; }

    IType instantiate(const std::optional<IType>& binding) const {
        IType t;
        switch (base) {
            case Base::Unit: t = IType::unit(); break;
            case Base::Int: t = IType::integer(); break;
            case Base::Bool: t = IType::boolean(); break;
            case Base::Param:
                if (!binding) fail(DiagKind::Internal, {}, "schematic constant left uninstantiated");
                t = *binding;
                break;
        }
        for (int i = 0; i < ref_depth; ++i) t = IType::ref(std::move(t));
        return t;
    }

    // Matches `actual` against this signature type, binding the parameter on
    // first use and requiring consistency afterwards.
    bool match(const IType& actual, std::optional<IType>& binding) const {
        const IType* t = &actual;
        for (int i = 0; i < ref_depth; ++i) {
            if (!t->is_ref()) return false;
            t = &t->pointee();
        }
        switch (base) {
            case Base::Unit: return t->kind() == IType::Kind::Unit;
            case Base::Int: return t->kind() == IType::Kind::Int;
            case Base::Bool: return t->kind() == IType::Kind::Bool;
            case Base::Param:
                if (!binding) {
                    binding = *t;
                    return true;
                }
                return *binding == *t;
        }
        return false;
    }

    std::string str(const std::optional<IType>& binding) const {
        std::string inner;
        switch (base) {
            case Base::Unit: inner = "unit"; break;
            case Base::Int: inner = "int"; break;
            case Base::Bool: inner = "bool"; break;
            case Base::Param: inner = binding ? binding->str() : "t"; break;
        }
        for (int i = 0; i < ref_depth; ++i) inner = "ref " + inner;
        return inner;
    }
};

struct ConstSig {
    std::string name;
    int arity = 0;
    std::vector<SchemeType> params;
    SchemeType result;
    bool schematic = false;
};

inline bool is_int_literal(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

// The named constants. Integer literals are constants too; `lookup_const`
// synthesizes their signature on demand.
inline const std::vector<ConstSig>& constant_table() {
    using B = SchemeType::Base;
    static const std::vector<ConstSig> table = {
        {"()", 0, {}, {B::Unit, 0}, false},
        {"true", 0, {}, {B::Bool, 0}, false},
        {"false", 0, {}, {B::Bool, 0}, false},
        {"+", 2, {{B::Int, 0}, {B::Int, 0}}, {B::Int, 0}, false},
        {"ref", 1, {{B::Param, 0}}, {B::Param, 1}, true},
        {"!", 1, {{B::Param, 1}}, {B::Param, 0}, true},
        {":=", 2, {{B::Param, 1}, {B::Param, 0}}, {B::Unit, 0}, true},
        {"incr", 1, {{B::Int, 1}}, {B::Unit, 0}, false},
    };
    return table;
}

inline std::optional<ConstSig> lookup_const(const std::string& name) {
    if (is_int_literal(name))
        return ConstSig{name, 0, {}, {SchemeType::Base::Int, 0}, false};
    for (const auto& sig : constant_table())
        if (sig.name == name) return sig;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Expressions.

struct IExpr;
using IExprPtr = std::shared_ptr<const IExpr>;

struct IVar {
    std::string name;
};
struct IConst {
    std::string name;
};
struct IApp1 {
    std::string cname;
    IExprPtr arg;
};
struct IApp2 {
    std::string cname;
    IExprPtr lhs, rhs;
};
struct ISeq {
    IExprPtr head, tail;
};
struct ILet {
    std::string name;
    IExprPtr rhs, body;
};

struct IExpr {
    std::variant<IVar, IConst, IApp1, IApp2, ISeq, ILet> node;
    std::optional<IType> type;  // filled in by typecheck_icaml
    Span span;

    const IType& ty() const {
        if (!type) fail(DiagKind::Internal, span, "expression missing its type annotation");
        return *type;
    }
};

template <class Node>
IExprPtr make_iexpr(Node n, Span sp = {}, std::optional<IType> ty = {}) {
    auto e = std::make_shared<IExpr>();
    e->node = std::move(n);
    e->span = sp;
    e->type = std::move(ty);
    return e;
}

template <class Node>
const Node* as(const IExprPtr& e) {
    return std::get_if<Node>(&e->node);
}

// Builders for hand-written trees (tests, fixtures).
namespace ib {

inline IExprPtr var(std::string n, Span sp = {}) { return make_iexpr(IVar{std::move(n)}, sp); }
inline IExprPtr lit(long long v, Span sp = {}) { return make_iexpr(IConst{std::to_string(v)}, sp); }
inline IExprPtr boolean(bool b, Span sp = {}) { return make_iexpr(IConst{b ? "true" : "false"}, sp); }
inline IExprPtr unit(Span sp = {}) { return make_iexpr(IConst{"()"}, sp); }
inline IExprPtr app1(std::string c, IExprPtr a, Span sp = {}) {
    return make_iexpr(IApp1{std::move(c), std::move(a)}, sp);
}
inline IExprPtr app2(std::string c, IExprPtr l, IExprPtr r, Span sp = {}) {
    return make_iexpr(IApp2{std::move(c), std::move(l), std::move(r)}, sp);
}
inline IExprPtr seq(IExprPtr a, IExprPtr b, Span sp = {}) {
    return make_iexpr(ISeq{std::move(a), std::move(b)}, sp);
}
inline IExprPtr let(std::string x, IExprPtr rhs, IExprPtr body, Span sp = {}) {
    return make_iexpr(ILet{std::move(x), std::move(rhs), std::move(body)}, sp);
}

}  // namespace ib

// ---------------------------------------------------------------------------
// Typechecking. The calculus is monomorphic and first-order, so inference
// is plain bottom-up synthesis; schematic constants are instantiated per
// occurrence.

using ITypeEnv = std::map<std::string, IType>;

namespace detail {

inline IExprPtr tc_icaml(const IExprPtr& e, const ITypeEnv& env) {
    return std::visit(
        overloaded{
            [&](const IVar& v) -> IExprPtr {
                auto it = env.find(v.name);
                if (it == env.end())
                    fail(DiagKind::UnboundVariable, e->span, "unbound variable '" + v.name + "'");
                return make_iexpr(IVar{v.name}, e->span, it->second);
            },
            [&](const IConst& c) -> IExprPtr {
                auto sig = lookup_const(c.name);
                if (!sig)
                    fail(DiagKind::UnknownConstant, e->span, "unknown constant '" + c.name + "'");
                if (sig->arity != 0)
                    fail(DiagKind::ArityMismatch, e->span,
                         "constant '" + c.name + "' expects " + std::to_string(sig->arity) +
                             " argument(s), got 0");
                return make_iexpr(IConst{c.name}, e->span, sig->result.instantiate(std::nullopt));
            },
            [&](const IApp1& a) -> IExprPtr {
                auto sig = lookup_const(a.cname);
                if (!sig)
                    fail(DiagKind::UnknownConstant, e->span, "unknown constant '" + a.cname + "'");
                if (sig->arity != 1)
                    fail(DiagKind::ArityMismatch, e->span,
                         "constant '" + a.cname + "' expects " + std::to_string(sig->arity) +
                             " argument(s), got 1");
                IExprPtr arg = tc_icaml(a.arg, env);
                std::optional<IType> binding;
                if (!sig->params[0].match(arg->ty(), binding))
                    fail(DiagKind::TypeMismatch, a.arg->span,
                         "argument 1 of '" + a.cname + "': expected " + sig->params[0].str(binding) +
                             ", found " + arg->ty().str());
                return make_iexpr(IApp1{a.cname, arg}, e->span, sig->result.instantiate(binding));
            },
            [&](const IApp2& a) -> IExprPtr {
                auto sig = lookup_const(a.cname);
                if (!sig)
                    fail(DiagKind::UnknownConstant, e->span, "unknown constant '" + a.cname + "'");
                if (sig->arity != 2)
                    fail(DiagKind::ArityMismatch, e->span,
                         "constant '" + a.cname + "' expects " + std::to_string(sig->arity) +
                             " argument(s), got 2");
                IExprPtr lhs = tc_icaml(a.lhs, env);
                IExprPtr rhs = tc_icaml(a.rhs, env);
                std::optional<IType> binding;
                if (!sig->params[0].match(lhs->ty(), binding))
                    fail(DiagKind::TypeMismatch, a.lhs->span,
                         "argument 1 of '" + a.cname + "': expected " + sig->params[0].str(binding) +
                             ", found " + lhs->ty().str());
                if (!sig->params[1].match(rhs->ty(), binding))
                    fail(DiagKind::TypeMismatch, a.rhs->span,
                         "argument 2 of '" + a.cname + "': expected " + sig->params[1].str(binding) +
                             ", found " + rhs->ty().str());
                return make_iexpr(IApp2{a.cname, lhs, rhs}, e->span, sig->result.instantiate(binding));
            },
            [&](const ISeq& s) -> IExprPtr {
                IExprPtr head = tc_icaml(s.head, env);
                IExprPtr tail = tc_icaml(s.tail, env);
                IType t = tail->ty();
                return make_iexpr(ISeq{head, tail}, e->span, std::move(t));
            },
            [&](const ILet& l) -> IExprPtr {
                IExprPtr rhs = tc_icaml(l.rhs, env);
                ITypeEnv inner = env;
                inner.insert_or_assign(l.name, rhs->ty());
                IExprPtr body = tc_icaml(l.body, inner);
                IType t = body->ty();
                return make_iexpr(ILet{l.name, rhs, body}, e->span, std::move(t));
            },
        },
        e->node);
}

}  // namespace detail

inline IExprPtr typecheck_icaml(const IExprPtr& e, const ITypeEnv& env = {}) {
    return detail::tc_icaml(e, env);
}

inline IExprPtr strip_types(const IExprPtr& e) {
    return std::visit(
        detail::overloaded{
            [&](const IVar& v) { return make_iexpr(IVar{v.name}, e->span); },
            [&](const IConst& c) { return make_iexpr(IConst{c.name}, e->span); },
            [&](const IApp1& a) { return make_iexpr(IApp1{a.cname, strip_types(a.arg)}, e->span); },
            [&](const IApp2& a) {
                return make_iexpr(IApp2{a.cname, strip_types(a.lhs), strip_types(a.rhs)}, e->span);
            },
            [&](const ISeq& s) {
                return make_iexpr(ISeq{strip_types(s.head), strip_types(s.tail)}, e->span);
            },
            [&](const ILet& l) {
                return make_iexpr(ILet{l.name, strip_types(l.rhs), strip_types(l.body)}, e->span);
            },
        },
        e->node);
}

inline bool iexpr_equal(const IExprPtr& a, const IExprPtr& b, bool with_types = false) {
    if (with_types) {
        if (a->type.has_value() != b->type.has_value()) return false;
        if (a->type && *a->type != *b->type) return false;
    }
    if (a->node.index() != b->node.index()) return false;
    return std::visit(
        detail::overloaded{
            [&](const IVar& v) { return v.name == as<IVar>(b)->name; },
            [&](const IConst& c) { return c.name == as<IConst>(b)->name; },
            [&](const IApp1& x) {
                const auto* y = as<IApp1>(b);
                return x.cname == y->cname && iexpr_equal(x.arg, y->arg, with_types);
            },
            [&](const IApp2& x) {
                const auto* y = as<IApp2>(b);
                return x.cname == y->cname && iexpr_equal(x.lhs, y->lhs, with_types) &&
                       iexpr_equal(x.rhs, y->rhs, with_types);
            },
            [&](const ISeq& x) {
                const auto* y = as<ISeq>(b);
                return iexpr_equal(x.head, y->head, with_types) &&
                       iexpr_equal(x.tail, y->tail, with_types);
            },
            [&](const ILet& x) {
                const auto* y = as<ILet>(b);
                return x.name == y->name && iexpr_equal(x.rhs, y->rhs, with_types) &&
                       iexpr_equal(x.body, y->body, with_types);
            },
        },
        a->node);
}

// ---------------------------------------------------------------------------
// Pretty-printing in the surface notation. Inverse of the surface parser on
// well-formed trees (round-trip tested).

namespace detail {

enum PrintLevel { kLevLet = 0, kLevSeq = 1, kLevAsn = 2, kLevAdd = 3, kLevUnary = 4 };

inline void print_ie(const IExprPtr& e, int min_level, std::string& out) {
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
            [&](const IVar& v) { out += v.name; },
            [&](const IConst& c) { out += c.name; },
            [&](const IApp1& a) {
                paren(kLevUnary, [&] {
                    out += a.cname == "!" ? "!" : a.cname + " ";
                    print_ie(a.arg, kLevUnary, out);
                });
            },
            [&](const IApp2& a) {
                if (a.cname == "+") {
                    paren(kLevAdd, [&] {
                        print_ie(a.lhs, kLevAdd, out);
                        out += " + ";
                        print_ie(a.rhs, kLevUnary, out);
                    });
                } else {
                    paren(kLevAsn, [&] {
                        print_ie(a.lhs, kLevAdd, out);
                        out += " " + a.cname + " ";
                        print_ie(a.rhs, kLevAsn, out);
                    });
                }
            },
            [&](const ISeq& s) {
                paren(kLevSeq, [&] {
                    print_ie(s.head, kLevAsn, out);
                    out += "; ";
                    print_ie(s.tail, kLevSeq, out);
                });
            },
            [&](const ILet& l) {
                paren(kLevLet, [&] {
                    out += "let " + l.name + " = ";
                    print_ie(l.rhs, kLevLet, out);
                    out += " in ";
                    print_ie(l.body, kLevLet, out);
                });
            },
        },
        e->node);
}

}  // namespace detail

inline std::string print_surface(const IExprPtr& e) {
    std::string out;
    detail::print_ie(e, detail::kLevLet, out);
    return out;
}

}  // namespace offshore
