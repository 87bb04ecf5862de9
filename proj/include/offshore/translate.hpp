#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "corec.hpp"
#include "diag.hpp"
#include "icaml.hpp"

namespace offshore {

enum class Strategy { Naive, Extant, PtrArray, PtrAlloca, Final };

// What to do with `ref e` outside the dedicated `let x = ref e` shape under
// the final translation: reject it, or allocate a fresh scalar in scope.
enum class RefPolicy { Strict, Alloca };

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Naive: return "naive";
        case Strategy::Extant: return "extant";
        case Strategy::PtrArray: return "ptr-array";
        case Strategy::PtrAlloca: return "ptr-alloca";
        case Strategy::Final: return "final";
    }
    return "?";
}

inline std::optional<Strategy> strategy_from_name(const std::string& s) {
    if (s == "naive") return Strategy::Naive;
    if (s == "extant") return Strategy::Extant;
    if (s == "ptr-array") return Strategy::PtrArray;
    if (s == "ptr-alloca") return Strategy::PtrAlloca;
    if (s == "final") return Strategy::Final;
    return std::nullopt;
}

// Reason codes for extant-translation rejections (also reported in the
// diagnostic message, before the colon).
namespace restriction {
inline constexpr const char* kNonBaseRef = "non_base_ref";
inline constexpr const char* kRefLet = "ref_let";
inline constexpr const char* kNonBaseLet = "non_base_let";
inline constexpr const char* kBareRef = "bare_ref";
inline constexpr const char* kNonVariableRefOp = "non_variable_ref_op";
inline constexpr const char* kRefContext = "ref_context";
}  // namespace restriction

[[noreturn]] inline void restriction_fail(Span sp, const char* code, const std::string& detail) {
    fail(DiagKind::RestrictionViolation, sp, std::string(code) + ": " + detail);
}

// ---------------------------------------------------------------------------
// Name plumbing.

inline void collect_names(const IExprPtr& e, std::set<std::string>& out) {
    std::visit(detail::overloaded{
                   [&](const IVar& v) { out.insert(v.name); },
                   [&](const IConst&) {},
                   [&](const IApp1& a) { collect_names(a.arg, out); },
                   [&](const IApp2& a) {
                       collect_names(a.lhs, out);
                       collect_names(a.rhs, out);
                   },
                   [&](const ISeq& s) {
                       collect_names(s.head, out);
                       collect_names(s.tail, out);
                   },
                   [&](const ILet& l) {
                       out.insert(l.name);
                       collect_names(l.rhs, out);
                       collect_names(l.body, out);
                   },
               },
               e->node);
}

inline void collect_names(const CExprPtr& e, std::set<std::string>& out) {
    std::visit(detail::overloaded{
                   [&](const CVar& v) { out.insert(v.name); },
                   [&](const CConst&) {},
                   [&](const CApp1& a) { collect_names(a.arg, out); },
                   [&](const CApp2& a) {
                       collect_names(a.lhs, out);
                       collect_names(a.rhs, out);
                   },
                   [&](const CSeq& s) {
                       collect_names(s.head, out);
                       collect_names(s.tail, out);
                   },
                   [&](const CDecl& d) {
                       out.insert(d.name);
                       if (d.init) collect_names(d.init, out);
                       collect_names(d.body, out);
                   },
                   [&](const CAssign& a) {
                       out.insert(a.name);
                       collect_names(a.rhs, out);
                   },
                   [&](const CAddrOf& ao) { out.insert(ao.name); },
               },
               e->node);
}

// Fresh-name supply for translator-introduced cells: z, z1, z2, ... skipping
// every name that occurs in the source program.
class FreshNames {
public:
    explicit FreshNames(std::set<std::string> taken) : taken_(std::move(taken)) {}

    std::string fresh() {
        for (;;) {
            std::string cand = counter_ == 0 ? "z" : "z" + std::to_string(counter_);
            ++counter_;
            if (taken_.insert(cand).second) return cand;
        }
    }

private:
    std::set<std::string> taken_;
    std::size_t counter_ = 0;
};

// The set L of mutable variables in scope plus the fresh-name supply.
struct TransContext {
    std::set<std::string> mutable_set;
    FreshNames fresh;

    explicit TransContext(const IExprPtr& source)
        : fresh([&] {
              std::set<std::string> names;
              collect_names(source, names);
              return names;
          }()) {}
};

// ---------------------------------------------------------------------------
// Type mappings.

// Full erasure: `ref t` loses its ref layers.
inline CType erase_ref_type(const IType& t) {
    switch (t.kind()) {
        case IType::Kind::Unit: return CType::unit();
        case IType::Kind::Int: return CType::integer();
        case IType::Kind::Bool: return CType::boolean();
        case IType::Kind::Ref: return erase_ref_type(t.pointee());
    }
    return CType::unit();
}

// Pointer mapping: `ref t` becomes `ptr t`.
inline CType pointer_type(const IType& t) {
    switch (t.kind()) {
        case IType::Kind::Unit: return CType::unit();
        case IType::Kind::Int: return CType::integer();
        case IType::Kind::Bool: return CType::boolean();
        case IType::Kind::Ref: return CType::ptr(pointer_type(t.pointee()));
    }
    return CType::unit();
}

namespace detail {

inline const IExprPtr* ref_alloc_arg(const IExprPtr& rhs) {
    if (const auto* app = as<IApp1>(rhs); app && app->cname == "ref") return &app->arg;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Naive translation: reference-typed variables become mutable variables,
// `!x` becomes `x`, `x := e` the special assignment. Wrong under aliasing;
// kept to reproduce the classic counterexample.

inline CExprPtr tr_naive(const IExprPtr& e) {
    return std::visit(
        overloaded{
            [&](const IVar& v) { return make_cexpr(CVar{v.name}, e->span); },
            [&](const IConst& c) { return make_cexpr(CConst{c.name}, e->span); },
            [&](const IApp1& a) -> CExprPtr {
                if (a.cname == "ref")
                    fail(DiagKind::Untranslatable, e->span,
                         "reference allocation outside a let binding");
                const auto* v = as<IVar>(a.arg);
                if (a.cname == "!") {
                    if (!v)
                        fail(DiagKind::Untranslatable, e->span,
                             "dereference of a non-variable expression");
                    return make_cexpr(CVar{v->name}, e->span);
                }
                if (a.cname == "incr") {
                    if (!v)
                        fail(DiagKind::Untranslatable, e->span,
                             "incr of a non-variable expression");
                    return cb::assign(v->name,
                                      cb::app2("+", cb::var(v->name, e->span), cb::lit(1, e->span),
                                               e->span),
                                      e->span);
                }
                fail(DiagKind::Internal, e->span, "unexpected constant '" + a.cname + "'");
            },
            [&](const IApp2& a) -> CExprPtr {
                if (a.cname == ":=") {
                    const auto* v = as<IVar>(a.lhs);
                    if (!v)
                        fail(DiagKind::Untranslatable, e->span,
                             "assignment to a non-variable expression");
                    return cb::assign(v->name, tr_naive(a.rhs), e->span);
                }
                return cb::app2(a.cname, tr_naive(a.lhs), tr_naive(a.rhs), e->span);
            },
            [&](const ISeq& s) { return cb::seq(tr_naive(s.head), tr_naive(s.tail), e->span); },
            [&](const ILet& l) -> CExprPtr {
                CBinder binder{erase_ref_type(l.rhs->ty()), false, false};
                if (const IExprPtr* cell = ref_alloc_arg(l.rhs)) {
                    // Erasing `ref (ref t)` would conflate the cell with its
                    // contents; there is no faithful mutable-variable image.
                    if ((*cell)->ty().is_ref())
                        fail(DiagKind::Untranslatable, l.rhs->span,
                             "nested reference erases ambiguously");
                    return cb::decl(binder, l.name, tr_naive(*cell), tr_naive(l.body), e->span);
                }
                return cb::decl(binder, l.name, tr_naive(l.rhs), tr_naive(l.body), e->span);
            },
        },
        e->node);
}

// ---------------------------------------------------------------------------
// Extant translation: the restricted variant that outlaws aliasing instead
// of fixing it. Only base-type cells, introduced by the dedicated
// `let x = ref e` shape; ordinary lets bind base types only.

inline CExprPtr tr_extant(const IExprPtr& e) {
    return std::visit(
        overloaded{
            [&](const IVar& v) -> CExprPtr {
                if (e->ty().is_ref())
                    restriction_fail(e->span, restriction::kRefContext,
                                     "reference variable '" + v.name +
                                         "' used outside a dereference or assignment");
                return make_cexpr(CVar{v.name}, e->span);
            },
            [&](const IConst& c) { return make_cexpr(CConst{c.name}, e->span); },
            [&](const IApp1& a) -> CExprPtr {
                if (a.cname == "ref")
                    restriction_fail(e->span, restriction::kBareRef,
                                     "reference allocation outside a let binding");
                const auto* v = as<IVar>(a.arg);
                if (!v)
                    restriction_fail(e->span, restriction::kNonVariableRefOp,
                                     "'" + a.cname + "' applied to a non-variable expression");
                if (!a.arg->ty().is_ref() || !a.arg->ty().pointee().is_base())
                    restriction_fail(a.arg->span, restriction::kNonBaseRef,
                                     "'" + a.cname + "' on a non-base reference");
                if (a.cname == "!") return make_cexpr(CVar{v->name}, e->span);
                if (a.cname == "incr")
                    return cb::assign(v->name,
                                      cb::app2("+", cb::var(v->name, e->span), cb::lit(1, e->span),
                                               e->span),
                                      e->span);
                fail(DiagKind::Internal, e->span, "unexpected constant '" + a.cname + "'");
            },
            [&](const IApp2& a) -> CExprPtr {
                if (a.cname == ":=") {
                    const auto* v = as<IVar>(a.lhs);
                    if (!v)
                        restriction_fail(e->span, restriction::kNonVariableRefOp,
                                         "assignment to a non-variable expression");
                    if (!a.lhs->ty().pointee().is_base())
                        restriction_fail(a.lhs->span, restriction::kNonBaseRef,
                                         "assignment through a non-base reference");
                    return cb::assign(v->name, tr_extant(a.rhs), e->span);
                }
                return cb::app2(a.cname, tr_extant(a.lhs), tr_extant(a.rhs), e->span);
            },
            [&](const ISeq& s) { return cb::seq(tr_extant(s.head), tr_extant(s.tail), e->span); },
            [&](const ILet& l) -> CExprPtr {
                if (const IExprPtr* cell = ref_alloc_arg(l.rhs)) {
                    if (!(*cell)->ty().is_base())
                        restriction_fail(l.rhs->span, restriction::kNonBaseRef,
                                         "reference cell of non-base type " + (*cell)->ty().str());
                    CBinder binder{erase_ref_type(l.rhs->ty()), false, false};
                    return cb::decl(binder, l.name, tr_extant(*cell), tr_extant(l.body), e->span);
                }
                if (l.rhs->ty().is_ref())
                    restriction_fail(e->span, restriction::kRefLet,
                                     "let binds a reference-typed expression (aliasing)");
                if (!l.rhs->ty().is_base())
                    restriction_fail(e->span, restriction::kNonBaseLet,
                                     "let binds a non-base value of type " + l.rhs->ty().str());
                CBinder binder{erase_ref_type(l.rhs->ty()), false, false};
                return cb::decl(binder, l.name, tr_extant(l.rhs), tr_extant(l.body), e->span);
            },
        },
        e->node);
}

// ---------------------------------------------------------------------------
// Pointer translation: reference values become pointers, `ref e` becomes a
// stack allocation yielding the cell's address. Total on the source
// calculus. The two variants differ only in how the allocation is declared:
// a one-cell array or a fresh scalar whose address is taken.

inline CExprPtr tr_ptr(const IExprPtr& e, bool array1, FreshNames& fresh) {
    return std::visit(
        overloaded{
            [&](const IVar& v) { return make_cexpr(CVar{v.name}, e->span); },
            [&](const IConst& c) { return make_cexpr(CConst{c.name}, e->span); },
            [&](const IApp1& a) -> CExprPtr {
                if (a.cname == "ref") {
                    std::string cell = fresh.fresh();
                    CBinder binder{pointer_type(a.arg->ty()), false, array1};
                    return cb::decl(binder, cell, tr_ptr(a.arg, array1, fresh),
                                    cb::addr_of(cell, e->span), e->span);
                }
                if (a.cname == "!") return cb::deref(tr_ptr(a.arg, array1, fresh), e->span);
                if (a.cname == "incr")
                    return cb::app1("incr", tr_ptr(a.arg, array1, fresh), e->span);
                fail(DiagKind::Internal, e->span, "unexpected constant '" + a.cname + "'");
            },
            [&](const IApp2& a) -> CExprPtr {
                if (a.cname == ":=")
                    return cb::store(tr_ptr(a.lhs, array1, fresh), tr_ptr(a.rhs, array1, fresh),
                                     e->span);
                return cb::app2(a.cname, tr_ptr(a.lhs, array1, fresh), tr_ptr(a.rhs, array1, fresh),
                                e->span);
            },
            [&](const ISeq& s) {
                return cb::seq(tr_ptr(s.head, array1, fresh), tr_ptr(s.tail, array1, fresh), e->span);
            },
            [&](const ILet& l) -> CExprPtr {
                bool is_ref = l.rhs->ty().is_ref();
                CBinder binder{pointer_type(l.rhs->ty()), is_ref, false};
                return cb::decl(binder, l.name, tr_ptr(l.rhs, array1, fresh),
                                tr_ptr(l.body, array1, fresh), e->span);
            },
        },
        e->node);
}

// ---------------------------------------------------------------------------
// Final translation: mutable variables of the target correspond exactly to
// source variables bound by `let x = ref e`. Occurrences of those translate
// to &x; every other let becomes a const binder. No fresh variables are
// introduced (under the strict policy).

inline CExprPtr tr_final(const IExprPtr& e, std::set<std::string>& mut, RefPolicy policy,
                         FreshNames& fresh) {
    return std::visit(
        overloaded{
            [&](const IVar& v) -> CExprPtr {
                if (mut.count(v.name)) return cb::addr_of(v.name, e->span);
                return make_cexpr(CVar{v.name}, e->span);
            },
            [&](const IConst& c) { return make_cexpr(CConst{c.name}, e->span); },
            [&](const IApp1& a) -> CExprPtr {
                if (a.cname == "ref") {
                    if (policy == RefPolicy::Strict)
                        fail(DiagKind::NonBindingRef, e->span,
                             "reference allocation outside a let binding");
                    std::string cell = fresh.fresh();
                    CBinder binder{pointer_type(a.arg->ty()), false, false};
                    return cb::decl(binder, cell, tr_final(a.arg, mut, policy, fresh),
                                    cb::addr_of(cell, e->span), e->span);
                }
                if (a.cname == "!") return cb::deref(tr_final(a.arg, mut, policy, fresh), e->span);
                if (a.cname == "incr")
                    return cb::app1("incr", tr_final(a.arg, mut, policy, fresh), e->span);
                fail(DiagKind::Internal, e->span, "unexpected constant '" + a.cname + "'");
            },
            [&](const IApp2& a) -> CExprPtr {
                if (a.cname == ":=")
                    return cb::store(tr_final(a.lhs, mut, policy, fresh),
                                     tr_final(a.rhs, mut, policy, fresh), e->span);
                return cb::app2(a.cname, tr_final(a.lhs, mut, policy, fresh),
                                tr_final(a.rhs, mut, policy, fresh), e->span);
            },
            [&](const ISeq& s) {
                return cb::seq(tr_final(s.head, mut, policy, fresh),
                               tr_final(s.tail, mut, policy, fresh), e->span);
            },
            [&](const ILet& l) -> CExprPtr {
                if (const IExprPtr* cell = ref_alloc_arg(l.rhs)) {
                    CExprPtr init = tr_final(*cell, mut, policy, fresh);
                    bool was = mut.count(l.name) > 0;
                    mut.insert(l.name);
                    CExprPtr body = tr_final(l.body, mut, policy, fresh);
                    if (!was) mut.erase(l.name);
                    CBinder binder{pointer_type((*cell)->ty()), false, false};
                    return cb::decl(binder, l.name, init, body, e->span);
                }
                CExprPtr init = tr_final(l.rhs, mut, policy, fresh);
                bool was = mut.count(l.name) > 0;
                mut.erase(l.name);  // a plain let shadows any mutable binding
                CExprPtr body = tr_final(l.body, mut, policy, fresh);
                if (was) mut.insert(l.name);
                CBinder binder{pointer_type(l.rhs->ty()), true, false};
                return cb::decl(binder, l.name, init, body, e->span);
            },
        },
        e->node);
}

}  // namespace detail

// The public entry points re-typecheck their output in the target calculus,
// so a translator bug surfaces as a loud internal failure rather than a
// silently wrong tree.

inline CExprPtr translate_naive(const IExprPtr& e) {
    return typecheck_corec(detail::tr_naive(e));
}

inline CExprPtr translate_extant(const IExprPtr& e) {
    return typecheck_corec(detail::tr_extant(e));
}

inline CExprPtr translate_ptr(const IExprPtr& e, bool array1) {
    TransContext ctx(e);
    return typecheck_corece(detail::tr_ptr(e, array1, ctx.fresh));
}

inline CExprPtr translate_final(const IExprPtr& e, RefPolicy policy = RefPolicy::Strict) {
    TransContext ctx(e);
    return typecheck_corece(detail::tr_final(e, ctx.mutable_set, policy, ctx.fresh));
}

inline CExprPtr translate(const IExprPtr& e, Strategy s, RefPolicy policy = RefPolicy::Strict) {
    switch (s) {
        case Strategy::Naive: return translate_naive(e);
        case Strategy::Extant: return translate_extant(e);
        case Strategy::PtrArray: return translate_ptr(e, true);
        case Strategy::PtrAlloca: return translate_ptr(e, false);
        case Strategy::Final: return translate_final(e, policy);
    }
    fail(DiagKind::Internal, e->span, "unknown strategy");
}

// Expected result type of the final translation, for type-preservation checks.
inline CType final_type_image(const IType& t) { return pointer_type(t); }

// ---------------------------------------------------------------------------
// Alpha-renaming: make all binders distinct (and distinct from every other
// name in the program) while leaving free variables untouched. First
// occurrence of each binder keeps its name, so already-unique programs come
// back unchanged.

namespace detail {

class Renamer {
public:
    explicit Renamer(std::set<std::string> taken) : taken_(std::move(taken)) {}

    std::string bind(const std::string& name) {
        if (used_binders_.insert(name).second) return name;
        for (std::size_t i = 1;; ++i) {
            std::string cand = name + "_" + std::to_string(i);
            if (taken_.insert(cand).second) {
                used_binders_.insert(cand);
                return cand;
            }
        }
    }

private:
    std::set<std::string> taken_;
    std::set<std::string> used_binders_;
};

using RenameEnv = std::map<std::string, std::string>;

inline std::string renamed(const RenameEnv& env, const std::string& name) {
    auto it = env.find(name);
    return it == env.end() ? name : it->second;
}

inline IExprPtr alpha_i(const IExprPtr& e, RenameEnv env, Renamer& ren) {
    return std::visit(
        overloaded{
            [&](const IVar& v) { return make_iexpr(IVar{renamed(env, v.name)}, e->span, e->type); },
            [&](const IConst& c) { return make_iexpr(IConst{c.name}, e->span, e->type); },
            [&](const IApp1& a) {
                return make_iexpr(IApp1{a.cname, alpha_i(a.arg, env, ren)}, e->span, e->type);
            },
            [&](const IApp2& a) {
                return make_iexpr(IApp2{a.cname, alpha_i(a.lhs, env, ren), alpha_i(a.rhs, env, ren)},
                                  e->span, e->type);
            },
            [&](const ISeq& s) {
                return make_iexpr(ISeq{alpha_i(s.head, env, ren), alpha_i(s.tail, env, ren)},
                                  e->span, e->type);
            },
            [&](const ILet& l) {
                IExprPtr rhs = alpha_i(l.rhs, env, ren);
                std::string fresh = ren.bind(l.name);
                env.insert_or_assign(l.name, fresh);
                IExprPtr body = alpha_i(l.body, env, ren);
                return make_iexpr(ILet{fresh, rhs, body}, e->span, e->type);
            },
        },
        e->node);
}

inline CExprPtr alpha_c(const CExprPtr& e, RenameEnv env, Renamer& ren) {
    return std::visit(
        overloaded{
            [&](const CVar& v) { return make_cexpr(CVar{renamed(env, v.name)}, e->span, e->type); },
            [&](const CConst& c) { return make_cexpr(CConst{c.name}, e->span, e->type); },
            [&](const CApp1& a) {
                return make_cexpr(CApp1{a.cname, alpha_c(a.arg, env, ren)}, e->span, e->type);
            },
            [&](const CApp2& a) {
                return make_cexpr(CApp2{a.cname, alpha_c(a.lhs, env, ren), alpha_c(a.rhs, env, ren)},
                                  e->span, e->type);
            },
            [&](const CSeq& s) {
                return make_cexpr(CSeq{alpha_c(s.head, env, ren), alpha_c(s.tail, env, ren)},
                                  e->span, e->type);
            },
            [&](const CDecl& d) {
                CExprPtr init = d.init ? alpha_c(d.init, env, ren) : nullptr;
                std::string fresh = ren.bind(d.name);
                env.insert_or_assign(d.name, fresh);
                CExprPtr body = alpha_c(d.body, env, ren);
                return make_cexpr(CDecl{d.binder, fresh, init, body}, e->span, e->type);
            },
            [&](const CAssign& a) {
                return make_cexpr(CAssign{renamed(env, a.name), alpha_c(a.rhs, env, ren)}, e->span,
                                  e->type);
            },
            [&](const CAddrOf& ao) {
                return make_cexpr(CAddrOf{renamed(env, ao.name)}, e->span, e->type);
            },
        },
        e->node);
}

}  // namespace detail

inline IExprPtr alpha_rename(const IExprPtr& e) {
    std::set<std::string> names;
    collect_names(e, names);
    detail::Renamer ren(std::move(names));
    return detail::alpha_i(e, {}, ren);
}

inline CExprPtr alpha_rename(const CExprPtr& e) {
    std::set<std::string> names;
    collect_names(e, names);
    detail::Renamer ren(std::move(names));
    return detail::alpha_c(e, {}, ren);
}

// ---------------------------------------------------------------------------
// Declaration lifting.
//
// Turns a tree with declarations in arbitrary expression positions into the
// block-normal shape
//
//     L ::= u x = e0; L  |  u x; L  |  e0; L  |  e0
//
// where e0 is declaration-free, i.e. directly renderable as C statements.
// Declarations already on the statement spine stay in place. A declaration
// buried in expression position is split: the bare declaration hoists, and
// the initializer stays at the original position as an assignment under the
// comma operator, so `(int x = 1+2; x+3)+4` becomes `int x; (x=1+2,x+3)+4`.
// Splitting demotes a const binder to mutable (the deferred initialization
// is itself a store). In the extended calculus an *inert* initializer — no
// reads, no stores, so evaluating it earlier is unobservable — hoists
// together with its declaration instead, which keeps const binders and
// one-cell-array aggregates intact.
//
// Requires all binder names distinct (alpha_rename first).

namespace detail {

struct HoistEntry {
    CBinder binder;
    std::string name;
    CExprPtr init;  // null for a split (bare) declaration
    Span span;
};

inline bool inert_init(const CExprPtr& e) {
    return std::visit(overloaded{
                          [&](const CVar&) { return false; },  // reads a cell
                          [&](const CConst&) { return true; },
                          [&](const CApp1&) { return false; },
                          [&](const CApp2& a) {
                              return a.cname == "+" && inert_init(a.lhs) && inert_init(a.rhs);
                          },
                          [&](const CSeq&) { return false; },
                          [&](const CDecl&) { return false; },
                          [&](const CAssign&) { return false; },
                          [&](const CAddrOf&) { return true; },  // addresses are stable
                      },
                      e->node);
}

struct Lifter {
    CMode mode;

    CExprPtr deferred_init(const CDecl& d, const CExprPtr& init, Span sp) const {
        if (mode == CMode::CoreC) return cb::assign(d.name, init, sp);
        return cb::store(cb::addr_of(d.name, sp), init, sp);
    }

    // Expression position: strip every declaration out of `e`.
    std::pair<std::vector<HoistEntry>, CExprPtr> lift_expr(const CExprPtr& e) {
        std::vector<HoistEntry> hoists;
        CExprPtr out = lift_expr_into(e, hoists);
        return {std::move(hoists), std::move(out)};
    }

    CExprPtr lift_expr_into(const CExprPtr& e, std::vector<HoistEntry>& hoists) {
        return std::visit(
            overloaded{
                [&](const CVar&) { return e; },
                [&](const CConst&) { return e; },
                [&](const CApp1& a) -> CExprPtr {
                    CExprPtr arg = lift_expr_into(a.arg, hoists);
                    return make_cexpr(CApp1{a.cname, arg}, e->span);
                },
                [&](const CApp2& a) -> CExprPtr {
                    CExprPtr lhs = lift_expr_into(a.lhs, hoists);
                    CExprPtr rhs = lift_expr_into(a.rhs, hoists);
                    return make_cexpr(CApp2{a.cname, lhs, rhs}, e->span);
                },
                [&](const CSeq& s) -> CExprPtr {
                    CExprPtr head = lift_expr_into(s.head, hoists);
                    CExprPtr tail = lift_expr_into(s.tail, hoists);
                    return make_cexpr(CSeq{head, tail}, e->span);
                },
                [&](const CDecl& d) -> CExprPtr {
                    CExprPtr init = d.init ? lift_expr_into(d.init, hoists) : nullptr;
                    if (init && mode == CMode::CoreCE && inert_init(init)) {
                        hoists.push_back({d.binder, d.name, init, e->span});
                        return lift_expr_into(d.body, hoists);
                    }
                    CBinder binder = d.binder;
                    binder.is_const = false;
                    hoists.push_back({binder, d.name, nullptr, e->span});
                    CExprPtr body = lift_expr_into(d.body, hoists);
                    if (!init) return body;
                    return cb::seq(deferred_init(d, init, e->span), body, e->span);
                },
                [&](const CAssign& a) -> CExprPtr {
                    CExprPtr rhs = lift_expr_into(a.rhs, hoists);
                    return make_cexpr(CAssign{a.name, rhs}, e->span);
                },
                [&](const CAddrOf&) { return e; },
            },
            e->node);
    }

    CExprPtr wrap(std::vector<HoistEntry> hoists, CExprPtr rest) {
        for (auto it = hoists.rbegin(); it != hoists.rend(); ++it)
            rest = cb::decl(it->binder, it->name, it->init, rest, it->span);
        return rest;
    }

    CExprPtr spine(const CExprPtr& e) {
        if (const auto* d = cas<CDecl>(e)) {
            auto [hoists, init] = d->init ? lift_expr(d->init)
                                          : std::pair<std::vector<HoistEntry>, CExprPtr>{};
            return wrap(std::move(hoists),
                        cb::decl(d->binder, d->name, init, spine(d->body), e->span));
        }
        if (const auto* s = cas<CSeq>(e)) {
            // Scope extrusion: a declaration whose value is discarded is a
            // statement; widen its body over the rest of the sequence.
            if (const auto* d = cas<CDecl>(s->head)) {
                return spine(cb::decl(d->binder, d->name, d->init,
                                      cb::seq(d->body, s->tail, s->head->span), s->head->span));
            }
            if (const auto* inner = cas<CSeq>(s->head)) {
                return spine(cb::seq(inner->head, cb::seq(inner->tail, s->tail, e->span), e->span));
            }
            auto [hoists, head] = lift_expr(s->head);
            return wrap(std::move(hoists), cb::seq(head, spine(s->tail), e->span));
        }
        auto [hoists, out] = lift_expr(e);
        return wrap(std::move(hoists), std::move(out));
    }
};

inline void check_unique_binders(const CExprPtr& e, std::set<std::string>& seen) {
    std::visit(overloaded{
                   [&](const CVar&) {},
                   [&](const CConst&) {},
                   [&](const CApp1& a) { check_unique_binders(a.arg, seen); },
                   [&](const CApp2& a) {
                       check_unique_binders(a.lhs, seen);
                       check_unique_binders(a.rhs, seen);
                   },
                   [&](const CSeq& s) {
                       check_unique_binders(s.head, seen);
                       check_unique_binders(s.tail, seen);
                   },
                   [&](const CDecl& d) {
                       if (!seen.insert(d.name).second)
                           fail(DiagKind::DuplicateName, e->span,
                                "duplicate binder '" + d.name + "'; alpha-rename first");
                       if (d.init) check_unique_binders(d.init, seen);
                       check_unique_binders(d.body, seen);
                   },
                   [&](const CAssign& a) { check_unique_binders(a.rhs, seen); },
                   [&](const CAddrOf&) {},
               },
               e->node);
}

}  // namespace detail

inline CExprPtr lift_declarations(const CExprPtr& e, CMode mode) {
    std::set<std::string> seen;
    detail::check_unique_binders(e, seen);
    detail::Lifter lifter{mode};
    CExprPtr lifted = lifter.spine(e);
    return mode == CMode::CoreC ? typecheck_corec(lifted) : typecheck_corece(lifted);
}

inline CMode strategy_mode(Strategy s) {
    switch (s) {
        case Strategy::Naive:
        case Strategy::Extant: return CMode::CoreC;
        default: return CMode::CoreCE;
    }
}

// ---------------------------------------------------------------------------
// Small structural measures used by the differential-testing reports.

inline std::size_t count_lets(const IExprPtr& e) {
    return std::visit(detail::overloaded{
                          [&](const IVar&) -> std::size_t { return 0; },
                          [&](const IConst&) -> std::size_t { return 0; },
                          [&](const IApp1& a) { return count_lets(a.arg); },
                          [&](const IApp2& a) { return count_lets(a.lhs) + count_lets(a.rhs); },
                          [&](const ISeq& s) { return count_lets(s.head) + count_lets(s.tail); },
                          [&](const ILet& l) {
                              return 1 + count_lets(l.rhs) + count_lets(l.body);
                          },
                      },
                      e->node);
}

inline std::size_t count_ref_allocs(const IExprPtr& e) {
    return std::visit(
        detail::overloaded{
            [&](const IVar&) -> std::size_t { return 0; },
            [&](const IConst&) -> std::size_t { return 0; },
            [&](const IApp1& a) -> std::size_t {
                return (a.cname == "ref" ? 1 : 0) + count_ref_allocs(a.arg);
            },
            [&](const IApp2& a) { return count_ref_allocs(a.lhs) + count_ref_allocs(a.rhs); },
            [&](const ISeq& s) { return count_ref_allocs(s.head) + count_ref_allocs(s.tail); },
            [&](const ILet& l) { return count_ref_allocs(l.rhs) + count_ref_allocs(l.body); },
        },
        e->node);
}

inline std::size_t count_decls(const CExprPtr& e) {
    return std::visit(
        detail::overloaded{
            [&](const CVar&) -> std::size_t { return 0; },
            [&](const CConst&) -> std::size_t { return 0; },
            [&](const CApp1& a) { return count_decls(a.arg); },
            [&](const CApp2& a) { return count_decls(a.lhs) + count_decls(a.rhs); },
            [&](const CSeq& s) { return count_decls(s.head) + count_decls(s.tail); },
            [&](const CDecl& d) -> std::size_t {
                return 1 + (d.init ? count_decls(d.init) : 0) + count_decls(d.body);
            },
            [&](const CAssign& a) { return count_decls(a.rhs); },
            [&](const CAddrOf&) -> std::size_t { return 0; },
        },
        e->node);
}

// A let that binds an already-existing reference (rather than allocating
// one): the aliasing pattern the naive translation gets wrong. Requires an
// annotated tree.
inline bool contains_alias_let(const IExprPtr& e) {
    return std::visit(
        detail::overloaded{
            [&](const IVar&) { return false; },
            [&](const IConst&) { return false; },
            [&](const IApp1& a) { return contains_alias_let(a.arg); },
            [&](const IApp2& a) { return contains_alias_let(a.lhs) || contains_alias_let(a.rhs); },
            [&](const ISeq& s) { return contains_alias_let(s.head) || contains_alias_let(s.tail); },
            [&](const ILet& l) {
                bool aliasing = l.rhs->ty().is_ref() && !detail::ref_alloc_arg(l.rhs);
                return aliasing || contains_alias_let(l.rhs) || contains_alias_let(l.body);
            },
        },
        e->node);
}

}  // namespace offshore
