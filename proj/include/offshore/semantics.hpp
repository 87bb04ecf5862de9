#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "corec.hpp"
#include "diag.hpp"
#include "icaml.hpp"

namespace offshore {

// Store-based definitional interpreters for all three calculi. Each
// evaluation owns its store; locations are indices into it.

struct Value {
    enum class Kind { Unit, Int, Bool, Loc, Uninit };

    Kind kind = Kind::Unit;
    long long int_val = 0;
    bool bool_val = false;
    std::size_t loc = 0;

    static Value unit() { return {}; }
    static Value integer(long long v) {
        Value x;
        x.kind = Kind::Int;
        x.int_val = v;
        return x;
    }
    static Value boolean(bool b) {
        Value x;
        x.kind = Kind::Bool;
        x.bool_val = b;
        return x;
    }
    static Value location(std::size_t l) {
        Value x;
        x.kind = Kind::Loc;
        x.loc = l;
        return x;
    }
    // Sentinel held by cells created by a split declaration before their
    // deferred initialization runs; reading one is an internal error.
    static Value uninit() {
        Value x;
        x.kind = Kind::Uninit;
        return x;
    }

    friend bool operator==(const Value& a, const Value& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
            case Kind::Unit: return true;
            case Kind::Int: return a.int_val == b.int_val;
            case Kind::Bool: return a.bool_val == b.bool_val;
            case Kind::Loc: return a.loc == b.loc;
            case Kind::Uninit: return true;
        }
        return false;
    }
    friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

    std::string str() const {
        switch (kind) {
            case Kind::Unit: return "()";
            case Kind::Int: return std::to_string(int_val);
            case Kind::Bool: return bool_val ? "true" : "false";
            case Kind::Loc: return "<loc:" + std::to_string(loc) + ">";
            case Kind::Uninit: return "<uninit>";
        }
        return "?";
    }
};

class Store {
public:
    std::size_t alloc(Value v) {
        cells_.push_back(std::move(v));
        return cells_.size() - 1;
    }
    const Value& read(std::size_t loc) const {
        if (loc >= cells_.size()) fail(DiagKind::Internal, {}, "read of unallocated location");
        return cells_[loc];
    }
    void write(std::size_t loc, Value v) {
        if (loc >= cells_.size()) fail(DiagKind::Internal, {}, "write to unallocated location");
        cells_[loc] = std::move(v);
    }
    std::size_t next_location() const { return cells_.size(); }
    std::size_t size() const { return cells_.size(); }

private:
    std::vector<Value> cells_;
};

struct EvalResult {
    Value value;
    Store store;
    std::size_t steps = 0;
};

inline constexpr std::size_t kDefaultStepLimit = 1'000'000;

using IValueEnv = std::map<std::string, Value>;
using CLocEnv = std::map<std::string, std::size_t>;

namespace detail {

struct StepCounter {
    std::size_t steps = 0;
    std::size_t limit = kDefaultStepLimit;

    void tick(Span sp) {
        if (++steps > limit) fail(DiagKind::Internal, sp, "step limit exceeded");
    }
};

inline long long expect_int(const Value& v, Span sp) {
    if (v.kind != Value::Kind::Int) fail(DiagKind::Internal, sp, "expected an int value");
    return v.int_val;
}

inline std::size_t expect_loc(const Value& v, Span sp) {
    if (v.kind != Value::Kind::Loc) fail(DiagKind::Internal, sp, "expected a location value");
    return v.loc;
}

inline const Value& checked_read(const Store& store, std::size_t loc, Span sp) {
    const Value& v = store.read(loc);
    if (v.kind == Value::Kind::Uninit)
        fail(DiagKind::Internal, sp, "read of uninitialized cell");
    return v;
}

inline Value const_value(const std::string& name, Span sp) {
    if (name == "()") return Value::unit();
    if (name == "true") return Value::boolean(true);
    if (name == "false") return Value::boolean(false);
    if (is_int_literal(name)) return Value::integer(std::stoll(name));
    fail(DiagKind::Internal, sp, "unknown constant '" + name + "' at run time");
}

inline Value eval_i(const IExprPtr& e, IValueEnv& env, Store& store, StepCounter& sc) {
    sc.tick(e->span);
    return std::visit(
        overloaded{
            [&](const IVar& v) -> Value {
                auto it = env.find(v.name);
                if (it == env.end())
                    fail(DiagKind::Internal, e->span, "unbound variable '" + v.name + "' at run time");
                return it->second;
            },
            [&](const IConst& c) -> Value { return const_value(c.name, e->span); },
            [&](const IApp1& a) -> Value {
                Value arg = eval_i(a.arg, env, store, sc);
                if (a.cname == "ref") return Value::location(store.alloc(arg));
                if (a.cname == "!") return checked_read(store, expect_loc(arg, e->span), e->span);
                if (a.cname == "incr") {
                    std::size_t loc = expect_loc(arg, e->span);
                    long long v = expect_int(checked_read(store, loc, e->span), e->span);
                    store.write(loc, Value::integer(v + 1));
                    return Value::unit();
                }
                fail(DiagKind::Internal, e->span, "unknown constant '" + a.cname + "' at run time");
            },
            [&](const IApp2& a) -> Value {
                Value lhs = eval_i(a.lhs, env, store, sc);
                Value rhs = eval_i(a.rhs, env, store, sc);
                if (a.cname == "+")
                    return Value::integer(expect_int(lhs, e->span) + expect_int(rhs, e->span));
                if (a.cname == ":=") {
                    store.write(expect_loc(lhs, e->span), rhs);
                    return Value::unit();
                }
                fail(DiagKind::Internal, e->span, "unknown constant '" + a.cname + "' at run time");
            },
            [&](const ISeq& s) -> Value {
                eval_i(s.head, env, store, sc);
                return eval_i(s.tail, env, store, sc);
            },
            [&](const ILet& l) -> Value {
                // Binds the value itself: binding a location aliases the cell.
                Value rhs = eval_i(l.rhs, env, store, sc);
                auto it = env.find(l.name);
                bool had = it != env.end();
                Value saved = had ? it->second : Value{};
                env.insert_or_assign(l.name, rhs);
                Value out = eval_i(l.body, env, store, sc);
                if (had)
                    env.insert_or_assign(l.name, saved);
                else
                    env.erase(l.name);
                return out;
            },
        },
        e->node);
}

inline Value eval_c(const CExprPtr& e, CLocEnv& env, Store& store, StepCounter& sc, CMode mode) {
    sc.tick(e->span);
    const bool ext = mode == CMode::CoreCE;
    return std::visit(
        overloaded{
            [&](const CVar& v) -> Value {
                auto it = env.find(v.name);
                if (it == env.end())
                    fail(DiagKind::Internal, e->span, "unbound variable '" + v.name + "' at run time");
                return checked_read(store, it->second, e->span);
            },
            [&](const CConst& c) -> Value { return const_value(c.name, e->span); },
            [&](const CApp1& a) -> Value {
                if (!ext) fail(DiagKind::Internal, e->span, "1-arity constant in CoreC at run time");
                Value arg = eval_c(a.arg, env, store, sc, mode);
                if (a.cname == "*") return checked_read(store, expect_loc(arg, e->span), e->span);
                if (a.cname == "incr") {
                    std::size_t loc = expect_loc(arg, e->span);
                    long long v = expect_int(checked_read(store, loc, e->span), e->span);
                    store.write(loc, Value::integer(v + 1));
                    return Value::unit();
                }
                fail(DiagKind::Internal, e->span, "unknown constant '" + a.cname + "' at run time");
            },
            [&](const CApp2& a) -> Value {
                Value lhs = eval_c(a.lhs, env, store, sc, mode);
                Value rhs = eval_c(a.rhs, env, store, sc, mode);
                if (a.cname == "+")
                    return Value::integer(expect_int(lhs, e->span) + expect_int(rhs, e->span));
                if (a.cname == "<-") {
                    if (!ext) fail(DiagKind::Internal, e->span, "pointer store in CoreC at run time");
                    store.write(expect_loc(lhs, e->span), rhs);
                    return Value::unit();
                }
                fail(DiagKind::Internal, e->span, "unknown constant '" + a.cname + "' at run time");
            },
            [&](const CSeq& s) -> Value {
                eval_c(s.head, env, store, sc, mode);
                return eval_c(s.tail, env, store, sc, mode);
            },
            [&](const CDecl& d) -> Value {
                // A declaration always allocates a fresh cell; the name is
                // bound to the cell, so initialization copies the value.
                Value init = d.init ? eval_c(d.init, env, store, sc, mode) : Value::uninit();
                std::size_t loc = store.alloc(init);
                auto it = env.find(d.name);
                bool had = it != env.end();
                std::size_t saved = had ? it->second : 0;
                env.insert_or_assign(d.name, loc);
                Value out = eval_c(d.body, env, store, sc, mode);
                if (had)
                    env.insert_or_assign(d.name, saved);
                else
                    env.erase(d.name);
                return out;
            },
            [&](const CAssign& a) -> Value {
                if (ext) fail(DiagKind::Internal, e->span, "special assignment in CoreCE at run time");
                auto it = env.find(a.name);
                if (it == env.end())
                    fail(DiagKind::Internal, e->span, "unbound variable '" + a.name + "' at run time");
                Value rhs = eval_c(a.rhs, env, store, sc, mode);
                store.write(it->second, rhs);
                return Value::unit();
            },
            [&](const CAddrOf& ao) -> Value {
                if (!ext) fail(DiagKind::Internal, e->span, "address-of in CoreC at run time");
                auto it = env.find(ao.name);
                if (it == env.end())
                    fail(DiagKind::Internal, e->span, "unbound variable '" + ao.name + "' at run time");
                return Value::location(it->second);
            },
        },
        e->node);
}

}  // namespace detail

inline EvalResult eval_icaml(const IExprPtr& e, IValueEnv env = {}, Store store = {},
                             std::size_t step_limit = kDefaultStepLimit) {
    detail::StepCounter sc{0, step_limit};
    Value v = detail::eval_i(e, env, store, sc);
    return EvalResult{std::move(v), std::move(store), sc.steps};
}

inline EvalResult eval_corec(const CExprPtr& e, CLocEnv env = {}, Store store = {},
                             std::size_t step_limit = kDefaultStepLimit) {
    detail::StepCounter sc{0, step_limit};
    Value v = detail::eval_c(e, env, store, sc, CMode::CoreC);
    return EvalResult{std::move(v), std::move(store), sc.steps};
}

inline EvalResult eval_corece(const CExprPtr& e, CLocEnv env = {}, Store store = {},
                              std::size_t step_limit = kDefaultStepLimit) {
    detail::StepCounter sc{0, step_limit};
    Value v = detail::eval_c(e, env, store, sc, CMode::CoreCE);
    return EvalResult{std::move(v), std::move(store), sc.steps};
}

}  // namespace offshore
