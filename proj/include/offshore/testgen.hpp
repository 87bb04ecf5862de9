#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "icaml.hpp"

namespace offshore {

// Sized, type-directed generator of closed well-typed source programs. All
// randomness flows through a splitmix64 stream, so (seed, config) determines
// the program exactly, on every platform.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::size_t below(std::size_t n) { return n == 0 ? 0 : next() % n; }
    bool chance(double p) { return static_cast<double>(next() >> 11) / 9007199254740992.0 < p; }

private:
    std::uint64_t state_;
};

struct GenConfig {
    int max_depth = 8;
    IType target_type = IType::integer();
    double alias_bias = 0.0;  // probability a ref-typed let reuses a cell in scope
    std::uint64_t seed = 0;
    bool include_nested_refs = true;
    bool include_incr = true;
};

namespace detail {

inline constexpr int kMaxRefNesting = 3;

struct Gen {
    const GenConfig& cfg;
    Rng rng;
    std::vector<std::pair<std::string, IType>> scope;
    std::size_t next_var = 0;

    explicit Gen(const GenConfig& c) : cfg(c), rng(c.seed) {}

    // Copies, not references: scope reallocates during nested generation.
    std::vector<std::string> vars_of(const IType& t) const {
        std::vector<std::string> out;
        for (const auto& [name, ty] : scope)
            if (ty == t) out.push_back(name);
        return out;
    }

    std::vector<std::pair<std::string, IType>> ref_vars() const {
        std::vector<std::pair<std::string, IType>> out;
        for (const auto& [name, ty] : scope)
            if (ty.is_ref()) out.emplace_back(name, ty);
        return out;
    }

    // Can a closed term of type t fit in the remaining depth?
    bool can(const IType& t, int depth) const {
        if (depth < 1) return false;
        if (!t.is_ref()) return true;  // literals exist for base/unit
        if (!vars_of(t).empty()) return true;
        return depth >= 2 && can(t.pointee(), depth - 1);
    }

    IType sample_cell_type(int depth) {
        // Cell content type for ref allocations and stores.
        std::size_t roll = rng.below(100);
        if (cfg.include_nested_refs && roll < 15) {
            IType inner = sample_cell_type(depth - 1);
            if (inner.ref_depth() < kMaxRefNesting && can(IType::ref(inner), depth))
                return IType::ref(inner);
        }
        if (roll < 70) return IType::integer();
        if (roll < 85) return IType::boolean();
        if (roll < 92) return IType::unit();
        return IType::integer();
    }

    IType sample_let_type(int depth) {
        std::size_t roll = rng.below(100);
        if (roll < 45 && can(IType::ref(IType::integer()), depth))
            return IType::ref(sample_cell_type(depth - 1));
        if (roll < 70) return IType::integer();
        if (roll < 82) return IType::boolean();
        if (roll < 90) return IType::unit();
        return IType::integer();
    }

    IExprPtr leaf(const IType& t) {
        switch (t.kind()) {
            case IType::Kind::Int: {
                auto vars = vars_of(t);
                if (!vars.empty() && rng.chance(0.5)) return ib::var(vars[rng.below(vars.size())]);
                return ib::lit(static_cast<long long>(rng.below(10)));
            }
            case IType::Kind::Bool: {
                auto vars = vars_of(t);
                if (!vars.empty() && rng.chance(0.5)) return ib::var(vars[rng.below(vars.size())]);
                return ib::boolean(rng.below(2) == 0);
            }
            case IType::Kind::Unit: {
                auto vars = vars_of(t);
                if (!vars.empty() && rng.chance(0.3)) return ib::var(vars[rng.below(vars.size())]);
                return ib::unit();
            }
            case IType::Kind::Ref: {
                auto vars = vars_of(t);
                if (!vars.empty()) return ib::var(vars[rng.below(vars.size())]);
                return nullptr;  // caller guarantees can(t, depth)
            }
        }
        return nullptr;
    }

    IExprPtr gen_let(const IType& t, int depth) {
        IType bound = sample_let_type(depth - 1);
        IExprPtr rhs;
        if (bound.is_ref()) {
            auto aliases = vars_of(bound);
            bool aliased = !aliases.empty() && rng.chance(cfg.alias_bias);
            if (aliased) {
                rhs = ib::var(aliases[rng.below(aliases.size())]);
            } else if (depth >= 3 && rng.chance(0.12) && can(bound, depth - 1)) {
                // occasionally a general ref-typed rhs (not the letref shape)
                rhs = gen(bound, depth - 1);
            } else if (depth >= 2 && can(bound.pointee(), depth - 2)) {
                rhs = ib::app1("ref", gen(bound.pointee(), depth - 2));
            } else if (!aliases.empty()) {
                rhs = ib::var(aliases[rng.below(aliases.size())]);
            } else {
                bound = IType::integer();
                rhs = gen(bound, depth - 1);
            }
        } else {
            rhs = gen(bound, depth - 1);
        }
        std::string name = "v" + std::to_string(next_var++);
        scope.emplace_back(name, bound);
        IExprPtr body = gen(t, depth - 1);
        scope.pop_back();
        return ib::let(name, rhs, body);
    }

    IExprPtr gen(const IType& t, int depth) {
        if (depth <= 1) {
            IExprPtr e = leaf(t);
            if (e) return e;
            // unreachable when callers respect can(); keep a safe fallback
            return ib::lit(0);
        }

        struct Choice {
            int weight;
            std::function<IExprPtr()> make;
        };
        std::vector<Choice> choices;
        auto add = [&](int w, std::function<IExprPtr()> f) {
            choices.push_back({w, std::move(f)});
        };

        add(t.is_ref() ? 45 : 25, [&] { return leaf(t); });
        bool readable = !t.is_ref() || (cfg.include_nested_refs && t.ref_depth() < kMaxRefNesting);
        if (readable) {
            auto rvars = vars_of(IType::ref(t));
            if (!rvars.empty()) {
                add(t.is_ref() ? 5 : 14,
                    [&, rvars] { return ib::app1("!", ib::var(rvars[rng.below(rvars.size())])); });
            } else if (depth >= 3 && can(t, depth - 2)) {
                // no cell of this type yet: bind one, then use it
                add(t.is_ref() ? 4 : 10, [&] {
                    IExprPtr rhs = ib::app1("ref", gen(t, depth - 2));
                    std::string name = "v" + std::to_string(next_var++);
                    scope.emplace_back(name, IType::ref(t));
                    IExprPtr body = gen(t, depth - 1);
                    scope.pop_back();
                    return ib::let(name, rhs, body);
                });
            } else if (can(IType::ref(t), depth - 1)) {
                add(1, [&] { return ib::app1("!", gen(IType::ref(t), depth - 1)); });
            }
        }
        if (can(t, depth - 1)) {
            add(18, [&] { return gen_let(t, depth); });
            add(10, [&] {
                IType head = sample_cell_type(depth - 1);
                // do not allocate a cell just to discard it
                if (!can(head, depth - 1) || (head.is_ref() && vars_of(head).empty()))
                    head = IType::integer();
                return ib::seq(gen(head, depth - 1), gen(t, depth - 1));
            });
        }

        auto cells = ref_vars();
        switch (t.kind()) {
            case IType::Kind::Int:
                add(22, [&] {
                    return ib::app2("+", gen(IType::integer(), depth - 1),
                                    gen(IType::integer(), depth - 1));
                });
                break;
            case IType::Kind::Unit:
                if (!cells.empty())
                    add(22, [&] {
                        // store into a named in-scope cell
                        auto [name, ty] = cells[rng.below(cells.size())];
                        IType cell = ty.pointee();
                        if (!can(cell, depth - 1)) return ib::unit();
                        IExprPtr value = gen(cell, depth - 1);
                        return ib::app2(":=", ib::var(name), value);
                    });
                if (depth >= 4)
                    add(2, [&] {
                        IType cell = sample_cell_type(depth - 1);
                        IType rt = IType::ref(cell);
                        if (!can(rt, depth - 1) || !can(cell, depth - 1)) return ib::unit();
                        return ib::app2(":=", gen(rt, depth - 1), gen(cell, depth - 1));
                    });
                if (cfg.include_incr) {
                    auto ints = vars_of(IType::ref(IType::integer()));
                    if (!ints.empty())
                        add(8, [&, ints] { return ib::app1("incr", ib::var(ints[rng.below(ints.size())])); });
                    else if (can(IType::ref(IType::integer()), depth - 1))
                        add(2, [&] {
                            return ib::app1("incr", gen(IType::ref(IType::integer()), depth - 1));
                        });
                }
                break;
            case IType::Kind::Ref:
                // The letref idiom: introduce the needed cell with a
                // dedicated binding, then refer to it by name.
                if (depth >= 3 && can(t.pointee(), depth - 2))
                    add(28, [&] {
                        IExprPtr rhs = ib::app1("ref", gen(t.pointee(), depth - 2));
                        std::string name = "v" + std::to_string(next_var++);
                        scope.emplace_back(name, t);
                        IExprPtr body = gen(t, depth - 1);
                        scope.pop_back();
                        return ib::let(name, rhs, body);
                    });
                // Allocation outside a let binding: legal, but unidiomatic in
                // this fragment; keep it present yet rare.
                if (can(t.pointee(), depth - 1))
                    add(vars_of(t).empty() && depth < 3 ? 20 : 1,
                        [&] { return ib::app1("ref", gen(t.pointee(), depth - 1)); });
                break;
            case IType::Kind::Bool: break;
        }

        // drop unusable choices (leaf may fail only for refs with no vars)
        if (t.is_ref() && vars_of(t).empty()) choices[0].weight = 0;

        int total = 0;
        for (const auto& c : choices) total += c.weight;
        if (total == 0) {
            if (t.is_ref()) return ib::app1("ref", gen(t.pointee(), depth - 1));
            return leaf(t);
        }
        int roll = static_cast<int>(rng.below(static_cast<std::size_t>(total)));
        for (const auto& c : choices) {
            roll -= c.weight;
            if (roll < 0) return c.make();
        }
        return leaf(t);
    }
};

}  // namespace detail

// Generates a closed, annotated, well-typed program. Deterministic in
// (seed, config). The depth bound is raised to the smallest depth at which
// a closed term of the target type exists at all (1 + its ref nesting).
inline IExprPtr generate(const GenConfig& cfg) {
    detail::Gen g(cfg);
    int depth = cfg.max_depth;
    if (depth < 1) depth = 1;
    if (depth < 1 + cfg.target_type.ref_depth()) depth = 1 + cfg.target_type.ref_depth();
    IExprPtr raw = g.gen(cfg.target_type, depth);
    return typecheck_icaml(raw);
}

// ---------------------------------------------------------------------------
// Structural measures.

inline std::size_t expr_size(const IExprPtr& e) {
    return std::visit(detail::overloaded{
                          [&](const IVar&) -> std::size_t { return 1; },
                          [&](const IConst&) -> std::size_t { return 1; },
                          [&](const IApp1& a) { return 1 + expr_size(a.arg); },
                          [&](const IApp2& a) { return 1 + expr_size(a.lhs) + expr_size(a.rhs); },
                          [&](const ISeq& s) { return 1 + expr_size(s.head) + expr_size(s.tail); },
                          [&](const ILet& l) { return 1 + expr_size(l.rhs) + expr_size(l.body); },
                      },
                      e->node);
}

inline std::size_t expr_depth(const IExprPtr& e) {
    auto max2 = [](std::size_t a, std::size_t b) { return a > b ? a : b; };
    return std::visit(
        detail::overloaded{
            [&](const IVar&) -> std::size_t { return 1; },
            [&](const IConst&) -> std::size_t { return 1; },
            [&](const IApp1& a) { return 1 + expr_depth(a.arg); },
            [&](const IApp2& a) { return 1 + max2(expr_depth(a.lhs), expr_depth(a.rhs)); },
            [&](const ISeq& s) { return 1 + max2(expr_depth(s.head), expr_depth(s.tail)); },
            [&](const ILet& l) { return 1 + max2(expr_depth(l.rhs), expr_depth(l.body)); },
        },
        e->node);
}

inline void free_vars(const IExprPtr& e, std::set<std::string>& bound,
                      std::set<std::string>& out) {
    std::visit(detail::overloaded{
                   [&](const IVar& v) {
                       if (!bound.count(v.name)) out.insert(v.name);
                   },
                   [&](const IConst&) {},
                   [&](const IApp1& a) { free_vars(a.arg, bound, out); },
                   [&](const IApp2& a) {
                       free_vars(a.lhs, bound, out);
                       free_vars(a.rhs, bound, out);
                   },
                   [&](const ISeq& s) {
                       free_vars(s.head, bound, out);
                       free_vars(s.tail, bound, out);
                   },
                   [&](const ILet& l) {
                       free_vars(l.rhs, bound, out);
                       bool had = bound.count(l.name) > 0;
                       bound.insert(l.name);
                       free_vars(l.body, bound, out);
                       if (!had) bound.erase(l.name);
                   },
               },
               e->node);
}

inline bool is_closed(const IExprPtr& e) {
    std::set<std::string> bound, free;
    free_vars(e, bound, free);
    return free.empty();
}

// ---------------------------------------------------------------------------
// Shrinking: greedy descent over size-reducing, type-preserving rewrites,
// keeping the failure predicate true. Returns a local minimum.

namespace detail {

inline bool binds_name(const IExprPtr& e, const std::string& name) {
    return std::visit(overloaded{
                          [&](const IVar&) { return false; },
                          [&](const IConst&) { return false; },
                          [&](const IApp1& a) { return binds_name(a.arg, name); },
                          [&](const IApp2& a) {
                              return binds_name(a.lhs, name) || binds_name(a.rhs, name);
                          },
                          [&](const ISeq& s) {
                              return binds_name(s.head, name) || binds_name(s.tail, name);
                          },
                          [&](const ILet& l) {
                              return l.name == name || binds_name(l.rhs, name) ||
                                     binds_name(l.body, name);
                          },
                      },
                      e->node);
}

inline IExprPtr substitute(const IExprPtr& e, const std::string& name, const IExprPtr& value) {
    return std::visit(
        overloaded{
            [&](const IVar& v) -> IExprPtr { return v.name == name ? value : e; },
            [&](const IConst&) -> IExprPtr { return e; },
            [&](const IApp1& a) -> IExprPtr {
                return make_iexpr(IApp1{a.cname, substitute(a.arg, name, value)}, e->span);
            },
            [&](const IApp2& a) -> IExprPtr {
                return make_iexpr(IApp2{a.cname, substitute(a.lhs, name, value),
                                        substitute(a.rhs, name, value)},
                                  e->span);
            },
            [&](const ISeq& s) -> IExprPtr {
                return make_iexpr(ISeq{substitute(s.head, name, value),
                                       substitute(s.tail, name, value)},
                                  e->span);
            },
            [&](const ILet& l) -> IExprPtr {
                IExprPtr rhs = substitute(l.rhs, name, value);
                IExprPtr body = l.name == name ? l.body : substitute(l.body, name, value);
                return make_iexpr(ILet{l.name, rhs, body}, e->span);
            },
        },
        e->node);
}

// Candidate rewrites of the whole tree, obtained by shrinking one node.
inline void shrink_candidates(const IExprPtr& e,
                              const std::function<IExprPtr(IExprPtr)>& rebuild,
                              std::vector<IExprPtr>& out) {
    std::visit(
        overloaded{
            [&](const IVar&) {},
            [&](const IConst& c) {
                if (is_int_literal(c.name) && c.name != "0") {
                    long long v = std::stoll(c.name);
                    out.push_back(rebuild(ib::lit(0)));
                    if (v / 2 != 0) out.push_back(rebuild(ib::lit(v / 2)));
                }
                if (c.name == "true") out.push_back(rebuild(ib::boolean(false)));
            },
            [&](const IApp1& a) {
                shrink_candidates(a.arg, [&](IExprPtr n) {
                    return rebuild(make_iexpr(IApp1{a.cname, std::move(n)}, e->span));
                }, out);
            },
            [&](const IApp2& a) {
                if (a.cname == "+") {
                    out.push_back(rebuild(strip_types(a.lhs)));
                    out.push_back(rebuild(strip_types(a.rhs)));
                }
                shrink_candidates(a.lhs, [&](IExprPtr n) {
                    return rebuild(make_iexpr(IApp2{a.cname, std::move(n), a.rhs}, e->span));
                }, out);
                shrink_candidates(a.rhs, [&](IExprPtr n) {
                    return rebuild(make_iexpr(IApp2{a.cname, a.lhs, std::move(n)}, e->span));
                }, out);
            },
            [&](const ISeq& s) {
                if (s.head->type && s.tail->type && *s.head->type == *s.tail->type)
                    out.push_back(rebuild(strip_types(s.head)));
                out.push_back(rebuild(strip_types(s.tail)));
                shrink_candidates(s.head, [&](IExprPtr n) {
                    return rebuild(make_iexpr(ISeq{std::move(n), s.tail}, e->span));
                }, out);
                shrink_candidates(s.tail, [&](IExprPtr n) {
                    return rebuild(make_iexpr(ISeq{s.head, std::move(n)}, e->span));
                }, out);
            },
            [&](const ILet& l) {
                const bool var_rhs = as<IVar>(l.rhs) != nullptr;
                const bool const_rhs = as<IConst>(l.rhs) != nullptr;
                if (var_rhs || const_rhs) {
                    bool capture = var_rhs && binds_name(l.body, as<IVar>(l.rhs)->name);
                    if (!capture)
                        out.push_back(rebuild(strip_types(substitute(l.body, l.name, l.rhs))));
                }
                shrink_candidates(l.rhs, [&](IExprPtr n) {
                    return rebuild(make_iexpr(ILet{l.name, std::move(n), l.body}, e->span));
                }, out);
                shrink_candidates(l.body, [&](IExprPtr n) {
                    return rebuild(make_iexpr(ILet{l.name, l.rhs, std::move(n)}, e->span));
                }, out);
            },
        },
        e->node);
}

}  // namespace detail

inline IExprPtr shrink(const IExprPtr& failing_input,
                       const std::function<bool(const IExprPtr&)>& failing) {
    IExprPtr best = failing_input;
    bool improved = true;
    while (improved) {
        improved = false;
        std::vector<IExprPtr> candidates;
        detail::shrink_candidates(best, [](IExprPtr n) { return n; }, candidates);
        for (const auto& cand : candidates) {
            if (expr_size(cand) >= expr_size(best)) continue;
            if (!is_closed(cand)) continue;
            IExprPtr checked;
            try {
                checked = typecheck_icaml(strip_types(cand));
            } catch (const DiagError&) {
                continue;
            }
            if (failing(checked)) {
                best = checked;
                improved = true;
                break;
            }
        }
    }
    return best;
}

}  // namespace offshore
