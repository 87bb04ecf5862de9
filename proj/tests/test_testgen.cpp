#include <catch2/catch.hpp>

#include <map>
#include <set>

#include "offshore/semantics.hpp"
#include "offshore/surface.hpp"
#include "offshore/testgen.hpp"
#include "offshore/translate.hpp"

using namespace offshore;

namespace {

void census(const IExprPtr& e, std::map<std::string, std::size_t>& nodes,
            std::map<std::string, std::size_t>& consts) {
    std::visit(offshore::detail::overloaded{
                   [&](const IVar&) { ++nodes["var"]; },
                   [&](const IConst& c) {
                       ++nodes["const"];
                       ++consts[is_int_literal(c.name) ? "<int>" : c.name];
                   },
                   [&](const IApp1& a) {
                       ++nodes["app1"];
                       ++consts[a.cname];
                       census(a.arg, nodes, consts);
                   },
                   [&](const IApp2& a) {
                       ++nodes["app2"];
                       ++consts[a.cname];
                       census(a.lhs, nodes, consts);
                       census(a.rhs, nodes, consts);
                   },
                   [&](const ISeq& s) {
                       ++nodes["seq"];
                       census(s.head, nodes, consts);
                       census(s.tail, nodes, consts);
                   },
                   [&](const ILet& l) {
                       ++nodes["let"];
                       census(l.rhs, nodes, consts);
                       census(l.body, nodes, consts);
                   },
               },
               e->node);
}

}  // namespace

TEST_CASE("generate: deterministic in seed and config") {
    GenConfig cfg;
    cfg.seed = 424242;
    cfg.max_depth = 8;
    cfg.alias_bias = 0.5;
    IExprPtr a = generate(cfg);
    IExprPtr b = generate(cfg);
    CHECK(iexpr_equal(a, b, /*with_types=*/true));
    CHECK(eval_icaml(a).steps == eval_icaml(b).steps);

    cfg.seed = 424243;
    IExprPtr c = generate(cfg);
    CHECK_FALSE(iexpr_equal(a, c));
}

TEST_CASE("generate: depth-1 integer target is a literal") {
    GenConfig cfg;
    cfg.max_depth = 1;
    cfg.target_type = IType::integer();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        cfg.seed = seed;
        IExprPtr e = generate(cfg);
        const auto* c = as<IConst>(e);
        REQUIRE(c != nullptr);
        CHECK(is_int_literal(c->name));
    }
}

TEST_CASE("generate: closed, well-typed, within depth, at the requested type") {
    const IType targets[] = {IType::integer(), IType::boolean(), IType::unit(),
                             IType::ref(IType::integer())};
    for (std::uint64_t seed = 0; seed < 800; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        cfg.max_depth = 1 + static_cast<int>(seed % 9);
        cfg.alias_bias = 0.4;
        cfg.target_type = targets[seed % 4];
        IExprPtr e = generate(cfg);  // generate() typechecks internally
        CHECK(is_closed(e));
        CHECK(e->ty() == cfg.target_type);
        std::size_t bound = std::max<std::size_t>(cfg.max_depth, 1 + cfg.target_type.ref_depth());
        CHECK(expr_depth(e) <= bound);
    }
}

TEST_CASE("generate: nested refs and incr can be disabled") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        cfg.max_depth = 8;
        cfg.include_nested_refs = false;
        cfg.include_incr = false;
        cfg.target_type = seed % 2 ? IType::integer() : IType::unit();
        IExprPtr e = generate(cfg);
        std::map<std::string, std::size_t> nodes, consts;
        census(e, nodes, consts);
        CHECK(consts.count("incr") == 0);
        struct NoNested {
            bool ok = true;
            void go(const IExprPtr& x) {
                if (x->type && x->type->ref_depth() > 1) ok = false;
                std::visit(offshore::detail::overloaded{
                               [&](const IVar&) {}, [&](const IConst&) {},
                               [&](const IApp1& a) { go(a.arg); },
                               [&](const IApp2& a) { go(a.lhs), go(a.rhs); },
                               [&](const ISeq& s) { go(s.head), go(s.tail); },
                               [&](const ILet& l) { go(l.rhs), go(l.body); }},
                           x->node);
            }
        } walk;
        walk.go(e);
        CHECK(walk.ok);
    }
}

TEST_CASE("generate: coverage of every construct over a large corpus") {
    std::map<std::string, std::size_t> nodes, consts;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        cfg.max_depth = 8;
        cfg.alias_bias = 0.3;
        cfg.target_type = seed % 4 == 0 ? IType::unit()
                          : seed % 4 == 1 ? IType::boolean()
                                          : IType::integer();
        census(generate(cfg), nodes, consts);
    }
    for (const char* n : {"var", "const", "app1", "app2", "seq", "let"}) {
        INFO(n);
        CHECK(nodes[n] > 0);
    }
    for (const char* c : {"ref", "!", ":=", "incr", "+", "true", "false", "()", "<int>"}) {
        INFO(c);
        CHECK(consts[c] > 0);
    }
}

TEST_CASE("generate: alias bias produces aliasing lets and extant rejections") {
    std::size_t rejected = 0;
    std::size_t with_alias = 0;
    const std::size_t total = 1000;
    for (std::uint64_t seed = 0; seed < total; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        cfg.max_depth = 8;
        cfg.alias_bias = 0.5;
        cfg.target_type = seed % 2 ? IType::integer() : IType::unit();
        IExprPtr e = generate(cfg);
        if (contains_alias_let(e)) ++with_alias;
        try {
            translate_extant(e);
        } catch (const DiagError&) {
            ++rejected;
        }
    }
    CHECK(with_alias > 0);
    // regression floor: at this bias, at least 10% of programs must trip the
    // extant restrictions (measured 40-60% in practice)
    CHECK(rejected >= total / 10);
}

TEST_CASE("shrink: divergence witness reduces to the minimal aliasing pattern") {
    // the classic counterexample, wrapped in two layers of noise
    IExprPtr big = typecheck_icaml(
        parse("let pad = 5 in (let x = ref 0 in let y = x in y := 41; !x + 1) + "
              "(let q = ref 1 in !q; 0) + (pad; 0)"));
    auto naive_diverges = [](const IExprPtr& e) {
        try {
            CExprPtr t = translate_naive(e);
            return eval_corec(t).value != eval_icaml(e).value;
        } catch (const DiagError&) {
            return false;
        }
    };
    REQUIRE(naive_diverges(big));
    IExprPtr small = shrink(big, naive_diverges);
    CHECK(naive_diverges(small));
    // no bigger than the aliasing pattern itself:
    // let x = ref 0 in let y = x in y := n; !x + 1  (13 nodes)
    CHECK(expr_size(small) <= 13);
    CHECK(contains_alias_let(small));
}

TEST_CASE("shrink: minimal inputs come back unchanged") {
    IExprPtr eq1 = typecheck_icaml(parse("let x = ref 0 in let y = x in y := 1; !x + 1"));
    auto naive_diverges = [](const IExprPtr& e) {
        try {
            CExprPtr t = translate_naive(e);
            return eval_corec(t).value != eval_icaml(e).value;
        } catch (const DiagError&) {
            return false;
        }
    };
    REQUIRE(naive_diverges(eq1));
    IExprPtr once = shrink(eq1, naive_diverges);
    IExprPtr twice = shrink(once, naive_diverges);
    CHECK(iexpr_equal(once, twice, /*with_types=*/true));
}

TEST_CASE("shrink: predicate holding nowhere below keeps the input") {
    IExprPtr e = typecheck_icaml(parse("1 + 2 + 3"));
    std::size_t original = expr_size(e);
    auto full_size = [original](const IExprPtr& x) { return expr_size(x) == original; };
    IExprPtr out = shrink(e, full_size);
    CHECK(iexpr_equal(out, e, /*with_types=*/true));
}

TEST_CASE("shrink: result stays closed and well-typed") {
    for (std::uint64_t seed = 60000; seed < 60200; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        cfg.max_depth = 8;
        cfg.alias_bias = 0.3;
        IExprPtr e = generate(cfg);
        std::size_t cells = eval_icaml(e).store.size();
        auto allocates = [cells](const IExprPtr& x) {
            return eval_icaml(x).store.size() >= cells;
        };
        if (!allocates(e)) continue;
        IExprPtr small = shrink(e, allocates);
        CHECK(is_closed(small));
        CHECK_NOTHROW(typecheck_icaml(strip_types(small)));
        CHECK(allocates(small));
        CHECK(expr_size(small) <= expr_size(e));
    }
}
