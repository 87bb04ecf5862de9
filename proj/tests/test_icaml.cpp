#include <catch2/catch.hpp>

#include <functional>

#include "offshore/icaml.hpp"
#include "offshore/surface.hpp"
#include "offshore/testgen.hpp"

using namespace offshore;

namespace {

Diagnostic diag_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const DiagError& e) {
        return e.diag();
    }
    FAIL("expected a diagnostic");
    return {};
}

}  // namespace

TEST_CASE("constant table") {
    auto plus = lookup_const("+");
    REQUIRE(plus);
    CHECK(plus->arity == 2);
    CHECK_FALSE(plus->schematic);
    CHECK(plus->params[0].str({}) == "int");
    CHECK(plus->result.str({}) == "int");

    auto bang = lookup_const("!");
    REQUIRE(bang);
    CHECK(bang->arity == 1);
    CHECK(bang->schematic);
    CHECK(bang->params[0].str({}) == "ref t");
    CHECK(bang->result.str({}) == "t");

    CHECK_FALSE(lookup_const("unknown"));
    CHECK_FALSE(lookup_const(""));

    auto lit = lookup_const("7");
    REQUIRE(lit);
    CHECK(lit->arity == 0);
    CHECK(lit->result.str({}) == "int");

    auto asn = lookup_const(":=");
    REQUIRE(asn);
    CHECK(asn->arity == 2);
    CHECK(asn->schematic);
    CHECK(asn->result.str({}) == "unit");

    auto incr = lookup_const("incr");
    REQUIRE(incr);
    CHECK(incr->arity == 1);
    CHECK_FALSE(incr->schematic);
    CHECK(incr->params[0].str({}) == "ref int");
}

TEST_CASE("types") {
    IType nested = IType::ref(IType::ref(IType::integer()));
    CHECK(nested.str() == "ref ref int");
    CHECK(nested.ref_depth() == 2);
    CHECK(nested.pointee() == IType::ref(IType::integer()));
    CHECK(IType::unit() != IType::integer());
    CHECK(IType::ref(IType::integer()) != IType::ref(IType::boolean()));
}

TEST_CASE("typecheck: running example") {
    IExprPtr e = typecheck_icaml(parse("let x = ref 0 in x := !x + 1"));
    CHECK(e->ty() == IType::unit());
    const auto* let = as<ILet>(e);
    REQUIRE(let);
    CHECK(let->rhs->ty() == IType::ref(IType::integer()));
}

TEST_CASE("typecheck: simple sums and literals") {
    CHECK(typecheck_icaml(parse("1 + 2"))->ty() == IType::integer());
    CHECK(typecheck_icaml(parse("true"))->ty() == IType::boolean());
    CHECK(typecheck_icaml(parse("()"))->ty() == IType::unit());
}

TEST_CASE("typecheck: self-assignment of a reference is ill-typed") {
    Diagnostic d = diag_of([] { typecheck_icaml(parse("let x = ref 0 in x := x")); });
    CHECK(d.kind == DiagKind::TypeMismatch);
    CHECK_THAT(d.message, Catch::Contains("expected int, found ref int"));
}

TEST_CASE("typecheck: error cases") {
    CHECK(diag_of([] { typecheck_icaml(parse("y + 1")); }).kind == DiagKind::UnboundVariable);
    CHECK(diag_of([] { typecheck_icaml(parse("1 + true")); }).kind == DiagKind::TypeMismatch);
    CHECK(diag_of([] { typecheck_icaml(parse("!3")); }).kind == DiagKind::TypeMismatch);
    CHECK(diag_of([] { typecheck_icaml(parse("incr 3")); }).kind == DiagKind::TypeMismatch);
    CHECK(diag_of([] { typecheck_icaml(ib::app1("+", ib::lit(1))); }).kind ==
          DiagKind::ArityMismatch);
    CHECK(diag_of([] { typecheck_icaml(ib::app2("!", ib::lit(1), ib::lit(2))); }).kind ==
          DiagKind::ArityMismatch);
    CHECK(diag_of([] { typecheck_icaml(make_iexpr(IConst{"bogus"})); }).kind ==
          DiagKind::UnknownConstant);
}

TEST_CASE("typecheck: diagnostics carry source positions") {
    Diagnostic d = diag_of([] { typecheck_icaml(parse("1 +\n  zz")); });
    CHECK(d.kind == DiagKind::UnboundVariable);
    CHECK(d.span.line == 2);
    CHECK(d.span.col == 3);
}

TEST_CASE("typecheck: schematic instantiation per occurrence") {
    IExprPtr e = typecheck_icaml(parse("let a = ref 0 in let b = ref true in !a; !b"));
    CHECK(e->ty() == IType::boolean());
    IExprPtr nested = typecheck_icaml(parse("let x = ref (ref 0) in !(!x)"));
    CHECK(nested->ty() == IType::integer());
}

TEST_CASE("typecheck: determinism and annotation soundness on random programs") {
    for (std::uint64_t seed = 0; seed < 250; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        cfg.max_depth = 7;
        cfg.alias_bias = 0.4;
        cfg.target_type = seed % 3 == 0 ? IType::unit() : IType::integer();
        IExprPtr a = generate(cfg);
        IExprPtr b = typecheck_icaml(strip_types(a));
        REQUIRE(iexpr_equal(a, b, /*with_types=*/true));
    }
}

TEST_CASE("surface parse: running example tree") {
    IExprPtr e = parse("let x = ref 0 in x := !x + 1");
    const auto* let = as<ILet>(e);
    REQUIRE(let);
    CHECK(let->name == "x");
    const auto* rhs = as<IApp1>(let->rhs);
    REQUIRE(rhs);
    CHECK(rhs->cname == "ref");
    const auto* body = as<IApp2>(let->body);
    REQUIRE(body);
    CHECK(body->cname == ":=");
    const auto* sum = as<IApp2>(body->rhs);
    REQUIRE(sum);
    CHECK(sum->cname == "+");
    CHECK(as<IApp1>(sum->lhs) != nullptr);  // !x binds tighter than +
}

TEST_CASE("surface parse: sums associate left") {
    IExprPtr e = parse("1 + 2 + 3");
    const auto* top = as<IApp2>(e);
    REQUIRE(top);
    CHECK(as<IApp2>(top->lhs) != nullptr);
    CHECK(as<IConst>(top->rhs) != nullptr);
}

TEST_CASE("surface parse: sequencing scopes under the inner let") {
    IExprPtr e = parse("let x = ref 0 in let y = x in y := 41; !x + 1");
    const auto* outer = as<ILet>(e);
    REQUIRE(outer);
    const auto* inner = as<ILet>(outer->body);
    REQUIRE(inner);
    CHECK(as<ISeq>(inner->body) != nullptr);
}

TEST_CASE("surface parse: assignment is right-associative and looser than +") {
    IExprPtr e = parse("let a = ref (ref 0) in let b = ref 0 in a := b");
    CHECK(typecheck_icaml(e)->ty() == IType::unit());
    IExprPtr chain = parse("x := y := 1");
    const auto* top = as<IApp2>(chain);
    REQUIRE(top);
    CHECK(as<IApp2>(top->rhs) != nullptr);
}

TEST_CASE("surface parse: syntax errors") {
    CHECK(diag_of([] { parse("let = 3 in 4"); }).kind == DiagKind::Syntax);
    CHECK(diag_of([] { parse("1 +"); }).kind == DiagKind::Syntax);
    CHECK(diag_of([] { parse("(1 + 2"); }).kind == DiagKind::Syntax);
    CHECK(diag_of([] { parse("1 2"); }).kind == DiagKind::Syntax);
    CHECK(diag_of([] { parse("let x = 1 in x :"); }).kind == DiagKind::Syntax);
    CHECK(diag_of([] { parse(""); }).kind == DiagKind::Syntax);
    CHECK(diag_of([] { parse("let x 1 in x"); }).kind == DiagKind::Syntax);
}

TEST_CASE("surface print/parse round-trip") {
    const char* samples[] = {
        "let x = ref 0 in x := !x + 1",
        "let x = ref 0 in let y = x in y := 41; !x + 1",
        "(let x = 1 in x) + 2",
        "1 + 2 + 3; true; ()",
        "let u = (); 3 in u + 1",
        "incr (let c = ref 0 in c); 9",
    };
    for (const char* s : samples) {
        IExprPtr e = parse(s);
        CHECK(iexpr_equal(parse(print_surface(e)), e));
    }
    for (std::uint64_t seed = 1000; seed < 1400; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        cfg.max_depth = 8;
        cfg.alias_bias = 0.3;
        IExprPtr e = generate(cfg);
        IExprPtr stripped = strip_types(e);
        REQUIRE(iexpr_equal(parse(print_surface(e)), stripped));
    }
}
