#include <catch2/catch.hpp>

#include <functional>

#include "offshore/corec.hpp"
#include "offshore/semantics.hpp"
#include "offshore/surface.hpp"
#include "offshore/testgen.hpp"
#include "offshore/translate.hpp"

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

CBinder mut(CType t) { return CBinder{std::move(t), false, false}; }
CBinder konst(CType t) { return CBinder{std::move(t), true, false}; }

}  // namespace

TEST_CASE("CoreC: self-assignment is a well-typed no-op") {
    // int x = 0; x := x
    CExprPtr e = cb::decl(mut(CType::integer()), "x", cb::lit(0), cb::assign("x", cb::var("x")));
    CExprPtr t = typecheck_corec(e);
    CHECK(t->ty() == CType::unit());
}

TEST_CASE("CoreC: assignment type mismatch") {
    CExprPtr e =
        cb::decl(mut(CType::integer()), "x", cb::lit(0), cb::assign("x", cb::boolean(true)));
    CHECK(diag_of([&] { typecheck_corec(e); }).kind == DiagKind::TypeMismatch);
}

TEST_CASE("CoreC: declarations in expression position typecheck") {
    // (int x = 1+2; x+3)+4
    CExprPtr e = cb::app2("+",
                          cb::decl(mut(CType::integer()), "x", cb::app2("+", cb::lit(1), cb::lit(2)),
                                   cb::app2("+", cb::var("x"), cb::lit(3))),
                          cb::lit(4));
    CHECK(typecheck_corec(e)->ty() == CType::integer());
}

TEST_CASE("CoreC: CoreCE-only constructs are rejected") {
    CHECK(diag_of([] { typecheck_corec(cb::addr_of("x")); }).kind == DiagKind::ModeViolation);
    CHECK(diag_of([] { typecheck_corec(cb::deref(cb::lit(1))); }).kind == DiagKind::ModeViolation);
    CHECK(diag_of([] {
              typecheck_corec(cb::store(cb::lit(1), cb::lit(2)));
          }).kind == DiagKind::ModeViolation);
    CHECK(diag_of([] {
              typecheck_corec(cb::decl(konst(CType::integer()), "x", cb::lit(0), cb::var("x")));
          }).kind == DiagKind::ModeViolation);
    CHECK(diag_of([] {
              typecheck_corec(cb::decl(mut(CType::ptr(CType::integer())), "x", cb::lit(0),
                                       cb::var("x")));
          }).kind == DiagKind::ModeViolation);
}

TEST_CASE("CoreCE: pointer read/write through address-of") {
    // int x = 0; &x <- *&x + 1
    CExprPtr e = cb::decl(mut(CType::integer()), "x", cb::lit(0),
                          cb::store(cb::addr_of("x"),
                                    cb::app2("+", cb::deref(cb::addr_of("x")), cb::lit(1))));
    CHECK(typecheck_corece(e)->ty() == CType::unit());
}

TEST_CASE("CoreCE: const pointer binder, store through the pointee") {
    // int x = 0; const ptr int y = &x; y <- 41; &x <- *&x + 1
    CExprPtr e = cb::decl(
        mut(CType::integer()), "x", cb::lit(0),
        cb::decl(konst(CType::ptr(CType::integer())), "y", cb::addr_of("x"),
                 cb::seq(cb::store(cb::var("y"), cb::lit(41)),
                         cb::store(cb::addr_of("x"),
                                   cb::app2("+", cb::deref(cb::addr_of("x")), cb::lit(1))))));
    CExprPtr t = typecheck_corece(e);
    CHECK(t->ty() == CType::unit());
    EvalResult r = eval_corece(t);
    CHECK(r.store.read(0) == Value::integer(42));
}

TEST_CASE("CoreCE: storing directly to a const binder is rejected") {
    CExprPtr e = cb::decl(konst(CType::integer()), "x", cb::lit(0),
                          cb::store(cb::addr_of("x"), cb::lit(1)));
    CHECK(diag_of([&] { typecheck_corece(e); }).kind == DiagKind::ConstViolation);
}

TEST_CASE("CoreC: assigning to a const binder is rejected") {
    CExprPtr e =
        cb::decl(konst(CType::integer()), "x", cb::lit(0), cb::assign("x", cb::lit(1)));
    // const binders are CoreCE-only, so CoreC flags the binder first
    CHECK(diag_of([&] { typecheck_corec(e); }).kind == DiagKind::ModeViolation);
}

TEST_CASE("CoreCE: CoreC special assignment is rejected") {
    CExprPtr e = cb::decl(mut(CType::integer()), "x", cb::lit(0), cb::assign("x", cb::lit(1)));
    CHECK(diag_of([&] { typecheck_corece(e); }).kind == DiagKind::ModeViolation);
}

TEST_CASE("CoreCE: type errors") {
    CHECK(diag_of([] { typecheck_corece(cb::deref(cb::lit(1))); }).kind == DiagKind::TypeMismatch);
    CHECK(diag_of([] { typecheck_corece(cb::addr_of("nope")); }).kind ==
          DiagKind::UnboundVariable);
    CHECK(diag_of([] {
              typecheck_corece(cb::decl(mut(CType::integer()), "x", cb::lit(0),
                                        cb::store(cb::addr_of("x"), cb::boolean(true))));
          }).kind == DiagKind::TypeMismatch);
    CHECK(diag_of([] { typecheck_corece(cb::app1("incr", cb::lit(3))); }).kind ==
          DiagKind::TypeMismatch);
}

TEST_CASE("address-of applies to variable names only, by construction") {
    // The tree type has no way to spell &(1+2); the name is the whole payload.
    CExprPtr ao = cb::addr_of("v");
    REQUIRE(cas<CAddrOf>(ao) != nullptr);
    CHECK(cas<CAddrOf>(ao)->name == "v");
}

TEST_CASE("embedding CoreC into CoreCE preserves typing and meaning") {
    std::size_t checked = 0;
    for (std::uint64_t seed = 300; seed < 900; ++seed) {
        GenConfig cfg;
        cfg.seed = seed;
        cfg.max_depth = 7;
        cfg.alias_bias = 0.3;
        cfg.target_type = seed % 3 == 0 ? IType::unit() : IType::integer();
        IExprPtr src = generate(cfg);
        CExprPtr corec;
        try {
            corec = translate_naive(src);
        } catch (const DiagError&) {
            continue;  // outside the naive image
        }
        CExprPtr embedded = typecheck_corece(embed_corece(corec));
        CHECK(embedded->ty() == corec->ty());
        EvalResult a = eval_corec(corec);
        EvalResult b = eval_corece(embedded);
        REQUIRE(a.value == b.value);
        REQUIRE(a.store.size() == b.store.size());
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("calculus printer") {
    CExprPtr e = cb::decl(
        mut(CType::integer()), "x", cb::lit(0),
        cb::decl(konst(CType::ptr(CType::integer())), "y", cb::addr_of("x"),
                 cb::seq(cb::store(cb::var("y"), cb::lit(41)),
                         cb::store(cb::addr_of("x"),
                                   cb::app2("+", cb::deref(cb::addr_of("x")), cb::lit(1))))));
    CHECK(print_calculus(e) ==
          "int x = 0; const ptr int y = &x; y ← 41; &x ← *&x + 1");

    CExprPtr expr_decl =
        cb::app2("+",
                 cb::decl(mut(CType::integer()), "x", cb::app2("+", cb::lit(1), cb::lit(2)),
                          cb::app2("+", cb::var("x"), cb::lit(3))),
                 cb::lit(4));
    CHECK(print_calculus(expr_decl) == "(int x = 1 + 2; x + 3) + 4");
}
