#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "diag.hpp"
#include "icaml.hpp"

namespace offshore {

// Surface grammar, lowest to tightest binding:
//
//   expr  ::= "let" IDENT "=" expr "in" expr | seq
//   seq   ::= asn (";" asn)*
//   asn   ::= add [":=" asn]
//   add   ::= unary ("+" unary)*
//   unary ::= "!" unary | "ref" unary | "incr" unary | atom
//   atom  ::= INT | "true" | "false" | "()" | IDENT | "(" expr ")"
//
// `let ... in` extends maximally to the right; a let used as a sequence
// element must be parenthesized.

namespace detail {

enum class Tok {
    Int, Ident, Let, In, Ref, Incr, True, False,
    Assign, Eq, Semi, Plus, Bang, LParen, RParen, End,
};

struct Token {
    Tok kind;
    std::string text;
    Span span;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_ws();
            Span sp{line_, col_};
            if (pos_ >= src_.size()) {
                out.push_back({Tok::End, "", sp});
                return out;
            }
            char c = src_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string text;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    text += advance();
                if (text.size() > 18)
                    fail(DiagKind::Syntax, sp, "integer literal out of range");
                out.push_back({Tok::Int, text, sp});
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string text;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    text += advance();
                Tok kind = Tok::Ident;
                if (text == "let") kind = Tok::Let;
                else if (text == "in") kind = Tok::In;
                else if (text == "ref") kind = Tok::Ref;
                else if (text == "incr") kind = Tok::Incr;
                else if (text == "true") kind = Tok::True;
                else if (text == "false") kind = Tok::False;
                out.push_back({kind, text, sp});
                continue;
            }
            switch (c) {
                case ':':
                    if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
                        advance();
                        advance();
                        out.push_back({Tok::Assign, ":=", sp});
                        continue;
                    }
                    fail(DiagKind::Syntax, sp, "unexpected ':'");
                case ';': advance(); out.push_back({Tok::Semi, ";", sp}); continue;
                case '+': advance(); out.push_back({Tok::Plus, "+", sp}); continue;
                case '!': advance(); out.push_back({Tok::Bang, "!", sp}); continue;
                case '(': advance(); out.push_back({Tok::LParen, "(", sp}); continue;
                case ')': advance(); out.push_back({Tok::RParen, ")", sp}); continue;
                case '=':
                    advance();
                    out.push_back({Tok::Eq, "=", sp});
                    continue;
                default:
                    fail(DiagKind::Syntax, sp, std::string("unexpected character '") + c + "'");
            }
        }
    }

private:
    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }
    void skip_ws() {
        while (pos_ < src_.size() &&
               std::isspace(static_cast<unsigned char>(src_[pos_])))
            advance();
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    IExprPtr run() {
        IExprPtr e = expr();
        expect(Tok::End, "end of input");
        return e;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at(Tok k) const { return peek().kind == k; }
    const Token& expect(Tok k, const char* what) {
        if (!at(k)) fail(DiagKind::Syntax, peek().span, std::string("expected ") + what);
        return take();
    }

    IExprPtr expr() {
        if (at(Tok::Let)) {
            Span sp = peek().span;
            take();
            const Token& name = peek();
            if (name.kind != Tok::Ident)
                fail(DiagKind::Syntax, name.span, "expected a variable name after 'let'");
            take();
            expect(Tok::Eq, "'=' in let binding");
            IExprPtr rhs = expr();
            expect(Tok::In, "'in'");
            IExprPtr body = expr();
            return ib::let(name.text, rhs, body, sp);
        }
        return seq();
    }

    IExprPtr seq() {
        IExprPtr head = asn();
        if (!at(Tok::Semi)) return head;
        Span sp = peek().span;
        take();
        return ib::seq(head, seq(), sp);
    }

    IExprPtr asn() {
        IExprPtr lhs = add();
        if (!at(Tok::Assign)) return lhs;
        Span sp = peek().span;
        take();
        IExprPtr rhs = asn();
        return ib::app2(":=", lhs, rhs, sp);
    }

    IExprPtr add() {
        IExprPtr lhs = unary();
        while (at(Tok::Plus)) {
            Span sp = peek().span;
            take();
            IExprPtr rhs = unary();
            lhs = ib::app2("+", lhs, rhs, sp);
        }
        return lhs;
    }

    IExprPtr unary() {
        Span sp = peek().span;
        if (at(Tok::Bang)) {
            take();
            return ib::app1("!", unary(), sp);
        }
        if (at(Tok::Ref)) {
            take();
            return ib::app1("ref", unary(), sp);
        }
        if (at(Tok::Incr)) {
            take();
            return ib::app1("incr", unary(), sp);
        }
        return atom();
    }

    IExprPtr atom() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Int: take(); return make_iexpr(IConst{t.text}, t.span);
            case Tok::True: take(); return ib::boolean(true, t.span);
            case Tok::False: take(); return ib::boolean(false, t.span);
            case Tok::Ident:
                take();
                return ib::var(t.text, t.span);
            case Tok::LParen: {
                take();
                if (at(Tok::RParen)) {
                    take();
                    return ib::unit(t.span);
                }
                IExprPtr inner = expr();
                expect(Tok::RParen, "')'");
                return inner;
            }
            default:
                fail(DiagKind::Syntax, t.span,
                     "expected an expression, found '" + (t.kind == Tok::End ? "end of input" : t.text) + "'");
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace detail

// Parses surface text into a raw (unannotated) tree.
inline IExprPtr parse(const std::string& source) {
    detail::Lexer lex(source);
    detail::Parser p(lex.run());
    return p.run();
}

}  // namespace offshore
