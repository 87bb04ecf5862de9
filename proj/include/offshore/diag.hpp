#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace offshore {

struct Span {
    int line = 0;  // 1-based; 0 means "no source location"
    int col = 0;
};

enum class DiagKind {
    Syntax,
    UnboundVariable,
    UnknownConstant,
    ArityMismatch,
    TypeMismatch,
    Untranslatable,
    RestrictionViolation,
    NonBindingRef,
    DuplicateName,
    UnliftedDeclaration,
    ModeViolation,
    ConstViolation,
    Internal,
};

inline const char* diag_kind_name(DiagKind k) {
    switch (k) {
        case DiagKind::Syntax: return "SYNTAX";
        case DiagKind::UnboundVariable: return "UNBOUND_VARIABLE";
        case DiagKind::UnknownConstant: return "UNKNOWN_CONSTANT";
        case DiagKind::ArityMismatch: return "ARITY_MISMATCH";
        case DiagKind::TypeMismatch: return "TYPE_MISMATCH";
        case DiagKind::Untranslatable: return "UNTRANSLATABLE";
        case DiagKind::RestrictionViolation: return "RESTRICTION_VIOLATION";
        case DiagKind::NonBindingRef: return "NON_BINDING_REF";
        case DiagKind::DuplicateName: return "DUPLICATE_NAME";
        case DiagKind::UnliftedDeclaration: return "UNLIFTED_DECLARATION";
        case DiagKind::ModeViolation: return "MODE_VIOLATION";
        case DiagKind::ConstViolation: return "CONST_VIOLATION";
        case DiagKind::Internal: return "INTERNAL";
    }
    return "UNKNOWN";
}

struct Diagnostic {
    DiagKind kind = DiagKind::Internal;
    Span span;
    std::string message;

    // Machine-parsable single line: KIND:LINE:COL:MESSAGE
    std::string format() const {
        return std::string(diag_kind_name(kind)) + ":" + std::to_string(span.line) + ":" +
               std::to_string(span.col) + ":" + message;
    }
};

class DiagError : public std::runtime_error {
public:
    explicit DiagError(Diagnostic d) : std::runtime_error(d.format()), diag_(std::move(d)) {}
    const Diagnostic& diag() const { return diag_; }

private:
    Diagnostic diag_;
};

[[noreturn]] inline void fail(DiagKind k, Span sp, std::string msg) {
    throw DiagError(Diagnostic{k, sp, std::move(msg)});
}

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace detail

}  // namespace offshore
