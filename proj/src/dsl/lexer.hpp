#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dtinsight/dsl.hpp"

namespace dtinsight::dsl::detail {

enum class Tok {
    Ident,
    QName,  // prefix:local with no interior whitespace
    Colon,
    LBracket,
    RBracket,
    Less,
    Comma,
    String,
    Number,
    Iri,  // <...>
    Error,
    End,
};

struct Token {
    Tok kind = Tok::End;
    SourceSpan span;
    std::string text;  // spelling; decoded value for strings, message for errors
};

std::string_view describe(Tok t);

// Tokenizes the whole source up front. `//` comments run to end of line.
// Strings cannot span lines; an unterminated one becomes an Error token.
std::vector<Token> tokenize(std::string_view source);

}  // namespace dtinsight::dsl::detail
