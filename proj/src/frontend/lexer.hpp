#pragma once

#include "evopoc/frontend/ast.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace evopoc::sol::detail {

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1;
    int column = 1;
    std::size_t begin = 0;  // byte offsets into the source
    std::size_t end = 0;
};

/// Splits Solidity source into tokens, dropping whitespace and comments.
std::vector<Token> lex(std::string_view src, const std::string& path);

}  // namespace evopoc::sol::detail
