#include "lexer.hpp"

#include <array>
#include <cctype>

namespace evopoc::sol::detail {

namespace {

// Longest first so that maximal munch picks e.g. ">>=" over ">>".
constexpr std::array<std::string_view, 46> kPuncts = {
    ">>>=", "<<=", ">>=", ">>>", "**", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=",
    "/=",   "%=",  "|=",  "&=",  "^=", "<<", ">>", "=>", "->", "(",  ")",  "[",  "]",  "{",  "}",  ";",
    ",",    ".",   "?",   ":",   "=",  "+",  "-",  "*",  "/",  "%",  "<",  ">",  "!",  "~"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

}  // namespace

std::vector<Token> lex(std::string_view src, const std::string& path) {
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1;
    int col = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto error = [&](const std::string& what) { throw ParseError({path, line, col}, what); };

    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (src.substr(i, 2) == "//") {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (src.substr(i, 2) == "/*") {
            auto close = src.find("*/", i + 2);
            if (close == std::string_view::npos) error("unterminated comment");
            advance(close + 2 - i);
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        t.begin = i;
        if ((src.substr(i, 4) == "hex\"" || src.substr(i, 4) == "hex'") ||
            (src.substr(i, 8) == "unicode\"" || src.substr(i, 8) == "unicode'")) {
            std::size_t prefix = src[i] == 'h' ? 3 : 7;
            advance(prefix);
            c = src[i];
        }
        if (c == '"' || c == '\'') {
            char q = c;
            advance(1);
            while (i < src.size() && src[i] != q) {
                if (src[i] == '\\') advance(1);
                if (src[i] == '\n') error("newline in string literal");
                advance(1);
            }
            if (i >= src.size()) error("unterminated string literal");
            advance(1);
            t.kind = Tok::String;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            if (src.substr(i, 2) == "0x" || src.substr(i, 2) == "0X") {
                advance(2);
                while (i < src.size() && (std::isxdigit(static_cast<unsigned char>(src[i])) || src[i] == '_')) advance(1);
            } else {
                while (i < src.size() && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '_' ||
                                          src[i] == '.'))
                    advance(1);
                if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                    advance(1);
                    if (i < src.size() && src[i] == '-') advance(1);
                    while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance(1);
                }
            }
            t.kind = Tok::Number;
        } else if (ident_start(c)) {
            while (i < src.size() && ident_char(src[i])) advance(1);
            t.kind = Tok::Ident;
        } else {
            bool found = false;
            for (auto p : kPuncts) {
                if (src.substr(i, p.size()) == p) {
                    advance(p.size());
                    found = true;
                    break;
                }
            }
            if (!found) {
                // bitwise ops not listed above
                if (c == '&' || c == '|' || c == '^') {
                    advance(1);
                } else {
                    error(std::string("unexpected character '") + c + "'");
                }
            }
            t.kind = Tok::Punct;
        }
        t.end = i;
        t.text = std::string(src.substr(t.begin, t.end - t.begin));
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::End;
    end.line = line;
    end.column = col;
    end.begin = end.end = src.size();
    out.push_back(end);
    return out;
}

}  // namespace evopoc::sol::detail
