#include "evopoc/common/bigint.hpp"

#include <cctype>
#include <stdexcept>

namespace evopoc {

namespace {

std::string strip_underscores(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c != '_') out.push_back(c);
    }
    return out;
}

}  // namespace

BigInt pow10(unsigned exponent) {
    BigInt r = 1;
    for (unsigned i = 0; i < exponent; ++i) r *= 10;
    return r;
}

BigInt parse_bigint(std::string_view raw) {
    std::string text = strip_underscores(raw);
    if (text.empty()) throw std::invalid_argument("empty integer literal");
    bool negative = false;
    if (text[0] == '-') {
        negative = true;
        text.erase(0, 1);
        if (text.empty()) throw std::invalid_argument("bare sign");
    }
    BigInt value = 0;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        for (std::size_t i = 2; i < text.size(); ++i) {
            char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
            int digit;
            if (c >= '0' && c <= '9') digit = c - '0';
            else if (c >= 'a' && c <= 'f') digit = 10 + (c - 'a');
            else throw std::invalid_argument("bad hex digit in '" + std::string(raw) + "'");
            value = value * 16 + digit;
        }
        return negative ? BigInt(-value) : value;
    }

    std::string mantissa = text;
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string::npos) {
        mantissa = text.substr(0, e);
        std::string exp_text = text.substr(e + 1);
        if (exp_text.empty()) throw std::invalid_argument("missing exponent");
        std::size_t used = 0;
        exponent = std::stol(exp_text, &used);
        if (used != exp_text.size()) throw std::invalid_argument("bad exponent");
    }
    std::string digits;
    long frac_digits = 0;
    bool seen_point = false;
    for (char c : mantissa) {
        if (c == '.') {
            if (seen_point) throw std::invalid_argument("two decimal points");
            seen_point = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::invalid_argument("bad digit in '" + std::string(raw) + "'");
        digits.push_back(c);
        if (seen_point) ++frac_digits;
    }
    if (digits.empty()) throw std::invalid_argument("no digits");
    for (char c : digits) value = value * 10 + (c - '0');
    long shift = exponent - frac_digits;
    if (shift >= 0) {
        value *= pow10(static_cast<unsigned>(shift));
    } else {
        BigInt div = pow10(static_cast<unsigned>(-shift));
        if (value % div != 0) throw std::invalid_argument("literal is not integral: " + std::string(raw));
        value /= div;
    }
    return negative ? BigInt(-value) : value;
}

std::string to_string(const BigInt& v) { return v.str(); }

std::string to_string(const Rational& v) {
    auto num = boost::multiprecision::numerator(v);
    auto den = boost::multiprecision::denominator(v);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
    if (b == 0) throw std::domain_error("division by zero");
    BigInt q = a / b;  // truncates toward zero
    if ((a % b != 0) && ((a < 0) != (b < 0))) q -= 1;
    return q;
}

BigInt ceil_div(const BigInt& a, const BigInt& b) { return -floor_div(-a, b); }

BigInt floor(const Rational& r) {
    return floor_div(boost::multiprecision::numerator(r), boost::multiprecision::denominator(r));
}

BigInt ceil(const Rational& r) {
    return ceil_div(boost::multiprecision::numerator(r), boost::multiprecision::denominator(r));
}

}  // namespace evopoc
