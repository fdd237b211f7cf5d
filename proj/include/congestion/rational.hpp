#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

#include "error.hpp"

namespace congestion {

using rational = mpq_class;
using integer = mpz_class;

/// Canonical text form: "p" when the denominator is one, "p/q" otherwise.
inline std::string to_string(const rational& value) {
    rational canon(value);
    canon.canonicalize();
    if (canon.get_den() == 1) return canon.get_num().get_str();
    return canon.get_num().get_str() + "/" + canon.get_den().get_str();
}

inline std::string to_string(const integer& value) { return value.get_str(); }

namespace detail {

inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

inline integer parse_integer(std::string_view text, std::string_view whole) {
    std::string_view digits = text;
    if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) digits.remove_prefix(1);
    if (!all_digits(digits))
        throw validation_error("malformed rational '" + std::string(whole) + "'");
    std::string s(text);
    if (s.front() == '+') s.erase(0, 1);
    return integer(s, 10);
}

} // namespace detail

/// Parses "p", "p/q", or a finite decimal such as "-1.25". The result is exact.
inline rational parse_rational(std::string_view text) {
    if (text.empty()) throw validation_error("empty rational");
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        integer num = detail::parse_integer(text.substr(0, slash), text);
        std::string_view den_text = text.substr(slash + 1);
        if (!detail::all_digits(den_text))
            throw validation_error("malformed rational '" + std::string(text) + "'");
        integer den(std::string(den_text), 10);
        if (den == 0) throw validation_error("zero denominator in '" + std::string(text) + "'");
        rational r(num, den);
        r.canonicalize();
        return r;
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string_view int_part = text.substr(0, dot);
        std::string_view frac_part = text.substr(dot + 1);
        bool negative = !int_part.empty() && int_part.front() == '-';
        if (!int_part.empty() && (int_part.front() == '-' || int_part.front() == '+'))
            int_part.remove_prefix(1);
        if ((int_part.empty() && frac_part.empty()) ||
            (!int_part.empty() && !detail::all_digits(int_part)) ||
            (!frac_part.empty() && !detail::all_digits(frac_part)))
            throw validation_error("malformed rational '" + std::string(text) + "'");
        std::string digits = std::string(int_part) + std::string(frac_part);
        integer num(digits.empty() ? std::string("0") : digits, 10);
        integer den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_part.size());
        rational r(num, den);
        r.canonicalize();
        return negative ? rational(-r) : r;
    }
    return rational(detail::parse_integer(text, text));
}

inline rational pow(const rational& base, unsigned long exponent) {
    rational out;
    mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
    mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
    out.canonicalize();
    return out;
}

inline integer pow(const integer& base, unsigned long exponent) {
    integer out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exponent);
    return out;
}

inline integer ipow(unsigned long base, unsigned long exponent) {
    integer out;
    mpz_ui_pow_ui(out.get_mpz_t(), base, exponent);
    return out;
}

inline bool is_integer(const rational& value) { return value.get_den() == 1; }

/// Smallest integer not below `value`.
inline integer ceil(const rational& value) {
    integer out;
    mpz_cdiv_q(out.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
    return out;
}

/// Lossy conversion for human-readable summaries only.
inline double approx(const rational& value) { return value.get_d(); }

} // namespace congestion
