#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>

#include "mpocert/errors.hpp"

namespace mpocert {

using BigInt = mpz_class;
using Rational = mpq_class;

/// Canonical text form: "p/q" in lowest terms, or "p" when q == 1.
inline std::string to_string(const Rational& q) { return q.get_str(); }

inline std::string to_string(const BigInt& z) { return z.get_str(); }

/// Parses "p/q" or "p" (optional sign on p). Throws ParseError on anything
/// else, including a zero denominator.
inline Rational parse_rational(std::string_view text) {
    if (text.empty()) throw ParseError("empty rational literal");
    auto is_int = [](std::string_view s) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (s[i] < '0' || s[i] > '9') return false;
        return true;
    };
    auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
    if (!is_int(num) || !is_int(den) || den[0] == '-' || den[0] == '+')
        throw ParseError("malformed rational literal '" + std::string(text) + "'");
    std::string n(num[0] == '+' ? num.substr(1) : num);
    BigInt p(n, 10);
    BigInt q(std::string(den), 10);
    if (q == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    Rational r(p, q);
    r.canonicalize();
    return r;
}

inline double to_double(const Rational& q) { return q.get_d(); }
inline double to_double(double x) { return x; }

/// |q| as a double, saturating to +inf for magnitudes beyond double range.
inline double magnitude(const Rational& q) {
    double v = std::fabs(q.get_d());
    return v;
}
inline double magnitude(double x) { return std::fabs(x); }

template <typename T>
inline bool is_zero(const T& x) {
    if constexpr (std::is_same_v<T, Rational>)
        return sgn(x) == 0;
    else
        return x == T(0);
}

}  // namespace mpocert
