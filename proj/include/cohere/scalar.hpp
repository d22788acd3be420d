// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

namespace cohere {

/// Exact rational probability value.
using Rational = mpq_class;

/// Numerical knobs for the floating point mode. Rational mode ignores them:
/// every comparison there is exact.
struct Tolerance {
    /// a ~ b  iff  |a - b| <= epsilon * max(1, |a|, |b|)
    double epsilon = 1e-9;
    /// an entry counts as positive iff it is strictly greater than this
    double zero_threshold = 0.0;
    /// admissible deviation of a row sum from 1
    double row_sum = 1e-9;
};

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static constexpr const char* name = "rational";

    static bool positive(const Rational& x, const Tolerance&) { return sgn(x) > 0; }
    static bool negative(const Rational& x, const Tolerance&) { return sgn(x) < 0; }
    static bool equal(const Rational& a, const Rational& b, const Tolerance&) { return a == b; }
    static bool row_sum_ok(const Rational& s, const Tolerance&) { return s == 1; }
    static double to_double(const Rational& x) { return x.get_d(); }
    static std::string to_string(const Rational& x) { return x.get_str(); }
    static Rational from_ratio(std::int64_t num, std::int64_t den) {
        Rational r(static_cast<long>(num), static_cast<long>(den));
        r.canonicalize();
        return r;
    }
};

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    static constexpr const char* name = "float";

    static bool positive(double x, const Tolerance& tol) { return x > tol.zero_threshold; }
    static bool negative(double x, const Tolerance& tol) { return x < -tol.zero_threshold; }
    static bool equal(double a, double b, const Tolerance& tol) {
        const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
        return std::fabs(a - b) <= tol.epsilon * scale;
    }
    static bool row_sum_ok(double s, const Tolerance& tol) { return std::fabs(s - 1.0) <= tol.row_sum; }
    static double to_double(double x) { return x; }
    static std::string to_string(double x) {
        std::ostringstream os;
        os.precision(17);
        os << x;
        return os.str();
    }
    static double from_ratio(std::int64_t num, std::int64_t den) {
        return static_cast<double>(num) / static_cast<double>(den);
    }
};

template <class T>
concept ProbabilityScalar = requires(const T& a, const T& b, const Tolerance& tol) {
    { ScalarTraits<T>::positive(a, tol) } -> std::same_as<bool>;
    { ScalarTraits<T>::equal(a, b, tol) } -> std::same_as<bool>;
    { ScalarTraits<T>::to_double(a) } -> std::same_as<double>;
    { a * b };
    { a + b };
    { a / b };
};

template <ProbabilityScalar T>
bool is_positive(const T& x, const Tolerance& tol = {}) {
    return ScalarTraits<T>::positive(x, tol);
}

template <ProbabilityScalar T>
bool is_zero(const T& x, const Tolerance& tol = {}) {
    return !ScalarTraits<T>::positive(x, tol) && !ScalarTraits<T>::negative(x, tol);
}

template <ProbabilityScalar T>
bool nearly_equal(const T& a, const T& b, const Tolerance& tol = {}) {
    return ScalarTraits<T>::equal(a, b, tol);
}

template <ProbabilityScalar T>
double to_double(const T& x) {
    return ScalarTraits<T>::to_double(x);
}

template <ProbabilityScalar T>
std::string to_string(const T& x) {
    return ScalarTraits<T>::to_string(x);
}

template <ProbabilityScalar T>
T ratio(std::int64_t num, std::int64_t den) {
    return ScalarTraits<T>::from_ratio(num, den);
}

namespace detail {

inline bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace detail

/// Parses "a/b", "a" or a plain decimal "0.125" into an exact rational.
/// A leading minus sign is accepted so that range errors can be reported
/// by the caller with the offending position.
inline std::optional<Rational> parse_rational(std::string_view text) {
    std::string_view s = text;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    bool neg = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty()) return std::nullopt;

    Rational value;
    if (const auto slash = s.find('/'); slash != std::string_view::npos) {
        const auto num = s.substr(0, slash);
        const auto den = s.substr(slash + 1);
        if (!detail::all_digits(num) || !detail::all_digits(den)) return std::nullopt;
        mpz_class n(std::string(num), 10);
        mpz_class d(std::string(den), 10);
        if (d == 0) return std::nullopt;
        value = Rational(n, d);
        value.canonicalize();
    } else if (const auto dot = s.find('.'); dot != std::string_view::npos) {
        const auto whole = s.substr(0, dot);
        const auto frac = s.substr(dot + 1);
        if (!(whole.empty() || detail::all_digits(whole)) || !(frac.empty() || detail::all_digits(frac)) ||
            (whole.empty() && frac.empty())) {
            return std::nullopt;
        }
        mpz_class n(std::string(whole.empty() ? "0" : whole) + std::string(frac), 10);
        mpz_class d;
        mpz_ui_pow_ui(d.get_mpz_t(), 10, frac.size());
        value = Rational(n, d);
        value.canonicalize();
    } else {
        if (!detail::all_digits(s)) return std::nullopt;
        value = Rational(mpz_class(std::string(s), 10));
    }
    if (neg) value = -value;
    return value;
}

}  // namespace cohere
