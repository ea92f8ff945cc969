#pragma once

// Complete-semiring abstraction and the four instances the library ships:
// probability, log, Viterbi (max-times) and boolean. The semiring is a
// compile-time parameter of every chart and matrix so the dense inner loops
// never branch on it.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <string_view>

#include "wcfg/errors.hpp"

namespace wcfg {

// Values whose closure denominator would be within this distance of zero are
// treated as divergent by star().
inline constexpr double kStarDomainTol = 1e-12;

namespace detail {

inline std::string format_real(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

// |a - b| measured against max(1, |a|, |b|); exact match short-circuits.
inline bool real_close(double a, double b, double tol) {
    if (a == b) return true;
    const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) <= tol * scale;
}

}  // namespace detail

template <typename S>
concept Semiring = requires(const typename S::Value a, const typename S::Value b) {
    typename S::Value;
    { S::zero() } -> std::convertible_to<typename S::Value>;
    { S::one() } -> std::convertible_to<typename S::Value>;
    { S::add(a, b) } -> std::convertible_to<typename S::Value>;
    { S::mul(a, b) } -> std::convertible_to<typename S::Value>;
    { S::star(a) } -> std::convertible_to<typename S::Value>;
    { S::from_prob(0.5) } -> std::convertible_to<typename S::Value>;
    { S::to_prob(a) } -> std::convertible_to<double>;
    { S::eq(a, b, 1e-9) } -> std::convertible_to<bool>;
    { S::name() } -> std::convertible_to<std::string_view>;
    { S::format(a, 12) } -> std::convertible_to<std::string>;
};

// Semirings whose multiplication can be undone; only these can report
// per-token conditional scores.
template <typename S>
concept DivisionSemiring = Semiring<S> && requires(const typename S::Value a, const typename S::Value b) {
    { S::div(a, b) } -> std::convertible_to<typename S::Value>;
};

// Non-negative reals under ordinary (+, *).
struct ProbSemiring {
    using Value = double;
    static constexpr bool kIdempotent = false;

    static Value zero() { return 0.0; }
    static Value one() { return 1.0; }
    static Value add(Value a, Value b) { return a + b; }
    static Value mul(Value a, Value b) { return a * b; }
    static Value div(Value a, Value b) { return a / b; }

    // Geometric series: star(a) = 1/(1-a) for a < 1.
    static Value star(Value a) {
        if (a >= 1.0 - kStarDomainTol) {
            throw NonConvergentError("star(" + std::to_string(a) +
                                     ") diverges in the probability semiring");
        }
        return 1.0 / (1.0 - a);
    }

    static Value from_prob(double p) { return p; }
    static double to_prob(Value v) { return v; }
    static bool eq(Value a, Value b, double tol) { return detail::real_close(a, b, tol); }
    static std::string_view name() { return "prob"; }
    static std::string format(Value v, int precision) { return detail::format_real(v, precision); }
};

// Natural-log probabilities under (logsumexp, +). The additive identity is
// -infinity; addition shifts by the max so long products stay representable.
struct LogSemiring {
    using Value = double;
    static constexpr bool kIdempotent = false;

    static Value zero() { return -std::numeric_limits<double>::infinity(); }
    static Value one() { return 0.0; }

    static Value add(Value a, Value b) {
        if (a == zero()) return b;
        if (b == zero()) return a;
        if (a < b) std::swap(a, b);
        return a + std::log1p(std::exp(b - a));
    }

    static Value mul(Value a, Value b) { return a + b; }
    static Value div(Value a, Value b) { return a - b; }

    // star(log p) = -log(1 - p), defined for p < 1.
    static Value star(Value a) {
        if (a >= std::log1p(-kStarDomainTol)) {
            throw NonConvergentError("star(exp " + std::to_string(a) +
                                     ") diverges in the log semiring");
        }
        return -std::log1p(-std::exp(a));
    }

    static Value from_prob(double p) { return std::log(p); }
    static double to_prob(Value v) { return std::exp(v); }

    static bool eq(Value a, Value b, double tol) {
        if (a == b) return true;  // covers a pair of -inf
        if (a == zero() || b == zero()) return false;
        return std::fabs(a - b) <= tol;  // log-domain distance is a relative prob distance
    }

    static std::string_view name() { return "log"; }
    static std::string format(Value v, int precision) { return detail::format_real(v, precision); }
};

// Max-times semiring over [0, 1]: keeps the weight of the single best
// derivation instead of the total mass.
struct ViterbiSemiring {
    using Value = double;
    static constexpr bool kIdempotent = true;

    static Value zero() { return 0.0; }
    static Value one() { return 1.0; }
    static Value add(Value a, Value b) { return a > b ? a : b; }
    static Value mul(Value a, Value b) { return a * b; }

    // sup over {a^i : i >= 0} is a^0 = 1 whenever a <= 1.
    static Value star(Value a) {
        if (a > 1.0 + kStarDomainTol) {
            throw NonConvergentError("star(" + std::to_string(a) +
                                     ") diverges in the Viterbi semiring");
        }
        return 1.0;
    }

    static Value from_prob(double p) { return p; }
    static double to_prob(Value v) { return v; }
    static bool eq(Value a, Value b, double tol) { return detail::real_close(a, b, tol); }
    static std::string_view name() { return "viterbi"; }
    static std::string format(Value v, int precision) { return detail::format_real(v, precision); }
};

// Two-element semiring (or, and): weighted parsing collapses to recognition.
// The carrier is a byte, not bool, so charts are plain addressable arrays
// (std::vector<bool> has no data()).
struct BooleanSemiring {
    using Value = std::uint8_t;
    static constexpr bool kIdempotent = true;

    static Value zero() { return 0; }
    static Value one() { return 1; }
    static Value add(Value a, Value b) { return a | b; }
    static Value mul(Value a, Value b) { return a & b; }
    static Value star(Value) { return 1; }

    static Value from_prob(double p) { return p > 0.0 ? 1 : 0; }
    static double to_prob(Value v) { return v ? 1.0 : 0.0; }
    static bool eq(Value a, Value b, double) { return a == b; }
    static std::string_view name() { return "boolean"; }
    static std::string format(Value v, int) { return v ? "true" : "false"; }
};

static_assert(Semiring<ProbSemiring>);
static_assert(Semiring<LogSemiring>);
static_assert(Semiring<ViterbiSemiring>);
static_assert(Semiring<BooleanSemiring>);
static_assert(DivisionSemiring<ProbSemiring>);
static_assert(DivisionSemiring<LogSemiring>);
static_assert(!DivisionSemiring<BooleanSemiring>);

}  // namespace wcfg
