#pragma once

// Shared fixtures and small numeric helpers for the unit suites.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "wcfg/wcfg.hpp"

namespace testutil {

// S -> S S : 0.4, S -> 'a' : 0.6. Tight, one nonterminal, one terminal;
// every quantity is hand-computable.
inline const char* kG1 =
    "@start S\n"
    "S -> S S : 0.4\n"
    "S -> 'a' : 0.6\n";

// CNF grammar for { a^n b^n : n >= 1 }.
inline const char* kAnBn =
    "@start S\n"
    "S -> A B : 0.5\n"
    "S -> A T : 0.5\n"
    "T -> S B : 1.0\n"
    "A -> 'a' : 1.0\n"
    "B -> 'b' : 1.0\n";

inline double rel_diff(double a, double b) {
    const double diff = std::fabs(a - b);
    if (diff == 0.0) return 0.0;
    return diff / std::max(std::fabs(a), std::fabs(b));
}

inline bool rel_close(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Deterministic uniform doubles; distribution code stays out of the tests so
// expected values never depend on the standard library version.
struct Rng {
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    double unit() { return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53; }
    double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
    std::uint64_t next() { return eng(); }
    std::mt19937_64 eng;
};

// Row sums strictly below 1 so every closure converges.
inline wcfg::SquareMatrix<wcfg::ProbSemiring> random_substochastic(std::size_t d, Rng& rng,
                                                                   double max_row_sum = 0.9) {
    wcfg::SquareMatrix<wcfg::ProbSemiring> m(d);
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> raw(d);
        double sum = 0.0;
        for (auto& v : raw) {
            v = rng.unit();
            sum += v;
        }
        const double target = rng.range(0.1, max_row_sum);
        for (std::size_t j = 0; j < d; ++j) m(i, j) = raw[j] * target / sum;
    }
    return m;
}

template <wcfg::Semiring To, wcfg::Semiring From>
wcfg::Grammar<To> reload_as(const wcfg::Grammar<From>& g) {
    return wcfg::parse_grammar<To>(g.serialize());
}

}  // namespace testutil
