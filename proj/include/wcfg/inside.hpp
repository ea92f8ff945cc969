#pragma once

// Inside charts beta(i,k|X): the weight of deriving exactly w_i..w_k from X.
// Two routes: the textbook span/rule/split recursion, and a factored variant
// that funnels the rule loop through a per-span pair table so the split loop
// only touches nonterminal pairs. The factoring is exact algebra; both fill
// identical charts up to floating-point summation order.

#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "wcfg/chart.hpp"
#include "wcfg/errors.hpp"
#include "wcfg/grammar.hpp"
#include "wcfg/semiring.hpp"

namespace wcfg {

namespace detail {

template <Semiring S>
void check_tokens(std::span<const TokenId> w, const Grammar<S>& g) {
    if (w.empty()) throw Error("inside: sentence must contain at least one token");
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] < 0 || static_cast<std::size_t>(w[i]) >= g.num_terminals()) {
            throw UnknownTokenError(i + 1, "#" + std::to_string(w[i]));
        }
    }
}

template <Semiring S>
void init_lexical(Chart<S>& beta, std::span<const TokenId> w, const Grammar<S>& g) {
    for (std::size_t k = 1; k <= w.size(); ++k) {
        for (const auto& [lhs, weight] : g.lexical_with_terminal(w[k - 1])) {
            beta.at(k, k, lhs) = S::add(beta.at(k, k, lhs), weight);
        }
    }
}

}  // namespace detail

// Plain CKY: for each span and rule X -> Y Z, fold the split sum
// sum_j beta(i,j|Y) * beta(j+1,k|Z) into the rule weight.
template <Semiring S>
Chart<S> cky(std::span<const TokenId> w, const Grammar<S>& g) {
    detail::check_tokens(w, g);
    const std::size_t n = w.size();
    Chart<S> beta(n, g.num_nonterminals());
    detail::init_lexical(beta, w, g);

    for (std::size_t len = 2; len <= n; ++len) {
        for (std::size_t i = 1; i + len - 1 <= n; ++i) {
            const std::size_t k = i + len - 1;
            for (const auto& r : g.binary_rules()) {
                auto acc = S::zero();
                for (std::size_t j = i; j < k; ++j) {
                    acc = S::add(acc, S::mul(beta.at(i, j, r.left), beta.at(j + 1, k, r.right)));
                }
                beta.at(i, k, r.lhs) = S::add(beta.at(i, k, r.lhs), S::mul(r.weight, acc));
            }
        }
    }
    return beta;
}

template <Semiring S>
struct FactoredInside {
    Chart<S> beta;
    PairChart<S> gamma;  // gamma(i,j,X,Z) = sum_Y p(X -> Y Z) * beta(i,j|Y)
};

// Factored CKY. Spans are processed by increasing length; once every span of
// length L has its beta values, the gamma block for those spans is written
// (each cell exactly once), and longer spans consume gamma instead of
// re-walking the rule set:
//
//   beta(i,k|X) = sum_Z sum_j gamma(i,j,X,Z) * beta(j+1,k|Z)
//
// The same gamma table is what the prefix recursion feeds on, so one
// computation serves both charts.
template <Semiring S>
FactoredInside<S> cky_factored(std::span<const TokenId> w, const Grammar<S>& g) {
    detail::check_tokens(w, g);
    const std::size_t n = w.size();
    const std::size_t nt = g.num_nonterminals();
    FactoredInside<S> out{Chart<S>(n, nt), PairChart<S>(n, nt)};
    auto& beta = out.beta;
    auto& gamma = out.gamma;
    detail::init_lexical(beta, w, g);

    for (std::size_t len = 1; len <= n; ++len) {
        if (len >= 2) {
            for (std::size_t i = 1; i + len - 1 <= n; ++i) {
                const std::size_t k = i + len - 1;
                auto* cell = beta.span(i, k);
                for (std::size_t j = i; j < k; ++j) {
                    const auto* block = gamma.block(i, j);
                    const auto* right = beta.span(j + 1, k);
                    for (std::size_t x = 0; x < nt; ++x) {
                        const auto* row = block + x * nt;
                        auto acc = cell[x];
                        for (std::size_t z = 0; z < nt; ++z) {
                            acc = S::add(acc, S::mul(row[z], right[z]));
                        }
                        cell[x] = acc;
                    }
                }
            }
        }
        for (std::size_t i = 1; i + len - 1 <= n; ++i) {
            const std::size_t j = i + len - 1;
            auto* block = gamma.block(i, j);
            for (std::size_t y = 0; y < nt; ++y) {
                const auto left = beta.at(i, j, y);
                for (std::size_t z = 0; z < nt; ++z) {
                    for (const auto& [lhs, weight] : g.binary_with_rhs(
                             static_cast<std::int32_t>(y), static_cast<std::int32_t>(z))) {
                        block[lhs * nt + z] =
                            S::add(block[lhs * nt + z], S::mul(weight, left));
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace wcfg
