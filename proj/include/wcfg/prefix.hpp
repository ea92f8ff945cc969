#pragma once

// All-prefix probabilities p(i,k|X): the weight of deriving w_i..w_k followed
// by any continuation. Three routes fill the same chart:
//
//   jl                - the classic recursion: for every span and triple
//                       (X, Y, Z), fold E_lc(Y Z|X) with the split sum over
//                       beta(i,j|Y) * p(j+1,k|Z). Probability semiring.
//   fast_jl           - factors the triple loop through two per-span pair
//                       tables (gamma from the factored inside pass, delta =
//                       E_lc-row-times-gamma), cutting the span recursion to
//                       nonterminal pairs. Probability semiring.
//   fast_semiring_jl  - the same dataflow with (add, mul) of any complete
//                       semiring, with the closure computed by elimination.
//
// The per_prefix vector reads p(1,k|S) off the chart for every k, so one run
// scores all prefixes of the input.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wcfg/chart.hpp"
#include "wcfg/errors.hpp"
#include "wcfg/grammar.hpp"
#include "wcfg/inside.hpp"
#include "wcfg/leftcorner.hpp"
#include "wcfg/semiring.hpp"

namespace wcfg {

template <Semiring S>
struct PrefixResult {
    Chart<S> chart;                               // p(i,k|X)
    std::vector<typename S::Value> per_prefix;    // p(1,k|S), k = 1..n
    std::vector<typename S::Value> per_token_conditional;  // empty unless the semiring divides
    std::optional<PairChart<S>> gamma;            // factored algorithms only
    std::optional<PairChart<S>> delta;
};

namespace detail {

// p(k,k|X) = sum_Y E_lc(Y|X) * p(Y -> w_k).
template <Semiring S>
void prefix_base_case(Chart<S>& chart, std::span<const TokenId> w, const Grammar<S>& g,
                      const LeftCornerTables<S>& lc) {
    const std::size_t nt = g.num_nonterminals();
    for (std::size_t k = 1; k <= w.size(); ++k) {
        for (const auto& [y, weight] : g.lexical_with_terminal(w[k - 1])) {
            for (std::size_t x = 0; x < nt; ++x) {
                chart.at(k, k, x) = S::add(chart.at(k, k, x), S::mul(lc.e_lc(x, y), weight));
            }
        }
    }
}

template <Semiring S>
void finalize_prefix(PrefixResult<S>& out, std::span<const TokenId> w, const Grammar<S>& g) {
    const std::size_t n = w.size();
    out.per_prefix.resize(n);
    for (std::size_t k = 1; k <= n; ++k) out.per_prefix[k - 1] = out.chart.at(1, k, g.start());
    if constexpr (DivisionSemiring<S>) {
        out.per_token_conditional.resize(n);
        auto prev = S::one();  // empty prefix carries weight one
        for (std::size_t k = 0; k < n; ++k) {
            const auto cur = out.per_prefix[k];
            out.per_token_conditional[k] =
                S::eq(prev, S::zero(), 0.0) ? S::zero() : S::div(cur, prev);
            prev = cur;
        }
    }
}

}  // namespace detail

// Baseline recursion. Requires tables carrying the per-rule expectations.
inline PrefixResult<ProbSemiring> jl(std::span<const TokenId> w,
                                     const Grammar<ProbSemiring>& g,
                                     const LeftCornerTables<ProbSemiring>& lc) {
    using S = ProbSemiring;
    if (!lc.has_rule_table()) throw Error("jl: left-corner tables lack the rule table");
    detail::check_tokens(w, g);
    const std::size_t n = w.size();
    const std::size_t nt = g.num_nonterminals();
    const std::size_t np = lc.rhs_pairs.size();

    const Chart<S> beta = cky(w, g);
    PrefixResult<S> out{Chart<S>(n, nt), {}, {}, std::nullopt, std::nullopt};
    detail::prefix_base_case(out.chart, w, g, lc);

    for (std::size_t len = 2; len <= n; ++len) {
        for (std::size_t i = 1; i + len - 1 <= n; ++i) {
            const std::size_t k = i + len - 1;
            for (std::size_t x = 0; x < nt; ++x) {
                auto total = out.chart.at(i, k, x);
                const auto* row = lc.e_lc_rule.data() + x * np;
                for (std::size_t pid = 0; pid < np; ++pid) {
                    const auto [y, z] = lc.rhs_pairs[pid];
                    auto acc = S::zero();
                    for (std::size_t j = i; j < k; ++j) {
                        acc = S::add(acc, S::mul(beta.at(i, j, y), out.chart.at(j + 1, k, z)));
                    }
                    total = S::add(total, S::mul(row[pid], acc));
                }
                out.chart.at(i, k, x) = total;
            }
        }
    }
    detail::finalize_prefix(out, w, g);
    return out;
}

namespace detail {

template <Semiring S>
PrefixResult<S> factored_prefix(std::span<const TokenId> w, const Grammar<S>& g,
                                const LeftCornerTables<S>& lc) {
    check_tokens(w, g);
    const std::size_t n = w.size();
    const std::size_t nt = g.num_nonterminals();

    FactoredInside<S> inside = cky_factored(w, g);

    // delta(i,j) = e_lc * gamma(i,j), materialized for every span up front.
    PairChart<S> delta(n, nt);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = i; j <= n; ++j) {
            const auto* gb = inside.gamma.block(i, j);
            auto* db = delta.block(i, j);
            for (std::size_t x = 0; x < nt; ++x) {
                auto* drow = db + x * nt;
                for (std::size_t y = 0; y < nt; ++y) {
                    const auto e = lc.e_lc(x, y);
                    const auto* grow = gb + y * nt;
                    for (std::size_t z = 0; z < nt; ++z) {
                        drow[z] = S::add(drow[z], S::mul(e, grow[z]));
                    }
                }
            }
        }
    }

    PrefixResult<S> out{Chart<S>(n, nt), {}, {}, std::nullopt, std::nullopt};
    prefix_base_case(out.chart, w, g, lc);

    // p(i,k|X) = sum_j sum_Z delta(i,j,X,Z) * p(j+1,k|Z)
    for (std::size_t len = 2; len <= n; ++len) {
        for (std::size_t i = 1; i + len - 1 <= n; ++i) {
            const std::size_t k = i + len - 1;
            auto* cell = out.chart.span(i, k);
            for (std::size_t j = i; j < k; ++j) {
                const auto* db = delta.block(i, j);
                const auto* pv = out.chart.span(j + 1, k);
                for (std::size_t x = 0; x < nt; ++x) {
                    const auto* drow = db + x * nt;
                    auto acc = cell[x];
                    for (std::size_t z = 0; z < nt; ++z) {
                        acc = S::add(acc, S::mul(drow[z], pv[z]));
                    }
                    cell[x] = acc;
                }
            }
        }
    }
    finalize_prefix(out, w, g);
    out.gamma = std::move(inside.gamma);
    out.delta = std::move(delta);
    return out;
}

}  // namespace detail

inline PrefixResult<ProbSemiring> fast_jl(std::span<const TokenId> w,
                                          const Grammar<ProbSemiring>& g,
                                          const LeftCornerTables<ProbSemiring>& lc) {
    return detail::factored_prefix(w, g, lc);
}

template <Semiring S>
PrefixResult<S> fast_semiring_jl(std::span<const TokenId> w, const Grammar<S>& g,
                                 const LeftCornerTables<S>& lc) {
    return detail::factored_prefix(w, g, lc);
}

// Convenience overloads that build the left-corner tables themselves. When
// scoring many sentences, precompute the tables once instead.
inline PrefixResult<ProbSemiring> jl(std::span<const TokenId> w, const Grammar<ProbSemiring>& g) {
    return jl(w, g, left_corner_expectations(g, ClosureMethod::inversion));
}

inline PrefixResult<ProbSemiring> fast_jl(std::span<const TokenId> w,
                                          const Grammar<ProbSemiring>& g) {
    return fast_jl(w, g, left_corner_expectations(g, ClosureMethod::inversion, false));
}

template <Semiring S>
PrefixResult<S> fast_semiring_jl(std::span<const TokenId> w, const Grammar<S>& g) {
    return fast_semiring_jl(w, g, left_corner_expectations(g, ClosureMethod::lehmann, false));
}

}  // namespace wcfg
