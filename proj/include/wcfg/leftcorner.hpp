#pragma once

// Left-corner machinery. P holds the one-step weight of X rewriting with Y on
// the left edge (summed over the right sibling); its closure P* gives the
// pairwise expectations E_lc(Y|X), and one pass over the binary rules folds
// those with rule weights into E_lc(Y Z|X), keyed by (X, RHS pair).

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wcfg/errors.hpp"
#include "wcfg/grammar.hpp"
#include "wcfg/matrix.hpp"
#include "wcfg/semiring.hpp"

namespace wcfg {

enum class ClosureMethod { inversion, lehmann };

template <Semiring S>
constexpr ClosureMethod default_closure_method() {
    return std::is_same_v<S, ProbSemiring> ? ClosureMethod::inversion : ClosureMethod::lehmann;
}

// P(i,j) = sum over rules X_i -> X_j Y of the rule weight. Lexical and
// empty-RHS rules contribute nothing.
template <Semiring S>
SquareMatrix<S> build_p_matrix(const Grammar<S>& g) {
    SquareMatrix<S> p(g.num_nonterminals());
    for (const auto& r : g.binary_rules()) {
        p(r.lhs, r.left) = S::add(p(r.lhs, r.left), r.weight);
    }
    return p;
}

template <Semiring S>
struct LeftCornerTables {
    using Value = typename S::Value;

    SquareMatrix<S> p_matrix;
    SquareMatrix<S> e_lc;  // closure of p_matrix; e_lc(X,Y) = E_lc(Y|X)

    // Distinct RHS pairs of binary rules in first-appearance order, plus a
    // dense (Y,Z) -> pair-id lookup (-1 where no rule has that RHS).
    std::vector<std::pair<std::int32_t, std::int32_t>> rhs_pairs;
    std::vector<std::int32_t> pair_index;

    // e_lc_rule[X * rhs_pairs.size() + pair] = E_lc(Y Z|X); empty when the
    // table was not requested (the factored prefix recursion does not use it).
    std::vector<Value> e_lc_rule;

    bool has_rule_table() const { return !e_lc_rule.empty() || rhs_pairs.empty(); }

    std::int32_t pair_id(std::int32_t y, std::int32_t z) const {
        return pair_index[static_cast<std::size_t>(y) * e_lc.dim() + z];
    }
};

// Computes P, its closure by the requested method, and (optionally) the
// per-rule expectations. Inversion is only defined for the probability
// instance; Lehmann works for every complete semiring.
template <Semiring S>
LeftCornerTables<S> left_corner_expectations(const Grammar<S>& g,
                                             ClosureMethod method = default_closure_method<S>(),
                                             bool with_rule_table = true) {
    LeftCornerTables<S> t{build_p_matrix(g), SquareMatrix<S>(g.num_nonterminals()), {}, {}, {}};
    if (method == ClosureMethod::inversion) {
        if constexpr (std::is_same_v<S, ProbSemiring>) {
            t.e_lc = invert_closure(t.p_matrix);
        } else {
            throw Error("inversion closure is only defined for the probability semiring");
        }
    } else {
        t.e_lc = lehmann_closure(t.p_matrix);
    }

    const std::size_t nt = g.num_nonterminals();
    t.pair_index.assign(nt * nt, -1);
    for (const auto& r : g.binary_rules()) {
        auto& id = t.pair_index[static_cast<std::size_t>(r.left) * nt + r.right];
        if (id < 0) {
            id = static_cast<std::int32_t>(t.rhs_pairs.size());
            t.rhs_pairs.emplace_back(r.left, r.right);
        }
    }

    if (with_rule_table && !t.rhs_pairs.empty()) {
        const std::size_t np = t.rhs_pairs.size();
        t.e_lc_rule.assign(nt * np, S::zero());
        for (std::size_t x = 0; x < nt; ++x) {
            auto* row = t.e_lc_rule.data() + x * np;
            for (const auto& r : g.binary_rules()) {
                const auto id = t.pair_id(r.left, r.right);
                row[id] = S::add(row[id], S::mul(t.e_lc(x, r.lhs), r.weight));
            }
        }
    }
    return t;
}

}  // namespace wcfg
