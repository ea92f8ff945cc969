#pragma once

// Brute-force ground truth, kept deliberately separate from the chart code:
// derivation trees are enumerated by explicit recursive span splitting, so a
// chart bug cannot hide behind a shared implementation. Also hosts the random
// dense-grammar generator the property suites and benchmarks feed on.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wcfg/errors.hpp"
#include "wcfg/grammar.hpp"
#include "wcfg/inside.hpp"
#include "wcfg/semiring.hpp"

namespace wcfg::oracle {

inline constexpr std::size_t kMaxOracleYield = 8;

struct DerivationTree {
    std::int32_t root;
    std::int32_t binary_rule = -1;   // index into Grammar::binary_rules()
    std::int32_t lexical_rule = -1;  // index into Grammar::lexical_rules()
    double weight = 1.0;             // product of the constituent rule weights
    std::vector<DerivationTree> children;  // two for a binary node, none for a leaf
};

namespace detail {

inline std::vector<DerivationTree> enumerate_impl(const Grammar<ProbSemiring>& g, std::int32_t root,
                                                  std::span<const TokenId> yield) {
    std::vector<DerivationTree> out;
    if (yield.size() == 1) {
        const auto& lex = g.lexical_rules();
        for (std::size_t idx = 0; idx < lex.size(); ++idx) {
            if (lex[idx].lhs == root && lex[idx].terminal == yield[0]) {
                out.push_back({root, -1, static_cast<std::int32_t>(idx), lex[idx].weight, {}});
            }
        }
        return out;
    }
    const auto& bin = g.binary_rules();
    for (std::size_t idx = 0; idx < bin.size(); ++idx) {
        const auto& r = bin[idx];
        if (r.lhs != root) continue;
        for (std::size_t split = 1; split < yield.size(); ++split) {
            auto lefts = enumerate_impl(g, r.left, yield.first(split));
            if (lefts.empty()) continue;
            auto rights = enumerate_impl(g, r.right, yield.subspan(split));
            for (const auto& l : lefts) {
                for (const auto& rt : rights) {
                    DerivationTree node{root, static_cast<std::int32_t>(idx), -1,
                                        r.weight * l.weight * rt.weight, {}};
                    node.children.push_back(l);
                    node.children.push_back(rt);
                    out.push_back(std::move(node));
                }
            }
        }
    }
    return out;
}

}  // namespace detail

// Every derivation subtree rooted at `root` with exactly the given yield.
// Desk-scale only: the list is exponential in the yield length.
inline std::vector<DerivationTree> enumerate_trees(const Grammar<ProbSemiring>& g,
                                                   std::int32_t root,
                                                   std::span<const TokenId> yield) {
    if (yield.size() > kMaxOracleYield) {
        throw YieldTooLongError("enumerate_trees: yield length " + std::to_string(yield.size()) +
                                " exceeds " + std::to_string(kMaxOracleYield));
    }
    if (yield.empty()) return {};
    for (auto t : yield) {
        if (t < 0 || static_cast<std::size_t>(t) >= g.num_terminals()) return {};
    }
    return detail::enumerate_impl(g, root, yield);
}

// The summed weight of enumerate_trees(g, root, yield), computed by the same
// explicit recursion without materializing the trees. No memoization: the
// cost is proportional to the number of derivations visited.
inline double derivation_weight_sum(const Grammar<ProbSemiring>& g, std::int32_t root,
                                    std::span<const TokenId> yield) {
    if (yield.empty()) return 0.0;
    if (yield.size() == 1) {
        double sum = 0.0;
        for (const auto& r : g.lexical_rules()) {
            if (r.lhs == root && r.terminal == yield[0]) sum += r.weight;
        }
        return sum;
    }
    double sum = 0.0;
    for (const auto& r : g.binary_rules()) {
        if (r.lhs != root) continue;
        for (std::size_t split = 1; split < yield.size(); ++split) {
            const double left = derivation_weight_sum(g, r.left, yield.first(split));
            if (left == 0.0) continue;
            const double right = derivation_weight_sum(g, r.right, yield.subspan(split));
            sum += r.weight * left * right;
        }
    }
    return sum;
}

// Total derivation mass per yield length, mass[m] for m = 0..max_len. This is
// a recursion over lengths only (no span structure), so it gives an
// independent handle on how much probability lies beyond a truncation point.
inline std::vector<double> length_mass(const Grammar<ProbSemiring>& g, std::size_t max_len) {
    const std::size_t nt = g.num_nonterminals();
    std::vector<std::vector<double>> mass(nt, std::vector<double>(max_len + 1, 0.0));
    if (max_len >= 1) {
        for (const auto& r : g.lexical_rules()) mass[r.lhs][1] += r.weight;
        for (std::size_t m = 2; m <= max_len; ++m) {
            for (const auto& r : g.binary_rules()) {
                double acc = 0.0;
                for (std::size_t m1 = 1; m1 < m; ++m1) {
                    acc += mass[r.left][m1] * mass[r.right][m - m1];
                }
                mass[r.lhs][m] += r.weight * acc;
            }
        }
    }
    std::vector<double> out(max_len + 1, 0.0);
    for (std::size_t m = 1; m <= max_len; ++m) out[m] = mass[g.start()][m];
    if (g.epsilon_weight()) out[0] = *g.epsilon_weight();
    return out;
}

struct PrefixBracket {
    double lower;       // sum of full-string probabilities over covered strings
    double tail_bound;  // mass possibly hiding beyond max_total_len
};

// Truncated-continuation bracket: lower <= p_prefix(w|S) <= lower + tail_bound.
// lower sums the full-string probability of every string with prefix w and
// length <= max_total_len; tail_bound is one minus the total mass of ALL
// strings up to that length (length distribution, not per-prefix, so the
// bracket is loose but sound).
inline PrefixBracket prefix_oracle(const Grammar<ProbSemiring>& g, std::span<const TokenId> w,
                                   std::size_t max_total_len) {
    const auto lm = length_mass(g, max_total_len);
    double covered = 0.0;
    for (double m : lm) covered += m;
    const double tail = covered > 1.0 ? 0.0 : 1.0 - covered;

    bool tokens_ok = !w.empty();
    for (auto t : w) {
        if (t < 0 || static_cast<std::size_t>(t) >= g.num_terminals()) tokens_ok = false;
    }
    if (!tokens_ok || w.size() > max_total_len) return {0.0, tail};

    double lower = 0.0;
    if (g.num_terminals() == 1) {
        // Unary alphabet: one chart on the padded string covers every length.
        Sentence padded(max_total_len, 0);
        const auto beta = cky(std::span<const TokenId>(padded), g);
        for (std::size_t m = w.size(); m <= max_total_len; ++m) {
            lower += beta.at(1, m, g.start());
        }
        return {lower, tail};
    }

    Sentence s(w.begin(), w.end());
    const auto visit = [&](auto&& self) -> void {
        const auto beta = cky(std::span<const TokenId>(s), g);
        lower += beta.at(1, s.size(), g.start());
        if (s.size() < max_total_len) {
            for (TokenId a = 0; a < static_cast<TokenId>(g.num_terminals()); ++a) {
                s.push_back(a);
                self(self);
                s.pop_back();
            }
        }
    };
    visit(visit);
    return {lower, tail};
}

// Complete grammar over num_nt nonterminals and num_terminals terminals:
// every binary and every lexical rule is present. Per LHS, the lexical rules
// receive total mass >= lexical_mass so the grammar is tight with high
// probability; the draw is retried up to ten times against the extinction
// check before giving up. Deterministic per seed.
inline Grammar<ProbSemiring> random_dense_grammar(int num_nt, int num_terminals,
                                                  std::uint64_t seed, double lexical_mass) {
    if (num_nt < 1) throw std::invalid_argument("random_dense_grammar: num_nt must be >= 1");
    if (num_terminals < 1)
        throw std::invalid_argument("random_dense_grammar: num_terminals must be >= 1");
    if (!(lexical_mass > 0.0 && lexical_mass < 1.0))
        throw std::invalid_argument("random_dense_grammar: lexical_mass must be in (0,1)");

    std::mt19937_64 eng(seed);
    const auto unit = [&eng] { return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53; };

    std::vector<std::string> nts(num_nt);
    for (int i = 0; i < num_nt; ++i) nts[i] = i == 0 ? "S" : "N" + std::to_string(i);
    std::vector<std::string> terms(num_terminals);
    for (int i = 0; i < num_terminals; ++i) {
        terms[i] = i < 26 ? std::string(1, static_cast<char>('a' + i)) : "t" + std::to_string(i);
    }

    for (int attempt = 0; attempt < 10; ++attempt) {
        GrammarBuilder<ProbSemiring> b;
        b.start("S");
        for (int x = 0; x < num_nt; ++x) {
            std::vector<double> braw(static_cast<std::size_t>(num_nt) * num_nt);
            for (auto& v : braw) v = 0.05 + 0.95 * unit();
            std::vector<double> lraw(num_terminals);
            for (auto& v : lraw) v = 0.05 + 0.95 * unit();
            const double share = lexical_mass + (1.0 - lexical_mass) * 0.25 * unit();

            double bsum = 0.0;
            for (double v : braw) bsum += v;
            double lsum = 0.0;
            for (double v : lraw) lsum += v;

            for (int y = 0; y < num_nt; ++y) {
                for (int z = 0; z < num_nt; ++z) {
                    const double wgt = braw[static_cast<std::size_t>(y) * num_nt + z] *
                                       (1.0 - share) / bsum;
                    b.binary(nts[x], nts[y], nts[z], wgt);
                }
            }
            for (int a = 0; a < num_terminals; ++a) {
                b.lexical(nts[x], terms[a], lraw[a] * share / lsum);
            }
        }
        auto g = b.build();
        const auto q = tightness_estimate(g);
        if (q[g.start()] > 1.0 - 1e-6) return g;
    }
    throw GenerationFailedError(
        "random_dense_grammar: no tight grammar after 10 attempts (lexical_mass " +
        std::to_string(lexical_mass) + " too low for " + std::to_string(num_nt) +
        " nonterminals?)");
}

// Uniform random token ids; the benchmark sentences.
inline Sentence sample_sentence(int num_terminals, std::size_t len, std::uint64_t seed) {
    std::mt19937_64 eng(seed ^ 0x5851f42d4c957f2dULL);
    Sentence out(len);
    for (auto& t : out) t = static_cast<TokenId>(eng() % static_cast<std::uint64_t>(num_terminals));
    return out;
}

}  // namespace wcfg::oracle
