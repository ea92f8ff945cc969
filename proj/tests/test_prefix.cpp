#include <catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "wcfg/oracle.hpp"
#include "wcfg/prefix.hpp"

using namespace wcfg;
using testutil::Rng;

namespace {

template <Semiring S>
double max_chart_rel(const Chart<S>& a, const Chart<S>& b) {
    double worst = 0.0;
    for (std::size_t i = 1; i <= a.length(); ++i)
        for (std::size_t k = i; k <= a.length(); ++k)
            for (std::size_t x = 0; x < a.num_symbols(); ++x)
                worst = std::max(worst, testutil::rel_diff(a.at(i, k, x), b.at(i, k, x)));
    return worst;
}

// Is w a prefix of some string in the boolean language? Tries every
// continuation up to the given length with the independent recognizer logic.
bool brute_prefix_member(const Grammar<BooleanSemiring>& g, const Sentence& w, int max_total_len);

bool brute_recognizes(const Grammar<BooleanSemiring>& g, std::int32_t root,
                      std::span<const TokenId> yield) {
    if (yield.empty()) return false;
    if (yield.size() == 1) {
        for (const auto& r : g.lexical_rules())
            if (r.lhs == root && r.terminal == yield[0] && r.weight) return true;
        return false;
    }
    for (const auto& r : g.binary_rules()) {
        if (r.lhs != root || !r.weight) continue;
        for (std::size_t s = 1; s < yield.size(); ++s) {
            if (brute_recognizes(g, r.left, yield.first(s)) &&
                brute_recognizes(g, r.right, yield.subspan(s)))
                return true;
        }
    }
    return false;
}

bool brute_prefix_member(const Grammar<BooleanSemiring>& g, const Sentence& w, int max_total_len) {
    Sentence s = w;
    const auto visit = [&](auto&& self) -> bool {
        if (!s.empty() && brute_recognizes(g, g.start(), s)) return true;
        if (static_cast<int>(s.size()) >= max_total_len) return false;
        for (TokenId a = 0; a < static_cast<TokenId>(g.num_terminals()); ++a) {
            s.push_back(a);
            const bool hit = self(self);
            s.pop_back();
            if (hit) return true;
        }
        return false;
    };
    return visit(visit);
}

}  // namespace

TEST_CASE("prefix values of the recursive fixture", "[prefix]") {
    const auto g = parse_grammar<ProbSemiring>(testutil::kG1);
    const auto w = g.tokenize("a a a");

    const auto lc = left_corner_expectations(g, ClosureMethod::inversion);
    for (const auto& res : {jl(w, g, lc), fast_jl(w, g), fast_semiring_jl<ProbSemiring>(w, g)}) {
        REQUIRE(res.per_prefix.size() == 3);
        CHECK(testutil::rel_diff(res.per_prefix[0], 1.0) < 1e-12);
        CHECK(testutil::rel_diff(res.per_prefix[1], 0.4) < 1e-12);
        CHECK(testutil::rel_diff(res.per_prefix[2], 0.256) < 1e-12);
        REQUIRE(res.per_token_conditional.size() == 3);
        CHECK(testutil::rel_diff(res.per_token_conditional[0], 1.0) < 1e-12);
        CHECK(testutil::rel_diff(res.per_token_conditional[1], 0.4) < 1e-12);
        CHECK(testutil::rel_diff(res.per_token_conditional[2], 0.64) < 1e-12);
    }
}

TEST_CASE("factored intermediates are exposed", "[prefix]") {
    const auto g = parse_grammar<ProbSemiring>(testutil::kG1);
    const auto res = fast_jl(g.tokenize("a a"), g);
    REQUIRE(res.gamma.has_value());
    REQUIRE(res.delta.has_value());
    CHECK(testutil::rel_diff(res.gamma->at(1, 1, 0, 0), 0.24) < 1e-12);
    // delta = E_lc(S|S) * gamma = (5/3) * 0.24.
    CHECK(testutil::rel_diff(res.delta->at(1, 1, 0, 0), 0.4) < 1e-12);
    // The whole length-2 recursion is the single product delta * p(2,2|S).
    CHECK(testutil::rel_diff(res.per_prefix[1], res.delta->at(1, 1, 0, 0) * res.chart.at(2, 2, 0)) <
          1e-12);

    const auto base = jl(g.tokenize("a a"), g);
    CHECK(!base.gamma.has_value());
    CHECK(!base.delta.has_value());
}

TEST_CASE("single-token sentence is the base case alone", "[prefix]") {
    const auto g = oracle::random_dense_grammar(4, 2, 31, 0.6);
    const auto lc = left_corner_expectations(g, ClosureMethod::inversion);
    const Sentence w{1};
    const auto res = fast_jl(w, g, lc);
    double expected = 0.0;
    for (const auto& [y, weight] : g.lexical_with_terminal(1))
        expected += lc.e_lc(g.start(), y) * weight;
    CHECK(testutil::rel_diff(res.per_prefix[0], expected) < 1e-12);
}

TEST_CASE("three algorithms agree chart-entrywise on random grammars", "[prefix]") {
    for (int trial = 0; trial < 20; ++trial) {
        const int nt = 1 + trial % 10;
        const auto g = oracle::random_dense_grammar(nt, 3, 2000 + trial, 0.6);
        const auto w = oracle::sample_sentence(3, 1 + trial % 12, 40 + trial);
        const auto lc = left_corner_expectations(g, ClosureMethod::inversion);
        const auto a = jl(w, g, lc);
        const auto b = fast_jl(w, g, lc);
        const auto c = fast_semiring_jl<ProbSemiring>(
            w, g, left_corner_expectations(g, ClosureMethod::lehmann, false));
        CHECK(max_chart_rel(a.chart, b.chart) < 1e-10);
        CHECK(max_chart_rel(a.chart, c.chart) < 1e-10);
    }
}

TEST_CASE("log semiring exp-matches probability", "[prefix]") {
    const auto g = parse_grammar<ProbSemiring>(testutil::kG1);
    const auto gl = parse_grammar<LogSemiring>(testutil::kG1);
    const auto wl = gl.tokenize("a a");
    const auto res = fast_semiring_jl<LogSemiring>(wl, gl);
    CHECK(std::fabs(res.per_prefix[1] - std::log(0.4)) < 1e-9);

    const auto gp = oracle::random_dense_grammar(5, 2, 321, 0.6);
    const auto glog = testutil::reload_as<LogSemiring>(gp);
    const auto w = oracle::sample_sentence(2, 7, 5);
    const auto rp = fast_jl(w, gp);
    const auto rl = fast_semiring_jl<LogSemiring>(w, glog);
    for (std::size_t k = 0; k < w.size(); ++k) {
        CHECK(testutil::rel_diff(std::exp(rl.per_prefix[k]), rp.per_prefix[k]) < 1e-9);
        CHECK(testutil::rel_diff(std::exp(rl.per_token_conditional[k]),
                                 rp.per_token_conditional[k]) < 1e-9);
    }
}

TEST_CASE("boolean prefixes of the balanced language", "[prefix]") {
    const auto g = parse_grammar<BooleanSemiring>(testutil::kAnBn);
    const auto score = [&](const char* text) {
        const auto w = g.tokenize(text);
        return fast_semiring_jl<BooleanSemiring>(w, g).per_prefix.back();
    };
    CHECK(score("a a a") == true);
    CHECK(score("b") == false);
    CHECK(score("a b") == true);
    CHECK(score("a b b") == false);
    CHECK(score("a a b b") == true);
    CHECK(score("a a b a") == false);

    // Against brute-force membership with bounded continuations.
    for (int len = 1; len <= 5; ++len) {
        for (int bits = 0; bits < (1 << len); ++bits) {
            Sentence w;
            for (int p = 0; p < len; ++p) w.push_back((bits >> p) & 1);
            const auto res = fast_semiring_jl<BooleanSemiring>(w, g);
            CHECK(res.per_prefix.back() == brute_prefix_member(g, w, 2 * len + 2));
            CHECK(res.per_token_conditional.empty());
        }
    }
}

TEST_CASE("Viterbi prefix of the recursive fixture", "[prefix]") {
    const auto gv = parse_grammar<ViterbiSemiring>(testutil::kG1);
    const auto res = fast_semiring_jl<ViterbiSemiring>(gv.tokenize("a a"), gv);
    // Best derivation-with-continuation: the complete two-token tree,
    // 0.4 * 0.6 * 0.6. Oracle: longer continuations only lose weight.
    CHECK(testutil::rel_diff(res.per_prefix[1], 0.144) < 1e-12);
    CHECK(res.per_prefix[1] <= 0.4);
    CHECK(res.per_token_conditional.empty());

    // Max-times never exceeds the total mass on a tight grammar.
    const auto gp = parse_grammar<ProbSemiring>(testutil::kG1);
    const auto rp = fast_jl(gp.tokenize("a a"), gp);
    CHECK(res.per_prefix[1] <= rp.per_prefix[1] + 1e-12);
}

TEST_CASE("Viterbi prefix dominates the best completed derivation", "[prefix]") {
    // Enumerated oracle: the best full derivation of any string that starts
    // with w, up to a continuation length where further mass only shrinks.
    const auto best_completion = [](const Grammar<ProbSemiring>& g, const Sentence& w,
                                    std::size_t max_total_len) {
        double best = 0.0;
        Sentence s = w;
        const auto visit = [&](auto&& self) -> void {
            for (const auto& t : oracle::enumerate_trees(g, g.start(), s))
                best = std::max(best, t.weight);
            if (s.size() < max_total_len) {
                for (TokenId a = 0; a < static_cast<TokenId>(g.num_terminals()); ++a) {
                    s.push_back(a);
                    self(self);
                    s.pop_back();
                }
            }
        };
        visit(visit);
        return best;
    };

    const auto g1 = parse_grammar<ProbSemiring>(testutil::kG1);
    const auto g1v = parse_grammar<ViterbiSemiring>(testutil::kG1);
    {
        const auto w = g1.tokenize("a a");
        const auto res = fast_semiring_jl<ViterbiSemiring>(w, g1v);
        const double oracle_best = best_completion(g1, w, 8);
        CHECK(res.per_prefix[1] >= oracle_best - 1e-12);
        // Here the best partial derivation is itself complete, so they meet.
        CHECK(testutil::rel_diff(res.per_prefix[1], oracle_best) < 1e-12);
    }
    for (int trial = 0; trial < 4; ++trial) {
        const auto g = oracle::random_dense_grammar(2, 2, 7100 + trial, 0.75);
        const auto gv = testutil::reload_as<ViterbiSemiring>(g);
        const auto w = oracle::sample_sentence(2, 2, trial);
        const auto res = fast_semiring_jl<ViterbiSemiring>(w, gv);
        CHECK(res.per_prefix.back() >= best_completion(g, w, 6) - 1e-12);
    }
}

TEST_CASE("divergent grammars fail through the prefix API", "[prefix]") {
    // Certain left recursion: the closure blows up before any chart work.
    const auto g = parse_grammar<ProbSemiring>("S -> S A : 1.0\nA -> 'a' : 1.0\n");
    CHECK_THROWS_AS(fast_jl(g.tokenize("a"), g), SingularMatrixError);
    CHECK_THROWS_AS(jl(g.tokenize("a"), g), SingularMatrixError);
    const auto gl = parse_grammar<LogSemiring>("S -> S A : 1.0\nA -> 'a' : 1.0\n");
    CHECK_THROWS_AS(fast_semiring_jl<LogSemiring>(gl.tokenize("a"), gl), NonConvergentError);

    // Barely substochastic still converges.
    const auto g2 = parse_grammar<ProbSemiring>("S -> S S : 0.999\nS -> 'a' : 0.001\n");
    CHECK_NOTHROW(fast_jl(g2.tokenize("a"), g2));
}

TEST_CASE("lexical-only grammar zeroes every longer prefix", "[prefix]") {
    const auto g = parse_grammar<ProbSemiring>("S -> 'a' : 0.5\nS -> 'b' : 0.5\n");
    const auto res = fast_jl(g.tokenize("a b a"), g);
    CHECK(res.per_prefix[0] == 0.5);
    CHECK(res.per_prefix[1] == 0.0);
    CHECK(res.per_prefix[2] == 0.0);
}

TEST_CASE("prefix weights are monotone and dominate inside weights", "[prefix]") {
    for (int trial = 0; trial < 8; ++trial) {
        const auto g = oracle::random_dense_grammar(2 + trial % 5, 3, 600 + trial, 0.65);
        const auto w = oracle::sample_sentence(3, 2 + trial % 9, trial);
        const auto res = fast_jl(w, g);
        const auto beta = cky<ProbSemiring>(w, g);
        for (std::size_t k = 1; k < w.size(); ++k)
            CHECK(res.per_prefix[k] <= res.per_prefix[k - 1] + 1e-12);
        for (std::size_t i = 1; i <= w.size(); ++i)
            for (std::size_t k = i; k <= w.size(); ++k)
                for (std::size_t x = 0; x < g.num_nonterminals(); ++x)
                    CHECK(res.chart.at(i, k, x) >= beta.at(i, k, x) - 1e-12);
    }
}

TEST_CASE("one-symbol decomposition", "[prefix]") {
    // p(w_1..k) = beta(1,k|S) + sum_a p(w_1..k a), checked on grammars with
    // small alphabets.
    for (int trial = 0; trial < 5; ++trial) {
        const auto g = oracle::random_dense_grammar(2 + trial, 2 + trial % 2, 50 + trial, 0.65);
        const auto lc = left_corner_expectations(g, ClosureMethod::inversion, false);
        auto w = oracle::sample_sentence(static_cast<int>(g.num_terminals()), 4, 900 + trial);
        const auto res = fast_jl(w, g, lc);
        const auto beta = cky<ProbSemiring>(w, g);
        for (std::size_t k = 1; k <= w.size(); ++k) {
            double extended = 0.0;
            Sentence wk(w.begin(), w.begin() + k);
            for (TokenId a = 0; a < static_cast<TokenId>(g.num_terminals()); ++a) {
                wk.push_back(a);
                extended += fast_jl(wk, g, lc).per_prefix[k];
                wk.pop_back();
            }
            CHECK(testutil::rel_close(res.per_prefix[k - 1],
                                      beta.at(1, k, g.start()) + extended, 1e-9));
        }
    }
}

TEST_CASE("tight grammars spend unit mass on first symbols", "[prefix]") {
    const auto check_unit_mass = [](const Grammar<ProbSemiring>& g) {
        const auto lc = left_corner_expectations(g, ClosureMethod::inversion, false);
        double total = g.epsilon_weight().value_or(0.0);
        for (TokenId a = 0; a < static_cast<TokenId>(g.num_terminals()); ++a) {
            const Sentence w{a};
            total += fast_jl(w, g, lc).per_prefix[0];
        }
        CHECK(std::fabs(total - 1.0) < 1e-8);
    };
    check_unit_mass(parse_grammar<ProbSemiring>(testutil::kG1));
    check_unit_mass(parse_grammar<ProbSemiring>(testutil::kAnBn));
    check_unit_mass(parse_grammar<ProbSemiring>(
        "S -> : 0.3\n"
        "S -> A A : 0.2\n"
        "S -> 'a' : 0.5\n"
        "A -> 'a' : 1.0\n"));
    for (int trial = 0; trial < 5; ++trial)
        check_unit_mass(oracle::random_dense_grammar(1 + trial, 3, 77 + trial, 0.6));
}

TEST_CASE("conditionals are probabilities and chain back up", "[prefix]") {
    for (int trial = 0; trial < 5; ++trial) {
        const auto g = oracle::random_dense_grammar(3, 3, 500 + trial, 0.7);
        const auto w = oracle::sample_sentence(3, 6, trial);
        const auto res = fast_jl(w, g);
        double chain = 1.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            CHECK(res.per_token_conditional[k] >= -1e-12);
            CHECK(res.per_token_conditional[k] <= 1.0 + 1e-9);
            chain *= res.per_token_conditional[k];
            CHECK(testutil::rel_diff(chain, res.per_prefix[k]) < 1e-9);
        }
    }
}

TEST_CASE("pair chart entries are bounded", "[prefix]") {
    const auto g = oracle::random_dense_grammar(4, 2, 61, 0.6);
    const auto w = oracle::sample_sentence(2, 6, 3);
    const auto res = fast_jl(w, g);
    REQUIRE(res.gamma.has_value());
    REQUIRE(res.delta.has_value());
    for (std::size_t i = 1; i <= w.size(); ++i) {
        for (std::size_t j = i; j <= w.size(); ++j) {
            for (std::size_t x = 0; x < g.num_nonterminals(); ++x) {
                for (std::size_t z = 0; z < g.num_nonterminals(); ++z) {
                    const double gv = res.gamma->at(i, j, x, z);
                    const double dv = res.delta->at(i, j, x, z);
                    CHECK(gv >= 0.0);
                    CHECK(gv <= 1.0 + 1e-12);
                    CHECK(dv >= 0.0);
                    CHECK(std::isfinite(dv));
                }
            }
        }
    }
}

TEST_CASE("a prefix with no left-corner lexical path scores zero", "[prefix]") {
    // 'b' can never start a string here; the weight is zero, not an error.
    const auto g = parse_grammar<ProbSemiring>(
        "S -> A B : 1.0\n"
        "A -> 'a' : 1.0\n"
        "B -> 'b' : 1.0\n");
    const auto res = fast_jl(g.tokenize("b"), g);
    CHECK(res.per_prefix[0] == 0.0);
    CHECK(res.per_token_conditional[0] == 0.0);

    // The zero-step left corner covers X = Y, so 'a' scores fully.
    const auto res2 = fast_jl(g.tokenize("a b"), g);
    CHECK(testutil::rel_diff(res2.per_prefix[0], 1.0) < 1e-12);
    CHECK(testutil::rel_diff(res2.per_prefix[1], 1.0) < 1e-12);
}

TEST_CASE("prefix errors", "[prefix]") {
    const auto g = parse_grammar<ProbSemiring>(testutil::kG1);
    const Sentence bad{5};
    CHECK_THROWS_AS(fast_jl(bad, g), UnknownTokenError);

    // jl needs the rule-expectation table.
    const auto lc = left_corner_expectations(g, ClosureMethod::inversion, false);
    const Sentence w{0};
    CHECK_THROWS_AS(jl(w, g, lc), Error);
}
