#pragma once

// CNF weighted CFGs: parsing from the line-based file format, programmatic
// construction, indexing, validation and the extinction-probability
// diagnostic. Grammars are immutable once built and safe to share across
// threads.
//
// File format (UTF-8):
//   # comment to end of line; blank lines ignored
//   @start SYMBOL              optional; default is the LHS of the first rule
//   X -> Y Z : 0.4             binary rule
//   X -> 'a' : 0.6             lexical rule; \' escapes a quote
//   S -> : 0.1                 empty RHS, allowed for the start symbol only
// Weights are decimal literals in the probability domain; each semiring
// converts at load time via from_prob.

#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wcfg/errors.hpp"
#include "wcfg/semiring.hpp"

namespace wcfg {

using TokenId = std::int32_t;
using Sentence = std::vector<TokenId>;

template <Semiring S>
struct BinaryRule {
    std::int32_t lhs;
    std::int32_t left;
    std::int32_t right;
    typename S::Value weight;
};

template <Semiring S>
struct LexicalRule {
    std::int32_t lhs;
    std::int32_t terminal;
    typename S::Value weight;
};

template <Semiring S>
struct LhsWeight {
    std::int32_t lhs;
    typename S::Value weight;
};

enum class RuleKind : std::uint8_t { binary, lexical, epsilon };

template <Semiring S>
class GrammarBuilder;

template <Semiring S>
class Grammar {
public:
    using Value = typename S::Value;

    std::size_t num_nonterminals() const { return nonterminals_.size(); }
    std::size_t num_terminals() const { return alphabet_.size(); }
    std::int32_t start() const { return start_; }
    const std::string& start_name() const { return nonterminals_[start_]; }

    const std::vector<std::string>& nonterminals() const { return nonterminals_; }
    const std::vector<std::string>& alphabet() const { return alphabet_; }
    const std::string& nonterminal_name(std::int32_t x) const { return nonterminals_[x]; }
    const std::string& terminal_name(std::int32_t t) const { return alphabet_[t]; }

    const std::vector<BinaryRule<S>>& binary_rules() const { return binary_; }
    const std::vector<LexicalRule<S>>& lexical_rules() const { return lexical_; }
    const std::optional<Value>& epsilon_weight() const { return epsilon_; }

    // (left, right) -> rules rewriting to that pair.
    std::span<const LhsWeight<S>> binary_with_rhs(std::int32_t left, std::int32_t right) const {
        const auto& v = by_rhs_[static_cast<std::size_t>(left) * nonterminals_.size() + right];
        return {v.data(), v.size()};
    }

    std::span<const LhsWeight<S>> lexical_with_terminal(std::int32_t t) const {
        const auto& v = lex_by_term_[t];
        return {v.data(), v.size()};
    }

    std::optional<std::int32_t> find_nonterminal(std::string_view name) const {
        auto it = nt_index_.find(std::string(name));
        if (it == nt_index_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::int32_t> find_terminal(std::string_view name) const {
        auto it = term_index_.find(std::string(name));
        if (it == term_index_.end()) return std::nullopt;
        return it->second;
    }

    // Whitespace-separated tokens; throws UnknownTokenError with the 1-based
    // position of the first token outside the alphabet.
    Sentence tokenize(std::string_view line) const {
        Sentence out;
        std::size_t pos = 0;
        std::size_t index = 0;
        while (pos < line.size()) {
            while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
            if (pos >= line.size()) break;
            std::size_t end = pos;
            while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
            std::string_view tok = line.substr(pos, end - pos);
            ++index;
            auto id = find_terminal(tok);
            if (!id) throw UnknownTokenError(index, std::string(tok));
            out.push_back(*id);
            pos = end;
        }
        return out;
    }

    // Emits the file format back out, rules in their original order, weights
    // in the probability domain. parse(serialize(g)) reproduces the indexed
    // structure.
    std::string serialize() const {
        std::string out = "@start " + start_name() + "\n";
        for (const auto& [kind, idx] : order_) {
            switch (kind) {
                case RuleKind::binary: {
                    const auto& r = binary_[idx];
                    out += nonterminals_[r.lhs] + " -> " + nonterminals_[r.left] + " " +
                           nonterminals_[r.right] + " : " + weight_text(r.weight) + "\n";
                    break;
                }
                case RuleKind::lexical: {
                    const auto& r = lexical_[idx];
                    out += nonterminals_[r.lhs] + " -> '" + escape_terminal(alphabet_[r.terminal]) +
                           "' : " + weight_text(r.weight) + "\n";
                    break;
                }
                case RuleKind::epsilon:
                    out += start_name() + " -> : " + weight_text(*epsilon_) + "\n";
                    break;
            }
        }
        return out;
    }

private:
    friend class GrammarBuilder<S>;
    Grammar() = default;

    static std::string weight_text(const Value& w) {
        return detail::format_real(S::to_prob(w), 17);
    }

    static std::string escape_terminal(const std::string& t) {
        std::string out;
        for (char c : t) {
            if (c == '\'') out += '\\';
            out += c;
        }
        return out;
    }

    std::vector<std::string> nonterminals_;
    std::vector<std::string> alphabet_;
    std::unordered_map<std::string, std::int32_t> nt_index_;
    std::unordered_map<std::string, std::int32_t> term_index_;
    std::int32_t start_ = 0;
    std::vector<BinaryRule<S>> binary_;
    std::vector<LexicalRule<S>> lexical_;
    std::optional<Value> epsilon_;
    std::vector<std::vector<LhsWeight<S>>> by_rhs_;
    std::vector<std::vector<LhsWeight<S>>> lex_by_term_;
    std::vector<std::pair<RuleKind, std::int32_t>> order_;
};

// Accumulates rules (with optional source line numbers for error messages)
// and produces an indexed Grammar. Nonterminal ids follow first appearance,
// which fixes the matrix ordering downstream.
template <Semiring S>
class GrammarBuilder {
public:
    using Value = typename S::Value;

    GrammarBuilder& start(std::string_view name, std::size_t line = 0) {
        if (start_name_) throw GrammarSyntaxError(line, "duplicate @start directive");
        start_name_ = std::string(name);
        start_line_ = line;
        return *this;
    }

    GrammarBuilder& binary(std::string_view lhs, std::string_view left, std::string_view right,
                           Value weight, std::size_t line = 0) {
        const auto a = nonterminal(lhs);
        const auto b = nonterminal(left);
        const auto c = nonterminal(right);
        if (!binary_seen_.insert({a, b, c}).second) {
            throw DuplicateRuleError(line, "duplicate rule " + std::string(lhs) + " -> " +
                                               std::string(left) + " " + std::string(right));
        }
        binary_.push_back({a, b, c, weight});
        order_.emplace_back(RuleKind::binary, static_cast<std::int32_t>(binary_.size() - 1));
        return *this;
    }

    GrammarBuilder& lexical(std::string_view lhs, std::string_view terminal, Value weight,
                            std::size_t line = 0) {
        const auto a = nonterminal(lhs);
        const auto t = intern(terminals_, term_index_, terminal);
        if (!lexical_seen_.insert({a, t}).second) {
            throw DuplicateRuleError(line, "duplicate rule " + std::string(lhs) + " -> '" +
                                               std::string(terminal) + "'");
        }
        lexical_.push_back({a, t, weight});
        lexical_lines_.push_back(line);
        order_.emplace_back(RuleKind::lexical, static_cast<std::int32_t>(lexical_.size() - 1));
        return *this;
    }

    GrammarBuilder& epsilon(std::string_view lhs, Value weight, std::size_t line = 0) {
        if (epsilon_) throw DuplicateRuleError(line, "duplicate empty-RHS rule");
        nonterminal(lhs);
        epsilon_lhs_ = std::string(lhs);
        epsilon_ = weight;
        epsilon_line_ = line;
        order_.emplace_back(RuleKind::epsilon, 0);
        return *this;
    }

    Grammar<S> build() {
        if (order_.empty()) throw GrammarSyntaxError(0, "grammar has no rules");

        Grammar<S> g;
        g.nonterminals_ = nonterminals_;
        g.alphabet_ = terminals_;
        g.nt_index_ = nt_index_;
        g.term_index_ = term_index_;
        g.binary_ = binary_;
        g.lexical_ = lexical_;
        g.epsilon_ = epsilon_;
        g.order_ = order_;

        if (start_name_) {
            auto it = nt_index_.find(*start_name_);
            if (it == nt_index_.end()) {
                throw UnknownStartSymbolError(start_line_,
                                              "start symbol '" + *start_name_ +
                                                  "' does not occur in any rule");
            }
            g.start_ = it->second;
        } else {
            g.start_ = 0;  // LHS of the first rule is interned first
        }

        if (epsilon_ && epsilon_lhs_ != g.start_name()) {
            throw GrammarSyntaxError(epsilon_line_,
                                     "empty RHS is only allowed for the start symbol (have '" +
                                         epsilon_lhs_ + "', start is '" + g.start_name() + "')");
        }

        for (std::size_t i = 0; i < terminals_.size(); ++i) {
            if (nt_index_.count(terminals_[i])) {
                throw GrammarSyntaxError(lexical_line_of_terminal(static_cast<std::int32_t>(i)),
                                         "terminal '" + terminals_[i] +
                                             "' collides with a nonterminal name");
            }
        }

        g.by_rhs_.assign(nonterminals_.size() * nonterminals_.size(), {});
        for (const auto& r : binary_) {
            g.by_rhs_[static_cast<std::size_t>(r.left) * nonterminals_.size() + r.right].push_back(
                {r.lhs, r.weight});
        }
        g.lex_by_term_.assign(terminals_.size(), {});
        for (const auto& r : lexical_) g.lex_by_term_[r.terminal].push_back({r.lhs, r.weight});
        return g;
    }

private:
    std::int32_t nonterminal(std::string_view name) { return intern(nonterminals_, nt_index_, name); }

    static std::int32_t intern(std::vector<std::string>& names,
                               std::unordered_map<std::string, std::int32_t>& index,
                               std::string_view name) {
        auto it = index.find(std::string(name));
        if (it != index.end()) return it->second;
        const auto id = static_cast<std::int32_t>(names.size());
        names.emplace_back(name);
        index.emplace(name, id);
        return id;
    }

    std::size_t lexical_line_of_terminal(std::int32_t t) const {
        for (std::size_t i = 0; i < lexical_.size(); ++i)
            if (lexical_[i].terminal == t) return lexical_lines_[i];
        return 0;
    }

    std::vector<std::string> nonterminals_;
    std::vector<std::string> terminals_;
    std::unordered_map<std::string, std::int32_t> nt_index_;
    std::unordered_map<std::string, std::int32_t> term_index_;
    std::optional<std::string> start_name_;
    std::size_t start_line_ = 0;
    std::vector<BinaryRule<S>> binary_;
    std::vector<LexicalRule<S>> lexical_;
    std::vector<std::size_t> lexical_lines_;
    std::set<std::tuple<std::int32_t, std::int32_t, std::int32_t>> binary_seen_;
    std::set<std::pair<std::int32_t, std::int32_t>> lexical_seen_;
    std::optional<Value> epsilon_;
    std::string epsilon_lhs_;
    std::size_t epsilon_line_ = 0;
    std::vector<std::pair<RuleKind, std::int32_t>> order_;
};

namespace detail {

// Drops an unquoted '#' and everything after it; quote state honours \'.
inline std::string_view strip_comment(std::string_view line) {
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quote) {
            if (c == '\\' && i + 1 < line.size() && line[i + 1] == '\'') ++i;
            else if (c == '\'') in_quote = false;
        } else if (c == '\'') {
            in_quote = true;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

struct LineScanner {
    std::string_view s;
    std::size_t pos = 0;
    std::size_t line_no;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() const { return s[pos]; }

    // Bare symbol: runs to whitespace, quote or colon.
    std::string_view symbol() {
        skip_ws();
        const std::size_t begin = pos;
        while (pos < s.size()) {
            const char c = s[pos];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '\'' || c == ':') break;
            ++pos;
        }
        return s.substr(begin, pos - begin);
    }

    std::string quoted_terminal() {
        ++pos;  // opening quote
        std::string out;
        while (pos < s.size()) {
            const char c = s[pos];
            if (c == '\\' && pos + 1 < s.size() && s[pos + 1] == '\'') {
                out += '\'';
                pos += 2;
            } else if (c == '\'') {
                ++pos;
                return out;
            } else {
                out += c;
                ++pos;
            }
        }
        throw GrammarSyntaxError(line_no, "unterminated quoted terminal");
    }

    double weight() {
        skip_ws();
        const std::string rest(trim(s.substr(pos)));
        if (rest.empty()) throw GrammarSyntaxError(line_no, "missing weight after ':'");
        char* end = nullptr;
        const double w = std::strtod(rest.c_str(), &end);
        if (end != rest.c_str() + rest.size()) {
            throw GrammarSyntaxError(line_no, "malformed weight '" + rest + "'");
        }
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw GrammarSyntaxError(line_no, "weight must be finite and non-negative, got '" +
                                                  rest + "'");
        }
        pos = s.size();
        return w;
    }
};

}  // namespace detail

template <Semiring S>
Grammar<S> parse_grammar(std::string_view text) {
    GrammarBuilder<S> builder;
    std::size_t line_no = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const std::size_t nl = text.find('\n', begin);
        std::string_view raw = text.substr(begin, nl == std::string_view::npos ? text.size() - begin
                                                                               : nl - begin);
        begin = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        const std::string_view line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;

        detail::LineScanner scan{line, 0, line_no};
        if (line.front() == '@') {
            const auto directive = scan.symbol();
            if (directive != "@start") {
                throw GrammarSyntaxError(line_no, "unknown directive '" + std::string(directive) + "'");
            }
            const auto name = scan.symbol();
            if (name.empty() || !scan.done()) {
                throw GrammarSyntaxError(line_no, "@start expects exactly one symbol");
            }
            builder.start(name, line_no);
            continue;
        }

        const auto lhs = scan.symbol();
        if (lhs.empty()) throw GrammarSyntaxError(line_no, "rule must begin with a nonterminal");
        if (scan.symbol() != "->") throw GrammarSyntaxError(line_no, "expected '->' after LHS");

        std::vector<std::string> bare;
        std::optional<std::string> terminal;
        while (true) {
            scan.skip_ws();
            if (scan.pos >= scan.s.size()) {
                throw GrammarSyntaxError(line_no, "expected ':' before the rule weight");
            }
            const char c = scan.peek();
            if (c == ':') {
                ++scan.pos;
                break;
            }
            if (c == '\'') {
                if (terminal) throw GrammarSyntaxError(line_no, "more than one terminal on the RHS");
                terminal = scan.quoted_terminal();
            } else {
                bare.push_back(std::string(scan.symbol()));
            }
        }
        const double w = scan.weight();

        if (terminal && bare.empty()) {
            builder.lexical(lhs, *terminal, S::from_prob(w), line_no);
        } else if (!terminal && bare.size() == 2) {
            builder.binary(lhs, bare[0], bare[1], S::from_prob(w), line_no);
        } else if (!terminal && bare.empty()) {
            builder.epsilon(lhs, S::from_prob(w), line_no);
        } else {
            throw GrammarSyntaxError(line_no,
                                     "RHS must be two nonterminals, one quoted terminal, or empty");
        }
    }
    return builder.build();
}

// Extinction probability per nonterminal: the chance a derivation from X
// terminates. Least fixed point of q_X = sum_bin w*q_Y*q_Z + sum_lex w,
// iterated from zero. A grammar is tight when q_start reaches 1.
inline std::vector<double> tightness_estimate(const Grammar<ProbSemiring>& g) {
    const std::size_t n = g.num_nonterminals();
    std::vector<double> q(n, 0.0);
    std::vector<double> next(n, 0.0);
    for (int iter = 0; iter < 10000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (const auto& r : g.binary_rules()) next[r.lhs] += r.weight * q[r.left] * q[r.right];
        for (const auto& r : g.lexical_rules()) next[r.lhs] += r.weight;
        if (g.epsilon_weight()) next[g.start()] += *g.epsilon_weight();
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::fabs(next[i] - q[i]));
        q.swap(next);
        if (delta < 1e-12) break;
    }
    return q;
}

struct ValidationCheck {
    bool passed = true;
    std::string detail;
};

struct ValidationReport {
    ValidationCheck cnf_shape;
    ValidationCheck local_normalization;
    ValidationCheck trim;
    std::vector<double> extinction;  // probability instance only
    bool tight = false;              // meaningful when extinction is non-empty
    bool hard_checks_passed() const {
        return cnf_shape.passed && local_normalization.passed && trim.passed;
    }
};

template <Semiring S>
ValidationReport validate(const Grammar<S>& g) {
    ValidationReport rep;
    rep.cnf_shape.detail = "rule shapes are enforced at construction time";

    // Local normalization: the weights of each LHS must sum to the semiring
    // one (tolerance 1e-9 for the floating instances).
    const std::size_t n = g.num_nonterminals();
    std::vector<typename S::Value> sums(n, S::zero());
    std::vector<bool> has_rule(n, false);
    for (const auto& r : g.binary_rules()) {
        sums[r.lhs] = S::add(sums[r.lhs], r.weight);
        has_rule[r.lhs] = true;
    }
    for (const auto& r : g.lexical_rules()) {
        sums[r.lhs] = S::add(sums[r.lhs], r.weight);
        has_rule[r.lhs] = true;
    }
    if (g.epsilon_weight()) {
        sums[g.start()] = S::add(sums[g.start()], *g.epsilon_weight());
        has_rule[g.start()] = true;
    }
    for (std::size_t x = 0; x < n; ++x) {
        if (!has_rule[x]) continue;
        if (!S::eq(sums[x], S::one(), 1e-9)) {
            rep.local_normalization.passed = false;
            if (!rep.local_normalization.detail.empty()) rep.local_normalization.detail += "; ";
            rep.local_normalization.detail += g.nonterminal_name(static_cast<std::int32_t>(x)) +
                                              " sums to " + S::format(sums[x], 12);
        }
    }

    // Trim: every nonterminal reachable from the start symbol.
    std::vector<bool> reach(n, false);
    std::vector<std::int32_t> stack = {g.start()};
    reach[g.start()] = true;
    while (!stack.empty()) {
        const auto x = stack.back();
        stack.pop_back();
        for (const auto& r : g.binary_rules()) {
            if (r.lhs != x) continue;
            for (auto y : {r.left, r.right}) {
                if (!reach[y]) {
                    reach[y] = true;
                    stack.push_back(y);
                }
            }
        }
    }
    for (std::size_t x = 0; x < n; ++x) {
        if (!reach[x]) {
            rep.trim.passed = false;
            if (!rep.trim.detail.empty()) rep.trim.detail += ", ";
            rep.trim.detail += g.nonterminal_name(static_cast<std::int32_t>(x));
        }
    }
    if (!rep.trim.passed) rep.trim.detail = "unreachable: " + rep.trim.detail;

    if constexpr (std::is_same_v<S, ProbSemiring>) {
        rep.extinction = tightness_estimate(g);
        rep.tight = rep.extinction[g.start()] > 1.0 - 1e-6;
    }
    return rep;
}

}  // namespace wcfg
