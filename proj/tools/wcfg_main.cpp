// Command-line front end: validate grammars, score sentence prefixes, run the
// brute-force cross-checks, and produce scaling benchmarks as CSV.

#include <atomic>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "wcfg/wcfg.hpp"

namespace {

using namespace wcfg;

struct Options {
    std::string grammar_path;
    std::string input_path;  // empty: standard input
    std::string algo;  // resolved after parsing: fastjl, or its semiring variant
    std::string semiring = "prob";
    std::string output = "csv";
    int precision = 12;
    int jobs = 1;
    std::uint64_t seed = 1;
    int seed_count = 1;
    int max_len = 16;
    bool left_corner = false;

    std::vector<int> nt_values{4, 8, 16};
    std::vector<int> len_values{16};
    std::vector<std::string> algos{"jl", "fast_jl"};
    int repeats = 5;
    int num_terminals = 10;
    double lexical_mass = 0.6;
};

std::string field_sep(const Options& o) {
    if (o.output == "tsv") return "\t";
    if (o.output == "human") return "  ";
    return ",";
}

std::string csv_escape(const std::string& s, const std::string& sep) {
    if (sep == "," && (s.find(',') != std::string::npos || s.find('"') != std::string::npos)) {
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        out += '"';
        return out;
    }
    return s;
}

std::string join_row(const std::vector<std::string>& fields, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += sep;
        out += csv_escape(fields[i], sep);
    }
    return out;
}

int fail(int code, const std::string& msg) {
    std::cerr << "wcfg: " << msg << "\n";
    return code;
}

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> read_input_lines(const Options& o) {
    std::vector<std::string> lines;
    std::string line;
    if (o.input_path.empty()) {
        while (std::getline(std::cin, line)) lines.push_back(line);
    } else {
        std::ifstream in(o.input_path);
        if (!in) throw Error("cannot open input file '" + o.input_path + "'");
        while (std::getline(in, line)) lines.push_back(line);
    }
    return lines;
}

template <Semiring S>
Grammar<S> load_grammar(const Options& o) {
    auto text = read_file(o.grammar_path);
    if (!text) throw GrammarSyntaxError(0, "cannot open grammar file '" + o.grammar_path + "'");
    return parse_grammar<S>(*text);
}

// ---------------------------------------------------------------- check ----

template <Semiring S>
int run_check(const Options& o) {
    std::string text;
    if (auto t = read_file(o.grammar_path)) {
        text = *t;
    } else {
        return fail(2, "cannot open grammar file '" + o.grammar_path + "'");
    }

    const Grammar<S> g = parse_grammar<S>(text);
    const auto rep = validate(g);

    const auto print_check = [](const char* name, const ValidationCheck& c) {
        std::cout << name << ": " << (c.passed ? "PASS" : "FAIL");
        if (!c.passed && !c.detail.empty()) std::cout << " (" << c.detail << ")";
        std::cout << "\n";
    };
    std::cout << "grammar: " << o.grammar_path << "\n";
    std::cout << "nonterminals: " << g.num_nonterminals() << ", terminals: " << g.num_terminals()
              << ", binary rules: " << g.binary_rules().size()
              << ", lexical rules: " << g.lexical_rules().size() << "\n";
    print_check("cnf_shape", rep.cnf_shape);
    print_check("local_normalization", rep.local_normalization);
    print_check("trim", rep.trim);

    // The tightness diagnostic always reads the file in the probability
    // domain, whatever semiring the checks above ran in.
    const auto gp = parse_grammar<ProbSemiring>(text);
    const auto q = tightness_estimate(gp);
    std::cout << "extinction:";
    for (std::size_t x = 0; x < gp.num_nonterminals(); ++x) {
        std::cout << " " << gp.nonterminal_name(static_cast<std::int32_t>(x)) << "="
                  << detail::format_real(q[x], o.precision);
    }
    std::cout << "\n";
    const bool tight = q[gp.start()] > 1.0 - 1e-6;
    std::cout << "tight: " << (tight ? "yes" : "NO (prefix weights may diverge)") << "\n";

    if (o.left_corner) {
        try {
            const auto lc = left_corner_expectations<S>(g, default_closure_method<S>(), false);
            std::cout << "left-corner expectations E_lc(col|row):\n";
            for (std::size_t i = 0; i < g.num_nonterminals(); ++i) {
                std::cout << "  " << g.nonterminal_name(static_cast<std::int32_t>(i)) << ":";
                for (std::size_t j = 0; j < g.num_nonterminals(); ++j) {
                    std::cout << " " << S::format(lc.e_lc(i, j), o.precision);
                }
                std::cout << "\n";
            }
        } catch (const Error& e) {
            std::cout << "left-corner expectations unavailable: " << e.what() << "\n";
        }
    }
    return rep.hard_checks_passed() ? 0 : 1;
}

// ---------------------------------------------------------------- score ----

template <Semiring S>
std::vector<std::string> score_line(const std::string& line, std::size_t id, const Options& o,
                                    const Grammar<S>& g, const LeftCornerTables<S>* tables,
                                    bool* ok) {
    const std::string sep = field_sep(o);
    std::vector<std::string> rows;
    *ok = false;
    Sentence w;
    try {
        w = g.tokenize(line);
        if (w.empty()) throw Error("empty sentence");
        std::vector<typename S::Value> values;
        std::vector<typename S::Value> conditionals;
        if (o.algo == "cky") {
            const auto beta = cky<S>(w, g);
            for (std::size_t k = 1; k <= w.size(); ++k) values.push_back(beta.at(1, k, g.start()));
        } else {
            PrefixResult<S> res = [&] {
                if constexpr (std::is_same_v<S, ProbSemiring>) {
                    if (o.algo == "jl") return jl(w, g, *tables);
                    if (o.algo == "fastjl") return fast_jl(w, g, *tables);
                }
                return fast_semiring_jl<S>(w, g, *tables);
            }();
            values = res.per_prefix;
            conditionals = res.per_token_conditional;
        }
        for (std::size_t k = 1; k <= w.size(); ++k) {
            std::string token(g.terminal_name(w[k - 1]));
            std::string cond =
                k <= conditionals.size() ? S::format(conditionals[k - 1], o.precision) : "";
            rows.push_back(join_row({std::to_string(id), std::to_string(k), token,
                                     S::format(values[k - 1], o.precision), cond, "ok"},
                                    sep));
        }
        *ok = true;
    } catch (const UnknownTokenError& e) {
        rows.assign(1, join_row({std::to_string(id), std::to_string(e.position), e.token, "", "",
                                 "ERROR: " + std::string(e.what())},
                                sep));
    } catch (const std::exception& e) {
        rows.assign(1, join_row({std::to_string(id), "", "", "", "",
                                 "ERROR: " + std::string(e.what())},
                                sep));
    }
    return rows;
}

template <Semiring S>
int run_score(Options o) {
    if (o.algo.empty()) {
        o.algo = std::is_same_v<S, ProbSemiring> ? "fastjl" : "semiring-fastjl";
    }
    if ((o.algo == "jl" || o.algo == "fastjl") && !std::is_same_v<S, ProbSemiring>) {
        return fail(2, "--algo " + o.algo + " requires --semiring prob (use semiring-fastjl)");
    }
    if (o.algo != "cky" && o.algo != "jl" && o.algo != "fastjl" && o.algo != "semiring-fastjl") {
        return fail(2, "unknown --algo '" + o.algo + "'");
    }

    Grammar<S> g = load_grammar<S>(o);
    const auto rep = validate(g);
    if (!rep.hard_checks_passed()) {
        std::cerr << "wcfg: warning: grammar failed validation";
        if (!rep.local_normalization.passed)
            std::cerr << " [local_normalization: " << rep.local_normalization.detail << "]";
        if (!rep.trim.passed) std::cerr << " [trim: " << rep.trim.detail << "]";
        std::cerr << "\n";
    }

    LeftCornerTables<S> tables{SquareMatrix<S>(0), SquareMatrix<S>(0), {}, {}, {}};
    if (o.algo != "cky") {
        try {
            const auto method = o.algo == "semiring-fastjl" ? ClosureMethod::lehmann
                                                            : default_closure_method<S>();
            tables = left_corner_expectations<S>(g, method, o.algo == "jl");
        } catch (const Error& e) {
            return fail(1, std::string("left-corner precomputation failed: ") + e.what());
        }
    }

    const std::string sep = field_sep(o);
    std::cout << join_row(
                     {"sentence_id", "k", "token", "prefix_value", "conditional_value", "status"},
                     sep)
              << "\n";

    std::size_t lines_seen = 0;
    std::size_t successes = 0;
    if (o.jobs <= 1) {
        // Stream: each line's rows go out as soon as they are computed.
        const auto process = [&](const std::string& line) {
            ++lines_seen;
            bool ok = false;
            for (const auto& row : score_line<S>(line, lines_seen, o, g, &tables, &ok)) {
                std::cout << row << "\n";
            }
            if (ok) ++successes;
        };
        std::string line;
        if (o.input_path.empty()) {
            while (std::getline(std::cin, line)) process(line);
        } else {
            std::ifstream in(o.input_path);
            if (!in) throw Error("cannot open input file '" + o.input_path + "'");
            while (std::getline(in, line)) process(line);
        }
    } else {
        // Workers pull lines by index; rows are buffered and emitted in
        // input order, so the output is identical to the streaming path.
        const auto lines = read_input_lines(o);
        lines_seen = lines.size();
        std::vector<std::vector<std::string>> results(lines.size());
        std::atomic<std::size_t> next{0};
        std::atomic<std::size_t> ok_count{0};
        const auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= lines.size()) return;
                bool ok = false;
                results[i] = score_line<S>(lines[i], i + 1, o, g, &tables, &ok);
                if (ok) ok_count.fetch_add(1);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < o.jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        successes = ok_count.load();
        for (const auto& rows : results) {
            for (const auto& row : rows) std::cout << row << "\n";
        }
    }
    return lines_seen == 0 || successes > 0 ? 0 : 1;
}

// --------------------------------------------------------------- oracle ----

int run_oracle(const Options& o) {
    const auto g = load_grammar<ProbSemiring>(o);
    const auto tables = left_corner_expectations(g, ClosureMethod::inversion, false);
    const auto lines = read_input_lines(o);
    const std::string sep = field_sep(o);
    std::cout << join_row({"sentence_id", "k", "oracle_lower", "oracle_upper", "prefix_value",
                           "status"},
                          sep)
              << "\n";
    bool all_ok = true;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        Sentence w;
        try {
            w = g.tokenize(lines[i]);
            if (w.empty()) continue;
        } catch (const UnknownTokenError& e) {
            std::cout << join_row({std::to_string(i + 1), std::to_string(e.position), "", "", "",
                                   "ERROR: " + std::string(e.what())},
                                  sep)
                      << "\n";
            all_ok = false;
            continue;
        }
        const auto res = fast_jl(w, g, tables);
        for (std::size_t k = 1; k <= w.size(); ++k) {
            const std::span<const TokenId> prefix(w.data(), k);
            const auto br =
                oracle::prefix_oracle(g, prefix, static_cast<std::size_t>(o.max_len));
            const double v = res.per_prefix[k - 1];
            const bool inside = v >= br.lower - 1e-12 && v <= br.lower + br.tail_bound + 1e-12;
            if (!inside) all_ok = false;
            std::cout << join_row({std::to_string(i + 1), std::to_string(k),
                                   detail::format_real(br.lower, o.precision),
                                   detail::format_real(br.lower + br.tail_bound, o.precision),
                                   detail::format_real(v, o.precision),
                                   inside ? "ok" : "OUTSIDE"},
                                  sep)
                      << "\n";
        }
    }
    return all_ok ? 0 : 1;
}

// ---------------------------------------------------------------- bench ----

int run_bench(const Options& o) {
    bench::GridConfig cfg;
    cfg.nt_values = o.nt_values;
    cfg.len_values = o.len_values;
    for (int s = 0; s < o.seed_count; ++s) cfg.seeds.push_back(o.seed + static_cast<std::uint64_t>(s));
    for (const auto& name : o.algos) {
        const auto a = bench::parse_algo(name);
        if (!a) return fail(2, "unknown benchmark algorithm '" + name + "'");
        cfg.algos.push_back(*a);
    }
    cfg.repeats = o.repeats;
    cfg.num_terminals = o.num_terminals;
    cfg.lexical_mass = o.lexical_mass;
    const auto records = bench::run_grid(cfg);
    bench::write_csv(std::cout, records, o.output == "tsv" ? '\t' : ',');
    return 0;
}

// ----------------------------------------------------------------- main ----

template <typename F>
int with_semiring(const std::string& name, F&& f) {
    if (name == "prob") return f(ProbSemiring{});
    if (name == "log") return f(LogSemiring{});
    if (name == "viterbi") return f(ViterbiSemiring{});
    if (name == "boolean") return f(BooleanSemiring{});
    return fail(2, "unknown semiring '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"prefix probabilities of strings under weighted CFGs in CNF"};
    app.require_subcommand(1);

    const auto add_common = [&](CLI::App* cmd, bool needs_grammar) {
        if (needs_grammar) {
            cmd->add_option("--grammar,-g", o.grammar_path, "grammar file")->required();
        }
        cmd->add_option("--semiring", o.semiring, "prob|log|viterbi|boolean")
            ->default_val("prob");
        cmd->add_option("--output", o.output, "csv|tsv|human")->default_val("csv");
        cmd->add_option("--precision", o.precision, "significant digits")->default_val(12);
    };

    auto* check = app.add_subcommand("check", "validate a grammar and report diagnostics");
    add_common(check, true);
    check->add_flag("--left-corner", o.left_corner, "print the E_lc matrix");

    auto* score = app.add_subcommand("score", "all-prefix scores for each input sentence");
    add_common(score, true);
    score->add_option("--input,-i,input", o.input_path, "sentence file (default: stdin)");
    score->add_option("--algo", o.algo,
                      "cky|jl|fastjl|semiring-fastjl (default: fastjl, or semiring-fastjl "
                      "outside the probability semiring)");
    score->add_option("--jobs", o.jobs, "worker threads over input lines")->default_val(1);

    auto* orc = app.add_subcommand("oracle", "bracket prefix scores by truncated enumeration");
    add_common(orc, true);
    orc->add_option("--input,-i,input", o.input_path, "sentence file (default: stdin)");
    orc->add_option("--max-len", o.max_len, "truncation length for the oracle sums")
        ->default_val(16);

    auto* bch = app.add_subcommand("bench", "time the algorithms over a grammar/length grid");
    bch->add_option("--output", o.output, "csv|tsv")->default_val("csv");
    bch->add_option("--nt-values", o.nt_values, "nonterminal counts")
        ->delimiter(',')
        ->default_str("4,8,16");
    bch->add_option("--len-values", o.len_values, "sentence lengths")
        ->delimiter(',')
        ->default_str("16");
    bch->add_option("--algos", o.algos, "algorithms to time")
        ->delimiter(',')
        ->default_str("jl,fast_jl");
    bch->add_option("--repeats", o.repeats, "runs per timing (median)")->default_val(5);
    bch->add_option("--seed", o.seed, "base grammar seed")->default_val(1);
    bch->add_option("--seed-count", o.seed_count, "grammars per grid point")->default_val(1);
    bch->add_option("--terminals", o.num_terminals, "alphabet size")->default_val(10);
    bch->add_option("--lexical-mass", o.lexical_mass, "per-LHS lexical mass")->default_val(0.6);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(check)) {
            return with_semiring(o.semiring, [&](auto tag) {
                return run_check<decltype(tag)>(o);
            });
        }
        if (app.got_subcommand(score)) {
            return with_semiring(o.semiring, [&](auto tag) {
                return run_score<decltype(tag)>(o);
            });
        }
        if (app.got_subcommand(orc)) return run_oracle(o);
        if (app.got_subcommand(bch)) return run_bench(o);
    } catch (const GrammarSyntaxError& e) {
        return fail(2, e.what());
    } catch (const Error& e) {
        return fail(1, e.what());
    } catch (const std::exception& e) {
        return fail(2, e.what());
    }
    return 2;
}
