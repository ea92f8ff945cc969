#pragma once

// Scaling harness. Times the per-sentence chart work separately from the
// left-corner precomputation (the rule-expectation table is what makes the
// baseline's precompute quartic in |N|, so it must not be hidden inside the
// sentence loop), takes the median over repeats, and cross-checks that every
// algorithm at a grid point produced the same numbers. Strictly
// single-threaded.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wcfg/chart.hpp"
#include "wcfg/errors.hpp"
#include "wcfg/grammar.hpp"
#include "wcfg/inside.hpp"
#include "wcfg/leftcorner.hpp"
#include "wcfg/oracle.hpp"
#include "wcfg/prefix.hpp"
#include "wcfg/semiring.hpp"

namespace wcfg::bench {

enum class Algo { cky, cky_factored, jl, fast_jl, fast_semiring_jl };

constexpr std::string_view algo_name(Algo a) {
    switch (a) {
        case Algo::cky: return "cky";
        case Algo::cky_factored: return "cky_factored";
        case Algo::jl: return "jl";
        case Algo::fast_jl: return "fast_jl";
        case Algo::fast_semiring_jl: return "fast_semiring_jl";
    }
    return "?";
}

inline std::optional<Algo> parse_algo(std::string_view s) {
    for (Algo a : {Algo::cky, Algo::cky_factored, Algo::jl, Algo::fast_jl, Algo::fast_semiring_jl}) {
        if (s == algo_name(a)) return a;
    }
    return std::nullopt;
}

struct BenchRecord {
    Algo algo;
    int num_nt;
    int sentence_len;
    std::uint64_t seed;
    int repeats;
    std::uint64_t precompute_ns;    // median over repeats; 0 for the inside-only algorithms
    std::uint64_t per_sentence_ns;  // median over repeats
};

struct GridConfig {
    std::vector<int> nt_values;
    std::vector<int> len_values;
    std::vector<std::uint64_t> seeds;
    std::vector<Algo> algos;
    int repeats = 5;
    int num_terminals = 10;
    double lexical_mass = 0.6;
    bool verify = true;  // compare chart outputs across the timed algorithms
};

namespace detail {

inline std::uint64_t median_ns(std::vector<std::uint64_t> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const std::uint64_t m = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
    return std::max<std::uint64_t>(m, 1);  // log-log fits cannot take a zero
}

template <typename F>
std::uint64_t time_once_ns(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
}

inline bool rel_close(double a, double b, double tol) {
    const double diff = std::fabs(a - b);
    return diff <= tol * std::max(std::fabs(a), std::fabs(b)) || diff < 1e-300;
}

// Upper-triangle cells only; the storage below the diagonal is never written.
inline std::vector<double> flatten_chart(const Chart<ProbSemiring>& c) {
    std::vector<double> out;
    for (std::size_t i = 1; i <= c.length(); ++i) {
        for (std::size_t k = i; k <= c.length(); ++k) {
            for (std::size_t x = 0; x < c.num_symbols(); ++x) out.push_back(c.at(i, k, x));
        }
    }
    return out;
}

}  // namespace detail

inline bool values_agree(const std::vector<double>& a, const std::vector<double>& b,
                         double tol = 1e-9) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!detail::rel_close(a[i], b[i], tol)) return false;
    }
    return true;
}

inline std::vector<BenchRecord> run_grid(const GridConfig& cfg) {
    std::vector<BenchRecord> records;
    if (cfg.algos.empty()) return records;
    const int repeats = std::max(cfg.repeats, 5);

    for (int nt : cfg.nt_values) {
        for (int len : cfg.len_values) {
            for (std::uint64_t seed : cfg.seeds) {
                const auto g =
                    oracle::random_dense_grammar(nt, cfg.num_terminals, seed, cfg.lexical_mass);
                const auto w = oracle::sample_sentence(
                    cfg.num_terminals, static_cast<std::size_t>(len),
                    seed + 0x9e3779b9ull * static_cast<std::uint64_t>(len));

                std::vector<double> ref_beta;    // full inside chart of the first inside algo
                std::vector<double> ref_prefix;  // full prefix chart of the first prefix algo

                for (Algo algo : cfg.algos) {
                    BenchRecord rec{algo, nt, len, seed, repeats, 0, 0};
                    std::vector<std::uint64_t> pre_ns, run_ns;
                    std::vector<double> beta_flat, prefix_flat;

                    const bool needs_tables = algo == Algo::jl || algo == Algo::fast_jl ||
                                              algo == Algo::fast_semiring_jl;
                    LeftCornerTables<ProbSemiring> tables{SquareMatrix<ProbSemiring>(0),
                                                          SquareMatrix<ProbSemiring>(0),
                                                          {}, {}, {}};
                    if (needs_tables) {
                        const auto method = algo == Algo::fast_semiring_jl
                                                ? ClosureMethod::lehmann
                                                : ClosureMethod::inversion;
                        const bool rule_table = algo == Algo::jl;
                        for (int r = 0; r < repeats; ++r) {
                            pre_ns.push_back(detail::time_once_ns([&] {
                                tables = left_corner_expectations(g, method, rule_table);
                            }));
                        }
                        rec.precompute_ns = detail::median_ns(pre_ns);
                    }

                    for (int r = 0; r < repeats; ++r) {
                        switch (algo) {
                            case Algo::cky: {
                                std::optional<Chart<ProbSemiring>> beta;
                                run_ns.push_back(detail::time_once_ns([&] { beta = cky(w, g); }));
                                if (r == repeats - 1) beta_flat = detail::flatten_chart(*beta);
                                break;
                            }
                            case Algo::cky_factored: {
                                std::optional<FactoredInside<ProbSemiring>> f;
                                run_ns.push_back(
                                    detail::time_once_ns([&] { f = cky_factored(w, g); }));
                                if (r == repeats - 1) beta_flat = detail::flatten_chart(f->beta);
                                break;
                            }
                            case Algo::jl: {
                                std::optional<PrefixResult<ProbSemiring>> p;
                                run_ns.push_back(
                                    detail::time_once_ns([&] { p = jl(w, g, tables); }));
                                if (r == repeats - 1) prefix_flat = detail::flatten_chart(p->chart);
                                break;
                            }
                            case Algo::fast_jl: {
                                std::optional<PrefixResult<ProbSemiring>> p;
                                run_ns.push_back(
                                    detail::time_once_ns([&] { p = fast_jl(w, g, tables); }));
                                if (r == repeats - 1) prefix_flat = detail::flatten_chart(p->chart);
                                break;
                            }
                            case Algo::fast_semiring_jl: {
                                std::optional<PrefixResult<ProbSemiring>> p;
                                run_ns.push_back(detail::time_once_ns(
                                    [&] { p = fast_semiring_jl<ProbSemiring>(w, g, tables); }));
                                if (r == repeats - 1) prefix_flat = detail::flatten_chart(p->chart);
                                break;
                            }
                        }
                    }
                    rec.per_sentence_ns = detail::median_ns(run_ns);
                    records.push_back(rec);

                    if (cfg.verify) {
                        if (!beta_flat.empty()) {
                            if (ref_beta.empty()) {
                                ref_beta = std::move(beta_flat);
                            } else if (!values_agree(ref_beta, beta_flat)) {
                                throw Error("bench: inside charts disagree at nt=" +
                                            std::to_string(nt) + " len=" + std::to_string(len) +
                                            " seed=" + std::to_string(seed));
                            }
                        }
                        if (!prefix_flat.empty()) {
                            if (ref_prefix.empty()) {
                                ref_prefix = std::move(prefix_flat);
                            } else if (!values_agree(ref_prefix, prefix_flat)) {
                                throw Error("bench: prefix charts disagree at nt=" +
                                            std::to_string(nt) + " len=" + std::to_string(len) +
                                            " seed=" + std::to_string(seed));
                            }
                        }
                    }
                }
            }
        }
    }
    return records;
}

enum class Axis { nt, len };

// Least-squares slope of log(per-sentence time) against log(axis value), one
// slope per algorithm present in the records. The off axis must be held
// fixed and at least four distinct axis values are required.
inline std::vector<std::pair<Algo, double>> fit_exponents(std::span<const BenchRecord> records,
                                                          Axis axis) {
    std::vector<std::pair<Algo, double>> out;
    for (Algo algo : {Algo::cky, Algo::cky_factored, Algo::jl, Algo::fast_jl,
                      Algo::fast_semiring_jl}) {
        std::vector<double> xs, ys;
        std::vector<int> axis_values, off_values;
        for (const auto& r : records) {
            if (r.algo != algo) continue;
            const int x = axis == Axis::nt ? r.num_nt : r.sentence_len;
            const int off = axis == Axis::nt ? r.sentence_len : r.num_nt;
            xs.push_back(std::log(static_cast<double>(x)));
            ys.push_back(std::log(static_cast<double>(r.per_sentence_ns)));
            axis_values.push_back(x);
            off_values.push_back(off);
        }
        if (xs.empty()) continue;

        std::sort(axis_values.begin(), axis_values.end());
        axis_values.erase(std::unique(axis_values.begin(), axis_values.end()), axis_values.end());
        std::sort(off_values.begin(), off_values.end());
        off_values.erase(std::unique(off_values.begin(), off_values.end()), off_values.end());
        if (axis_values.size() < 4) {
            throw InsufficientDataError("fit_exponents: need >= 4 distinct axis values for " +
                                        std::string(algo_name(algo)) + ", have " +
                                        std::to_string(axis_values.size()));
        }
        if (off_values.size() != 1) {
            throw InsufficientDataError("fit_exponents: the off axis must be fixed for " +
                                        std::string(algo_name(algo)));
        }

        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            num += (xs[i] - mx) * (ys[i] - my);
            den += (xs[i] - mx) * (xs[i] - mx);
        }
        out.emplace_back(algo, num / den);
    }
    return out;
}

// One row per (record, phase): algo,num_nt,sentence_len,seed,phase,wall_time_ns,repeats
inline void write_csv(std::ostream& os, std::span<const BenchRecord> records, char delim = ',') {
    os << "algo" << delim << "num_nt" << delim << "sentence_len" << delim << "seed" << delim
       << "phase" << delim << "wall_time_ns" << delim << "repeats"
       << "\n";
    for (const auto& r : records) {
        os << algo_name(r.algo) << delim << r.num_nt << delim << r.sentence_len << delim << r.seed
           << delim << "precompute" << delim << r.precompute_ns << delim << r.repeats << "\n";
        os << algo_name(r.algo) << delim << r.num_nt << delim << r.sentence_len << delim << r.seed
           << delim << "per_sentence" << delim << r.per_sentence_ns << delim << r.repeats << "\n";
    }
}

}  // namespace wcfg::bench
