#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "wcfg/bench.hpp"

using namespace wcfg;
using namespace wcfg::bench;

TEST_CASE("exponent fit recovers a synthetic cubic", "[bench]") {
    std::vector<BenchRecord> records;
    for (int len : {8, 16, 32, 64}) {
        records.push_back({Algo::fast_jl, 16, len, 1, 5, 0,
                           static_cast<std::uint64_t>(7.0 * len * len * len)});
    }
    const auto slopes = fit_exponents(records, Axis::len);
    REQUIRE(slopes.size() == 1);
    CHECK(slopes[0].first == Algo::fast_jl);
    CHECK(std::fabs(slopes[0].second - 3.0) < 0.05);
}

TEST_CASE("exponent fit preconditions", "[bench]") {
    std::vector<BenchRecord> records;
    for (int len : {8, 16, 32}) {
        records.push_back({Algo::jl, 16, len, 1, 5, 0, static_cast<std::uint64_t>(len * len)});
    }
    CHECK_THROWS_AS(fit_exponents(records, Axis::len), InsufficientDataError);

    records.push_back({Algo::jl, 8, 64, 1, 5, 0, 100});  // off axis not fixed
    CHECK_THROWS_AS(fit_exponents(records, Axis::len), InsufficientDataError);
}

TEST_CASE("empty algorithm list yields no records", "[bench]") {
    GridConfig cfg;
    cfg.nt_values = {2};
    cfg.len_values = {4};
    cfg.seeds = {1};
    CHECK(run_grid(cfg).empty());
}

TEST_CASE("small grid produces verified records", "[bench]") {
    GridConfig cfg;
    cfg.nt_values = {2, 3};
    cfg.len_values = {4};
    cfg.seeds = {11};
    cfg.algos = {Algo::cky, Algo::cky_factored, Algo::jl, Algo::fast_jl, Algo::fast_semiring_jl};
    cfg.repeats = 2;  // clamped up to the minimum of 5
    cfg.num_terminals = 3;

    const auto records = run_grid(cfg);  // throws if any algorithm disagrees
    REQUIRE(records.size() == 2 * 5);
    for (const auto& r : records) {
        CHECK(r.repeats >= 5);
        CHECK(r.per_sentence_ns >= 1);
        const bool timed_tables =
            r.algo == Algo::jl || r.algo == Algo::fast_jl || r.algo == Algo::fast_semiring_jl;
        if (timed_tables) CHECK(r.precompute_ns >= 1);
        else CHECK(r.precompute_ns == 0);
    }

    std::ostringstream csv;
    write_csv(csv, records);
    const auto text = csv.str();
    CHECK(text.rfind("algo,num_nt,sentence_len,seed,phase,wall_time_ns,repeats\n", 0) == 0);
    std::size_t rows = 0;
    for (char c : text) rows += c == '\n';
    CHECK(rows == 1 + 2 * records.size());
    CHECK(text.find("per_sentence") != std::string::npos);
    CHECK(text.find("precompute") != std::string::npos);
}

TEST_CASE("algo names round-trip", "[bench]") {
    for (Algo a : {Algo::cky, Algo::cky_factored, Algo::jl, Algo::fast_jl, Algo::fast_semiring_jl}) {
        const auto parsed = parse_algo(algo_name(a));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == a);
    }
    CHECK(!parse_algo("quantum").has_value());
}
