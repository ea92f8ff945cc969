#pragma once

// Dense triangular charts. Span endpoints are 1-based and inclusive, matching
// the usual presentation of span-based parsing; cells outside i <= k are
// allocated but never read.

#include <cstddef>
#include <vector>

#include "wcfg/semiring.hpp"

namespace wcfg {

// (i, k, X) -> value
template <Semiring S>
class Chart {
public:
    using Value = typename S::Value;

    Chart(std::size_t n, std::size_t num_symbols)
        : n_(n), num_symbols_(num_symbols), values_(n * n * num_symbols, S::zero()) {}

    std::size_t length() const { return n_; }
    std::size_t num_symbols() const { return num_symbols_; }

    Value& at(std::size_t i, std::size_t k, std::size_t x) { return values_[offset(i, k) + x]; }
    const Value& at(std::size_t i, std::size_t k, std::size_t x) const {
        return values_[offset(i, k) + x];
    }

    // Contiguous block of all symbol values for one span.
    Value* span(std::size_t i, std::size_t k) { return values_.data() + offset(i, k); }
    const Value* span(std::size_t i, std::size_t k) const { return values_.data() + offset(i, k); }

private:
    std::size_t offset(std::size_t i, std::size_t k) const {
        return ((i - 1) * n_ + (k - 1)) * num_symbols_;
    }

    std::size_t n_;
    std::size_t num_symbols_;
    std::vector<Value> values_;
};

// (i, j, X, Z) -> value; one contiguous |N| x |N| block per span.
template <Semiring S>
class PairChart {
public:
    using Value = typename S::Value;

    PairChart(std::size_t n, std::size_t num_symbols)
        : n_(n),
          num_symbols_(num_symbols),
          values_(n * n * num_symbols * num_symbols, S::zero()) {}

    std::size_t length() const { return n_; }
    std::size_t num_symbols() const { return num_symbols_; }

    Value& at(std::size_t i, std::size_t j, std::size_t x, std::size_t z) {
        return values_[offset(i, j) + x * num_symbols_ + z];
    }
    const Value& at(std::size_t i, std::size_t j, std::size_t x, std::size_t z) const {
        return values_[offset(i, j) + x * num_symbols_ + z];
    }

    Value* block(std::size_t i, std::size_t j) { return values_.data() + offset(i, j); }
    const Value* block(std::size_t i, std::size_t j) const {
        return values_.data() + offset(i, j);
    }

private:
    std::size_t offset(std::size_t i, std::size_t j) const {
        return ((i - 1) * n_ + (j - 1)) * num_symbols_ * num_symbols_;
    }

    std::size_t n_;
    std::size_t num_symbols_;
    std::vector<Value> values_;
};

}  // namespace wcfg
