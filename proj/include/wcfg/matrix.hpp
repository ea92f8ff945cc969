#pragma once

// Square matrices over a complete semiring and two routes to the Kleene
// closure M* = I + M + M^2 + ...: an elimination that works in any complete
// semiring, and a direct dense solve of (I - M) X = I for the probability
// instance.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "wcfg/errors.hpp"
#include "wcfg/semiring.hpp"

namespace wcfg {

template <Semiring S>
class SquareMatrix {
public:
    using Value = typename S::Value;

    explicit SquareMatrix(std::size_t dim) : dim_(dim), entries_(dim * dim, S::zero()) {}

    static SquareMatrix identity(std::size_t dim) {
        SquareMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = S::one();
        return m;
    }

    std::size_t dim() const { return dim_; }

    Value& operator()(std::size_t i, std::size_t j) { return entries_[i * dim_ + j]; }
    const Value& operator()(std::size_t i, std::size_t j) const { return entries_[i * dim_ + j]; }

private:
    std::size_t dim_;
    std::vector<Value> entries_;
};

namespace detail {

inline void require_same_dim(std::size_t a, std::size_t b, const char* op) {
    if (a != b) {
        throw DimensionMismatchError(std::string(op) + ": dimensions " + std::to_string(a) +
                                     " and " + std::to_string(b) + " differ");
    }
}

}  // namespace detail

template <Semiring S>
SquareMatrix<S> mat_add(const SquareMatrix<S>& a, const SquareMatrix<S>& b) {
    detail::require_same_dim(a.dim(), b.dim(), "mat_add");
    SquareMatrix<S> out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j) out(i, j) = S::add(a(i, j), b(i, j));
    return out;
}

template <Semiring S>
SquareMatrix<S> mat_mul(const SquareMatrix<S>& a, const SquareMatrix<S>& b) {
    detail::require_same_dim(a.dim(), b.dim(), "mat_mul");
    const std::size_t d = a.dim();
    SquareMatrix<S> out(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            const auto aik = a(i, k);
            for (std::size_t j = 0; j < d; ++j) {
                out(i, j) = S::add(out(i, j), S::mul(aik, b(k, j)));
            }
        }
    }
    return out;
}

// Kleene closure by pivot elimination, one working buffer. The step-j block
// update must read the step-(j-1) row j and column j, so those are rescaled
// by star(M_jj) only after the block pass; the result is step-for-step equal
// to the two-buffer formulation (see the reference copy in the tests).
//
// Throws NonConvergentError when some pivot star diverges, which for the
// probability instance means the underlying grammar is not tight.
template <Semiring S>
SquareMatrix<S> lehmann_closure(SquareMatrix<S> m) {
    const std::size_t d = m.dim();
    for (std::size_t j = 0; j < d; ++j) {
        const auto s = S::star(m(j, j));
        for (std::size_t i = 0; i < d; ++i) {
            if (i == j) continue;
            const auto mij = m(i, j);
            for (std::size_t k = 0; k < d; ++k) {
                if (k == j) continue;
                m(i, k) = S::add(m(i, k), S::mul(mij, S::mul(s, m(j, k))));
            }
        }
        for (std::size_t k = 0; k < d; ++k)
            if (k != j) m(j, k) = S::mul(s, m(j, k));
        for (std::size_t i = 0; i < d; ++i)
            if (i != j) m(i, j) = S::mul(m(i, j), s);
        m(j, j) = S::mul(m(j, j), s);
    }
    for (std::size_t i = 0; i < d; ++i) m(i, i) = S::add(S::one(), m(i, i));
    return m;
}

// Probability-only closure via (I - M)^{-1}, Gauss-Jordan with partial
// pivoting. Valid when M is substochastic; a non-invertible I - M raises
// SingularMatrixError and a clearly negative inverse entry (< -1e-9, i.e.
// beyond elimination noise) raises NegativeEntryError.
inline SquareMatrix<ProbSemiring> invert_closure(const SquareMatrix<ProbSemiring>& m) {
    const std::size_t d = m.dim();
    const std::size_t w = 2 * d;
    std::vector<double> a(d * w, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) a[i * w + j] = (i == j ? 1.0 : 0.0) - m(i, j);
        a[i * w + d + i] = 1.0;
    }

    for (std::size_t col = 0; col < d; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < d; ++r)
            if (std::fabs(a[r * w + col]) > std::fabs(a[pivot * w + col])) pivot = r;
        if (std::fabs(a[pivot * w + col]) < 1e-12) {
            throw SingularMatrixError("invert_closure: I - M is singular at column " +
                                      std::to_string(col));
        }
        if (pivot != col) {
            for (std::size_t j = 0; j < w; ++j) std::swap(a[pivot * w + j], a[col * w + j]);
        }
        const double inv = 1.0 / a[col * w + col];
        for (std::size_t j = 0; j < w; ++j) a[col * w + j] *= inv;
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col) continue;
            const double f = a[r * w + col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < w; ++j) a[r * w + j] -= f * a[col * w + j];
        }
    }

    SquareMatrix<ProbSemiring> out(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double v = a[i * w + d + j];
            if (v < -1e-9) {
                throw NegativeEntryError("invert_closure: entry (" + std::to_string(i) + "," +
                                         std::to_string(j) + ") = " + std::to_string(v));
            }
            out(i, j) = v < 0.0 ? 0.0 : v;
        }
    }
    return out;
}

}  // namespace wcfg
