#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "polymat.hpp"

namespace stokes {

/// Determinant of a square polynomial matrix by fraction-free (Bareiss) elimination.
inline Poly bareiss_det(std::vector<std::vector<Poly>> m) {
    std::size_t n = m.size();
    if (n == 0) return Poly(Rational(1));
    Poly prev(Rational(1));
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k].is_zero()) {
            std::size_t piv = k + 1;
            while (piv < n && m[piv][k].is_zero()) ++piv;
            if (piv == n) return Poly();
            std::swap(m[k], m[piv]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) m[i][j] = exact_div(m[k][k] * m[i][j] - m[i][k] * m[k][j], prev);
        prev = m[k][k];
    }
    Poly d = m[n - 1][n - 1];
    return sign > 0 ? d : -d;
}

/// GCD of all maximal (cols x cols) minors of a tall polynomial matrix; zero if every minor vanishes.
inline Poly maximal_minor_gcd(const OneVarPolyMat& r) {
    std::size_t n = r.cols(), rows = r.rows();
    if (rows < n) throw DimensionError("maximal_minor_gcd: fewer rows than columns");
    std::vector<std::vector<Poly>> e(rows, std::vector<Poly>(n));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < n; ++j) e[i][j] = entry(r, i, j);
    Poly g;
    std::vector<std::size_t> pick;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (g.degree() == 0) return;  // already a unit
        if (pick.size() == n) {
            std::vector<std::vector<Poly>> sub;
            for (auto i : pick) sub.push_back(e[i]);
            Poly d = bareiss_det(std::move(sub));
            if (!d.is_zero()) g = g.is_zero() ? d.monic() : gcd(g, d);
            return;
        }
        for (std::size_t i = start; i + (n - pick.size()) <= rows; ++i) {
            pick.push_back(i);
            rec(i + 1);
            pick.pop_back();
        }
    };
    rec(0);
    return g;
}

/// True iff R(s) (2n x n) has full column rank for every complex s.
inline bool constant_full_rank(const OneVarPolyMat& r) {
    if (r.rows() != 2 * r.cols()) throw DimensionError("constant_full_rank: expected a 2n x n matrix");
    if (r.cols() == 0) return true;
    Poly g = maximal_minor_gcd(r);
    return g.degree() == 0;
}

}  // namespace stokes
