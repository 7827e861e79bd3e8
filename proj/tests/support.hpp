#pragma once

#include <algorithm>
#include <random>

#include "stokes/polymat.hpp"

namespace stokes::testing {

/// Small rationals p/q with |p| <= 4, q in {1, 2, 3}; zero with probability about 1/3.
inline Rational small_rational(std::mt19937& rng, bool allow_zero = true) {
    std::uniform_int_distribution<int> num(-4, 4), den(1, 3), z(0, 2);
    if (allow_zero && z(rng) == 0) return Rational(0);
    int p = num(rng);
    while (p == 0) p = num(rng);
    return Rational(p, den(rng));
}

inline QMatrix random_matrix(std::mt19937& rng, std::size_t r, std::size_t c) {
    QMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = small_rational(rng);
    return m;
}

inline QMatrix random_symmetric(std::mt19937& rng, std::size_t n) {
    QMatrix m = random_matrix(rng, n, n);
    return m + m.transpose();
}

inline QMatrix random_skew(std::mt19937& rng, std::size_t n) {
    QMatrix m = random_matrix(rng, n, n);
    return m - m.transpose();
}

/// Upper triangular with nonzero diagonal, times a random row permutation.
inline QMatrix random_invertible(std::mt19937& rng, std::size_t n) {
    QMatrix u(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) u(i, j) = small_rational(rng, i != j);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    QMatrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) p(i, perm[i]) = Rational(1);
    return p * u;
}

inline OneVarPolyMat random_polymat(std::mt19937& rng, std::size_t r, std::size_t c, int degree) {
    std::vector<QMatrix> cs;
    for (int k = 0; k <= degree; ++k) cs.push_back(random_matrix(rng, r, c));
    return OneVarPolyMat(r, c, cs);
}

/// J_k symmetric for odd k, skew-symmetric for even k.
inline OneVarPolyMat random_skew_adjoint(std::mt19937& rng, std::size_t n, int degree) {
    std::vector<QMatrix> cs;
    for (int k = 0; k <= degree; ++k) cs.push_back(k % 2 ? random_symmetric(rng, n) : random_skew(rng, n));
    return OneVarPolyMat(n, n, cs);
}

/// Q_k symmetric for even k, skew-symmetric for odd k.
inline OneVarPolyMat random_self_adjoint(std::mt19937& rng, std::size_t n, int degree) {
    std::vector<QMatrix> cs;
    for (int k = 0; k <= degree; ++k) cs.push_back(k % 2 ? random_skew(rng, n) : random_symmetric(rng, n));
    return OneVarPolyMat(n, n, cs);
}

/// Symmetric two-variable matrix from a random symmetric coefficient matrix.
inline TwoVarPolyMat random_symmetric_two_var(std::mt19937& rng, std::size_t n, int degree) {
    return TwoVarPolyMat::from_coefficient_matrix(random_symmetric(rng, n * static_cast<std::size_t>(degree + 1)), n, n);
}

}  // namespace stokes::testing
