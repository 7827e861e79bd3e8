#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polymat.hpp"

namespace stokes {

struct NotSymmetric : std::invalid_argument {
    NotSymmetric() : std::invalid_argument("coefficient matrix is not symmetric") {}
};
struct NotSkewSymmetric : std::invalid_argument {
    NotSkewSymmetric() : std::invalid_argument("coefficient matrix is not skew-symmetric") {}
};
struct OddRank : std::logic_error {
    OddRank() : std::logic_error("skew elimination produced an odd rank") {}
};

/// Inertia (alpha positive, beta negative) with Σ = diag(I_alpha, -I_beta).
struct Signature {
    std::size_t alpha = 0, beta = 0;
    std::size_t delta() const { return alpha + beta; }
    QMatrix sigma() const {
        QMatrix s(delta(), delta());
        for (std::size_t i = 0; i < delta(); ++i) s(i, i) = Rational(i < alpha ? 1 : -1);
        return s;
    }
    friend bool operator==(const Signature&, const Signature&) = default;
};

/// Ψ(ζ,η) = T^T(ζ) diag(scale) Σ T(η). Scales are positive; a scale of 1 means the row is normalized exactly.
struct SignatureFactorization {
    OneVarPolyMat T;
    Signature sig;
    std::vector<Rational> scale;

    QMatrix weighted_sigma() const {
        QMatrix s = sig.sigma();
        for (std::size_t i = 0; i < scale.size(); ++i) s(i, i) *= scale[i];
        return s;
    }
};

/// Ψ̄(ζ,η) = R∂^T(ζ) Θ_p R∂(η); top p rows are P∂, bottom p rows are S∂.
struct SymplecticFactorization {
    OneVarPolyMat Rb;
    std::size_t p = 0;
    OneVarPolyMat Pb() const { return Rb.row_block(0, p); }
    OneVarPolyMat Sb() const { return Rb.row_block(p, p); }
};

/// [A_0 A_1 ... A_M], padded to m+1 blocks.
inline QMatrix stacked(const OneVarPolyMat& a, int m) {
    QMatrix s(a.rows(), static_cast<std::size_t>(m + 1) * a.cols());
    for (int k = 0; k <= m; ++k) s.set_block(0, static_cast<std::size_t>(k) * a.cols(), a.coeff(k));
    return s;
}

/// Inverse of stacked(): split a row-stacked coefficient matrix into blocks of width n.
inline OneVarPolyMat unstacked(const QMatrix& s, std::size_t n) {
    if (n == 0 || s.cols() % n != 0) throw DimensionError("unstacked: width not a multiple of n");
    std::vector<QMatrix> c;
    for (std::size_t k = 0; k < s.cols() / n; ++k) c.push_back(s.block(0, k * n, s.rows(), n));
    return OneVarPolyMat(s.rows(), n, std::move(c));
}

namespace detail {

using Row = std::vector<Rational>;

inline Row row_of(const QMatrix& k, std::size_t i) {
    Row r(k.cols());
    for (std::size_t j = 0; j < k.cols(); ++j) r[j] = k(i, j);
    return r;
}

inline QMatrix rows_to_matrix(const std::vector<Row>& rows, std::size_t width) {
    QMatrix m(rows.size(), width);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
    return m;
}

}  // namespace detail

inline SignatureFactorization signature_factorization(const TwoVarPolyMat& psi) {
    if (psi.rows() != psi.cols()) throw NotSymmetric();
    std::size_t n = psi.rows();
    QMatrix K = psi.coefficient_matrix();
    if (!is_symmetric(K)) throw NotSymmetric();
    std::size_t N = K.rows();

    struct Piece {
        detail::Row r;
        Rational d;
    };
    std::vector<Piece> pieces;
    while (!K.is_zero()) {
        std::size_t best = N;
        for (std::size_t i = 0; i < N; ++i)
            if (!K(i, i).is_zero() && (best == N || abs(K(i, i)) > abs(K(best, best)))) best = i;
        if (best != N) {
            detail::Row r = detail::row_of(K, best);
            Rational inv = Rational(1) / K(best, best);
            for (std::size_t a = 0; a < N; ++a) {
                if (r[a].is_zero()) continue;
                Rational ra = r[a] * inv;
                for (std::size_t b = 0; b < N; ++b) K(a, b) -= ra * r[b];
            }
            pieces.push_back({std::move(r), inv});
            continue;
        }
        // zero diagonal: hyperbolic 2x2 pivot on the first nonzero upper entry
        std::size_t pi = N, pj = N;
        for (std::size_t i = 0; i < N && pi == N; ++i)
            for (std::size_t j = i + 1; j < N; ++j)
                if (!K(i, j).is_zero()) {
                    pi = i;
                    pj = j;
                    break;
                }
        Rational b = K(pi, pj);
        detail::Row ri = detail::row_of(K, pi), rj = detail::row_of(K, pj);
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t c = 0; c < N; ++c) {
                Rational v = ri[a] * rj[c] + rj[a] * ri[c];
                if (!v.is_zero()) K(a, c) -= v / b;
            }
        detail::Row u(N), w(N);
        for (std::size_t a = 0; a < N; ++a) {
            u[a] = ri[a] + rj[a];
            w[a] = ri[a] - rj[a];
        }
        Rational h = Rational(1) / (Rational(2) * b);
        pieces.push_back({std::move(u), h});
        pieces.push_back({std::move(w), -h});
    }

    std::vector<detail::Row> pos, neg;
    std::vector<Rational> pos_s, neg_s;
    for (auto& pc : pieces) {
        Rational mag = abs(pc.d), root;
        Rational sc(1);
        if (rational_sqrt(mag, root)) {
            for (auto& v : pc.r) v *= root;
        } else {
            sc = mag;
        }
        if (pc.d.sign() > 0) {
            pos.push_back(std::move(pc.r));
            pos_s.push_back(sc);
        } else {
            neg.push_back(std::move(pc.r));
            neg_s.push_back(sc);
        }
    }
    SignatureFactorization out;
    out.sig = Signature{pos.size(), neg.size()};
    std::vector<detail::Row> all = pos;
    all.insert(all.end(), neg.begin(), neg.end());
    out.scale = pos_s;
    out.scale.insert(out.scale.end(), neg_s.begin(), neg_s.end());
    if (all.empty()) {
        out.T = OneVarPolyMat(0, n);
    } else {
        out.T = unstacked(detail::rows_to_matrix(all, N), n);
    }
    return out;
}

inline SymplecticFactorization symplectic_factorization(const TwoVarPolyMat& psibar) {
    if (psibar.rows() != psibar.cols()) throw NotSkewSymmetric();
    std::size_t n = psibar.rows();
    QMatrix K = psibar.coefficient_matrix();
    if (!is_skew(K)) throw NotSkewSymmetric();
    std::size_t N = K.rows();

    std::vector<detail::Row> ps, ss;
    while (!K.is_zero()) {
        std::size_t pi = N, pj = N;
        for (std::size_t i = 0; i < N && pi == N; ++i)
            for (std::size_t j = i + 1; j < N; ++j)
                if (!K(i, j).is_zero()) {
                    pi = i;
                    pj = j;
                    break;
                }
        if (pi == N) throw OddRank();  // nonzero skew matrix always has an off-diagonal entry
        Rational c = K(pi, pj);
        detail::Row ri = detail::row_of(K, pi), rj = detail::row_of(K, pj);
        // K <- K - (ri^T rj - rj^T ri)/c
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = 0; b < N; ++b) {
                Rational v = ri[a] * rj[b] - rj[a] * ri[b];
                if (!v.is_zero()) K(a, b) -= v / c;
            }
        detail::Row s = ri;
        for (auto& v : s) v /= c;
        ps.push_back(std::move(rj));
        ss.push_back(std::move(s));
    }
    SymplecticFactorization out;
    out.p = ps.size();
    if (ps.empty()) {
        out.Rb = OneVarPolyMat(0, n);
        return out;
    }
    std::vector<detail::Row> all = ps;
    all.insert(all.end(), ss.begin(), ss.end());
    QMatrix R = detail::rows_to_matrix(all, N);
    if (rank(R) != 2 * out.p) throw OddRank();
    out.Rb = unstacked(R, n);
    return out;
}

/// Rational matrix M with M·A = B for polynomial matrices of equal row count; A must have full row rank.
/// Returns false when no such M exists.
inline bool left_factor(const OneVarPolyMat& a, const OneVarPolyMat& b, QMatrix& m) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    int deg = std::max(a.degree(), b.degree());
    QMatrix A = stacked(a, deg), B = stacked(b, deg);
    std::size_t r = A.rows();
    if (r == 0) {
        m = QMatrix(0, 0);
        return true;
    }
    // choose r independent columns greedily
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < A.cols() && cols.size() < r; ++j) {
        QMatrix trial(r, cols.size() + 1);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t k = 0; k < cols.size(); ++k) trial(i, k) = A(i, cols[k]);
            trial(i, cols.size()) = A(i, j);
        }
        if (rank(trial) == cols.size() + 1) cols.push_back(j);
    }
    if (cols.size() != r) return false;
    QMatrix C(r, r), D(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t k = 0; k < r; ++k) {
            C(i, k) = A(i, cols[k]);
            D(i, k) = B(i, cols[k]);
        }
    m = D * inverse(C);
    return m * A == B;
}

/// True iff M^T Θ_p M = Θ_p.
inline bool is_symplectic(const QMatrix& m) {
    if (!m.square() || m.rows() % 2 != 0) return false;
    QMatrix t = theta(m.rows() / 2);
    return m.transpose() * t * m == t;
}

/// Re-express a symplectic factor in the gauge of target, when target = M·Rb with M symplectic.
inline bool align_gauge(SymplecticFactorization& f, const OneVarPolyMat& target, QMatrix* transform = nullptr) {
    QMatrix m;
    if (!left_factor(f.Rb, target, m) || !is_symplectic(m)) return false;
    f.Rb = target;
    if (transform) *transform = m;
    return true;
}

}  // namespace stokes
