#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "matrix.hpp"
#include "poly.hpp"

namespace stokes {

/// Matrix with univariate polynomial entries, stored as coefficient matrices A_0..A_N.
/// The zero matrix has an empty coefficient list and degree -1.
template <class F>
class PolyMat1 {
public:
    PolyMat1() = default;
    PolyMat1(std::size_t r, std::size_t c) : rows_(r), cols_(c) {}
    PolyMat1(std::size_t r, std::size_t c, std::vector<Matrix<F>> coeffs) : rows_(r), cols_(c), c_(std::move(coeffs)) {
        for (auto& m : c_)
            if (m.rows() != r || m.cols() != c) throw DimensionError("PolyMat1: coefficient shape mismatch");
        trim();
    }
    /// Constant polynomial matrix.
    explicit PolyMat1(const Matrix<F>& a0) : PolyMat1(a0.rows(), a0.cols(), std::vector<Matrix<F>>{a0}) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Matrix<F>>& coeffs() const { return c_; }

    Matrix<F> coeff(int k) const {
        if (k < 0 || k > degree()) return Matrix<F>(rows_, cols_);
        return c_[static_cast<std::size_t>(k)];
    }
    void set_coeff(int k, const Matrix<F>& m) {
        if (m.rows() != rows_ || m.cols() != cols_) throw DimensionError("PolyMat1::set_coeff: shape mismatch");
        if (k > degree()) c_.resize(static_cast<std::size_t>(k) + 1, Matrix<F>(rows_, cols_));
        c_[static_cast<std::size_t>(k)] = m;
        trim();
    }
    F entry_coeff(std::size_t i, std::size_t j, int k) const {
        if (k < 0 || k > degree()) return F(0);
        return c_[static_cast<std::size_t>(k)](i, j);
    }

    PolyMat1 transpose() const {
        std::vector<Matrix<F>> t;
        for (auto& m : c_) t.push_back(m.transpose());
        return PolyMat1(cols_, rows_, std::move(t));
    }
    /// A(-s)
    PolyMat1 reflect() const {
        std::vector<Matrix<F>> t = c_;
        for (std::size_t k = 1; k < t.size(); k += 2) t[k] = -t[k];
        return PolyMat1(rows_, cols_, std::move(t));
    }
    PolyMat1 operator-() const {
        std::vector<Matrix<F>> t;
        for (auto& m : c_) t.push_back(-m);
        return PolyMat1(rows_, cols_, std::move(t));
    }
    friend PolyMat1 operator+(const PolyMat1& a, const PolyMat1& b) {
        a.check_same(b);
        std::vector<Matrix<F>> t(static_cast<std::size_t>(std::max(a.degree(), b.degree()) + 1), Matrix<F>(a.rows_, a.cols_));
        for (std::size_t k = 0; k < a.c_.size(); ++k) t[k] += a.c_[k];
        for (std::size_t k = 0; k < b.c_.size(); ++k) t[k] += b.c_[k];
        return PolyMat1(a.rows_, a.cols_, std::move(t));
    }
    friend PolyMat1 operator-(const PolyMat1& a, const PolyMat1& b) { return a + (-b); }
    friend PolyMat1 operator*(const PolyMat1& a, const PolyMat1& b) {
        if (a.cols_ != b.rows_) throw DimensionError("PolyMat1 product: inner dimension mismatch");
        if (a.is_zero() || b.is_zero()) return PolyMat1(a.rows_, b.cols_);
        std::vector<Matrix<F>> t(a.c_.size() + b.c_.size() - 1, Matrix<F>(a.rows_, b.cols_));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) t[i + j] += a.c_[i] * b.c_[j];
        return PolyMat1(a.rows_, b.cols_, std::move(t));
    }
    friend PolyMat1 operator*(const Matrix<F>& m, const PolyMat1& b) { return PolyMat1(m) * b; }
    friend PolyMat1 operator*(const F& s, const PolyMat1& b) {
        std::vector<Matrix<F>> t;
        for (auto& m : b.c_) t.push_back(m * s);
        return PolyMat1(b.rows_, b.cols_, std::move(t));
    }
    friend bool operator==(const PolyMat1& a, const PolyMat1& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.c_ == b.c_;
    }

    /// Rows [r0, r0+nr) as a new polynomial matrix.
    PolyMat1 row_block(std::size_t r0, std::size_t nr) const {
        std::vector<Matrix<F>> t;
        for (auto& m : c_) t.push_back(m.block(r0, 0, nr, cols_));
        return PolyMat1(nr, cols_, std::move(t));
    }
    /// Vertical concatenation [a; b].
    friend PolyMat1 vstack(const PolyMat1& a, const PolyMat1& b) {
        if (a.cols_ != b.cols_) throw DimensionError("vstack: column mismatch");
        int d = std::max(a.degree(), b.degree());
        std::vector<Matrix<F>> t;
        for (int k = 0; k <= d; ++k) {
            Matrix<F> m(a.rows_ + b.rows_, a.cols_);
            m.set_block(0, 0, a.coeff(k));
            m.set_block(a.rows_, 0, b.coeff(k));
            t.push_back(std::move(m));
        }
        return PolyMat1(a.rows_ + b.rows_, a.cols_, std::move(t));
    }

    /// Evaluate at a scalar.
    Matrix<F> eval(const F& x) const {
        Matrix<F> acc(rows_, cols_);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

private:
    void check_same(const PolyMat1& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("PolyMat1: shape mismatch");
    }
    void trim() {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Matrix<F>> c_;
};

/// Matrix of bivariate polynomials Σ Φ_{k,l} ζ^k η^l stored as a dense (M+1)x(M+1) grid of blocks.
template <class F>
class PolyMat2 {
public:
    PolyMat2() = default;
    PolyMat2(std::size_t r, std::size_t c) : rows_(r), cols_(c) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    /// Largest k or l carrying a nonzero block; -1 for the zero matrix.
    int degree() const { return m_; }
    bool is_zero() const { return m_ < 0; }

    Matrix<F> block(int k, int l) const {
        if (k < 0 || l < 0 || k > m_ || l > m_) return Matrix<F>(rows_, cols_);
        return b_[idx(k, l)];
    }
    void set_block(int k, int l, const Matrix<F>& m) {
        if (m.rows() != rows_ || m.cols() != cols_) throw DimensionError("PolyMat2::set_block: shape mismatch");
        if (k < 0 || l < 0) throw std::out_of_range("PolyMat2::set_block: negative index");
        if (std::max(k, l) > m_) {
            if (m.is_zero()) return;
            grow(std::max(k, l));
        }
        b_[idx(k, l)] = m;
        trim();
    }
    void add_block(int k, int l, const Matrix<F>& m) {
        if (m.is_zero()) return;
        set_block(k, l, block(k, l) + m);
    }

    /// (M+1)rows x (M+1)cols block matrix whose (k,l) block is Φ_{k,l}.
    Matrix<F> coefficient_matrix() const {
        std::size_t s = static_cast<std::size_t>(m_ + 1);
        Matrix<F> K(s * rows_, s * cols_);
        for (int k = 0; k <= m_; ++k)
            for (int l = 0; l <= m_; ++l) K.set_block(static_cast<std::size_t>(k) * rows_, static_cast<std::size_t>(l) * cols_, block(k, l));
        return K;
    }
    static PolyMat2 from_coefficient_matrix(const Matrix<F>& K, std::size_t r, std::size_t c) {
        if (r == 0 || c == 0 || K.rows() % r != 0 || K.cols() % c != 0 || K.rows() / r != K.cols() / c)
            throw DimensionError("from_coefficient_matrix: incompatible block sizes");
        PolyMat2 out(r, c);
        int s = static_cast<int>(K.rows() / r);
        for (int k = 0; k < s; ++k)
            for (int l = 0; l < s; ++l)
                out.set_block(k, l, K.block(static_cast<std::size_t>(k) * r, static_cast<std::size_t>(l) * c, r, c));
        return out;
    }

    /// Φ(η,ζ)^T
    PolyMat2 swap_transpose() const {
        PolyMat2 out(cols_, rows_);
        for (int k = 0; k <= m_; ++k)
            for (int l = 0; l <= m_; ++l) out.set_block(l, k, block(k, l).transpose());
        return out;
    }
    bool is_symmetric() const { return rows_ == cols_ && *this == swap_transpose(); }
    bool is_skew() const { return rows_ == cols_ && *this == -swap_transpose(); }

    PolyMat2 operator-() const {
        PolyMat2 out(*this);
        for (auto& m : out.b_) m = -m;
        return out;
    }
    friend PolyMat2 operator+(const PolyMat2& a, const PolyMat2& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw DimensionError("PolyMat2: shape mismatch");
        PolyMat2 out(a);
        for (int k = 0; k <= b.m_; ++k)
            for (int l = 0; l <= b.m_; ++l) out.add_block(k, l, b.block(k, l));
        out.trim();
        return out;
    }
    friend PolyMat2 operator-(const PolyMat2& a, const PolyMat2& b) { return a + (-b); }
    friend PolyMat2 operator*(const F& s, const PolyMat2& a) {
        PolyMat2 out(a);
        for (auto& m : out.b_) m *= s;
        out.trim();
        return out;
    }
    friend bool operator==(const PolyMat2& a, const PolyMat2& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_ || a.m_ != b.m_) return false;
        return a.b_ == b.b_;
    }

    /// (ζ+η)Φ(ζ,η)
    PolyMat2 times_sum() const {
        PolyMat2 out(rows_, cols_);
        for (int k = 0; k <= m_; ++k)
            for (int l = 0; l <= m_; ++l) {
                Matrix<F> b = block(k, l);
                if (b.is_zero()) continue;
                out.add_block(k + 1, l, b);
                out.add_block(k, l + 1, b);
            }
        return out;
    }

    /// Φ(-s, s) as a one-variable polynomial matrix.
    PolyMat1<F> eval_antidiagonal() const {
        if (m_ < 0) return PolyMat1<F>(rows_, cols_);
        std::vector<Matrix<F>> t(static_cast<std::size_t>(2 * m_ + 1), Matrix<F>(rows_, cols_));
        for (int k = 0; k <= m_; ++k)
            for (int l = 0; l <= m_; ++l) {
                Matrix<F> b = block(k, l);
                if (k % 2) b = -b;
                t[static_cast<std::size_t>(k + l)] += b;
            }
        return PolyMat1<F>(rows_, cols_, std::move(t));
    }

    /// A(η) embedded as a two-variable matrix.
    static PolyMat2 in_eta(const PolyMat1<F>& a) {
        PolyMat2 out(a.rows(), a.cols());
        for (int l = 0; l <= a.degree(); ++l) out.set_block(0, l, a.coeff(l));
        return out;
    }
    /// A(ζ) embedded as a two-variable matrix.
    static PolyMat2 in_zeta(const PolyMat1<F>& a) {
        PolyMat2 out(a.rows(), a.cols());
        for (int k = 0; k <= a.degree(); ++k) out.set_block(k, 0, a.coeff(k));
        return out;
    }

    /// Evaluate at numeric (ζ, η).
    Matrix<F> eval(const F& z, const F& e) const {
        Matrix<F> acc(rows_, cols_);
        F zk(1);
        for (int k = 0; k <= m_; ++k) {
            F el(1);
            for (int l = 0; l <= m_; ++l) {
                acc += block(k, l) * (zk * el);
                el = el * e;
            }
            zk = zk * z;
        }
        return acc;
    }

private:
    std::size_t idx(int k, int l) const { return static_cast<std::size_t>(k) * static_cast<std::size_t>(m_ + 1) + static_cast<std::size_t>(l); }
    void grow(int m) {
        std::vector<Matrix<F>> nb(static_cast<std::size_t>((m + 1) * (m + 1)), Matrix<F>(rows_, cols_));
        for (int k = 0; k <= m_; ++k)
            for (int l = 0; l <= m_; ++l) nb[static_cast<std::size_t>(k * (m + 1) + l)] = b_[idx(k, l)];
        b_ = std::move(nb);
        m_ = m;
    }
    void trim() {
        int m = -1;
        for (int k = 0; k <= m_; ++k)
            for (int l = 0; l <= m_; ++l)
                if (!b_[idx(k, l)].is_zero()) m = std::max(m, std::max(k, l));
        if (m == m_) return;
        std::vector<Matrix<F>> nb(static_cast<std::size_t>((m + 1) * (m + 1)), Matrix<F>(rows_, cols_));
        for (int k = 0; k <= m; ++k)
            for (int l = 0; l <= m; ++l) nb[static_cast<std::size_t>(k * (m + 1) + l)] = b_[idx(k, l)];
        b_ = std::move(nb);
        m_ = m;
    }

    std::size_t rows_ = 0, cols_ = 0;
    int m_ = -1;
    std::vector<Matrix<F>> b_;
};

using OneVarPolyMat = PolyMat1<Rational>;
using TwoVarPolyMat = PolyMat2<Rational>;

/// Entry (i,j) of a rational polynomial matrix as a scalar polynomial.
inline Poly entry(const OneVarPolyMat& a, std::size_t i, std::size_t j) {
    std::vector<Rational> c;
    for (int k = 0; k <= a.degree(); ++k) c.push_back(a.coeffs()[static_cast<std::size_t>(k)](i, j));
    return Poly(std::move(c));
}

inline OneVarPolyMat from_entries(const std::vector<std::vector<Poly>>& e) {
    std::size_t r = e.size(), c = r ? e[0].size() : 0;
    int d = -1;
    for (auto& row : e) {
        if (row.size() != c) throw DimensionError("from_entries: ragged rows");
        for (auto& p : row) d = std::max(d, p.degree());
    }
    std::vector<QMatrix> t(static_cast<std::size_t>(d + 1), QMatrix(r, c));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            for (int k = 0; k <= e[i][j].degree(); ++k) t[static_cast<std::size_t>(k)](i, j) = e[i][j].coeff(k);
    return OneVarPolyMat(r, c, std::move(t));
}

inline PolyMat1<double> to_double(const OneVarPolyMat& a) {
    std::vector<Matrix<double>> t;
    for (auto& m : a.coeffs()) t.push_back(to_double(m));
    return PolyMat1<double>(a.rows(), a.cols(), std::move(t));
}

inline PolyMat2<double> to_double(const TwoVarPolyMat& a) {
    PolyMat2<double> out(a.rows(), a.cols());
    for (int k = 0; k <= a.degree(); ++k)
        for (int l = 0; l <= a.degree(); ++l) out.set_block(k, l, to_double(a.block(k, l)));
    return out;
}

// ---------------------------------------------------------------------------
// Operations

struct NotDivisible : std::runtime_error {
    explicit NotDivisible(OneVarPolyMat r)
        : std::runtime_error("two-variable matrix is not divisible by (zeta+eta): Phi(-s,s) != 0"), residual(std::move(r)) {}
    OneVarPolyMat residual;
};

/// A^T(-s); block k maps to (-1)^k A_k^T.
inline OneVarPolyMat formal_adjoint(const OneVarPolyMat& a) { return a.transpose().reflect(); }

enum class Adjointness { self_adjoint, skew_adjoint, neither };

inline const char* to_string(Adjointness a) {
    switch (a) {
        case Adjointness::self_adjoint: return "self_adjoint";
        case Adjointness::skew_adjoint: return "skew_adjoint";
        default: return "neither";
    }
}

/// The zero matrix is reported self-adjoint.
inline Adjointness classify_adjointness(const OneVarPolyMat& a) {
    if (a.rows() != a.cols()) throw DimensionError("classify_adjointness: non-square input");
    OneVarPolyMat adj = formal_adjoint(a);
    if (adj == a) return Adjointness::self_adjoint;
    if (adj == -a) return Adjointness::skew_adjoint;
    return Adjointness::neither;
}

/// Blocks Φ_{i,j} = X_i^T M Y_j.
inline TwoVarPolyMat outer_product(const OneVarPolyMat& x, const QMatrix& m, const OneVarPolyMat& y) {
    if (m.rows() != x.rows() || m.cols() != y.rows())
        throw DimensionError("outer_product: X is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + ", M is " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", Y is " + std::to_string(y.rows()) +
                             "x" + std::to_string(y.cols()));
    TwoVarPolyMat out(x.cols(), y.cols());
    for (int i = 0; i <= x.degree(); ++i) {
        QMatrix xm = x.coeffs()[static_cast<std::size_t>(i)].transpose() * m;
        for (int j = 0; j <= y.degree(); ++j) out.add_block(i, j, xm * y.coeffs()[static_cast<std::size_t>(j)]);
    }
    return out;
}

/// Ψ with (ζ+η)Ψ = Φ, eliminating along anti-diagonals of the coefficient array.
inline TwoVarPolyMat divide_by_sum(const TwoVarPolyMat& phi) {
    OneVarPolyMat resid = phi.eval_antidiagonal();
    if (!resid.is_zero()) throw NotDivisible(resid);
    TwoVarPolyMat psi(phi.rows(), phi.cols());
    int m = phi.degree();
    for (int d = 1; d <= 2 * m; ++d) {
        // Φ_{k,d-k} = Ψ_{k-1,d-k} + Ψ_{k,d-k-1}
        QMatrix prev(phi.rows(), phi.cols());  // Ψ_{k-1, d-k}
        for (int k = 0; k <= d - 1; ++k) {
            QMatrix cur = phi.block(k, d - k) - prev;
            psi.set_block(k, d - 1 - k, cur);
            prev = cur;
        }
        if (!(phi.block(d, 0) == prev)) throw std::logic_error("divide_by_sum: inconsistent anti-diagonal");
    }
    if (!(psi.times_sum() == phi)) throw std::logic_error("divide_by_sum: round trip failed");
    return psi;
}

/// Q(s) = H(-s, s); asserts formal self-adjointness for symmetric H.
inline OneVarPolyMat reflect_diagonal(const TwoVarPolyMat& h) {
    OneVarPolyMat q = h.eval_antidiagonal();
    if (h.is_symmetric() && !(formal_adjoint(q) == q))
        throw std::logic_error("reflect_diagonal: symmetric input produced a non-self-adjoint result");
    return q;
}

/// H^b with (ζ+η)H^b = H(ζ,η) - Q(η).
inline TwoVarPolyMat boundary_remainder(const TwoVarPolyMat& h) {
    OneVarPolyMat q = reflect_diagonal(h);
    return divide_by_sum(h - TwoVarPolyMat::in_eta(q));
}

}  // namespace stokes
