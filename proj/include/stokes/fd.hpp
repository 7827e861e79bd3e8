#pragma once

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace stokes {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

struct GridTooCoarse : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// N+1 equispaced nodes on [a, b].
struct Grid {
    double a = 0.0, b = 1.0;
    std::size_t N = 0;

    Grid() = default;
    Grid(double a_, double b_, std::size_t n) : a(a_), b(b_), N(n) {
        if (!(a < b)) throw std::invalid_argument("grid: need a < b");
        if (N < 8) throw GridTooCoarse("grid: N must be at least 8");
    }
    std::size_t size() const { return N + 1; }
    double h() const { return (b - a) / static_cast<double>(N); }
    double z(std::size_t i) const { return i == N ? b : a + static_cast<double>(i) * h(); }
};

/// Finite-difference weights (Fornberg) for derivatives 0..m at x0 on the given nodes.
/// Returns w[k][j], the weight of node j for the k-th derivative.
inline std::vector<std::vector<double>> fornberg_weights(double x0, const std::vector<double>& x, int m) {
    int n = static_cast<int>(x.size()) - 1;
    std::vector<std::vector<double>> c(static_cast<std::size_t>(m + 1), std::vector<double>(x.size(), 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        int mn = std::min(i, m);
        double c2 = 1.0, c5 = c4;
        c4 = x[static_cast<std::size_t>(i)] - x0;
        for (int j = 0; j < i; ++j) {
            double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
                        c1 * (k * c[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(i - 1)] -
                              c5 * c[static_cast<std::size_t>(k)][static_cast<std::size_t>(i - 1)]) / c2;
                c[0][static_cast<std::size_t>(i)] = -c1 * c5 * c[0][static_cast<std::size_t>(i - 1)] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
                    (c4 * c[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] -
                     k * c[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j)]) / c3;
            c[0][static_cast<std::size_t>(j)] = c4 * c[0][static_cast<std::size_t>(j)] / c3;
        }
        c1 = c2;
    }
    return c;
}

/// Stencil weights (in units of h^-k) for the k-th derivative at node `at` using nodes [first, first+count).
inline std::vector<double> stencil(int k, std::size_t at, std::size_t first, std::size_t count) {
    std::vector<double> x(count);
    for (std::size_t j = 0; j < count; ++j) x[j] = static_cast<double>(first + j);
    return fornberg_weights(static_cast<double>(at), x, k)[static_cast<std::size_t>(k)];
}

/// k-th derivative with accuracy q: centered in the interior, one-sided (k+q points) near the ends.
inline SpMat derivative_matrix(const Grid& g, int k, int q) {
    std::size_t n = g.size();
    SpMat D(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (k == 0) {
        D.setIdentity();
        return D;
    }
    std::size_t r = static_cast<std::size_t>((q + k - 1) / 2);  // ceil((q+k-2)/2)
    std::size_t s = static_cast<std::size_t>(k + q);
    if (s > n || 2 * r + 1 > n) throw GridTooCoarse("grid too coarse for a derivative stencil of order " + std::to_string(k));
    double scale = std::pow(g.h(), -k);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t first, count;
        if (i >= r && i + r < n) {
            first = i - r;
            count = 2 * r + 1;
        } else if (i < r) {
            first = 0;
            count = s;
        } else {
            first = n - s;
            count = s;
        }
        auto w = stencil(k, i, first, count);
        for (std::size_t j = 0; j < count; ++j)
            if (w[j] != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(first + j), w[j] * scale);
    }
    D.setFromTriplets(t.begin(), t.end());
    return D;
}

/// Weights of the k-th derivative at the left (node 0) and right (node N) ends, accuracy q.
struct TraceStencil {
    std::vector<double> left, right;  ///< left acts on nodes 0.., right on nodes N-count+1..N
};

inline TraceStencil trace_stencil(const Grid& g, int k, int q) {
    TraceStencil ts;
    if (k == 0) {
        ts.left = {1.0};
        ts.right = {1.0};
        return ts;
    }
    std::size_t s = static_cast<std::size_t>(k + q), n = g.size();
    if (s > n) throw GridTooCoarse("grid too coarse for a trace stencil");
    double scale = std::pow(g.h(), -k);
    ts.left = stencil(k, 0, 0, s);
    ts.right = stencil(k, n - 1, n - s, s);
    for (auto& v : ts.left) v *= scale;
    for (auto& v : ts.right) v *= scale;
    return ts;
}

/// Diagonal norm of the summation-by-parts first derivative of order q (2 or 4).
inline std::vector<double> sbp_norm(const Grid& g, int q) {
    std::size_t n = g.size();
    std::vector<double> w(n, g.h());
    if (q == 2) {
        w[0] = w[n - 1] = 0.5 * g.h();
    } else if (q == 4) {
        const double b[4] = {17.0 / 48, 59.0 / 48, 43.0 / 48, 49.0 / 48};
        for (std::size_t i = 0; i < 4; ++i) {
            w[i] = b[i] * g.h();
            w[n - 1 - i] = b[i] * g.h();
        }
    } else {
        throw std::invalid_argument("scheme order must be 2 or 4");
    }
    return w;
}

/// Summation-by-parts first derivative: H D + D^T H = diag(-1, 0, ..., 0, 1).
inline SpMat sbp_d1(const Grid& g, int q) {
    std::size_t n = g.size();
    std::vector<Triplet> t;
    double ih = 1.0 / g.h();
    auto put = [&](std::size_t i, long j, double v) { t.emplace_back(static_cast<int>(i), static_cast<int>(j), v * ih); };
    if (q == 2) {
        put(0, 0, -1.0);
        put(0, 1, 1.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            put(i, static_cast<long>(i) - 1, -0.5);
            put(i, static_cast<long>(i) + 1, 0.5);
        }
        put(n - 1, static_cast<long>(n) - 2, -1.0);
        put(n - 1, static_cast<long>(n) - 1, 1.0);
    } else if (q == 4) {
        if (n < 9) throw GridTooCoarse("fourth-order operator needs at least 9 nodes");
        const double B[4][6] = {{-24.0 / 17, 59.0 / 34, -4.0 / 17, -3.0 / 34, 0, 0},
                                {-0.5, 0, 0.5, 0, 0, 0},
                                {4.0 / 43, -59.0 / 86, 0, 59.0 / 86, -4.0 / 43, 0},
                                {3.0 / 98, 0, -59.0 / 98, 0, 32.0 / 49, -4.0 / 49}};
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 6; ++j)
                if (B[i][j] != 0.0) {
                    put(i, static_cast<long>(j), B[i][j]);
                    put(n - 1 - i, static_cast<long>(n - 1 - j), -B[i][j]);
                }
        for (std::size_t i = 4; i + 4 < n; ++i) {
            long c = static_cast<long>(i);
            put(i, c - 2, 1.0 / 12);
            put(i, c - 1, -2.0 / 3);
            put(i, c + 1, 2.0 / 3);
            put(i, c + 2, -1.0 / 12);
        }
    } else {
        throw std::invalid_argument("scheme order must be 2 or 4");
    }
    SpMat D(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    D.setFromTriplets(t.begin(), t.end());
    return D;
}

/// Second derivative D2 = H^{-1}(-M + B S), kept in pieces so that either boundary derivative
/// S can be swapped for prescribed data: D2 = interior + left + right, where left and right
/// only touch rows 0 and N respectively.
struct SecondDerivative {
    SpMat interior, left, right;
    SpMat full() const { return interior + left + right; }
};

inline SecondDerivative sbp_d2(const Grid& g, int q) {
    std::size_t n = g.size();
    std::vector<double> w = sbp_norm(g, q);
    SpMat M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (q == 2) {
        std::vector<Triplet> t;
        double ih = 1.0 / g.h();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            int a = static_cast<int>(i), b = a + 1;
            t.emplace_back(a, a, ih);
            t.emplace_back(b, b, ih);
            t.emplace_back(a, b, -ih);
            t.emplace_back(b, a, -ih);
        }
        M.setFromTriplets(t.begin(), t.end());
    } else {
        SpMat D = sbp_d1(g, q);
        Eigen::VectorXd wv(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) wv(static_cast<Eigen::Index>(i)) = w[i];
        M = SpMat(D.transpose() * wv.asDiagonal() * D);
    }
    Eigen::VectorXd iw(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) iw(static_cast<Eigen::Index>(i)) = 1.0 / w[i];
    SecondDerivative d;
    d.interior = SpMat(-(iw.asDiagonal() * M));
    TraceStencil ts = trace_stencil(g, 1, q);
    std::vector<Triplet> tl, tr;
    for (std::size_t j = 0; j < ts.left.size(); ++j) tl.emplace_back(0, static_cast<int>(j), -ts.left[j] / w[0]);
    std::size_t off = n - ts.right.size();
    for (std::size_t j = 0; j < ts.right.size(); ++j)
        tr.emplace_back(static_cast<int>(n - 1), static_cast<int>(off + j), ts.right[j] / w[n - 1]);
    d.left = SpMat(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    d.right = SpMat(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    d.left.setFromTriplets(tl.begin(), tl.end());
    d.right.setFromTriplets(tr.begin(), tr.end());
    return d;
}

}  // namespace stokes
