#pragma once

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fd.hpp"

namespace stokes {

struct SingularMatrix : std::runtime_error {
    SingularMatrix(const std::string& what, double p) : std::runtime_error(what), smallest_pivot(p) {}
    double smallest_pivot;
};

/// Half bandwidths (lower, upper) of a sparse matrix.
inline std::pair<int, int> bandwidths(const SpMat& a) {
    int kl = 0, ku = 0;
    for (int i = 0; i < a.outerSize(); ++i)
        for (SpMat::InnerIterator it(a, i); it; ++it) {
            int d = static_cast<int>(it.col()) - i;
            if (d > ku) ku = d;
            if (-d > kl) kl = -d;
        }
    return {kl, ku};
}

/// LU factorization with partial pivoting in LAPACK band storage.
class BandedLU {
public:
    BandedLU() = default;
    explicit BandedLU(const SpMat& a) { factor(a); }

    void factor(const SpMat& a) {
        n_ = static_cast<int>(a.rows());
        auto [kl, ku] = bandwidths(a);
        kl_ = kl;
        ku_ = ku;
        ldab_ = 2 * kl_ + ku_ + 1;
        ab_.assign(static_cast<std::size_t>(ldab_) * static_cast<std::size_t>(n_), 0.0);
        for (int i = 0; i < a.outerSize(); ++i)
            for (SpMat::InnerIterator it(a, i); it; ++it) {
                int j = static_cast<int>(it.col());
                ab_[static_cast<std::size_t>(j) * static_cast<std::size_t>(ldab_) + static_cast<std::size_t>(kl_ + ku_ + i - j)] = it.value();
            }
        ipiv_.assign(static_cast<std::size_t>(n_), 0);
        lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, ab_.data(), ldab_, ipiv_.data());
        double pmin = std::numeric_limits<double>::infinity(), pmax = 0.0;
        for (int j = 0; j < n_; ++j) {
            double u = std::abs(ab_[static_cast<std::size_t>(j) * static_cast<std::size_t>(ldab_) + static_cast<std::size_t>(kl_ + ku_)]);
            pmin = std::min(pmin, u);
            pmax = std::max(pmax, u);
        }
        smallest_pivot_ = pmin;
        if (info != 0 || !(pmin > 1e-14 * std::max(pmax, 1.0))) {
            std::ostringstream os;
            os << "singular system matrix: smallest pivot " << pmin;
            throw SingularMatrix(os.str(), pmin);
        }
    }

    double smallest_pivot() const { return smallest_pivot_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        Eigen::VectorXd x = b;
        lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, 1, ab_.data(), ldab_, ipiv_.data(), x.data(), n_);
        if (info != 0) throw std::runtime_error("banded solve failed");
        return x;
    }

private:
    int n_ = 0, kl_ = 0, ku_ = 0, ldab_ = 1;
    std::vector<double> ab_;
    std::vector<lapack_int> ipiv_;
    double smallest_pivot_ = 0.0;
};

/// Banded Cholesky of a symmetric matrix; true iff positive definite.
inline bool cholesky_succeeds(const SpMat& a) {
    int n = static_cast<int>(a.rows());
    auto [kl, ku] = bandwidths(a);
    int kd = std::max(kl, ku), ldab = kd + 1;
    std::vector<double> ab(static_cast<std::size_t>(ldab) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < a.outerSize(); ++i)
        for (SpMat::InnerIterator it(a, i); it; ++it) {
            int j = static_cast<int>(it.col());
            if (j < i) continue;  // upper triangle
            ab[static_cast<std::size_t>(j) * static_cast<std::size_t>(ldab) + static_cast<std::size_t>(kd + i - j)] = it.value();
        }
    return LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'U', n, kd, ab.data(), ldab) == 0;
}

}  // namespace stokes
