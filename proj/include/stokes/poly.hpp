#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rational.hpp"

namespace stokes {

/// Univariate polynomial c[0] + c[1] s + ... with trailing zeros trimmed.
class Poly {
public:
    Poly() = default;
    Poly(Rational c) {
        if (!c.is_zero()) c_.push_back(std::move(c));
    }
    explicit Poly(std::vector<Rational> c) : c_(std::move(c)) { trim(); }

    static Poly monomial(Rational c, int k) {
        std::vector<Rational> v(static_cast<std::size_t>(k) + 1);
        v[static_cast<std::size_t>(k)] = std::move(c);
        return Poly(std::move(v));
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<Rational>& coeffs() const { return c_; }
    Rational coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(k)] : Rational(0);
    }
    Rational lead() const { return c_.empty() ? Rational(0) : c_.back(); }

    Poly operator-() const {
        Poly p(*this);
        for (auto& v : p.c_) v = -v;
        return p;
    }
    Poly& operator+=(const Poly& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
        trim();
        return *this;
    }
    Poly& operator-=(const Poly& o) { return *this += -o; }
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return Poly();
        std::vector<Rational> r(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
        return Poly(std::move(r));
    }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }
    friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

    Rational eval(const Rational& x) const {
        Rational acc(0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }
    /// p(-s)
    Poly reflect() const {
        Poly p(*this);
        for (std::size_t k = 1; k < p.c_.size(); k += 2) p.c_[k] = -p.c_[k];
        return p;
    }
    Poly monic() const {
        if (is_zero()) return *this;
        Poly p(*this);
        Rational l = lead();
        for (auto& v : p.c_) v /= l;
        return p;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }
    std::vector<Rational> c_;
};

/// Euclidean division a = q b + r with deg r < deg b.
inline std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw std::domain_error("polynomial division by zero");
    std::vector<Rational> r = a.coeffs();
    int db = b.degree();
    if (a.degree() < db) return {Poly(), a};
    std::vector<Rational> q(static_cast<std::size_t>(a.degree() - db) + 1);
    Rational lb = b.lead();
    for (int k = a.degree(); k >= db; --k) {
        Rational f = r[static_cast<std::size_t>(k)] / lb;
        q[static_cast<std::size_t>(k - db)] = f;
        if (f.is_zero()) continue;
        for (int j = 0; j <= db; ++j) r[static_cast<std::size_t>(k - db + j)] -= f * b.coeffs()[static_cast<std::size_t>(j)];
    }
    return {Poly(std::move(q)), Poly(std::move(r))};
}

/// Exact quotient; throws if b does not divide a.
inline Poly exact_div(const Poly& a, const Poly& b) {
    auto [q, r] = divmod(a, b);
    if (!r.is_zero()) throw std::logic_error("exact_div: nonzero remainder");
    return q;
}

/// Pseudo-remainder lc(b)^(deg a - deg b + 1) a mod b.
inline Poly prem(const Poly& a, const Poly& b) {
    int d = a.degree() - b.degree();
    if (d < 0) return a;
    Poly scaled = a;
    Rational l = pow(b.lead(), static_cast<unsigned>(d + 1));
    scaled = scaled * Poly(l);
    return divmod(scaled, b).second;
}

/// Monic gcd through the subresultant polynomial remainder sequence.
inline Poly gcd(Poly a, Poly b) {
    if (a.degree() < b.degree()) std::swap(a, b);
    if (b.is_zero()) return a.monic();
    Rational g(1), h(1);
    while (true) {
        int d = a.degree() - b.degree();
        Poly r = prem(a, b);
        if (r.is_zero()) return b.monic();
        if (r.degree() == 0) return Poly(Rational(1));
        Rational denom = g * pow(h, static_cast<unsigned>(d));
        a = b;
        b = r * Poly(Rational(1) / denom);
        g = a.lead();
        if (d > 0) h = pow(g, static_cast<unsigned>(d)) / pow(h, static_cast<unsigned>(d - 1));
    }
}

}  // namespace stokes
