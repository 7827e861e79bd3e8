#pragma once

#include <array>
#include <cctype>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "polymat.hpp"

namespace stokes {

struct ExpressionError : std::invalid_argument {
    ExpressionError(const std::string& what, std::size_t pos) : std::invalid_argument(what), position(pos) {}
    std::size_t position;
};

/// Polynomial in s, zeta, eta with rational coefficients; keys are exponent triples.
using Monomials = std::map<std::array<int, 3>, Rational>;

namespace detail {

inline void add_into(Monomials& a, const Monomials& b, const Rational& sign) {
    for (auto& [e, c] : b) {
        Rational v = a[e] + sign * c;
        if (v.is_zero())
            a.erase(e);
        else
            a[e] = v;
    }
}

inline Monomials mul(const Monomials& a, const Monomials& b) {
    Monomials out;
    for (auto& [ea, ca] : a)
        for (auto& [eb, cb] : b) {
            std::array<int, 3> e{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]};
            Rational v = out[e] + ca * cb;
            if (v.is_zero())
                out.erase(e);
            else
                out[e] = v;
        }
    return out;
}

class ExprParser {
public:
    ExprParser(std::string_view src, const std::map<std::string, Rational>& params) : s_(src), params_(params) {}

    Monomials parse() {
        Monomials m = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        return m;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ExpressionError("expression '" + std::string(s_) + "' at position " + std::to_string(pos_) + ": " + what, pos_);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Monomials expr() {
        Monomials acc = term();
        for (;;) {
            if (eat('+'))
                add_into(acc, term(), Rational(1));
            else if (eat('-'))
                add_into(acc, term(), Rational(-1));
            else
                return acc;
        }
    }
    Monomials term() {
        Monomials acc = unary();
        for (;;) {
            if (eat('*')) {
                acc = mul(acc, unary());
            } else if (eat('/')) {
                std::size_t at = pos_;
                Monomials d = unary();
                if (d.size() != 1 || d.begin()->first != std::array<int, 3>{0, 0, 0}) {
                    pos_ = at;
                    fail(d.empty() ? "division by zero" : "division by a non-constant");
                }
                Rational inv = Rational(1) / d.begin()->second;
                for (auto& [e, c] : acc) c = c * inv;
            } else {
                return acc;
            }
        }
    }
    Monomials unary() {
        if (eat('-')) {
            Monomials m = unary();
            for (auto& [e, c] : m) c = -c;
            return m;
        }
        if (eat('+')) return unary();
        return power();
    }
    Monomials power() {
        Monomials base = primary();
        if (!eat('^')) return base;
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected a non-negative integer exponent");
        int k = std::stoi(std::string(s_.substr(start, pos_ - start)));
        Monomials out{{{0, 0, 0}, Rational(1)}};
        for (int i = 0; i < k; ++i) out = mul(out, base);
        return out;
    }
    Monomials primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Monomials m = expr();
            if (!eat(')')) fail("expected ')'");
            return m;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
                std::size_t save = pos_++;
                if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
                if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
                } else {
                    pos_ = save;
                }
            }
            Rational v;
            try {
                v = Rational::parse(s_.substr(start, pos_ - start));
            } catch (const std::exception&) {
                pos_ = start;
                fail("malformed number");
            }
            if (v.is_zero()) return {};
            return {{{0, 0, 0}, v}};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string id(s_.substr(start, pos_ - start));
            if (id == "s") return {{{1, 0, 0}, Rational(1)}};
            if (id == "zeta") return {{{0, 1, 0}, Rational(1)}};
            if (id == "eta") return {{{0, 0, 1}, Rational(1)}};
            auto it = params_.find(id);
            if (it == params_.end()) {
                pos_ = start;
                fail("undefined parameter '" + id + "'");
            }
            if (it->second.is_zero()) return {};
            return {{{0, 0, 0}, it->second}};
        }
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    std::string_view s_;
    const std::map<std::string, Rational>& params_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline Monomials parse_monomials(std::string_view src, const std::map<std::string, Rational>& params = {}) {
    return detail::ExprParser(src, params).parse();
}

/// Polynomial in s; zeta and eta are rejected.
inline Poly parse_poly(std::string_view src, const std::map<std::string, Rational>& params = {}) {
    Monomials m = parse_monomials(src, params);
    std::vector<Rational> c;
    for (auto& [e, v] : m) {
        if (e[1] || e[2]) throw ExpressionError("expression '" + std::string(src) + "': zeta/eta not allowed here", 0);
        if (c.size() <= static_cast<std::size_t>(e[0])) c.resize(static_cast<std::size_t>(e[0]) + 1);
        c[static_cast<std::size_t>(e[0])] = v;
    }
    return Poly(std::move(c));
}

/// Rational constant (no variables).
inline Rational parse_rational_expr(std::string_view src, const std::map<std::string, Rational>& params = {}) {
    Poly p = parse_poly(src, params);
    if (p.degree() > 0) throw ExpressionError("expression '" + std::string(src) + "' must be constant", 0);
    return p.coeff(0);
}

namespace detail {

inline std::string monomial_text(const Rational& c, const std::string& vars, bool first) {
    std::string out;
    Rational a = abs(c);
    if (!first) out += c.sign() < 0 ? " - " : " + ";
    else if (c.sign() < 0) out += "-";
    if (vars.empty()) return out + a.str();
    if (!(a == Rational(1))) out += a.str() + "*";
    return out + vars;
}

inline std::string power_text(const char* name, int k) {
    if (k == 0) return "";
    return k == 1 ? std::string(name) : std::string(name) + "^" + std::to_string(k);
}

}  // namespace detail

/// Ascending powers of s, e.g. "1/2 - 3*s^2".
inline std::string to_text(const Poly& p) {
    if (p.degree() < 0) return "0";
    std::string out;
    bool first = true;
    for (int k = 0; k <= p.degree(); ++k) {
        if (p.coeff(k).is_zero()) continue;
        out += detail::monomial_text(p.coeff(k), detail::power_text("s", k), first);
        first = false;
    }
    return out;
}

/// Entry (i,j) of a two-variable matrix in zeta and eta.
inline std::string to_text(const TwoVarPolyMat& h, std::size_t i, std::size_t j) {
    std::string out;
    bool first = true;
    for (int total = 0; total <= 2 * h.degree(); ++total)
        for (int k = std::min(total, h.degree()); k >= 0 && total - k <= h.degree(); --k) {
            int l = total - k;
            Rational c = h.block(k, l)(i, j);
            if (c.is_zero()) continue;
            std::string v = detail::power_text("zeta", k), w = detail::power_text("eta", l);
            out += detail::monomial_text(c, v.empty() ? w : (w.empty() ? v : v + "*" + w), first);
            first = false;
        }
    return first ? "0" : out;
}

inline TwoVarPolyMat parse_two_var(const std::vector<std::vector<std::string>>& entries, const std::map<std::string, Rational>& params = {}) {
    std::size_t r = entries.size(), c = r ? entries[0].size() : 0;
    TwoVarPolyMat out(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        if (entries[i].size() != c) throw DimensionError("ragged matrix");
        for (std::size_t j = 0; j < c; ++j)
            for (auto& [e, v] : parse_monomials(entries[i][j], params)) {
                if (e[0]) throw ExpressionError("two-variable expression may not contain s", 0);
                QMatrix m(r, c);
                m(i, j) = v;
                out.add_block(e[1], e[2], m);
            }
    }
    return out;
}

}  // namespace stokes
