#pragma once

#include "orbifusion/rational.hpp"

#include <map>
#include <mutex>
#include <ostream>
#include <vector>

namespace orbifusion {

// Exact arithmetic in the cyclotomic field Q(eta_N), eta_N the principal
// primitive N-th root of unity. Elements are polynomials in eta_N reduced
// modulo the N-th cyclotomic polynomial, so equality is representation
// equality. Mixed orders promote to the lcm.

namespace detail {

using Poly = std::vector<Rational>; // coefficient i of x^i, no trailing zeros

inline void poly_trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, Rational(0));
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    poly_trim(r);
    return r;
}

// quotient of exact division a / b
inline Poly poly_div_exact(Poly a, const Poly& b) {
    Poly q(a.size(), Rational(0));
    while (a.size() >= b.size() && !a.empty()) {
        Rational c = a.back() / b.back();
        size_t shift = a.size() - b.size();
        q[shift] = c;
        for (size_t i = 0; i < b.size(); ++i) a[shift + i] -= c * b[i];
        poly_trim(a);
    }
    poly_trim(q);
    return q;
}

// polynomial quotient (also for inexact division)
inline Poly poly_quotient(Poly a, const Poly& b) {
    Poly q(a.size() >= b.size() ? a.size() - b.size() + 1 : 1, Rational(0));
    while (a.size() >= b.size() && !a.empty()) {
        Rational c = a.back() / b.back();
        size_t shift = a.size() - b.size();
        q[shift] = c;
        for (size_t i = 0; i < b.size(); ++i) a[shift + i] -= c * b[i];
        poly_trim(a);
    }
    poly_trim(q);
    return q;
}

// remainder of a mod b
inline Poly poly_mod(Poly a, const Poly& b) {
    while (a.size() >= b.size() && !a.empty()) {
        Rational c = a.back() / b.back();
        size_t shift = a.size() - b.size();
        for (size_t i = 0; i < b.size(); ++i) a[shift + i] -= c * b[i];
        poly_trim(a);
    }
    return a;
}

inline long long euler_phi(long long n) {
    long long result = n;
    long long m = n;
    for (long long p = 2; p * p <= m; ++p) {
        if (m % p == 0) {
            while (m % p == 0) m /= p;
            result -= result / p;
        }
    }
    if (m > 1) result -= result / m;
    return result;
}

inline Poly cyclotomic_poly(long long n) {
    // x^n - 1 divided by the product of Phi_d over proper divisors d of n
    Poly num(static_cast<size_t>(n) + 1, Rational(0));
    num[0] = -1;
    num[static_cast<size_t>(n)] = 1;
    Poly den{Rational(1)};
    for (long long d = 1; d < n; ++d)
        if (n % d == 0) den = poly_mul(den, cyclotomic_poly(d));
    return poly_div_exact(num, den);
}

struct FieldData {
    long long order = 1;
    long long phi = 1;
    Poly modulus; // Phi_N
    // x^(phi + i) reduced mod Phi_N, for i in [0, phi - 2]; each vector has length phi
    std::vector<std::vector<Rational>> high_powers;
};

inline const FieldData& field_data(long long n) {
    static std::map<long long, FieldData> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    FieldData fd;
    fd.order = n;
    fd.phi = euler_phi(n);
    fd.modulus = cyclotomic_poly(n);
    fd.high_powers.resize(fd.phi > 1 ? static_cast<size_t>(fd.phi - 1) : 0);
    Poly x_pow(static_cast<size_t>(fd.phi) + 1, Rational(0));
    x_pow[static_cast<size_t>(fd.phi)] = 1;
    Poly cur = poly_mod(x_pow, fd.modulus);
    for (size_t i = 0; i + 1 < static_cast<size_t>(fd.phi); ++i) {
        std::vector<Rational> row(static_cast<size_t>(fd.phi), Rational(0));
        for (size_t j = 0; j < cur.size(); ++j) row[j] = cur[j];
        fd.high_powers[i] = row;
        // multiply by x and reduce once more
        Poly nxt(cur.size() + 1, Rational(0));
        for (size_t j = 0; j < cur.size(); ++j) nxt[j + 1] = cur[j];
        poly_trim(nxt);
        cur = poly_mod(nxt, fd.modulus);
    }
    return cache.emplace(n, std::move(fd)).first->second;
}

} // namespace detail

class Scalar {
public:
    Scalar() : order_(1), c_(1, Rational(0)) {}
    Scalar(const Rational& r) : order_(1), c_(1, r) {}
    Scalar(long long n) : order_(1), c_(1, Rational(n)) {}
    Scalar(int n) : order_(1), c_(1, Rational(n)) {}

    static Scalar root_of_unity(long long n, long long power = 1) {
        power %= n;
        if (power < 0) power += n;
        const auto& fd = detail::field_data(n);
        detail::Poly p(static_cast<size_t>(power) + 1, Rational(0));
        p[static_cast<size_t>(power)] = 1;
        p = detail::poly_mod(p, fd.modulus);
        Scalar s;
        s.order_ = n;
        s.c_.assign(static_cast<size_t>(fd.phi), Rational(0));
        for (size_t i = 0; i < p.size(); ++i) s.c_[i] = p[i];
        return s;
    }

    /// (-1)^a = e^{a pi i} for rational a, per the paper's convention.
    static Scalar minus_one_pow(const Rational& a) {
        Integer p = rat_num(a), q = rat_den(a);
        return root_of_unity(2 * to_ll(q), to_ll(p));
    }

    long long order() const { return order_; }

    bool is_zero() const {
        for (const auto& x : c_)
            if (x != 0) return false;
        return true;
    }

    bool is_rational() const {
        for (size_t i = 1; i < c_.size(); ++i)
            if (c_[i] != 0) return false;
        return true;
    }

    /// Rational part; requires is_rational().
    Rational rational_value() const {
        if (!is_rational()) throw std::domain_error("Scalar is not rational");
        return c_[0];
    }

    Scalar embedded(long long target_order) const {
        if (target_order == order_) return *this;
        if (target_order % order_ != 0) throw std::domain_error("no embedding between these orders");
        const auto& fd = detail::field_data(target_order);
        long long step = target_order / order_;
        Scalar out;
        out.order_ = target_order;
        out.c_.assign(static_cast<size_t>(fd.phi), Rational(0));
        for (size_t i = 0; i < c_.size(); ++i) {
            if (c_[i] == 0) continue;
            Scalar t = root_of_unity(target_order, step * static_cast<long long>(i));
            for (size_t j = 0; j < out.c_.size(); ++j) out.c_[j] += c_[i] * t.c_[j];
        }
        return out;
    }

    friend Scalar operator+(const Scalar& a, const Scalar& b) {
        if (a.order_ != b.order_) {
            long long L = lllcm(a.order_, b.order_);
            return a.embedded(L) + b.embedded(L);
        }
        Scalar r = a;
        for (size_t i = 0; i < r.c_.size(); ++i) r.c_[i] += b.c_[i];
        return r;
    }
    friend Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }
    Scalar operator-() const {
        Scalar r = *this;
        for (auto& x : r.c_) x = -x;
        return r;
    }

    friend Scalar operator*(const Scalar& a, const Scalar& b) {
        if (a.order_ == 1) return b.scaled(a.c_[0]);
        if (b.order_ == 1) return a.scaled(b.c_[0]);
        if (a.order_ != b.order_) {
            long long L = lllcm(a.order_, b.order_);
            return a.embedded(L) * b.embedded(L);
        }
        const auto& fd = detail::field_data(a.order_);
        size_t phi = a.c_.size();
        std::vector<Rational> prod(2 * phi - 1, Rational(0));
        for (size_t i = 0; i < phi; ++i) {
            if (a.c_[i] == 0) continue;
            for (size_t j = 0; j < phi; ++j) {
                if (b.c_[j] == 0) continue;
                prod[i + j] += a.c_[i] * b.c_[j];
            }
        }
        Scalar r;
        r.order_ = a.order_;
        r.c_.assign(phi, Rational(0));
        for (size_t i = 0; i < phi; ++i) r.c_[i] = prod[i];
        for (size_t i = phi; i < prod.size(); ++i) {
            if (prod[i] == 0) continue;
            const auto& row = fd.high_powers[i - phi];
            for (size_t j = 0; j < phi; ++j) r.c_[j] += prod[i] * row[j];
        }
        return r;
    }

    Scalar scaled(const Rational& q) const {
        Scalar r = *this;
        for (auto& x : r.c_) x *= q;
        return r;
    }

    Scalar inverse() const {
        if (is_zero()) throw std::domain_error("division by zero Scalar");
        if (order_ == 1 || is_rational()) {
            Scalar r;
            r.order_ = 1;
            r.c_ = {Rational(1) / c_[0]};
            return r.embedded(order_);
        }
        // extended Euclid in Q[x] modulo Phi_N
        const auto& fd = detail::field_data(order_);
        detail::Poly a = fd.modulus;
        detail::Poly b(c_.begin(), c_.end());
        detail::poly_trim(b);
        detail::Poly s0{}, s1{Rational(1)}; // coefficients of b in the Bezout identity
        while (!b.empty() && b.size() > 1) {
            detail::Poly q = detail::poly_quotient(a, b);
            detail::Poly r = a;
            // r = a - q*b
            detail::Poly qb = detail::poly_mul(q, b);
            if (r.size() < qb.size()) r.resize(qb.size(), Rational(0));
            for (size_t i = 0; i < qb.size(); ++i) r[i] -= qb[i];
            detail::poly_trim(r);
            // s = s0 - q*s1
            detail::Poly qs = detail::poly_mul(q, s1);
            detail::Poly s = s0;
            if (s.size() < qs.size()) s.resize(qs.size(), Rational(0));
            for (size_t i = 0; i < qs.size(); ++i) s[i] -= qs[i];
            detail::poly_trim(s);
            a = b;
            b = r;
            s0 = s1;
            s1 = s;
        }
        if (b.empty()) throw std::domain_error("Scalar not invertible (unexpected)");
        // b is a nonzero constant: inverse = s1 / b[0] mod Phi_N
        detail::Poly inv = s1;
        for (auto& x : inv) x /= b[0];
        inv = detail::poly_mod(inv, fd.modulus);
        Scalar r;
        r.order_ = order_;
        r.c_.assign(c_.size(), Rational(0));
        for (size_t i = 0; i < inv.size(); ++i) r.c_[i] = inv[i];
        return r;
    }

    friend Scalar operator/(const Scalar& a, const Scalar& b) { return a * b.inverse(); }

    Scalar pow(long long e) const {
        if (e < 0) return inverse().pow(-e);
        Scalar r(Rational(1));
        Scalar base = *this;
        while (e > 0) {
            if (e & 1) r = r * base;
            base = base * base;
            e >>= 1;
        }
        return r;
    }

    friend bool operator==(const Scalar& a, const Scalar& b) {
        if (a.order_ == b.order_) return a.c_ == b.c_;
        long long L = lllcm(a.order_, b.order_);
        return a.embedded(L).c_ == b.embedded(L).c_;
    }
    friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
    Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
    Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

    std::string str() const {
        if (is_rational()) return rat_str(c_[0]);
        std::string s;
        bool first = true;
        for (size_t i = 0; i < c_.size(); ++i) {
            if (c_[i] == 0) continue;
            if (!first) s += " + ";
            first = false;
            s += rat_str(c_[i]);
            if (i >= 1) {
                s += "*e" + std::to_string(order_);
                if (i > 1) s += "^" + std::to_string(i);
            }
        }
        return s.empty() ? "0" : s;
    }

    friend std::ostream& operator<<(std::ostream& os, const Scalar& s) { return os << s.str(); }

private:
    long long order_;
    std::vector<Rational> c_; // length = phi(order_)
};

} // namespace orbifusion
