#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>

namespace orbifusion {

// Exact rational arithmetic with a small-integer fast path: values that fit
// in int64 numerator/denominator stay inline (no allocation); anything larger
// promotes to a GMP rational. All representatives are gcd-reduced with a
// positive denominator, so equality is structural.

using Integer = mpz_class;

class Rational {
public:
    Rational() = default;
    Rational(int n) : n_(n) {}
    Rational(long n) : n_(n) {}
    Rational(long long n) : n_(n) {}
    Rational(const Integer& n) {
        if (n.fits_slong_p()) n_ = n.get_si();
        else big_ = std::make_unique<mpq_class>(n);
    }
    Rational(long long n, long long d) {
        if (d == 0) throw std::domain_error("Rational: zero denominator");
        n_ = n;
        d_ = d;
        reduce_small();
    }
    Rational(const Integer& n, const Integer& d) {
        if (d == 0) throw std::domain_error("Rational: zero denominator");
        if (n.fits_slong_p() && d.fits_slong_p()) {
            n_ = n.get_si();
            d_ = d.get_si();
            reduce_small();
        } else {
            big_ = std::make_unique<mpq_class>(n, d);
            big_->canonicalize();
        }
    }
    explicit Rational(const mpq_class& q) { assign_big(q); }

    Rational(const Rational& o) : n_(o.n_), d_(o.d_) {
        if (o.big_) big_ = std::make_unique<mpq_class>(*o.big_);
    }
    Rational(Rational&&) noexcept = default;
    Rational& operator=(const Rational& o) {
        if (this == &o) return *this;
        n_ = o.n_;
        d_ = o.d_;
        big_ = o.big_ ? std::make_unique<mpq_class>(*o.big_) : nullptr;
        return *this;
    }
    Rational& operator=(Rational&&) noexcept = default;

    bool is_small() const { return !big_; }

    Integer num() const {
        if (big_) return big_->get_num();
        return Integer(static_cast<long>(n_));
    }
    Integer den() const {
        if (big_) return big_->get_den();
        return Integer(static_cast<long>(d_));
    }
    mpq_class to_mpq() const {
        if (big_) return *big_;
        return mpq_class(static_cast<long>(n_), static_cast<long>(d_));
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        if (a.is_small() && b.is_small()) {
            __int128 n = (__int128)a.n_ * b.d_ + (__int128)b.n_ * a.d_;
            __int128 d = (__int128)a.d_ * b.d_;
            return from128(n, d);
        }
        return Rational(mpq_class(a.to_mpq() + b.to_mpq()));
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        if (a.is_small() && b.is_small()) {
            __int128 n = (__int128)a.n_ * b.d_ - (__int128)b.n_ * a.d_;
            __int128 d = (__int128)a.d_ * b.d_;
            return from128(n, d);
        }
        return Rational(mpq_class(a.to_mpq() - b.to_mpq()));
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        if (a.is_small() && b.is_small()) {
            __int128 n = (__int128)a.n_ * b.n_;
            __int128 d = (__int128)a.d_ * b.d_;
            return from128(n, d);
        }
        return Rational(mpq_class(a.to_mpq() * b.to_mpq()));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.is_zero()) throw std::domain_error("Rational: division by zero");
        if (a.is_small() && b.is_small()) {
            __int128 n = (__int128)a.n_ * b.d_;
            __int128 d = (__int128)a.d_ * b.n_;
            return from128(n, d);
        }
        return Rational(mpq_class(a.to_mpq() / b.to_mpq()));
    }
    Rational operator-() const {
        if (is_small() && n_ != INT64_MIN) {
            Rational r;
            r.n_ = -n_;
            r.d_ = d_;
            return r;
        }
        return Rational(mpq_class(-to_mpq()));
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    bool is_zero() const { return big_ ? (*big_ == 0) : n_ == 0; }

    friend bool operator==(const Rational& a, const Rational& b) {
        if (a.is_small() && b.is_small()) return a.n_ == b.n_ && a.d_ == b.d_;
        return a.to_mpq() == b.to_mpq();
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        if (a.is_small() && b.is_small())
            return (__int128)a.n_ * b.d_ < (__int128)b.n_ * a.d_;
        return a.to_mpq() < b.to_mpq();
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    std::string str() const {
        if (big_) return big_->get_str();
        std::string s = std::to_string(n_);
        if (d_ != 1) s += "/" + std::to_string(d_);
        return s;
    }

private:
    static Rational from128(__int128 n, __int128 d) {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        if (n >= INT64_MIN && n <= INT64_MAX && d <= INT64_MAX) {
            Rational r;
            r.n_ = (long long)n;
            r.d_ = (long long)d;
            return r;
        }
        // promote through mpz halves
        Rational r;
        r.big_ = std::make_unique<mpq_class>(make_mpz(n), make_mpz(d));
        r.big_->canonicalize();
        return r;
    }
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a < 0 ? -a : a;
    }
    static mpz_class make_mpz(__int128 v) {
        bool neg = v < 0;
        unsigned __int128 u = neg ? -(unsigned __int128)v : (unsigned __int128)v;
        mpz_class hi(static_cast<unsigned long>(u >> 64));
        mpz_class lo(static_cast<unsigned long>(u & 0xFFFFFFFFFFFFFFFFull));
        mpz_class r = (hi << 64) + lo;
        return neg ? mpz_class(-r) : r;
    }
    void assign_big(const mpq_class& q) {
        mpq_class c = q;
        c.canonicalize();
        if (c.get_num().fits_slong_p() && c.get_den().fits_slong_p()) {
            n_ = c.get_num().get_si();
            d_ = c.get_den().get_si();
            big_.reset();
        } else {
            big_ = std::make_unique<mpq_class>(c);
        }
    }
    void reduce_small() {
        if (d_ < 0) {
            n_ = -n_;
            d_ = -d_;
        }
        long long g = std::gcd(n_ < 0 ? -n_ : n_, d_);
        if (g > 1) {
            n_ /= g;
            d_ /= g;
        }
    }

    long long n_ = 0;
    long long d_ = 1;
    std::unique_ptr<mpq_class> big_;
};

inline Integer rat_num(const Rational& q) { return q.num(); }
inline Integer rat_den(const Rational& q) { return q.den(); }

inline bool is_integer(const Rational& q) { return q.den() == 1; }

inline long long to_ll(const Integer& v) {
    if (!v.fits_slong_p()) throw std::overflow_error("Integer does not fit long long");
    return v.get_si();
}

/// Generalized binomial coefficient C(alpha, j) for rational alpha (memoized).
inline Rational binomial(const Rational& alpha, long long j) {
    if (j < 0) return Rational(0);
    if (j == 0) return Rational(1);
    static std::map<std::pair<std::string, long long>, Rational> cache;
    static std::mutex mtx;
    std::pair<std::string, long long> key{alpha.str(), j};
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    Rational r(1);
    for (long long i = 0; i < j; ++i) {
        r *= (alpha - Rational(i));
        r /= Rational(i + 1);
    }
    std::lock_guard<std::mutex> lock(mtx);
    cache.emplace(std::move(key), r);
    return r;
}

inline Integer factorial(long long n) {
    Integer r(1);
    for (long long i = 2; i <= n; ++i) r *= static_cast<long>(i);
    return r;
}

inline Integer int_pow(long long base, unsigned long exp) {
    Integer r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), exp);
    return r;
}

/// Floor of a rational as a plain integer.
inline Integer rat_floor(const Rational& q) {
    Integer r;
    Integer n = q.num(), d = q.den();
    mpz_fdiv_q(r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    return r;
}

/// Ceiling of a rational as a plain integer.
inline Integer rat_ceil(const Rational& q) {
    Integer r;
    Integer n = q.num(), d = q.den();
    mpz_cdiv_q(r.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    return r;
}

inline long long llgcd(long long a, long long b) { return std::gcd(a, b); }
inline long long lllcm(long long a, long long b) {
    if (a == 0 || b == 0) return 0;
    return a / std::gcd(a, b) * b;
}

inline std::string rat_str(const Rational& q) { return q.str(); }

/// Parses "p", "p/q" (optionally signed). Throws std::invalid_argument on junk.
inline Rational parse_rational(const std::string& s) {
    auto bad = [&] { return std::invalid_argument("not a rational: " + s); };
    if (s.empty()) throw bad();
    auto check_digits = [&](const std::string& t) {
        if (t.empty()) throw bad();
        size_t start = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (start == t.size()) throw bad();
        for (size_t i = start; i < t.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(t[i]))) throw bad();
    };
    auto slash = s.find('/');
    if (slash == std::string::npos) {
        check_digits(s);
        return Rational(Integer(s));
    }
    std::string n = s.substr(0, slash), d = s.substr(slash + 1);
    check_digits(n);
    check_digits(d);
    Integer den(d);
    if (den == 0) throw std::invalid_argument("zero denominator: " + s);
    return Rational(Integer(n), den);
}

} // namespace orbifusion
