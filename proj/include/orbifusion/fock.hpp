#pragma once

#include "orbifusion/puiseux.hpp"

#include <functional>
#include <vector>

namespace orbifusion {

// The rank-one Heisenberg (free boson) Fock modules M(1,lambda): oscillator
// monomials alpha(-n_1)...alpha(-n_r) applied to the highest-weight vector of
// charge lambda, with [alpha(m), alpha(n)] = m delta_{m+n,0} and
// alpha(0) = lambda. Everything here is an exact finite computation.

struct FockMonomial {
    std::vector<long long> parts; // descending, all >= 1

    long long degree() const {
        long long d = 0;
        for (long long p : parts) d += p;
        return d;
    }
    long long max_part() const { return parts.empty() ? 0 : parts.front(); }

    friend bool operator<(const FockMonomial& a, const FockMonomial& b) {
        long long da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        return a.parts < b.parts;
    }
    friend bool operator==(const FockMonomial& a, const FockMonomial& b) {
        return a.parts == b.parts;
    }

    std::string str() const {
        if (parts.empty()) return "|hw>";
        std::string s;
        for (long long p : parts) s += "a(-" + std::to_string(p) + ")";
        return s + "|hw>";
    }
};

class GradedVector {
public:
    GradedVector() = default;
    explicit GradedVector(const Rational& charge) : charge_(charge) {}

    static GradedVector highest_weight(const Rational& charge) {
        GradedVector v(charge);
        v.terms_.emplace(FockMonomial{}, Scalar(1));
        return v;
    }
    static GradedVector vacuum() { return highest_weight(Rational(0)); }

    /// alpha(-n1)...alpha(-nr) |hw_charge>, parts given in any order.
    static GradedVector monomial(const Rational& charge, std::vector<long long> parts,
                                 const Scalar& c = Scalar(1)) {
        std::sort(parts.begin(), parts.end(), std::greater<>());
        GradedVector v(charge);
        v.add_term(FockMonomial{std::move(parts)}, c);
        return v;
    }

    const Rational& charge() const { return charge_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<FockMonomial, Scalar>& terms() const { return terms_; }

    void add_term(const FockMonomial& m, const Scalar& c) {
        if (c.is_zero()) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) terms_.emplace(m, c);
        else {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    void add_in(const GradedVector& o) {
        if (o.is_zero()) return;
        if (is_zero()) charge_ = o.charge_;
        else if (charge_ != o.charge_) throw std::invalid_argument("GradedVector: charge mismatch");
        for (const auto& [m, c] : o.terms_) add_term(m, c);
    }

    friend GradedVector operator+(GradedVector a, const GradedVector& b) {
        a.add_in(b);
        return a;
    }
    GradedVector operator-() const { return scaled(Scalar(-1)); }
    friend GradedVector operator-(GradedVector a, const GradedVector& b) {
        a.add_in(-b);
        return a;
    }

    GradedVector scaled(const Scalar& s) const {
        GradedVector r(charge_);
        if (s.is_zero()) return r;
        for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * s);
        return r;
    }

    friend bool operator==(const GradedVector& a, const GradedVector& b) {
        if (a.is_zero() && b.is_zero()) return true;
        return a.charge_ == b.charge_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const GradedVector& a, const GradedVector& b) { return !(a == b); }

    Rational weight_of(const FockMonomial& m) const {
        return charge_ * charge_ / 2 + m.degree();
    }

    /// L(0)-weight of the lowest/highest term present; requires nonzero.
    Rational min_weight() const {
        Rational w = weight_of(terms_.begin()->first);
        for (const auto& [m, c] : terms_) w = std::min(w, weight_of(m));
        return w;
    }
    Rational max_weight() const {
        Rational w = weight_of(terms_.begin()->first);
        for (const auto& [m, c] : terms_) w = std::max(w, weight_of(m));
        return w;
    }
    long long max_degree() const { // oscillator degree above the highest-weight vector
        long long d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
        return d;
    }

    bool homogeneous() const {
        if (terms_.empty()) return true;
        long long d = terms_.begin()->first.degree();
        for (const auto& [m, c] : terms_)
            if (m.degree() != d) return false;
        return true;
    }

    /// Splits into homogeneous components keyed by oscillator degree.
    std::map<long long, GradedVector> components() const {
        std::map<long long, GradedVector> out;
        for (const auto& [m, c] : terms_) {
            auto it = out.find(m.degree());
            if (it == out.end()) it = out.emplace(m.degree(), GradedVector(charge_)).first;
            it->second.add_term(m, c);
        }
        return out;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::string s;
        bool first = true;
        for (const auto& [m, c] : terms_) {
            if (!first) s += " + ";
            first = false;
            s += "(" + c.str() + ")" + m.str();
        }
        return s;
    }

private:
    Rational charge_ = Rational(0);
    std::map<FockMonomial, Scalar> terms_;
};

template <>
struct CoeffOps<GradedVector> {
    static bool is_zero(const GradedVector& v) { return v.is_zero(); }
    static void add_in(GradedVector& a, const GradedVector& b) { a.add_in(b); }
    static GradedVector scale(const GradedVector& a, const Scalar& s) { return a.scaled(s); }
};

using VectorSeries = Series<GradedVector>;

/// alpha(n) acting on v (n < 0 creates, n = 0 multiplies by the charge,
/// n > 0 annihilates via the bracket [alpha(n), alpha(-n)] = n).
inline GradedVector alpha_apply(long long n, const GradedVector& v) {
    GradedVector out(v.charge());
    for (const auto& [m, c] : v.terms()) {
        if (n < 0) {
            FockMonomial nm = m;
            nm.parts.insert(std::upper_bound(nm.parts.begin(), nm.parts.end(), -n, std::greater<>()),
                            -n);
            out.add_term(nm, c);
        } else if (n == 0) {
            out.add_term(m, c.scaled(v.charge()));
        } else {
            long long count = 0;
            for (long long p : m.parts)
                if (p == n) ++count;
            if (count == 0) continue;
            FockMonomial nm = m;
            auto it = std::find(nm.parts.begin(), nm.parts.end(), n);
            nm.parts.erase(it);
            out.add_term(nm, c.scaled(Rational(n * count)));
        }
    }
    return out;
}

/// Virasoro mode L(n) = (1/2) sum_{a+b=n} :alpha(a)alpha(b): for c = 1.
inline GradedVector virasoro(long long n, const GradedVector& v) {
    GradedVector out(v.charge());
    if (v.is_zero()) return out;
    long long maxpart = 0;
    for (const auto& [m, c] : v.terms()) maxpart = std::max(maxpart, m.max_part());
    // strictly a < b pairs: b from floor(n/2)+1 up
    long long half_floor = (n >= 0) ? n / 2 : -((-n + 1) / 2);
    long long b_lo = half_floor + 1;
    for (long long b = b_lo; b <= std::max(maxpart, 0LL); ++b) {
        GradedVector t = alpha_apply(b, v);
        if (t.is_zero()) continue;
        out.add_in(alpha_apply(n - b, t));
    }
    if (n % 2 == 0) {
        GradedVector t = alpha_apply(n / 2, alpha_apply(n / 2, v));
        out.add_in(t.scaled(Rational(1, 2)));
    }
    return out;
}

/// All monomials of M(1,lambda) with L(0)-weight <= degree_cap, in the
/// deterministic (degree, lexicographic) order.
inline std::vector<FockMonomial> module_basis(const Rational& lambda, const Rational& degree_cap) {
    Rational base = lambda * lambda / 2;
    std::vector<FockMonomial> out;
    if (degree_cap < base) return out;
    long long dmax = to_ll(rat_floor(degree_cap - base));
    // partitions of d for d = 0..dmax
    std::vector<std::vector<std::vector<long long>>> parts(dmax + 1);
    for (long long d = 0; d <= dmax; ++d) {
        std::vector<long long> cur;
        // descending partitions via recursion
        std::function<void(long long, long long)> rec = [&](long long rem, long long maxp) {
            if (rem == 0) {
                parts[d].push_back(cur);
                return;
            }
            for (long long p = std::min(rem, maxp); p >= 1; --p) {
                cur.push_back(p);
                rec(rem - p, p);
                cur.pop_back();
            }
        };
        rec(d, d == 0 ? 1 : d);
    }
    std::vector<FockMonomial> monos;
    for (long long d = 0; d <= dmax; ++d)
        for (auto& p : parts[d]) monos.push_back(FockMonomial{p});
    std::sort(monos.begin(), monos.end());
    return monos;
}

/// omega = (1/2) alpha(-1)^2 1 in M(1); central charge 1.
inline GradedVector conformal_vector() {
    return GradedVector::monomial(Rational(0), {1, 1}, Scalar(Rational(1, 2)));
}

/// Applies a vector-valued operator (one fresh variable) to every coefficient
/// of a series: out(..., newvar) = sum_k per_coeff(s_k)(newvar) * monomial_k.
/// per_coeff returns a VectorSeries in exactly {newvar}.
template <class F>
VectorSeries compose_new_var(const VectorSeries& s, char newvar, long long newden,
                             const Rational& hi_new, F&& per_coeff) {
    std::vector<VarSpec> full = s.vars();
    full.push_back({newvar, newden});
    VectorSeries out(full);
    for (size_t i = 0; i < s.vars().size(); ++i) {
        out.set_hi_num(i, s.hi_num(i));
        out.set_lo_num(i, s.lo_num(i));
    }
    out.set_trust(newvar, hi_new);
    std::optional<Rational> lo_new;
    for (const auto& [k, vec] : s.entries()) {
        VectorSeries inner = per_coeff(vec);
        if (inner.nvars() != 1 || inner.vars()[0].id != newvar)
            throw std::invalid_argument("compose_new_var: per_coeff variable mismatch");
        auto l = inner.lower(newvar);
        if (l && (!lo_new || *l < *lo_new)) lo_new = l;
        auto h = inner.trust(newvar);
        // entries live on the inner grid, so trust floored to it loses nothing
        Rational eff(VectorSeries::floor_num(hi_new, inner.den(newvar)), inner.den(newvar));
        if (h && *h < eff)
            throw WindowError("compose_new_var: inner window narrower than requested");
        for (const auto& [ik, vec2] : inner.entries()) {
            std::vector<Rational> exps;
            exps.reserve(full.size());
            for (size_t i = 0; i < s.vars().size(); ++i) exps.push_back(s.exp_of(k, i));
            exps.push_back(inner.exp_of(ik, 0));
            out.add_term(exps, vec2);
        }
    }
    out.set_lower(newvar, lo_new);
    return out;
}

} // namespace orbifusion
