#pragma once

#include "orbifusion/delta.hpp"
#include "orbifusion/permutation.hpp"

#include <memory>
#include <mutex>

namespace orbifusion {

// The Barron-Dong-Mason sigma-twisted V^{otimes k}-module T_sigma(W) for the
// k-cycle sigma = (1 2 ... k) and W = M(1,lambda):
//
//   Y_{T(W)}(u^1, z) = Y_W(Delta_k(z) u, z^{1/k}),
//   Y_{T(W)}(u^j, z) = Y_{T(W)}(u^1, z) with z^{1/k} -> eta_k^{1-j} z^{1/k}.
//
// Slot-j operators are produced from slot 1 by the exact root-of-unity
// substitution on stored exponents, so the sigma-covariance identity holds by
// construction.

struct TensorMonomial {
    std::vector<FockMonomial> slots;

    long long degree() const {
        long long d = 0;
        for (const auto& s : slots) d += s.degree();
        return d;
    }
    friend bool operator<(const TensorMonomial& a, const TensorMonomial& b) {
        return a.slots < b.slots;
    }
    friend bool operator==(const TensorMonomial& a, const TensorMonomial& b) {
        return a.slots == b.slots;
    }
    std::string str() const {
        std::string s;
        for (size_t i = 0; i < slots.size(); ++i) {
            if (i) s += " (x) ";
            s += slots[i].str();
        }
        return s;
    }
};

class TensorVector {
public:
    TensorVector() = default;
    TensorVector(long long k, std::vector<Rational> charges)
        : k_(k), charges_(std::move(charges)) {}
    explicit TensorVector(long long k) : k_(k), charges_(k, Rational(0)) {}

    /// u in slot j (1-indexed), vacuum elsewhere; charges all zero.
    static TensorVector slot_insertion(long long k, const GradedVector& u, long long j) {
        TensorVector t(k);
        if (u.charge() != 0) throw std::invalid_argument("slot_insertion: charge 0 only");
        for (const auto& [m, c] : u.terms()) {
            TensorMonomial tm;
            tm.slots.assign(k, FockMonomial{});
            tm.slots[j - 1] = m;
            t.add_term(tm, c);
        }
        return t;
    }

    long long k() const { return k_; }
    const std::vector<Rational>& charges() const { return charges_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<TensorMonomial, Scalar>& terms() const { return terms_; }

    void add_term(const TensorMonomial& m, const Scalar& c) {
        if (c.is_zero()) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) terms_.emplace(m, c);
        else {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }
    void add_in(const TensorVector& o) {
        if (o.is_zero()) return;
        if (is_zero()) {
            k_ = o.k_;
            charges_ = o.charges_;
        } else if (k_ != o.k_ || charges_ != o.charges_) {
            throw std::invalid_argument("TensorVector: shape mismatch");
        }
        for (const auto& [m, c] : o.terms_) add_term(m, c);
    }
    friend TensorVector operator+(TensorVector a, const TensorVector& b) {
        a.add_in(b);
        return a;
    }
    TensorVector scaled(const Scalar& s) const {
        TensorVector r(k_, charges_);
        if (s.is_zero()) return r;
        for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * s);
        return r;
    }
    TensorVector operator-() const { return scaled(Scalar(-1)); }
    friend bool operator==(const TensorVector& a, const TensorVector& b) {
        if (a.is_zero() && b.is_zero()) return true;
        return a.k_ == b.k_ && a.charges_ == b.charges_ && a.terms_ == b.terms_;
    }

    /// Applies a permutation of slots: (perm . t) has slot perm(j) = slot j of t.
    TensorVector permuted(const Permutation& p) const {
        TensorVector r(k_, charges_);
        std::vector<Rational> nc(k_);
        for (long long j = 1; j <= k_; ++j) nc[p(j) - 1] = charges_[j - 1];
        r.charges_ = std::move(nc);
        for (const auto& [m, c] : terms_) {
            TensorMonomial nm;
            nm.slots.assign(k_, FockMonomial{});
            for (long long j = 1; j <= k_; ++j) nm.slots[p(j) - 1] = m.slots[j - 1];
            r.add_term(nm, c);
        }
        return r;
    }

    /// The cyclic rotation sigma: slot j -> slot j+1 (slot k -> slot 1).
    TensorVector rotated() const {
        std::vector<long long> img(k_);
        for (long long j = 1; j <= k_; ++j) img[j - 1] = (j % k_) + 1;
        return permuted(Permutation(img));
    }

    Rational weight() const {
        if (is_zero()) return Rational(0);
        Rational base(0);
        for (const auto& c : charges_) base += c * c / 2;
        long long d = 0;
        for (const auto& [m, sc] : terms_) d = std::max(d, m.degree());
        return base + d;
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
    long long k_ = 1;
    std::vector<Rational> charges_;
    std::map<TensorMonomial, Scalar> terms_;
};

template <>
struct CoeffOps<TensorVector> {
    static bool is_zero(const TensorVector& v) { return v.is_zero(); }
    static void add_in(TensorVector& a, const TensorVector& b) { a.add_in(b); }
    static TensorVector scale(const TensorVector& a, const Scalar& s) { return a.scaled(s); }
};

/// The eta_k^r-eigencomponent u^{(r)} = (1/k) sum_j eta_k^{-jr} sigma^j(u).
inline TensorVector eigencomponent(const TensorVector& u, long long r) {
    long long k = u.k();
    TensorVector out(u.k(), u.charges());
    TensorVector rot = u;
    for (long long j = 0; j < k; ++j) {
        out.add_in(rot.scaled(Scalar::root_of_unity(k, -j * r).scaled(Rational(1, k))));
        rot = rot.rotated();
    }
    return out;
}

/// A sum of single-slot insertions, the shape in which twisted operators are
/// evaluated: sum of coeff * v^{slot}.
struct SlotSum {
    long long k = 1;
    std::vector<std::tuple<Scalar, long long, GradedVector>> terms;

    static SlotSum single(long long k, const GradedVector& v, long long slot) {
        SlotSum s;
        s.k = k;
        s.terms.emplace_back(Scalar(1), slot, v);
        return s;
    }

    /// The eta_k^r-eigencomponent of v^{slot}: (1/k) sum_j eta^{-jr} v^{slot+j}.
    static SlotSum eigen(long long k, const GradedVector& v, long long slot, long long r) {
        SlotSum s;
        s.k = k;
        for (long long j = 0; j < k; ++j) {
            long long sj = (slot - 1 + j) % k + 1;
            s.terms.emplace_back(Scalar::root_of_unity(k, -j * r).scaled(Rational(1, k)), sj, v);
        }
        return s;
    }

    Rational max_weight() const {
        Rational w(0);
        for (const auto& [c, slot, v] : terms)
            if (!v.is_zero()) w = std::max(w, v.max_weight());
        return w;
    }
};

struct TwistedModule {
    long long k = 2;
    Rational charge; // W = M(1, charge); T_sigma(W) = W as a space

    // memoized slot operators; results are identical with or without the cache
    struct Cache {
        std::mutex mtx;
        std::map<std::string, VectorSeries> slot_ops;
    };
    std::shared_ptr<Cache> cache = std::make_shared<Cache>();

    Rational ground_weight() const {
        // lambda^2/(2k) + (c/24)(k - 1/k), c = 1
        return charge * charge / Rational(2 * k) + Rational(1, 24) * (Rational(k) - Rational(1, k));
    }

    long long exp_den() const {
        return lllcm(2 * k * to_ll(rat_den(charge * charge / 2)), k);
    }

    /// Y_{T(W)}(u^j, z) w on the requested window; exact coefficients.
    VectorSeries slot_vertex(const GradedVector& u, long long j, const GradedVector& w, char var,
                             const Rational& hi) const {
        if (u.charge() != 0) throw std::invalid_argument("slot_vertex: charge-0 insertions only");
        if (j != 1) {
            // slot j from slot 1 by the exact root-of-unity substitution
            // z^{1/k} -> eta_k^{1-j} z^{1/k}: entry at z^E picks eta_k^{(1-j)kE}
            VectorSeries base = slot_vertex(u, 1, w, var, hi);
            long long kk = k, jj = j;
            base.scale_by_exponent(var, [kk, jj](const Rational& E) {
                Rational kE = E * kk;
                return Scalar::root_of_unity(kk, (1 - jj) * to_ll(rat_num(kE)));
            });
            return base;
        }
        if (!cache) return slot_vertex_uncached(u, j, w, var, hi);
        // canonicalize the window to the next integer so nearby requests share
        // one cache entry; truncate back to the requested trust
        Rational hi_c = Rational(rat_ceil(hi));
        std::string key = u.str() + "|" + w.str() + "|" + rat_str(hi_c) + "|" + var;
        {
            std::lock_guard<std::mutex> lock(cache->mtx);
            auto it = cache->slot_ops.find(key);
            if (it != cache->slot_ops.end()) {
                VectorSeries r = it->second;
                r.truncate(var, hi);
                return r;
            }
        }
        VectorSeries result = slot_vertex_uncached(u, 1, w, var, hi_c);
        {
            std::lock_guard<std::mutex> lock(cache->mtx);
            cache->slot_ops.emplace(std::move(key), result);
        }
        result.truncate(var, hi);
        return result;
    }

    VectorSeries slot_vertex_uncached(const GradedVector& u, long long j, const GradedVector& w,
                                      char var, const Rational& hi) const {
        long long den = exp_den();
        VectorSeries out(std::vector<VarSpec>{VarSpec{var, den}});
        out.set_trust(var, hi);
        if (u.is_zero() || w.is_zero()) return out;

        VectorSeries D = apply_delta(k, u, DeltaKind::forward, 1, 'y');
        std::optional<Rational> lo;
        for (const auto& [key, vec] : D.entries()) {
            Rational e = D.exp_of(key, 0);
            // f-window: e + f/k <= hi
            Rational fhi = (hi - e) * k;
            VectorSeries B = boson_vertex(vec, w, 't', fhi);
            for (const auto& [bk, bvec] : B.entries()) {
                Rational f = B.exp_of(bk, 0);
                Rational E = e + f / k;
                // slot twist: entry at z^E picks eta_k^{(1-j) kE}
                Rational kE = E * k;
                Scalar tw = Scalar::root_of_unity(k, (1 - j) * to_ll(rat_num(kE)));
                out.add_term({E}, bvec.scaled(tw));
                if (!lo || E < *lo) lo = E;
            }
        }
        // structural low: exponent E has target degree deg(w) + k(wt u + E) >= 0
        Rational structural = -u.max_weight() - Rational(w.max_degree()) / k;
        out.set_lower(var, structural);
        (void)lo;
        return out;
    }

    VectorSeries apply(const SlotSum& u, const GradedVector& w, char var, const Rational& hi) const {
        long long den = exp_den();
        VectorSeries out(std::vector<VarSpec>{VarSpec{var, den}});
        out.set_trust(var, hi);
        for (const auto& [c, slot, v] : u.terms) {
            VectorSeries s = slot_vertex(v, slot, w, var, hi);
            s.scale_in_place(c);
            out.add_in(s);
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// L_{T_sigma}(n) extraction and the graded-piece comparison with (1/k) L(nk)

/// Y_{T(W)}(omega^{(k)}, z) w with omega^{(k)} = omega^1 + ... + omega^k.
inline VectorSeries twisted_conformal(const TwistedModule& T, const GradedVector& w, char var,
                                      const Rational& hi) {
    SlotSum s;
    s.k = T.k;
    for (long long j = 1; j <= T.k; ++j) s.terms.emplace_back(Scalar(1), j, conformal_vector());
    return T.apply(s, w, var, hi);
}

/// Compares L_T(n), extracted from the conformal slot sum, with the BDM
/// formula on every basis vector of W-degree <= cap.
inline CheckResult verify_twisted_virasoro(const TwistedModule& T, long long n, const Rational& cap) {
    std::string name = "L_T(" + std::to_string(n) + ") formula, k=" + std::to_string(T.k) +
                       ", lambda=" + rat_str(T.charge);
    std::string window = "W-degree <= " + rat_str(cap);
    Rational base = T.charge * T.charge / 2;
    for (const FockMonomial& m : module_basis(T.charge, base + cap)) {
        GradedVector w(T.charge);
        w.add_term(m, Scalar(1));
        // coefficient of z^{-n-2}... L_T(n) sits at exponent -n-2 + (weights in (1/k)Z)
        Rational e = Rational(-n) - 2;
        VectorSeries s = twisted_conformal(T, w, 'z', e + 1);
        auto got = s.find({e});
        GradedVector expect;
        if (n == 0) {
            // (1/k) L(0) + (c/24)(k - 1/k) on w
            Rational lw = base + m.degree();
            expect = w.scaled(Scalar(lw / T.k + Rational(1, 24) * (Rational(T.k) - Rational(1, T.k))));
        } else {
            expect = virasoro(n * T.k, w).scaled(Scalar(Rational(1, T.k)));
        }
        GradedVector gotv = got ? *got : GradedVector(T.charge);
        if (!(gotv == expect))
            return CheckResult::fail(name, window, "mismatch on " + m.str());
    }
    return CheckResult::ok(name, window);
}

/// Fractional-support invariant: for the eigencomponent u^{(r)} the twisted
/// operator has exponents in -r/k + Z only.
inline CheckResult verify_fractional_support(const TwistedModule& T, const GradedVector& u,
                                             const GradedVector& w, const Rational& hi) {
    std::string name = "fractional support, k=" + std::to_string(T.k);
    for (long long r = 0; r < T.k; ++r) {
        SlotSum ur = SlotSum::eigen(T.k, u, 1, r);
        VectorSeries s = T.apply(ur, w, 'z', hi);
        for (const auto& [key, vec] : s.entries()) {
            Rational e = s.exp_of(key, 0);
            Rational frac = e * T.k; // must be ≡ -r (mod k)
            if (!is_integer(frac)) return CheckResult::fail(name, "", "non-(1/k)Z exponent");
            long long num = to_ll(rat_num(frac)) % T.k;
            if (num < 0) num += T.k;
            long long want = ((-r) % T.k + T.k) % T.k;
            if (num != want)
                return CheckResult::fail(name, "", "exponent " + rat_str(e) + " in wrong coset for r=" +
                                                       std::to_string(r));
        }
    }
    return CheckResult::ok(name, "z <= " + rat_str(hi));
}

} // namespace orbifusion
