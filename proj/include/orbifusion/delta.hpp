#pragma once

#include "orbifusion/boson.hpp"
#include "orbifusion/report.hpp"

#include <mutex>

namespace orbifusion {

// The Delta_k(z) operator:
//
//   Delta_k(z) = exp( sum_{n>=1} a_n z^{-n/k} L(n) ) k^{-L(0)} z^{(1/k-1)L(0)},
//
// with a_n pinned by  exp(sum_{n>=1} -a_n x^{n+1} d/dx) x = (1/k)(1+x)^k - 1/k.
// Applied to any vector it is a finite series, computed here exactly. On a
// module whose weights sit in delta + Z the k-power is taken as
// k^{-(L(0)-delta)} (an integer power of k), a declared normalization that
// rescales every identity by one and the same constant per weight class.

struct DeltaCoefficients {
    long long k = 1;
    std::vector<Rational> a; // a[n-1] = a_n
};

namespace detail {

// exp(sum -a_m x^{m+1} d/dx) x as a polynomial in x, through degree `order`
inline std::vector<Rational> exp_derivation_on_x(const std::vector<Rational>& a, long long order) {
    std::vector<Rational> total(order + 1, Rational(0));
    std::vector<Rational> cur(order + 1, Rational(0));
    if (order >= 1) cur[1] = 1; // the seed x
    long long j = 0;
    for (;;) {
        bool nonzero = false;
        for (const auto& c : cur)
            if (c != 0) nonzero = true;
        if (!nonzero) break;
        for (long long d = 0; d <= order; ++d) total[d] += cur[d];
        ++j;
        // apply D/j with D = sum_m -a_m x^{m+1} d/dx
        std::vector<Rational> nxt(order + 1, Rational(0));
        for (long long d = 0; d <= order; ++d) {
            if (cur[d] == 0 || d == 0) continue;
            for (size_t m = 1; m <= a.size(); ++m) {
                long long nd = d + static_cast<long long>(m);
                if (nd > order) break;
                nxt[nd] += -a[m - 1] * d * cur[d] / j;
            }
        }
        cur = std::move(nxt);
        if (j > order + 2) break; // D raises degree, so this never triggers
    }
    return total;
}

} // namespace detail

/// Solves for a_1..a_count by order-by-order coefficient matching.
inline DeltaCoefficients solve_an(long long k, long long count) {
    static std::map<std::pair<long long, long long>, DeltaCoefficients> cache;
    static std::mutex mtx;
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find({k, count});
        if (it != cache.end()) return it->second;
    }
    DeltaCoefficients out;
    out.k = k;
    for (long long n = 1; n <= count; ++n) {
        // with a_n = 0, the x^{n+1} coefficient of exp(D)x is K_n - a_n
        std::vector<Rational> trial = out.a;
        trial.push_back(Rational(0));
        auto e = detail::exp_derivation_on_x(trial, n + 1);
        Rational target = binomial(Rational(k), n + 1) / k; // (1/k) C(k, n+1)
        out.a.push_back(e[n + 1] - target);
    }
    std::lock_guard<std::mutex> lock(mtx);
    cache.emplace(std::make_pair(k, count), out);
    return out;
}

enum class DeltaKind { forward, inverse };

/// The finite series Delta_k(z^zpow) v (kind = forward) or its inverse
/// applied to v; exact and complete (full trust). zpow is 1 or k, matching
/// the paper's two distinct argument conventions.
inline VectorSeries apply_delta(long long k, const GradedVector& v, DeltaKind kind, long long zpow,
                                char var) {
    long long maxdeg = v.max_degree();
    DeltaCoefficients ac = solve_an(k, std::max<long long>(1, maxdeg));
    Rational charge = v.charge();
    Rational delta0 = charge * charge / 2; // lowest weight of the class
    long long den = lllcm(k * to_ll(rat_den(delta0 * (1 - Rational(1, k)))), k);
    den = lllcm(den, zpow);
    VectorSeries out(std::vector<VarSpec>{VarSpec{var, den}});
    out.set_trust(var, std::nullopt);

    for (const auto& [d, hom] : v.components()) {
        Rational h = delta0 + d;
        if (kind == DeltaKind::forward) {
            // diagonal part first: k^{-d} z^{(1/k-1)h}
            Rational base_exp = (Rational(1, k) - 1) * h;
            GradedVector cur = hom.scaled(Scalar(Rational(Integer(1), int_pow(k, static_cast<unsigned long>(d)))));
            // exp(sum a_n z^{-n/k} L(n)): iterate A^j / j!
            std::map<Rational, GradedVector> acc; // exponent offset -> vector
            acc[Rational(0)] = cur;
            std::map<Rational, GradedVector> pow = acc;
            long long j = 0;
            while (!pow.empty()) {
                ++j;
                std::map<Rational, GradedVector> nxt;
                for (const auto& [off, vec] : pow) {
                    long long md = vec.max_degree();
                    for (long long n = 1; n <= md; ++n) {
                        GradedVector ln = virasoro(n, vec);
                        if (ln.is_zero()) continue;
                        GradedVector t = ln.scaled(Scalar(ac.a[n - 1] / j));
                        Rational noff = off - Rational(n, k);
                        auto it = nxt.find(noff);
                        if (it == nxt.end()) nxt.emplace(noff, t);
                        else it->second.add_in(t);
                    }
                }
                for (auto it = nxt.begin(); it != nxt.end();)
                    it = it->second.is_zero() ? nxt.erase(it) : std::next(it);
                for (const auto& [off, vec] : nxt) {
                    auto it = acc.find(off);
                    if (it == acc.end()) acc.emplace(off, vec);
                    else it->second.add_in(vec);
                }
                pow = std::move(nxt);
            }
            for (const auto& [off, vec] : acc)
                if (!vec.is_zero()) out.add_term({(base_exp + off) * zpow}, vec);
        } else {
            // inverse: exp(-sum a_n z^{-n/k} L(n)) first, then z^{(1-1/k)L(0)} k^{L(0)-delta0}
            std::map<Rational, GradedVector> acc;
            acc[Rational(0)] = hom;
            std::map<Rational, GradedVector> pow = acc;
            long long j = 0;
            while (!pow.empty()) {
                ++j;
                std::map<Rational, GradedVector> nxt;
                for (const auto& [off, vec] : pow) {
                    long long md = vec.max_degree();
                    for (long long n = 1; n <= md; ++n) {
                        GradedVector ln = virasoro(n, vec);
                        if (ln.is_zero()) continue;
                        GradedVector t = ln.scaled(Scalar(-ac.a[n - 1] / j));
                        Rational noff = off - Rational(n, k);
                        auto it = nxt.find(noff);
                        if (it == nxt.end()) nxt.emplace(noff, t);
                        else it->second.add_in(t);
                    }
                }
                for (auto it = nxt.begin(); it != nxt.end();)
                    it = it->second.is_zero() ? nxt.erase(it) : std::next(it);
                for (const auto& [off, vec] : nxt) {
                    auto it = acc.find(off);
                    if (it == acc.end()) acc.emplace(off, vec);
                    else it->second.add_in(vec);
                }
                pow = std::move(nxt);
            }
            for (const auto& [off, vec] : acc) {
                if (vec.is_zero()) continue;
                // vec may be inhomogeneous; apply the diagonal part per component
                for (const auto& [dd, hom2] : vec.components()) {
                    Rational h2 = delta0 + dd;
                    Rational e = (1 - Rational(1, k)) * h2 + off;
                    Scalar kpow{Rational(int_pow(k, static_cast<unsigned long>(dd)))};
                    out.add_term({e * zpow}, hom2.scaled(kpow));
                }
            }
        }
    }
    std::optional<Rational> lo;
    for (const auto& [key, vec] : out.entries()) {
        Rational e = out.exp_of(key, 0);
        if (!lo || e < *lo) lo = e;
    }
    out.set_lower(var, lo);
    return out;
}

/// DeltaImage in the spec's sense: a finite exponent -> homogeneous vector map.
using DeltaImage = VectorSeries;

// ---------------------------------------------------------------------------
// verification

/// Delta-conjugation (BDM):
///   Delta_k(x) Y_W(v,z) w = Y_W(Delta_k(x+z) v, (x+z)^{1/k} - x^{1/k}) Delta_k(x) w
/// checked coefficientwise on the rectangle x <= cx, z <= cz.
inline CheckResult verify_delta_conjugation(long long k, const GradedVector& v,
                                            const GradedVector& w, const Rational& cx,
                                            const Rational& cz) {
    std::string window = "x<=" + rat_str(cx) + ", z<=" + rat_str(cz);
    try {
        long long xden = 2 * k * to_ll(rat_den(w.charge() * w.charge() / 2));
        long long zden = xden;

        // LHS: Delta_k(x) applied to every coefficient of Y_W(v,z)w
        Rational zcap = cz + 1;
        VectorSeries yvw = boson_vertex(v, w, 'z', zcap);
        VectorSeries lhs = compose_new_var(yvw, 'x', xden, cx + 1, [&](const GradedVector& u) {
            VectorSeries d = apply_delta(k, u, DeltaKind::forward, 1, 'x');
            d.refine_den('x', lllcm(d.den('x'), xden));
            d.truncate('x', cx + 1);
            return d;
        });

        // RHS
        VectorSeries dw = apply_delta(k, w, DeltaKind::forward, 1, 'x');
        VectorSeries dv = apply_delta(k, v, DeltaKind::forward, 1, 'y');
        // Delta_k(x+z) v: substitute y^{1/k} -> (x+z)^{1/k}
        auto Lxz = LineSeries::binomial_root('x', 'z', Rational(1, k), Binom::a_plus_b, 1, cz + 2);
        VectorSeries dv_xz = substitute_root(dv, 'y', k, Lxz, cx + v.max_degree() + 2, cz + 1);

        // s-line: (x+z)^{1/k} - x^{1/k}
        LineSeries S;
        S.var_a = 'x';
        S.var_b = 'z';
        S.alpha = Rational(1, k);
        S.den_b = 1;
        long long s_hi = to_ll(rat_floor(cz)) + 3 * (v.max_degree() + w.max_degree() + 2);
        S.hi_b = s_hi;
        for (long long j = 1; j <= s_hi; ++j) {
            Rational c = binomial(Rational(1, k), j);
            if (c != 0) S.terms[j] = Scalar(c);
        }

        std::vector<VarSpec> outvars{{'x', lllcm(xden, k)}, {'z', zden}};
        VectorSeries rhs(outvars);
        rhs.set_trust('x', cx);
        rhs.set_trust('z', cz);
        for (const auto& [kv, vecv] : dv_xz.entries()) {
            Rational evx = dv_xz.exp_of(kv, dv_xz.var_index('x'));
            Rational evz = dv_xz.exp_of(kv, dv_xz.var_index('z'));
            for (const auto& [kw, vecw] : dw.entries()) {
                Rational ewx = dw.exp_of(kw, 0);
                // Y_W(vecv, t)vecw then t -> s-line
                Rational t_hi = (cx + cz + 4 - evx - evz - ewx) * k;
                VectorSeries B = boson_vertex(vecv, vecw, 't', t_hi);
                if (B.empty()) continue;
                VectorSeries sub = substitute_root(B, 't', 1, S, cx - evx - ewx, cz - evz);
                sub.refine_den('x', lllcm(sub.den('x'), to_ll(rat_den(evx + ewx))));
                sub.refine_den('z', lllcm(sub.den('z'), to_ll(rat_den(evz))));
                sub.shift_var('x', evx + ewx);
                sub.shift_var('z', evz);
                sub.truncate('x', cx);
                sub.truncate('z', cz);
                rhs.add_in(sub.reordered({'x', 'z'}));
            }
        }

        VectorSeries lhs2 = lhs.reordered({'x', 'z'});
        lhs2.truncate('x', cx);
        lhs2.truncate('z', cz);
        rhs.truncate('x', cx);
        rhs.truncate('z', cz);
        std::string wit;
        if (lhs2.equal_within_trust(rhs, &wit))
            return CheckResult::ok("delta-conjugation", window);
        return CheckResult::fail("delta-conjugation", window, wit);
    } catch (const WindowError& e) {
        return CheckResult::fail("delta-conjugation", window, e.what());
    }
}

/// d/dz Delta_k(z) w = (1/k) sum_{i>=1} C(-k+1, i) z^{-1-(i-1)/k} L(i-1) Delta_k(z) w,
/// exact at all orders (both sides are finite series).
inline CheckResult verify_derivative_identity(long long k, const GradedVector& w) {
    std::string window = "all orders (finite series)";
    VectorSeries D = apply_delta(k, w, DeltaKind::forward, 1, 'z');
    long long den = D.den('z');

    VectorSeries lhs(std::vector<VarSpec>{VarSpec{'z', den}});
    lhs.set_trust('z', std::nullopt);
    for (const auto& [key, vec] : D.entries()) {
        Rational e = D.exp_of(key, 0);
        if (e == 0) continue;
        lhs.add_term({e - 1}, vec.scaled(Scalar(e)));
    }

    long long denr = lllcm(den, k);
    VectorSeries rhs(std::vector<VarSpec>{VarSpec{'z', denr}});
    rhs.set_trust('z', std::nullopt);
    long long maxdeg = w.max_degree() + 1;
    for (long long i = 1; i <= maxdeg + 1; ++i) {
        Rational c = binomial(Rational(-k + 1), i) / k;
        if (c == 0) continue;
        for (const auto& [key, vec] : D.entries()) {
            GradedVector lv = virasoro(i - 1, vec);
            if (lv.is_zero()) continue;
            rhs.add_term({D.exp_of(key, 0) - 1 - Rational(i - 1, k)}, lv.scaled(Scalar(c)));
        }
    }
    std::string wit;
    if (lhs.equal_within_trust(rhs, &wit)) return CheckResult::ok("delta-derivative", window);
    return CheckResult::fail("delta-derivative", window, wit);
}

/// Forward-then-inverse round trip (matching argument conventions).
inline CheckResult verify_delta_round_trip(long long k, const GradedVector& v, long long zpow) {
    VectorSeries fwd = apply_delta(k, v, DeltaKind::forward, zpow, 'z');
    VectorSeries total(fwd.vars());
    total.set_trust('z', std::nullopt);
    for (const auto& [key, vec] : fwd.entries()) {
        VectorSeries inv = apply_delta(k, vec, DeltaKind::inverse, zpow, 'z');
        inv.refine_den('z', lllcm(inv.den('z'), total.den('z')));
        inv.shift_var('z', fwd.exp_of(key, 0));
        total.add_in(inv);
    }
    VectorSeries expect(total.vars());
    expect.set_trust('z', std::nullopt);
    expect.add_term({Rational(0)}, v);
    std::string wit;
    if (total.equal_within_trust(expect, &wit))
        return CheckResult::ok("delta-round-trip", "exact");
    return CheckResult::fail("delta-round-trip", "exact", wit);
}

/// BDM L(-1) bracket: Delta_k(z)L(-1)w - (1/k) z^{1/k-1} L(-1) Delta_k(z)w = d/dz Delta_k(z)w.
inline CheckResult verify_delta_lminus1(long long k, const GradedVector& w) {
    VectorSeries D = apply_delta(k, w, DeltaKind::forward, 1, 'z');
    VectorSeries A = apply_delta(k, virasoro(-1, w), DeltaKind::forward, 1, 'z');
    long long den = lllcm(lllcm(D.den('z'), A.den('z')), k);
    VectorSeries lhs(std::vector<VarSpec>{VarSpec{'z', den}});
    lhs.set_trust('z', std::nullopt);
    for (const auto& [key, vec] : A.entries()) lhs.add_term({A.exp_of(key, 0)}, vec);
    for (const auto& [key, vec] : D.entries())
        lhs.add_term({D.exp_of(key, 0) + Rational(1, k) - 1},
                     virasoro(-1, vec).scaled(Scalar(Rational(-1, k))));
    VectorSeries rhs(std::vector<VarSpec>{VarSpec{'z', den}});
    rhs.set_trust('z', std::nullopt);
    for (const auto& [key, vec] : D.entries()) {
        Rational e = D.exp_of(key, 0);
        if (e == 0) continue;
        rhs.add_term({e - 1}, vec.scaled(Scalar(e)));
    }
    std::string wit;
    if (lhs.equal_within_trust(rhs, &wit)) return CheckResult::ok("delta-L(-1)-bracket", "exact");
    return CheckResult::fail("delta-L(-1)-bracket", "exact", wit);
}

} // namespace orbifusion
