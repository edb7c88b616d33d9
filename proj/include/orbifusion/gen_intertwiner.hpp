#pragma once

#include "orbifusion/twisted.hpp"

namespace orbifusion {

// Generalized intertwining operators phi(x) between twisted modules and the
// weak-module action
//
//   u_n^H phi(x) = Res_{x1} sum_{j>=0} C(-r/k, j) x^{-r/k-j} x1^{r/k}
//                  ( (x1-x)^{n+j} Y_{M3}(u,x1) phi(x)
//                    - (-x+x1)^{n+j} phi(x) Y_{M2}(u,x1) )
//
// for u in the eta_k^r eigencomponent. The j-sum is finite: terms with
// n+j >= K cancel exactly, K the recorded weak-commutativity order of the
// pair, so the sum runs through j = K-n-1. Everything is evaluated on module
// vectors through requested windows.

struct GenIntertwiner {
    long long k = 2;
    TwistedModule src; // M2
    TwistedModule tgt; // M3
    // weak-commutativity order: K(u) = max(0, ceil(wt_max(u) + korder_base))
    Rational korder_base;
    long long xgrid = 0; // exponent grid hint for the x variable (0 = probe)
    std::function<VectorSeries(const GradedVector&, char, const Rational&)> app;

    VectorSeries operator()(const GradedVector& w, char var, const Rational& hi) const {
        return app(w, var, hi);
    }
    long long comm_order(const Rational& u_weight) const {
        Rational K = u_weight + korder_base;
        long long c = to_ll(rat_ceil(K)); // ceil
        return std::max<long long>(0, c);
    }
};

/// Wraps phi with a per-object evaluation cache (results are unchanged).
inline GenIntertwiner memoized(const GenIntertwiner& phi) {
    struct Memo {
        std::mutex mtx;
        std::map<std::string, VectorSeries> table;
    };
    auto memo = std::make_shared<Memo>();
    GenIntertwiner g = phi;
    auto inner = phi.app;
    g.app = [memo, inner](const GradedVector& w, char var, const Rational& hi) {
        Rational hi_c = Rational(rat_ceil(hi));
        std::string key = w.str() + "|" + var + "|" + rat_str(hi_c);
        {
            std::lock_guard<std::mutex> lock(memo->mtx);
            auto it = memo->table.find(key);
            if (it != memo->table.end()) {
                VectorSeries r = it->second;
                r.truncate(var, hi);
                return r;
            }
        }
        VectorSeries r = inner(w, var, hi_c);
        {
            std::lock_guard<std::mutex> lock(memo->mtx);
            memo->table.emplace(std::move(key), r);
        }
        r.truncate(var, hi);
        return r;
    };
    return g;
}

/// phi(x) = Y_T(v^j, x): a module operator viewed as a generalized intertwiner.
inline GenIntertwiner slot_op_intertwiner(const TwistedModule& T, const GradedVector& v,
                                          long long slot) {
    GenIntertwiner g;
    g.k = T.k;
    g.src = T;
    g.tgt = T;
    g.korder_base = v.is_zero() ? Rational(0) : v.max_weight();
    g.xgrid = T.exp_den();
    g.app = [T, v, slot](const GradedVector& w, char var, const Rational& hi) {
        return T.slot_vertex(v, slot, w, var, hi);
    };
    return g;
}

/// (u^{slot})_n^H phi applied to w, exact on x <= hi.
inline VectorSeries unH_apply(const GenIntertwiner& phi, const GradedVector& u, long long slot,
                              long long n, const GradedVector& w, char xvar, const Rational& hi) {
    const long long k = phi.k;
    long long xden = lllcm(lllcm(phi.src.exp_den(), phi.tgt.exp_den()), k);
    if (phi.xgrid > 0) {
        xden = lllcm(xden, phi.xgrid);
    } else {
        VectorSeries probe = phi(w, xvar, hi);
        xden = lllcm(xden, probe.den(xvar));
    }
    VectorSeries out(std::vector<VarSpec>{VarSpec{xvar, xden}});
    out.set_trust(xvar, hi);
    if (u.is_zero() || w.is_zero()) return out;

    long long K = phi.comm_order(u.max_weight());
    long long jmax = K - n - 1;
    if (jmax < 0) return out; // all terms cancel

    // phi(x) w on the widest window any (r, j) term needs
    VectorSeries Pmax = phi(w, xvar, hi + 1 + jmax);
    Pmax.refine_den(xvar, lllcm(Pmax.den(xvar), xden));

    for (long long r = 0; r < k; ++r) {
        SlotSum ur = SlotSum::eigen(k, u, slot, r);
        Rational s = Rational(r, k);
        // term-2 input is j-independent: only x1-exponents <= -1 - s contribute
        Rational hix1b = -1 - s;
        VectorSeries Q = phi.src.apply(ur, w, '~', hix1b);
        for (long long j = 0; j <= jmax; ++j) {
            Rational bc = binomial(Rational(-r, k), j);
            if (bc == 0) continue;
            Rational shift = -s - j;
            Rational hiR = hi - shift; // window before the x^{-r/k-j} factor
            Rational beta = Rational(n + j);

            // term 1: Res_{x1} x1^{r/k} (x1-x)^{n+j} Y_{M3}(u^{(r)}, x1) phi(x) w
            VectorSeries R1;
            bool have1 = false;
            if (!Pmax.empty()) {
                Rational loP = Pmax.lower(xvar).value_or(*Pmax.min_exp(xvar));
                Rational hix1 = hiR - loP - beta - s; // e1 <= f_x - e_x - beta - s - 1
                VectorSeries G1 = compose_new_var(Pmax, '~', phi.tgt.exp_den(), hix1,
                                                  [&](const GradedVector& vec) {
                                                      return phi.tgt.apply(ur, vec, '~', hix1);
                                                  });
                R1 = residue_binom(G1, '~', xvar, s, beta, true, hiR);
                have1 = !R1.empty();
            }
            // term 2: Res_{x1} x1^{r/k} (-x+x1)^{n+j} phi(x) Y_{M2}(u^{(r)}, x1) w
            VectorSeries R2;
            bool have2 = false;
            if (!Q.empty()) {
                Rational loQ = Q.lower('~').value_or(*Q.min_exp('~'));
                Rational imax = -1 - s - loQ;
                Rational hixphi = hiR - beta + imax;
                VectorSeries G2 = compose_new_var(Q, xvar, xden, hixphi,
                                                  [&](const GradedVector& vec) {
                                                      VectorSeries t = phi(vec, xvar, hixphi);
                                                      t.refine_den(xvar, lllcm(t.den(xvar), xden));
                                                      return t;
                                                  });
                R2 = residue_binom(G2, '~', xvar, s, beta, false, hiR);
                have2 = !R2.empty();
            }
            if (have1) {
                R1.refine_den(xvar, lllcm(R1.den(xvar), xden));
                R1.shift_var(xvar, shift);
                R1.scale_in_place(Scalar(bc));
                R1.truncate(xvar, hi);
                out.add_in(R1);
            }
            if (have2) {
                R2.refine_den(xvar, lllcm(R2.den(xvar), xden));
                R2.shift_var(xvar, shift);
                R2.scale_in_place(Scalar(-bc));
                R2.truncate(xvar, hi);
                out.add_in(R2);
            }
        }
    }
    out.set_trust(xvar, hi);
    return out;
}

/// Y_H(u^{slot}, z) phi(x) w as a two-variable series on x <= hi_x, z <= hi_z.
inline VectorSeries YH_apply(const GenIntertwiner& phi, const GradedVector& u, long long slot,
                             const GradedVector& w, char xvar, char zvar, const Rational& hi_x,
                             const Rational& hi_z) {
    long long xden = lllcm(lllcm(phi.src.exp_den(), phi.tgt.exp_den()), phi.k);
    if (phi.xgrid > 0) {
        xden = lllcm(xden, phi.xgrid);
    } else {
        VectorSeries probe = unH_apply(
            phi, u, slot,
            phi.comm_order(u.is_zero() ? Rational(0) : u.max_weight()) - 1, w, xvar, hi_x);
        xden = lllcm(xden, probe.den(xvar));
    }
    std::vector<VarSpec> vars{{xvar, xden}, {zvar, 1}};
    VectorSeries out(vars);
    out.set_trust(xvar, hi_x);
    out.set_trust(zvar, hi_z);
    if (u.is_zero() || w.is_zero()) return out;
    long long K = phi.comm_order(u.max_weight());
    long long n_lo = -1 - to_ll(rat_floor(hi_z));
    for (long long n = n_lo; n <= K - 1; ++n) {
        VectorSeries c = unH_apply(phi, u, slot, n, w, xvar, hi_x);
        c.refine_den(xvar, lllcm(c.den(xvar), xden));
        for (const auto& [key, vec] : c.entries())
            out.add_term({c.exp_of(key, 0), Rational(-n - 1)}, vec);
    }
    out.set_lower(zvar, Rational(-K));
    return out;
}

// ---------------------------------------------------------------------------
// multi-slot twisted action via H-modes: Y_T(p^i (x) b, x) = (p^i)_{-1}^H Y_T(b, x)

inline VectorSeries twisted_tensor_apply(const TwistedModule& T, const TensorVector& a,
                                         const GradedVector& w, char var, const Rational& hi);

/// phi(x) = Y_T(b, x) for a general tensor argument b, as a GenIntertwiner.
inline GenIntertwiner tensor_op_intertwiner(const TwistedModule& T, const TensorVector& b) {
    GenIntertwiner g;
    g.k = T.k;
    g.src = T;
    g.tgt = T;
    g.korder_base = b.weight();
    g.xgrid = T.exp_den();
    g.app = [T, b](const GradedVector& w, char var, const Rational& hi) {
        return twisted_tensor_apply(T, b, w, var, hi);
    };
    return g;
}

inline VectorSeries twisted_tensor_apply_uncached(const TwistedModule& T, const TensorVector& a,
                                                  const GradedVector& w, char var, const Rational& hi);

inline VectorSeries twisted_tensor_apply(const TwistedModule& T, const TensorVector& a,
                                         const GradedVector& w, char var, const Rational& hi) {
    static std::map<std::string, VectorSeries> cache;
    static std::mutex mtx;
    Rational hi_c = Rational(rat_ceil(hi));
    std::string key = std::to_string(T.k) + "|" + rat_str(T.charge) + "|" + a.str() + "|" + w.str() +
                      "|" + rat_str(hi_c);
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) {
            VectorSeries r = it->second;
            if (r.vars()[0].id != var) r.rename_var(r.vars()[0].id, var);
            r.truncate(var, hi);
            return r;
        }
    }
    VectorSeries result = twisted_tensor_apply_uncached(T, a, w, var, hi_c);
    {
        std::lock_guard<std::mutex> lock(mtx);
        cache.emplace(std::move(key), result);
    }
    result.truncate(var, hi);
    return result;
}

inline VectorSeries twisted_tensor_apply_uncached(const TwistedModule& T, const TensorVector& a,
                                                  const GradedVector& w, char var, const Rational& hi) {
    VectorSeries out(std::vector<VarSpec>{VarSpec{var, T.exp_den()}});
    out.set_trust(var, hi);
    for (const auto& [tm, c] : a.terms()) {
        std::vector<long long> nonvac;
        for (long long i = 0; i < a.k(); ++i)
            if (!tm.slots[i].parts.empty()) nonvac.push_back(i + 1);
        VectorSeries piece;
        if (nonvac.empty()) {
            piece = VectorSeries(std::vector<VarSpec>{VarSpec{var, T.exp_den()}});
            piece.set_trust(var, hi);
            piece.add_term({Rational(0)}, w);
        } else if (nonvac.size() == 1) {
            GradedVector v(Rational(0));
            v.add_term(tm.slots[nonvac[0] - 1], Scalar(1));
            piece = T.slot_vertex(v, nonvac[0], w, var, hi);
        } else {
            long long i = nonvac[0];
            GradedVector p(Rational(0));
            p.add_term(tm.slots[i - 1], Scalar(1));
            TensorMonomial rest = tm;
            rest.slots[i - 1] = FockMonomial{};
            TensorVector b(a.k(), a.charges());
            b.add_term(rest, Scalar(1));
            GenIntertwiner phi_b = tensor_op_intertwiner(T, b);
            piece = unH_apply(phi_b, p, i, -1, w, var, hi);
        }
        piece.refine_den(var, lllcm(piece.den(var), out.den(var)));
        piece.scale_in_place(c);
        out.add_in(piece);
    }
    out.set_trust(var, hi);
    // structural low: exponent E has target T-degree deg_T(w) + wt(a) + E >= 0
    out.set_lower(var, -a.weight() - Rational(w.max_degree(), T.k));
    return out;
}

/// v_n^H phi as a GenIntertwiner. The weak-commutativity base shifts with the
/// H-module grading: wt(v_n^H phi) = wt(v) - n - 1 + wt(phi).
inline GenIntertwiner YH_mode(const GenIntertwiner& phi, const GradedVector& v, long long slot,
                              long long n) {
    GenIntertwiner g;
    g.k = phi.k;
    g.src = phi.src;
    g.tgt = phi.tgt;
    g.korder_base = phi.korder_base + (v.is_zero() ? Rational(0) : v.max_weight()) - n - 1;
    g.xgrid = phi.xgrid > 0 ? lllcm(lllcm(phi.xgrid, phi.src.exp_den()), phi.k) : 0;
    g.app = [phi, v, slot, n](const GradedVector& w, char var, const Rational& hi) {
        return unH_apply(phi, v, slot, n, w, var, hi);
    };
    return g;
}

// ---------------------------------------------------------------------------
// axiom checks

/// (G3) at the recorded order: (x1-x)^K Y_{M3}(u^{slot},x1) phi(x) w
///                           = (x1-x)^K phi(x) Y_{M2}(u^{slot},x1) w.
inline CheckResult verify_G3(const GenIntertwiner& phi, const GradedVector& u, long long slot,
                             const GradedVector& w, const Rational& cx, const Rational& c1) {
    long long K = phi.comm_order(u.max_weight());
    std::string name = "G3 weak commutativity (order " + std::to_string(K) + ")";
    std::string window = "x<=" + rat_str(cx) + ", x1<=" + rat_str(c1);
    try {
        SlotSum us = SlotSum::single(phi.k, u, slot);
        // LHS
        VectorSeries P = phi(w, 'x', cx);
        VectorSeries L = compose_new_var(P, '1', phi.tgt.exp_den(), c1, [&](const GradedVector& v) {
            return phi.tgt.apply(us, v, '1', c1);
        });
        // RHS
        VectorSeries Q = phi.src.apply(us, w, '1', c1);
        VectorSeries R = compose_new_var(Q, 'x', L.den('x'), cx, [&](const GradedVector& v) {
            VectorSeries t = phi(v, 'x', cx);
            t.refine_den('x', lllcm(t.den('x'), L.den('x')));
            return t;
        });
        VectorSeries diff = L.reordered({'x', '1'}) + (-R.reordered({'x', '1'}));
        auto poly = expand_binomial(Rational(K), Binom::a_minus_b, {'1', 1}, {'x', 1}, Rational(K));
        // (x1 - x)^K with nonnegative powers of x: polynomial either way
        VectorSeries prod = mul(diff, poly.reordered({'x', '1'}).promoted(diff.vars()));
        prod.truncate('x', cx);
        prod.truncate('1', c1);
        if (prod.empty()) return CheckResult::ok(name, window);
        std::string wit;
        prod.equal_within_trust(VectorSeries(prod.vars()), &wit);
        return CheckResult::fail(name, window, wit);
    } catch (const WindowError& e) {
        return CheckResult::fail(name, window, e.what());
    }
}

/// (G2): [L_T(-1), phi(x)] w = d/dx phi(x) w with L_T(-1) = (1/k) L(-k).
inline CheckResult verify_G2(const GenIntertwiner& phi, const GradedVector& w, const Rational& cx) {
    std::string name = "G2 L(-1)-bracket";
    std::string window = "x<=" + rat_str(cx);
    VectorSeries P = phi(w, 'x', cx + 1);
    VectorSeries lhs(P.vars());
    lhs.set_trust('x', cx);
    for (const auto& [key, vec] : P.entries()) {
        Rational e = P.exp_of(key, 0);
        if (e <= cx) lhs.add_term({e}, virasoro(-phi.k, vec).scaled(Scalar(Rational(1, phi.k))));
    }
    GradedVector lw = virasoro(-phi.k, w).scaled(Scalar(Rational(1, phi.k)));
    VectorSeries Pl = phi(lw, 'x', cx);
    lhs.add_in(-Pl);
    VectorSeries rhs(P.vars());
    rhs.set_trust('x', cx);
    for (const auto& [key, vec] : P.entries()) {
        Rational e = P.exp_of(key, 0);
        if (e - 1 <= cx) rhs.add_term({e - 1}, vec.scaled(Scalar(e)));
    }
    std::string wit;
    if (lhs.equal_within_trust(rhs, &wit)) return CheckResult::ok(name, window);
    return CheckResult::fail(name, window, wit);
}

/// Y_H(1, z) phi = phi: the vacuum acts as the identity (z^0 coefficient phi,
/// all other modes zero), recovered numerically through the residue formula.
inline CheckResult verify_YH_vacuum(const GenIntertwiner& phi, const GradedVector& w,
                                    const Rational& cx) {
    std::string name = "Y_H(1,z) = id";
    std::string window = "x<=" + rat_str(cx);
    VectorSeries expect = phi(w, 'x', cx);
    VectorSeries got = unH_apply(phi, GradedVector::vacuum(), 1, -1, w, 'x', cx);
    std::string wit;
    expect.refine_den('x', lllcm(expect.den('x'), got.den('x')));
    got.refine_den('x', lllcm(expect.den('x'), got.den('x')));
    if (!got.equal_within_trust(expect, &wit))
        return CheckResult::fail(name, window, "1_{-1}^H phi != phi: " + wit);
    for (long long n : {0LL, 1LL, 2LL}) {
        VectorSeries z = unH_apply(phi, GradedVector::vacuum(), 1, n, w, 'x', cx);
        if (!z.empty()) return CheckResult::fail(name, window, "1_n^H phi != 0 at n=" + std::to_string(n));
    }
    return CheckResult::ok(name, window);
}

/// (u^{slot})_n^H phi = 0 for n >= 0, the vacuum-like property of transported
/// intertwiners for slots 2..k (computed through the full residue formula, so
/// the vanishing is a numerical cancellation, not a structural shortcut).
inline CheckResult verify_vacuum_like(const GenIntertwiner& phi, const GradedVector& u,
                                      long long slot, const GradedVector& w, const Rational& cx,
                                      long long n_max) {
    std::string name = "vacuum-like (u^" + std::to_string(slot) + ")_n phi = 0, n in [0," +
                       std::to_string(n_max) + "]";
    std::string window = "x<=" + rat_str(cx);
    for (long long n = 0; n <= n_max; ++n) {
        VectorSeries z = unH_apply(phi, u, slot, n, w, 'x', cx);
        if (!z.empty())
            return CheckResult::fail(name, window, "nonzero at n=" + std::to_string(n));
    }
    return CheckResult::ok(name, window);
}

/// (b): [L_T(-1), Y_H(v,z) phi(x)] w = d/dx (Y_H(v,z) phi(x)) w.
inline CheckResult verify_YH_L1_bracket(const GenIntertwiner& phi, const GradedVector& v,
                                        long long slot, const GradedVector& w, const Rational& cx,
                                        const Rational& cz) {
    std::string name = "[L(-1), Y_H(v,z)phi(x)] = d/dx";
    std::string window = "x<=" + rat_str(cx) + ", z<=" + rat_str(cz);
    try {
        long long k = phi.k;
        VectorSeries Y = YH_apply(phi, v, slot, w, 'x', 'z', cx + 1, cz);
        // LHS entrywise: L_T(-1) after, minus the action on L_T(-1) w
        VectorSeries lhs(Y.vars());
        lhs.set_trust('x', cx);
        lhs.set_trust('z', cz);
        for (const auto& [key, vec] : Y.entries())
            lhs.add_term({Y.exp_of(key, 0), Y.exp_of(key, 1)},
                         virasoro(-k, vec).scaled(Scalar(Rational(1, k))));
        GradedVector lw = virasoro(-k, w).scaled(Scalar(Rational(1, k)));
        VectorSeries Yl = YH_apply(phi, v, slot, lw, 'x', 'z', cx, cz);
        Yl.refine_den('x', lhs.den('x'));
        lhs.add_in(-Yl);
        VectorSeries rhs(Y.vars());
        rhs.set_trust('x', cx);
        rhs.set_trust('z', cz);
        for (const auto& [key, vec] : Y.entries()) {
            Rational e = Y.exp_of(key, 0);
            rhs.add_term({e - 1, Y.exp_of(key, 1)}, vec.scaled(Scalar(e)));
        }
        std::string wit;
        if (lhs.equal_within_trust(rhs, &wit)) return CheckResult::ok(name, window);
        return CheckResult::fail(name, window, wit);
    } catch (const WindowError& e) {
        return CheckResult::fail(name, window, e.what());
    }
}

/// (c) weak associativity on H, substitution form (same-slot pair):
///   z0^m Y_H(Y(u,z0)v, z2) phi(x) w
///     = ((z1-z2)^m Y_H(u,z1) Y_H(v,z2) phi(x) w)|_{z1 = z2+z0}.
inline CheckResult verify_YH_weak_assoc(const GenIntertwiner& phi0, const GradedVector& u,
                                        const GradedVector& v, long long slot,
                                        const GradedVector& w, const Rational& cx,
                                        const Rational& c0, const Rational& c2) {
    GenIntertwiner phi = memoized(phi0);
    long long m = 0;
    if (!u.is_zero() && !v.is_zero())
        m = std::max<long long>(0, to_ll(rat_num(u.max_weight() + v.max_weight())));
    std::string name = "Y_H weak associativity (order " + std::to_string(m) + ")";
    std::string window = "x<=" + rat_str(cx) + ", z0<=" + rat_str(c0) + ", z2<=" + rat_str(c2);
    try {
        long long xden = 1;
        // LHS
        VectorSeries it = boson_vertex(u, v, '0', c0 - m + 1);
        VectorSeries lhs; // assembled lazily once the x-grid is known
        bool first = true;
        for (const auto& [key, a] : it.entries()) {
            Rational e0 = it.exp_of(key, 0) + m;
            if (e0 > c0) continue;
            VectorSeries s = YH_apply(phi, a, slot, w, 'x', '2', cx, c2);
            if (first) {
                xden = s.den('x');
                lhs = VectorSeries({{'x', xden}, {'0', 1}, {'2', 1}});
                lhs.set_trust('x', cx);
                lhs.set_trust('0', c0);
                lhs.set_trust('2', c2);
                first = false;
            }
            s.refine_den('x', lllcm(s.den('x'), xden));
            for (const auto& [k2, vec] : s.entries())
                lhs.add_term({s.exp_of(k2, 0), e0, s.exp_of(k2, 1)}, vec);
        }
        if (first) return CheckResult::fail(name, window, "empty iterate");

        // RHS: modes of Y_H(v, z2) phi, then Y_H(u, z1) of each, then substitute
        long long Kv = phi.comm_order(v.max_weight());
        Rational lo1 = -Rational(phi.comm_order(u.max_weight())); // abs z1 bound via locality
        Rational c1 = c0 + c2 + Kv + m + 1;
        Rational c2big = c0 + c2 - lo1 + 1;
        long long n_lo = -1 - to_ll(rat_floor(c2big));
        VectorSeries rhs0({{'x', xden}, {'1', 1}, {'2', 1}});
        rhs0.set_trust('x', cx);
        rhs0.set_trust('1', c1);
        rhs0.set_trust('2', c2big);
        for (long long n = n_lo; n <= Kv - 1; ++n) {
            GenIntertwiner phin = memoized(YH_mode(phi, v, slot, n));
            VectorSeries s = YH_apply(phin, u, slot, w, 'x', '1', cx, c1);
            s.refine_den('x', lllcm(s.den('x'), xden));
            for (const auto& [k2, vec] : s.entries())
                rhs0.add_term({s.exp_of(k2, 0), s.exp_of(k2, 1), Rational(-n - 1)}, vec);
        }
        rhs0.set_lower('2', Rational(-Kv));
        auto poly = expand_binomial(Rational(m), Binom::a_minus_b, {'1', 1}, {'2', 1}, Rational(m));
        VectorSeries num = mul(rhs0, poly.promoted(rhs0.vars()));
        if (!num.tighten_lower('1', lo1)) {
            std::string detail = "H-locality violated below z1 bound " + rat_str(lo1) + ":";
            int i1 = num.var_index('1');
            for (const auto& [key, vec] : num.entries())
                if (num.exp_of(key, i1) < lo1 && detail.size() < 400) {
                    detail += " (";
                    for (size_t t = 0; t < num.vars().size(); ++t)
                        detail += std::string(1, num.vars()[t].id) + "^" + rat_str(num.exp_of(key, t)) + " ";
                    detail += ")";
                }
            return CheckResult::fail(name, window, detail);
        }
        auto Lroot = LineSeries::binomial_root('2', '0', Rational(1), Binom::a_plus_b, 1, c0 + m + 2);
        VectorSeries rhs = substitute_root(num, '1', 1, Lroot, c2, c0);
        rhs.truncate('0', c0);
        rhs.truncate('2', c2);
        VectorSeries lhs2 = lhs.reordered({'x', '0', '2'});
        VectorSeries rhs2 = rhs.reordered({'x', '0', '2'});
        lhs2.truncate('2', c2);
        std::string wit;
        if (lhs2.equal_within_trust(rhs2, &wit)) return CheckResult::ok(name, window);
        return CheckResult::fail(name, window, wit);
    } catch (const WindowError& e) {
        return CheckResult::fail(name, window, e.what());
    }
}

/// Lemma technical-1:  z^K (x+z)^{r/k} Y_H(u,z) phi(x) w
///                  = ((x1-x)^K x1^{r/k} Y_{M3}(u,x1) phi(x) w)|_{x1^{1/k}=(x+z)^{1/k}}
/// for u in the eta^r eigencomponent (here u = eigencomponent of a slot vector).
inline CheckResult verify_technical1(const GenIntertwiner& phi, const GradedVector& u,
                                     long long slot, long long r, const GradedVector& w,
                                     const Rational& cx, const Rational& cz) {
    long long k = phi.k;
    long long K = phi.comm_order(u.is_zero() ? Rational(0) : u.max_weight());
    std::string name = "technical-1 substitution (r=" + std::to_string(r) + ")";
    std::string window = "x<=" + rat_str(cx) + ", z<=" + rat_str(cz);
    try {
        SlotSum ur = SlotSum::eigen(k, u, slot, r);

        // LHS: build Y_H(u^{(r)}, z) phi(x) w with the eigencomponent's modes;
        // u^{(r)} is a sum of slot insertions, and unH is linear in u.
        long long xden = 1, probe_needed = 1;
        (void)probe_needed;
        VectorSeries probe = phi(w, 'x', cx);
        xden = lllcm(lllcm(probe.den('x'), phi.src.exp_den()), k);
        std::vector<VarSpec> vars{{'x', xden}, {'z', k}};
        VectorSeries yh(vars);
        yh.set_trust('x', cx + K + 1);
        yh.set_trust('z', cz + K);
        long long n_lo = -1 - to_ll(rat_floor(cz + K));
        for (long long n = n_lo; n <= K - 1; ++n) {
            VectorSeries c(std::vector<VarSpec>{VarSpec{'x', xden}});
            c.set_trust('x', cx + K + 1);
            for (const auto& [sc, sl, v] : ur.terms) {
                VectorSeries t = unH_apply(phi, v, sl, n, w, 'x', cx + K + 1);
                t.refine_den('x', xden);
                t.scale_in_place(sc);
                c.add_in(t);
            }
            for (const auto& [key, vec] : c.entries())
                yh.add_term({c.exp_of(key, 0), Rational(-n - 1)}, vec);
        }
        yh.set_lower('z', Rational(-K));
        // multiply z^K (x+z)^{r/k}
        yh.shift_var('z', Rational(K));
        VectorSeries lhs = mul_binom(yh, Rational(r, k), Binom::a_plus_b, 'x', 'z', cx, cz);
        lhs.truncate('x', cx);
        lhs.truncate('z', cz);

        // RHS: (x1-x)^K x1^{r/k} Y_{M3}(u^{(r)}, x1) phi(x) w, then x1^{1/k} -> (x+z)^{1/k};
        // the x-window is widened so the substitution's line budget covers (cx, cz)
        Rational abs_lo1_pre = -u.max_weight() - Rational(w.max_degree(), k) + Rational(r, k);
        Rational cxBig = cx + cz - abs_lo1_pre + 1;
        VectorSeries P = phi(w, 'x', cxBig);
        Rational hix1 = (cxBig + cz + 2) * 1 + K; // budget for the substitution
        if (!P.empty()) hix1 = cxBig + cz - *P.min_exp('x') + K + 1;
        VectorSeries G = compose_new_var(P, '1', lllcm(phi.tgt.exp_den(), k), hix1,
                                         [&](const GradedVector& v) {
                                             return phi.tgt.apply(ur, v, '1', hix1);
                                         });
        auto poly = expand_binomial(Rational(K), Binom::a_minus_b, {'1', 1}, {'x', 1}, Rational(K));
        VectorSeries G2 = mul(G.reordered({'x', '1'}), poly.reordered({'x', '1'}).promoted(G.reordered({'x', '1'}).vars()));
        G2.shift_var('1', Rational(r, k));
        // locality supplies the absolute x1 bound of the opposite ordering
        Rational abs_lo1 = abs_lo1_pre;
        if (!G2.tighten_lower('1', abs_lo1))
            return CheckResult::fail(name, window, "locality violated below the x1 bound");
        // all '1'-exponents are now integers; substitute x1 -> (x+z) as a line
        auto Lxz = LineSeries::binomial_root('x', 'z', Rational(1), Binom::a_plus_b, 1, cz + K + 2);
        // exponents of '1' in (1/1)Z after the shift: substitute with root_den 1
        VectorSeries rhs = substitute_root(G2, '1', 1, Lxz, cx, cz);
        rhs.truncate('x', cx);
        rhs.truncate('z', cz);

        std::string wit;
        if (lhs.reordered({'x', 'z'}).equal_within_trust(rhs.reordered({'x', 'z'}), &wit))
            return CheckResult::ok(name, window);
        return CheckResult::fail(name, window, wit);
    } catch (const WindowError& e) {
        return CheckResult::fail(name, window, e.what());
    }
}

} // namespace orbifusion
