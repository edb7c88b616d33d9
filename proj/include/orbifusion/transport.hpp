#pragma once

#include "orbifusion/gen_intertwiner.hpp"

namespace orbifusion {

// The transport pi between I_V(W; M N) and I_{V^k}(T(W); M^1 T(N)):
//
//   forward:  Ybar(w^1, z) = Y(Delta_k(z) w, z^{1/k})
//   inverse:  Y(w, z)      = Ybar((Delta_k(z^k)^{-1} w)^1, z^k)
//
// realized on the boson intertwiners. Evaluation is lazy per requested
// coefficient; exponents of the transported operator live in
// (1/k)(lambda*mu + Z) shifted by the Delta bookkeeping.

/// An abstract intertwiner of type (W; M N): apply(w in M, a in N) -> series
/// valued in W. The charges identify the three Fock modules.
struct Intertwiner {
    Rational charge_m; // M = M(1, charge_m)
    Rational charge_n; // N = M(1, charge_n)
    std::function<VectorSeries(const GradedVector&, const GradedVector&, char, const Rational&)> app;

    VectorSeries operator()(const GradedVector& w, const GradedVector& a, char var,
                            const Rational& hi) const {
        return app(w, a, var, hi);
    }
};

/// The normalized boson intertwiner of type (M(1,l+m); M(1,l) M(1,m)).
inline Intertwiner fock_intertwiner(const Rational& l, const Rational& m) {
    Intertwiner I;
    I.charge_m = l;
    I.charge_n = m;
    I.app = [](const GradedVector& w, const GradedVector& a, char var, const Rational& hi) {
        return boson_intertwiner(w, a, var, hi);
    };
    return I;
}

/// The module map Y_N viewed as an intertwiner of type (N; V N).
inline Intertwiner module_intertwiner(const Rational& n_charge) {
    Intertwiner I;
    I.charge_m = Rational(0);
    I.charge_n = n_charge;
    I.app = [](const GradedVector& w, const GradedVector& a, char var, const Rational& hi) {
        return boson_vertex(w, a, var, hi);
    };
    return I;
}

/// Forward transport: Ybar(w^1, z) a, exact through z <= hi.
inline VectorSeries transport_forward_apply(const Intertwiner& Y, long long k,
                                            const GradedVector& w, const GradedVector& a, char var,
                                            const Rational& hi) {
    Rational lm = Y.charge_m * (Y.charge_m + 2 * Y.charge_n) / 2; // lowest z-exp shift scale
    (void)lm;
    long long den = lllcm(lllcm(2 * k * to_ll(rat_den(w.charge() * w.charge() / 2)), k),
                          k * to_ll(rat_den(Y.charge_m * Y.charge_n)));
    VectorSeries out(std::vector<VarSpec>{VarSpec{var, den}});
    out.set_trust(var, hi);
    if (w.is_zero() || a.is_zero()) return out;
    VectorSeries D = apply_delta(k, w, DeltaKind::forward, 1, 'y');
    std::optional<Rational> lo;
    for (const auto& [key, vec] : D.entries()) {
        Rational e = D.exp_of(key, 0);
        Rational fhi = (hi - e) * k;
        VectorSeries B = Y(vec, a, 't', fhi);
        for (const auto& [bk, bvec] : B.entries()) {
            Rational E = e + B.exp_of(bk, 0) / k;
            out.add_term({E}, bvec);
            if (!lo || E < *lo) lo = E;
        }
    }
    // structural low: exponent E has target weight wt(a) + wt(w) + kE... in the
    // twisted grading E >= (lw_W - wt a)/k - wt w
    Rational lw_w = (Y.charge_m + Y.charge_n) * (Y.charge_m + Y.charge_n) / 2;
    out.set_lower(var, (lw_w - a.max_weight()) / k - w.max_weight());
    return out;
}

/// Inverse transport: Y(w,z) a = Ybar((Delta_k(z^k)^{-1} w)^1, z^k) a.
inline VectorSeries transport_inverse_apply(
    const std::function<VectorSeries(const GradedVector&, const GradedVector&, char, const Rational&)>& Ybar,
    long long k, const GradedVector& w, const GradedVector& a, char var, const Rational& hi) {
    long long den = 2 * k * to_ll(rat_den(w.charge() * w.charge() / 2));
    VectorSeries out(std::vector<VarSpec>{VarSpec{var, den}});
    out.set_trust(var, hi);
    if (w.is_zero() || a.is_zero()) return out;
    VectorSeries F = apply_delta(k, w, DeltaKind::inverse, k, 'y'); // Phi_k(z) w
    std::optional<Rational> lo;
    for (const auto& [key, vec] : F.entries()) {
        Rational e = F.exp_of(key, 0);
        Rational Ehi = (hi - e) / k;
        VectorSeries B = Ybar(vec, a, 't', Ehi);
        for (const auto& [bk, bvec] : B.entries()) {
            Rational E = e + B.exp_of(bk, 0) * k;
            out.refine_den(var, lllcm(out.den(var), to_ll(rat_den(E))));
            out.add_term({E}, bvec);
            if (!lo || E < *lo) lo = E;
        }
    }
    out.set_lower(var, lo);
    return out;
}

/// The transported operator as a generalized intertwiner from T(N) to T(W),
/// for the H-axiom and vacuum-like checks.
inline GenIntertwiner transported_intertwiner(const Intertwiner& Y, long long k,
                                              const GradedVector& w) {
    GenIntertwiner g;
    g.k = k;
    g.src = TwistedModule{k, Y.charge_n};
    g.tgt = TwistedModule{k, Y.charge_m + Y.charge_n};
    Rational lw_w = (Y.charge_m + Y.charge_n) * (Y.charge_m + Y.charge_n) / 2;
    g.korder_base = (w.is_zero() ? Rational(0) : w.max_weight()) - lw_w;
    g.xgrid = lllcm(lllcm(2 * k * to_ll(rat_den(w.charge() * w.charge() / 2)), k),
                    k * to_ll(rat_den(Y.charge_m * Y.charge_n)));
    g.app = [Y, k, w](const GradedVector& a, char var, const Rational& hi) {
        return transport_forward_apply(Y, k, w, a, var, hi);
    };
    return g;
}

// ---------------------------------------------------------------------------
// verification

/// pi^{-1}(pi(Y)) = Y on every trusted coefficient for the sampled (w, a).
inline CheckResult verify_round_trip_inverse_forward(const Intertwiner& Y, long long k,
                                                     const GradedVector& w, const GradedVector& a,
                                                     const Rational& hi) {
    std::string name = "pi^{-1} o pi = id";
    std::string window = "z<=" + rat_str(hi) + ", w=" + w.str() + ", a=" + a.str();
    auto ybar = [&](const GradedVector& ww, const GradedVector& aa, char var, const Rational& h) {
        return transport_forward_apply(Y, k, ww, aa, var, h);
    };
    VectorSeries got = transport_inverse_apply(ybar, k, w, a, 'z', hi);
    VectorSeries expect = Y(w, a, 'z', hi);
    expect.refine_den('z', lllcm(expect.den('z'), got.den('z')));
    got.refine_den('z', expect.den('z'));
    std::string wit;
    if (got.equal_within_trust(expect, &wit)) return CheckResult::ok(name, window);
    return CheckResult::fail(name, window, wit);
}

/// pi(pi^{-1}(Ybar)) = Ybar on single-slot insertions.
inline CheckResult verify_round_trip_forward_inverse(const Intertwiner& Y, long long k,
                                                     const GradedVector& w, const GradedVector& a,
                                                     const Rational& hi) {
    std::string name = "pi o pi^{-1} = id";
    std::string window = "z<=" + rat_str(hi) + ", w=" + w.str() + ", a=" + a.str();
    // Ybar := pi(Y); Yinv := pi^{-1}(Ybar); compare pi(Yinv) with Ybar on (w^1, a)
    auto ybar = [&](const GradedVector& ww, const GradedVector& aa, char var, const Rational& h) {
        return transport_forward_apply(Y, k, ww, aa, var, h);
    };
    Intertwiner Yinv;
    Yinv.charge_m = Y.charge_m;
    Yinv.charge_n = Y.charge_n;
    Yinv.app = [ybar, k](const GradedVector& ww, const GradedVector& aa, char var, const Rational& h) {
        return transport_inverse_apply(ybar, k, ww, aa, var, h);
    };
    VectorSeries got = transport_forward_apply(Yinv, k, w, a, 'z', hi);
    VectorSeries expect = transport_forward_apply(Y, k, w, a, 'z', hi);
    got.refine_den('z', lllcm(got.den('z'), expect.den('z')));
    expect.refine_den('z', got.den('z'));
    std::string wit;
    if (got.equal_within_trust(expect, &wit)) return CheckResult::ok(name, window);
    return CheckResult::fail(name, window, wit);
}

/// The transported module map reproduces Y_{T(N)} on slot-1 insertions.
inline CheckResult verify_module_map_transport(long long k, const Rational& n_charge,
                                               const GradedVector& u, const GradedVector& a,
                                               const Rational& hi) {
    std::string name = "pi(Y_N) = Y_{T(N)} on slot 1";
    std::string window = "z<=" + rat_str(hi);
    Intertwiner YN = module_intertwiner(n_charge);
    VectorSeries got = transport_forward_apply(YN, k, u, a, 'z', hi);
    TwistedModule T{k, n_charge};
    VectorSeries expect = T.slot_vertex(u, 1, a, 'z', hi);
    got.refine_den('z', lllcm(got.den('z'), expect.den('z')));
    expect.refine_den('z', got.den('z'));
    std::string wit;
    if (got.equal_within_trust(expect, &wit)) return CheckResult::ok(name, window);
    return CheckResult::fail(name, window, wit);
}

/// Lemma "Commutator formula":
///   [Y_W(u,z1), Y(w,z2)] a = Res_{z0} z2^{-1} delta((z1-z0)/z2) Y(Y_M(u,z0)w, z2) a
/// for Y = pi^{-1}(Ybar).
inline CheckResult verify_transport_commutator(const Intertwiner& Y, long long k,
                                               const GradedVector& u, const GradedVector& w,
                                               const GradedVector& a, const Rational& c1,
                                               const Rational& c2) {
    std::string name = "transport commutator formula";
    std::string window = "z1<=" + rat_str(c1) + ", z2<=" + rat_str(c2);
    try {
        auto ybar = [&](const GradedVector& ww, const GradedVector& aa, char var, const Rational& h) {
            return transport_forward_apply(Y, k, ww, aa, var, h);
        };
        auto yinv = [&](const GradedVector& ww, const GradedVector& aa, char var, const Rational& h) {
            return transport_inverse_apply(ybar, k, ww, aa, var, h);
        };
        // LHS
        VectorSeries ywa = yinv(w, a, '2', c2);
        VectorSeries ab = compose_new_var(ywa, '1', 1, c1, [&](const GradedVector& x) {
            return boson_vertex(u, x, '1', c1);
        });
        VectorSeries ua = boson_vertex(u, a, '1', c1);
        long long den2 = ywa.den('2');
        VectorSeries ba = compose_new_var(ua, '2', den2, c2, [&](const GradedVector& x) {
            VectorSeries t = yinv(w, x, '2', c2);
            t.refine_den('2', den2);
            return t;
        });
        VectorSeries lhs = ab.reordered({'1', '2'}) + (-ba.reordered({'1', '2'}));

        // RHS: sum_{j>=0} (-1)^j sum_n C(n,j) z1^{n-j} z2^{-n-1} Y(u_j w, z2) a
        VectorSeries uw = boson_vertex(u, w, 'y', Rational(u.max_weight() + w.max_degree() + 2));
        VectorSeries rhs(lhs.vars());
        rhs.set_trust('1', c1);
        rhs.set_trust('2', c2);
        for (const auto& [key, ujw] : uw.entries()) {
            Rational ey = uw.exp_of(key, 0);
            if (ey > Rational(-1)) continue; // only annihilation modes u_j w, j >= 0
            long long j = to_ll(rat_num(-ey - 1));
            VectorSeries s = yinv(ujw, a, '2', c2 + c1 + j + 2);
            s.refine_den('2', den2);
            for (const auto& [k2, vec] : s.entries()) {
                Rational e2 = s.exp_of(k2, 0);
                // z2^{-n-1} z1^{n-j}: n ranges with n - j <= c1 and -n-1+e2... we
                // need -n-1 + e2-part: entries combine as e2' = e2 - n - 1
                for (long long n = -to_ll(rat_floor(c2 - e2)) - 1;; ++n) {
                    Rational f1 = Rational(n - j);
                    Rational f2 = e2 - n - 1;
                    if (f1 > c1) break;
                    if (f2 > c2) continue;
                    Rational cnj = binomial(Rational(n), j);
                    if (cnj == 0) continue;
                    Scalar coef = Scalar((j % 2 == 0) ? cnj : -cnj);
                    rhs.add_term({f1, f2}, vec.scaled(coef));
                }
            }
        }
        lhs.truncate('1', c1);
        lhs.truncate('2', c2);
        rhs.truncate('1', c1);
        rhs.truncate('2', c2);
        std::string wit;
        if (lhs.equal_within_trust(rhs, &wit)) return CheckResult::ok(name, window);
        return CheckResult::fail(name, window, wit);
    } catch (const WindowError& e) {
        return CheckResult::fail(name, window, e.what());
    }
}

/// Eq. (Delta property):
///   Y(Delta_k((z2+z0)^k)^{-1} u, (z2+z0)^k - z2^k) Delta_k(z2^k)^{-1} w
///     = Delta_k(z2^k)^{-1} Y(u, z0) w.
inline CheckResult verify_delta_property(long long k, const GradedVector& u, const GradedVector& w,
                                         const Rational& c0, const Rational& c2) {
    std::string name = "Delta property (change of variable)";
    std::string window = "z0<=" + rat_str(c0) + ", z2<=" + rat_str(c2);
    try {
        long long den2 = 2 * k * to_ll(rat_den(w.charge() * w.charge() / 2));
        // RHS
        VectorSeries yuw = boson_vertex(u, w, '0', c0 + 1);
        VectorSeries rhs = compose_new_var(yuw, '2', den2, c2 + 1, [&](const GradedVector& x) {
            VectorSeries t = apply_delta(k, x, DeltaKind::inverse, k, '2');
            t.refine_den('2', den2);
            t.truncate('2', c2 + 1);
            return t;
        });
        rhs.truncate('0', c0);
        rhs.truncate('2', c2);

        // LHS
        VectorSeries fw = apply_delta(k, w, DeltaKind::inverse, k, '2'); // Phi_k(z2) w
        VectorSeries fu = apply_delta(k, u, DeltaKind::inverse, k, 'y'); // Phi_k(y) u
        // substitute y -> z2 + z0 (nonnegative powers of z0)
        auto Lplus = LineSeries::binomial_root('2', '0', Rational(1), Binom::a_plus_b, 1,
                                               c0 + u.max_weight() * k + 4);
        VectorSeries fu_sub =
            substitute_root(fu, 'y', 1, Lplus, c2 + (u.max_weight() + 1) * k + 2, c0 + 2);
        // s-line: (z2+z0)^k - z2^k, a polynomial line in ('2','0') with b >= 1
        LineSeries S;
        S.var_a = '2';
        S.var_b = '0';
        S.alpha = Rational(k);
        S.den_b = 1;
        S.hi_b = LineSeries::inf_b;
        for (long long i = 1; i <= k; ++i) {
            Rational c = binomial(Rational(k), i);
            S.terms[i] = Scalar(c);
        }
        VectorSeries lhs(rhs.vars());
        lhs.set_trust('0', c0);
        lhs.set_trust('2', c2);
        for (const auto& [ku_, uvec] : fu_sub.entries()) {
            Rational eu2 = fu_sub.exp_of(ku_, fu_sub.var_index('2'));
            Rational eu0 = fu_sub.exp_of(ku_, fu_sub.var_index('0'));
            for (const auto& [kw_, wvec] : fw.entries()) {
                Rational ew2 = fw.exp_of(kw_, 0);
                Rational t_hi = c0 + c2 + 4 - eu2 - eu0 - ew2;
                VectorSeries B = boson_vertex(uvec, wvec, 't', t_hi);
                if (B.empty()) continue;
                // truncate the s-line for negative powers
                LineSeries Suse = S;
                if (auto me = B.min_exp('t'); me && *me < 0)
                    Suse = S.truncated(c0 - eu0 + (-*me) * 1 + 2);
                VectorSeries sub = substitute_root(B, 't', 1, Suse, c2 - eu2 - ew2, c0 - eu0);
                sub.refine_den('2', lllcm(sub.den('2'), lllcm(den2, to_ll(rat_den(eu2 + ew2)))));
                sub.shift_var('2', eu2 + ew2);
                sub.shift_var('0', eu0);
                sub.truncate('2', c2);
                sub.truncate('0', c0);
                lhs.add_in(sub.reordered(
                    {lhs.vars()[0].id, lhs.vars()[1].id}));
            }
        }
        std::string wit;
        VectorSeries r2 = rhs.reordered({lhs.vars()[0].id, lhs.vars()[1].id});
        if (lhs.equal_within_trust(r2, &wit)) return CheckResult::ok(name, window);
        return CheckResult::fail(name, window, wit);
    } catch (const WindowError& e) {
        return CheckResult::fail(name, window, e.what());
    }
}

/// L(-1)-derivative of the inverse transport (Lemma "L(-1) property").
inline CheckResult verify_inverse_L1_derivative(const Intertwiner& Y, long long k,
                                                const GradedVector& w, const GradedVector& a,
                                                const Rational& hi) {
    std::string name = "L(-1)-derivative of pi^{-1}";
    std::string window = "z<=" + rat_str(hi);
    auto ybar = [&](const GradedVector& ww, const GradedVector& aa, char var, const Rational& h) {
        return transport_forward_apply(Y, k, ww, aa, var, h);
    };
    VectorSeries yw = transport_inverse_apply(ybar, k, w, a, 'z', hi + 1);
    VectorSeries dz(yw.vars());
    dz.set_trust('z', hi);
    for (const auto& [key, vec] : yw.entries()) {
        Rational e = yw.exp_of(key, 0);
        if (e - 1 <= hi) dz.add_term({e - 1}, vec.scaled(Scalar(e)));
    }
    VectorSeries yl = transport_inverse_apply(ybar, k, virasoro(-1, w), a, 'z', hi);
    yl.refine_den('z', lllcm(yl.den('z'), dz.den('z')));
    dz.refine_den('z', yl.den('z'));
    std::string wit;
    if (dz.equal_within_trust(yl, &wit)) return CheckResult::ok(name, window);
    return CheckResult::fail(name, window, wit);
}

/// Theorem p4.7's homomorphism property on samples:
///   Ybar(Y_M(v,z) w, x) = Y_H(v^1, z) Ybar(w, x).
inline CheckResult verify_hom_property(const Intertwiner& Y, long long k, const GradedVector& v,
                                       const GradedVector& w, const GradedVector& a,
                                       const Rational& cx, const Rational& cz) {
    std::string name = "p4.7 module-homomorphism property";
    std::string window = "x<=" + rat_str(cx) + ", z<=" + rat_str(cz);
    try {
        GenIntertwiner phi = memoized(transported_intertwiner(Y, k, w));
        VectorSeries rhs = YH_apply(phi, v, 1, a, 'x', 'z', cx, cz);

        VectorSeries vw = boson_vertex(v, w, 'z', cz);
        bool first = true;
        VectorSeries lhs;
        for (const auto& [key, vec] : vw.entries()) {
            GenIntertwiner phi2 = transported_intertwiner(Y, k, vec);
            VectorSeries s = phi2(a, 'x', cx);
            if (first) {
                lhs = VectorSeries({{'x', s.den('x')}, {'z', 1}});
                lhs.set_trust('x', cx);
                lhs.set_trust('z', cz);
                first = false;
            }
            s.refine_den('x', lhs.den('x'));
            for (const auto& [k2, vec2] : s.entries())
                lhs.add_term({s.exp_of(k2, 0), vw.exp_of(key, 0)}, vec2);
        }
        if (first) return CheckResult::fail(name, window, "empty LHS");
        rhs.refine_den('x', lllcm(rhs.den('x'), lhs.den('x')));
        lhs.refine_den('x', rhs.den('x'));
        std::string wit;
        if (lhs.equal_within_trust(rhs, &wit)) return CheckResult::ok(name, window);
        return CheckResult::fail(name, window, wit);
    } catch (const WindowError& e) {
        return CheckResult::fail(name, window, e.what());
    }
}

/// t5.3 weak associativity for the inverse transport, sampled:
///   (z0+z2)^n Y_W(u, z0+z2) Y(w,z2) a = (z2+z0)^n Y(Y_M(u,z0)w, z2) a.
inline CheckResult verify_transport_weak_assoc(const Intertwiner& Y, long long k,
                                               const GradedVector& u, const GradedVector& w,
                                               const GradedVector& a, const Rational& c0,
                                               const Rational& c2) {
    std::string name = "t5.3 weak associativity";
    std::string window = "z0<=" + rat_str(c0) + ", z2<=" + rat_str(c2);
    try {
        auto ybar = [&](const GradedVector& ww, const GradedVector& aa, char var, const Rational& h) {
            return transport_forward_apply(Y, k, ww, aa, var, h);
        };
        auto yinv = [&](const GradedVector& ww, const GradedVector& aa, char var, const Rational& h) {
            return transport_inverse_apply(ybar, k, ww, aa, var, h);
        };
        // n: z^n Y_W(u,z) b has only nonnegative powers for all coefficients b
        // of Y(w,z2)a in the window; derive from weights
        Rational lw_w = (Y.charge_m + Y.charge_n) * (Y.charge_m + Y.charge_n) / 2;
        VectorSeries ywa = yinv(w, a, '2', c2 + 2);
        long long n = 0;
        for (const auto& [key, vec] : ywa.entries())
            n = std::max(n, to_ll(rat_num(u.max_weight() + vec.max_weight() - lw_w)));
        ywa = yinv(w, a, '2', c2 + n + 1); // widen now that the order is known
        // LHS
        Rational hi1 = c0 + c2 + n + u.max_weight() + w.max_weight() + a.max_weight() + 6;
        VectorSeries comp = compose_new_var(ywa, '1', 1, hi1, [&](const GradedVector& x) {
            return boson_vertex(u, x, '1', hi1);
        });
        Rational abs_lo1 = -u.max_weight() - a.max_weight() - w.max_weight() + lw_w - 2;
        comp.tighten_lower('1', abs_lo1 - 10); // keep the structural information honest
        auto Lplus = LineSeries::binomial_root('0', '2', Rational(1), Binom::a_plus_b, 1, c2 + n + 2);
        VectorSeries lhs0 = substitute_root(comp, '1', 1, Lplus, c0 + n, c2 + n);
        auto polyN = expand_binomial(Rational(n), Binom::a_plus_b, {'0', 1}, {'2', 1}, Rational(n));
        VectorSeries lhs = mul(lhs0.reordered({'0', '2'}), polyN.promoted(lhs0.reordered({'0', '2'}).vars()));
        lhs.truncate('0', c0);
        lhs.truncate('2', c2);

        // RHS
        VectorSeries uw = boson_vertex(u, w, '0', c0 + n + 1);
        long long den2 = ywa.den('2');
        VectorSeries rhs0 = compose_new_var(uw, '2', den2, c2 + n, [&](const GradedVector& x) {
            VectorSeries t = yinv(x, a, '2', c2 + n);
            t.refine_den('2', den2);
            return t;
        });
        VectorSeries rhs = mul(rhs0.reordered({'0', '2'}), polyN.promoted(rhs0.reordered({'0', '2'}).vars()));
        rhs.truncate('0', c0);
        rhs.truncate('2', c2);
        std::string wit;
        if (lhs.equal_within_trust(rhs, &wit)) return CheckResult::ok(name, window);
        return CheckResult::fail(name, window, wit);
    } catch (const WindowError& e) {
        return CheckResult::fail(name, window, e.what());
    }
}

} // namespace orbifusion
