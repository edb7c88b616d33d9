#pragma once

#include "orbifusion/fock.hpp"

namespace orbifusion {

// Vertex operators and intertwining operators for the rank-one boson.
//
// Y(v,z) for v in M(1) is the normal-ordered product of derived boson fields,
// built recursively: Y(alpha(-n)v', z) = :f_n(z) Y(v', z): with
// f_n(z) = (1/(n-1)!) d^{n-1} alpha(z), creation modes to the left and
// annihilation (including alpha(0)) to the right.
//
// The intertwiner of type (M(1,l+m); M(1,l) M(1,m)) has the same dressing over
// the exponential base E^-(l,z) E^+(l,z) S_l z^{l alpha(0)}, normalized so the
// leading coefficient on highest-weight vectors is 1. Its z-exponents live in
// l*m + Z. Everything is evaluated per vector, exactly, through a requested
// exponent cutoff; coefficients are exact regardless of the cutoff.

namespace detail {

// mode coefficient of alpha(m) z^{-m-n} in (1/(n-1)!) d^{n-1} alpha(z)
inline Rational dressed_mode_coeff(long long n, long long m) {
    Rational c = binomial(Rational(m + n - 1), n - 1);
    return (n % 2 == 0) ? -c : c;
}

} // namespace detail

/// Y(v, z) w for v of charge 0 and w in M(1, mu); exact coefficients for all
/// exponents <= hi (integers shifted by nothing: the grid is Z unless w's
/// series is later combined with fractional objects). Single-monomial pairs
/// are memoized globally (windows canonicalized to integers).
inline VectorSeries boson_vertex_uncached(const GradedVector& v, const GradedVector& w, char var,
                                          const Rational& hi, long long den = 1) {
    if (v.charge() != 0) throw std::invalid_argument("boson_vertex: operator vector must have charge 0");
    VectorSeries out(std::vector<VarSpec>{VarSpec{var, den}});
    out.set_trust(var, hi);
    if (v.is_zero() || w.is_zero()) {
        out.set_lower(var, std::nullopt);
        return out;
    }
    // structural lower bound: exponent e has target degree dal(w) + wt(v) + e >= 0
    Rational lo = -Rational(v.max_degree()) - Rational(w.max_degree());
    out.set_lower(var, lo);

    std::function<VectorSeries(const FockMonomial&, const GradedVector&, const Rational&)> rec =
        [&](const FockMonomial& mono, const GradedVector& target, const Rational& cap) -> VectorSeries {
        VectorSeries s(std::vector<VarSpec>{VarSpec{var, den}});
        s.set_trust(var, cap);
        s.set_lower(var, -Rational(mono.degree()) - Rational(target.max_degree()));
        if (mono.parts.empty()) {
            s.add_term({Rational(0)}, target);
            return s;
        }
        long long n = mono.parts.front();
        FockMonomial rest{std::vector<long long>(mono.parts.begin() + 1, mono.parts.end())};

        // annihilation side: sum_{m>=0} c_{n,m} z^{-m-n} Y(rest, z)(alpha(m) target)
        long long mp = 0;
        for (const auto& [t, c] : target.terms()) mp = std::max(mp, t.max_part());
        for (long long m = 0; m <= mp; ++m) {
            Rational c = detail::dressed_mode_coeff(n, m);
            if (c == 0) continue;
            GradedVector am = alpha_apply(m, target);
            if (am.is_zero()) continue;
            VectorSeries inner = rec(rest, am, cap + m + n);
            inner.shift_var(var, Rational(-m - n));
            inner.scale_in_place(Scalar(c));
            s.add_in(inner);
        }
        // creation side: sum_{m<0} c_{n,m} z^{-m-n} alpha(m)(Y(rest, z) target);
        // inner exponents e' satisfy e' - m - n <= cap with m <= -1
        VectorSeries inner2 = rec(rest, target, cap + n - 1);
        for (const auto& [k, vec] : inner2.entries()) {
            Rational e = inner2.exp_of(k, 0);
            for (long long mm = 1;; ++mm) { // mm = -m
                Rational eo = e + mm - n;
                if (eo > cap) break;
                Rational c = detail::dressed_mode_coeff(n, -mm);
                if (c == 0) continue;
                s.add_term({eo}, alpha_apply(-mm, vec).scaled(Scalar(c)));
            }
        }
        return s;
    };

    for (const auto& [mono, c] : v.terms()) {
        VectorSeries part = rec(mono, w, hi);
        part.scale_in_place(c);
        out.add_in(part);
    }
    out.set_trust(var, hi);
    return out;
}

inline VectorSeries boson_vertex(const GradedVector& v, const GradedVector& w, char var,
                                 const Rational& hi, long long den = 1) {
    static std::map<std::string, VectorSeries> cache;
    static std::mutex mtx;
    if (v.is_zero() || w.is_zero() || v.terms().size() * w.terms().size() > 64)
        return boson_vertex_uncached(v, w, var, hi, den);
    Rational hi_c = Rational(rat_ceil(hi));
    VectorSeries out(std::vector<VarSpec>{VarSpec{var, den}});
    out.set_trust(var, hi);
    out.set_lower(var, -Rational(v.max_degree()) - Rational(w.max_degree()));
    for (const auto& [vm, vc] : v.terms()) {
        for (const auto& [wm, wc] : w.terms()) {
            std::string key = vm.str() + "|" + rat_str(w.charge()) + "|" + wm.str() + "|" + rat_str(hi_c);
            VectorSeries piece;
            bool found = false;
            {
                std::lock_guard<std::mutex> lock(mtx);
                auto it = cache.find(key);
                if (it != cache.end()) {
                    piece = it->second;
                    found = true;
                }
            }
            if (!found) {
                GradedVector vv(Rational(0));
                vv.add_term(vm, Scalar(1));
                GradedVector ww(w.charge());
                ww.add_term(wm, Scalar(1));
                piece = boson_vertex_uncached(vv, ww, var, hi_c);
                std::lock_guard<std::mutex> lock(mtx);
                cache.emplace(std::move(key), piece);
            }
            if (piece.vars()[0].id != var) piece.rename_var(piece.vars()[0].id, var);
            piece.refine_den(var, den);
            piece.truncate(var, hi);
            piece.scale_in_place(vc * wc);
            out.add_in(piece);
        }
    }
    out.set_trust(var, hi);
    return out;
}

/// The intertwiner Y(wl, z) w of type (M(1,l+m); M(1,l) M(1,m)), wl of charge
/// l, w of charge m. Exponents in l*m + Z; den must absorb den(l*m).
inline VectorSeries boson_intertwiner(const GradedVector& wl, const GradedVector& w, char var,
                                      const Rational& hi, long long den = 0) {
    const Rational l = wl.charge();
    const Rational m = w.charge();
    const Rational lm = l * m;
    if (den == 0) den = to_ll(rat_den(lm));
    else den = lllcm(den, to_ll(rat_den(lm)));

    VectorSeries out(std::vector<VarSpec>{VarSpec{var, den}});
    out.set_trust(var, hi);
    if (wl.is_zero() || w.is_zero()) {
        out.set_lower(var, std::nullopt);
        return out;
    }
    Rational tgt_low = (l + m) * (l + m) / 2;
    out.set_lower(var, tgt_low - wl.max_weight() - w.max_weight());

    // base operator on one source monomial: E^-(z) E^+(z) S_l z^{l alpha(0)}
    auto base = [&](const GradedVector& target, const Rational& cap) -> VectorSeries {
        VectorSeries s(std::vector<VarSpec>{VarSpec{var, den}});
        s.set_trust(var, cap);
        s.set_lower(var, tgt_low - l * l / 2 - target.max_weight());
        // shift charge m -> l + m, overall factor z^{l m}
        GradedVector shifted((l + m));
        for (const auto& [t, c] : target.terms()) shifted.add_term(t, c);
        // E^+ = exp(-l sum_{n>=1} alpha(n) z^{-n} / n) applied first: finite
        VectorSeries total(std::vector<VarSpec>{VarSpec{var, den}});
        total.set_trust(var, std::nullopt);
        VectorSeries powj(std::vector<VarSpec>{VarSpec{var, den}});
        powj.set_trust(var, std::nullopt);
        powj.add_term({lm}, shifted);
        long long j = 0;
        while (!powj.empty()) {
            total.add_in(powj);
            ++j;
            VectorSeries nxt(std::vector<VarSpec>{VarSpec{var, den}});
            nxt.set_trust(var, std::nullopt);
            for (const auto& [k, vec] : powj.entries()) {
                long long mp = 0;
                for (const auto& [t, c] : vec.terms()) mp = std::max(mp, t.max_part());
                for (long long n = 1; n <= mp; ++n) {
                    GradedVector a = alpha_apply(n, vec);
                    if (a.is_zero()) continue;
                    nxt.add_term({powj.exp_of(k, 0) - n}, a.scaled(Scalar(-l / (n * j))));
                }
            }
            powj = nxt;
        }
        // E^- = exp(l sum_{n>=1} alpha(-n) z^n / n), truncated at cap
        VectorSeries result(std::vector<VarSpec>{VarSpec{var, den}});
        result.set_trust(var, cap);
        VectorSeries p = total;
        long long jj = 0;
        while (!p.empty()) {
            for (const auto& [k, vec] : p.entries()) {
                if (p.exp_of(k, 0) <= cap) result.add_key(k, vec);
            }
            ++jj;
            VectorSeries nxt(std::vector<VarSpec>{VarSpec{var, den}});
            nxt.set_trust(var, std::nullopt);
            for (const auto& [k, vec] : p.entries()) {
                Rational e = p.exp_of(k, 0);
                for (long long n = 1; e + n <= cap; ++n) {
                    nxt.add_term({e + n}, alpha_apply(-n, vec).scaled(Scalar(l / (n * jj))));
                }
            }
            p = nxt;
        }
        result.set_lower(var, tgt_low - l * l / 2 - target.max_weight());
        return result;
    };

    // oscillator dressing, same recursion as the module vertex operator
    std::function<VectorSeries(const FockMonomial&, const GradedVector&, const Rational&)> rec =
        [&](const FockMonomial& mono, const GradedVector& target, const Rational& cap) -> VectorSeries {
        if (mono.parts.empty()) return base(target, cap);
        VectorSeries s(std::vector<VarSpec>{VarSpec{var, den}});
        s.set_trust(var, cap);
        s.set_lower(var, tgt_low - l * l / 2 - Rational(mono.degree()) - target.max_weight());
        long long n = mono.parts.front();
        FockMonomial rest{std::vector<long long>(mono.parts.begin() + 1, mono.parts.end())};
        long long mp = 0;
        for (const auto& [t, c] : target.terms()) mp = std::max(mp, t.max_part());
        for (long long mm = 0; mm <= mp; ++mm) {
            Rational c = detail::dressed_mode_coeff(n, mm);
            if (c == 0) continue;
            GradedVector am = alpha_apply(mm, target);
            if (am.is_zero()) continue;
            VectorSeries inner = rec(rest, am, cap + mm + n);
            inner.shift_var(var, Rational(-mm - n));
            inner.scale_in_place(Scalar(c));
            s.add_in(inner);
        }
        VectorSeries inner2 = rec(rest, target, cap + n - 1);
        for (const auto& [k, vec] : inner2.entries()) {
            Rational e = inner2.exp_of(k, 0);
            for (long long mm = 1;; ++mm) {
                Rational eo = e + mm - n;
                if (eo > cap) break;
                Rational c = detail::dressed_mode_coeff(n, -mm);
                if (c == 0) continue;
                s.add_term({eo}, alpha_apply(-mm, vec).scaled(Scalar(c)));
            }
        }
        s.set_trust(var, cap);
        return s;
    };

    for (const auto& [mono, c] : wl.terms()) {
        VectorSeries part = rec(mono, w, hi);
        part.scale_in_place(c);
        out.add_in(part);
    }
    out.set_trust(var, hi);
    return out;
}

// ---------------------------------------------------------------------------
// materialized operator series on a truncated basis

struct OperatorSeries {
    Rational source_charge;
    Rational target_charge;
    char var = 'z';
    long long den = 1;
    Rational window_hi = Rational(0);
    // exponent (as a rational) -> sparse map source monomial -> image vector
    std::map<Rational, std::map<FockMonomial, GradedVector>> entries;

    void add_block(const Rational& exp, const FockMonomial& src, const GradedVector& img) {
        if (img.is_zero()) return;
        entries[exp][src] = img;
    }

    /// Applies the stored matrix to a vector, one exponent at a time.
    VectorSeries apply(const GradedVector& w, const Rational& hi) const {
        VectorSeries out(std::vector<VarSpec>{VarSpec{var, den}});
        out.set_trust(var, std::min(hi, window_hi));
        for (const auto& [e, block] : entries) {
            if (e > hi) break;
            GradedVector img(target_charge);
            for (const auto& [m, c] : w.terms()) {
                auto it = block.find(m);
                if (it != block.end()) img.add_in(it->second.scaled(c));
            }
            if (!img.is_zero()) out.add_term({e}, img);
        }
        return out;
    }
};

/// Materializes an evaluator over the truncated basis of M(1,source_charge).
template <class Eval>
OperatorSeries materialize(Eval&& eval, const Rational& source_charge, const Rational& target_charge,
                           const Rational& degree_cap, char var, long long den, const Rational& hi) {
    OperatorSeries op;
    op.source_charge = source_charge;
    op.target_charge = target_charge;
    op.var = var;
    op.den = den;
    op.window_hi = hi;
    for (const FockMonomial& m : module_basis(source_charge, source_charge * source_charge / 2 + degree_cap)) {
        GradedVector w(source_charge);
        w.add_term(m, Scalar(1));
        VectorSeries s = eval(w);
        for (const auto& [k, vec] : s.entries()) op.add_block(s.exp_of(k, 0), m, vec);
    }
    return op;
}

/// The contragredient action: <Y_{M'}(v,z) f, u> = <f, Y_M(e^{zL(1)}(-z^{-2})^{L(0)} v, z^{-1}) u>
/// materialized as matrices on the dual of the truncated basis (transpose
/// blocks). v must be homogeneous of integer weight. On the degree <= cap
/// truncation the dual action is lower-bounded by -wt(v) - cap, and the
/// materialization is complete down to that bound.
inline OperatorSeries contragredient_op(const GradedVector& v, const Rational& lambda,
                                        const Rational& degree_cap, char var,
                                        const Rational& window_hi) {
    if (!v.homogeneous()) throw std::invalid_argument("contragredient_op: v must be homogeneous");
    if (v.charge() != 0 || !is_integer(v.min_weight()))
        throw std::invalid_argument("contragredient_op: integer-weight operator vectors only");
    long long h = to_ll(rat_num(v.min_weight()));
    Rational window_lo = -Rational(h) - degree_cap;

    // Y_M(L(1)^j v, z) materialized; exponent f contributes to output exponent
    // e = j - 2h - f, so f ranges over [j - 2h - hi, j - 2h - lo].
    OperatorSeries out;
    out.source_charge = lambda; // dual basis indexed by the same monomials
    out.target_charge = lambda;
    out.var = var;
    out.den = 1;
    out.window_hi = window_hi;

    GradedVector vj = v;
    Rational sign = (h % 2 == 0) ? Rational(1) : Rational(-1);
    Integer jfact = 1;
    for (long long j = 0; !vj.is_zero(); ++j) {
        if (j > 0) {
            vj = virasoro(1, vj);
            jfact *= static_cast<long>(j);
            if (vj.is_zero()) break;
        }
        Rational f_lo = j - 2 * h - window_hi;
        Rational f_hi = j - 2 * h - window_lo;
        auto inner = materialize(
            [&](const GradedVector& w) { return boson_vertex(vj, w, var, f_hi); }, lambda, lambda,
            degree_cap, var, 1, f_hi);
        Scalar coef = Scalar(sign / Rational(jfact));
        for (const auto& [f, block] : inner.entries) {
            if (f < f_lo) continue;
            Rational e = j - 2 * h - f;
            // transpose the block: <A^t f_m, u_m'> = <f_m, A u_m'>
            for (const auto& [src, img] : block) {
                for (const auto& [tm, c] : img.terms()) {
                    // entry A[tm][src] = c contributes to transpose at [src <- tm]
                    auto& blk = out.entries[e];
                    auto it = blk.find(tm);
                    if (it == blk.end()) it = blk.emplace(tm, GradedVector(lambda)).first;
                    it->second.add_term(src, c * coef);
                }
            }
        }
    }
    return out;
}

} // namespace orbifusion
