#include <catch2/catch_amalgamated.hpp>

#include "orbifusion/boson.hpp"

using namespace orbifusion;

namespace {
Rational Q(long long n, long long d = 1) { return Rational(n, d); }

// independent Virasoro oracle from the bracket [L(n), alpha(-m)] = m alpha(n-m)
// and the closed forms on highest-weight vectors
GradedVector virasoro_oracle(long long n, const GradedVector& v) {
    GradedVector out(v.charge());
    Rational lam = v.charge();
    for (const auto& [mono, c] : v.terms()) {
        if (mono.parts.empty()) {
            if (n > 0) continue;
            if (n == 0) {
                out.add_term(mono, c.scaled(lam * lam / 2));
            } else {
                long long p = -n;
                GradedVector t = alpha_apply(-p, GradedVector::highest_weight(lam)).scaled(c.scaled(lam));
                for (long long i = 1; i < p; ++i) {
                    GradedVector u = alpha_apply(-i, alpha_apply(-(p - i), GradedVector::highest_weight(lam)));
                    t.add_in(u.scaled(c.scaled(Q(1, 2))));
                }
                out.add_in(t);
            }
            continue;
        }
        // peel the first oscillator: L(n) a(-m) w = m a(n-m) w + a(-m) L(n) w
        long long m = mono.parts.front();
        GradedVector rest(v.charge());
        rest.add_term(FockMonomial{std::vector<long long>(mono.parts.begin() + 1, mono.parts.end())}, c);
        GradedVector t1 = alpha_apply(n - m, rest).scaled(Scalar(Rational(m)));
        GradedVector t2 = alpha_apply(-m, virasoro_oracle(n, rest));
        out.add_in(t1);
        out.add_in(t2);
    }
    return out;
}

VectorSeries compose2(const GradedVector& u, char vu, const Rational& hiu, const GradedVector& v,
                      char vv, const Rational& hiv, const GradedVector& w) {
    VectorSeries first = boson_vertex(v, w, vv, hiv);
    return compose_new_var(first, vu, 1, hiu,
                           [&](const GradedVector& x) { return boson_vertex(u, x, vu, hiu); });
}
} // namespace

TEST_CASE("module_basis enumerations") {
    auto b0 = module_basis(Q(0), Q(2));
    REQUIRE(b0.size() == 4); // 1, a(-1), a(-2), a(-1)^2
    CHECK(b0[0].parts.empty());
    auto b1 = module_basis(Q(0), Q(0));
    CHECK(b1.size() == 1);
    auto b2 = module_basis(Q(1, 2), Q(9, 8));
    CHECK(b2.size() == 2); // weights 1/8 and 9/8
}

TEST_CASE("virasoro modes against the bracket oracle") {
    GradedVector hw = GradedVector::highest_weight(Q(1, 2));
    CHECK(virasoro(0, alpha_apply(-2, GradedVector::vacuum())) ==
          alpha_apply(-2, GradedVector::vacuum()).scaled(Scalar(2)));
    CHECK(virasoro(1, alpha_apply(-1, hw)) == hw.scaled(Scalar(Q(1, 2))));
    CHECK(virasoro(-1, GradedVector::vacuum()).is_zero());

    std::vector<GradedVector> samples = {
        GradedVector::vacuum(),
        conformal_vector(),
        alpha_apply(-3, alpha_apply(-1, hw)),
        alpha_apply(-2, GradedVector::monomial(Q(1, 3), {2, 1})),
    };
    for (const auto& v : samples)
        for (long long n = -3; n <= 3; ++n) {
            INFO("n = " << n << ", v = " << v.str());
            CHECK(virasoro(n, v) == virasoro_oracle(n, v));
        }
}

TEST_CASE("vertex operator basics") {
    GradedVector hw = GradedVector::highest_weight(Q(1, 2));
    // Y(1, z) = Id
    auto id = boson_vertex(GradedVector::vacuum(), hw, 'z', Q(4));
    REQUIRE(id.size() == 1);
    CHECK(*id.find({Q(0)}) == hw);

    // z^{-1} coefficient of Y(a(-1)1, z) on hw is alpha(0) = lambda
    auto af = boson_vertex(GradedVector::monomial(Q(0), {1}), hw, 'z', Q(3));
    CHECK(*af.find({Q(-1)}) == hw.scaled(Scalar(Q(1, 2))));

    // L(0) from Y(omega, z): coefficient of z^{-2} on a(-1)1 returns 1*a(-1)1
    GradedVector a1 = alpha_apply(-1, GradedVector::vacuum());
    auto om = boson_vertex(conformal_vector(), a1, 'z', Q(3));
    CHECK(*om.find({Q(-2)}) == a1);
    // and matches virasoro on every sampled mode
    for (long long n = -2; n <= 2; ++n) {
        auto c = om.find({Q(-n - 2)});
        GradedVector expect = virasoro(n, a1);
        if (c == nullptr) CHECK(expect.is_zero());
        else CHECK(*c == expect);
    }
}

TEST_CASE("grading shift on materialized blocks") {
    GradedVector v = conformal_vector();
    auto op = materialize([&](const GradedVector& w) { return boson_vertex(v, w, 'z', Q(3)); },
                          Q(1, 2), Q(1, 2), Q(4), 'z', 1, Q(3));
    for (const auto& [e, block] : op.entries)
        for (const auto& [src, img] : block) {
            Rational src_wt = Q(1, 8) + src.degree();
            // v_m maps weight n to n + wt v - m - 1 = n + wt v + e (e = -m-1... here wt shift = wt v + e)
            for (const auto& [tm, c] : img.terms()) {
                Rational tgt_wt = Q(1, 8) + tm.degree();
                CHECK(tgt_wt == src_wt + 2 + e);
            }
        }
}

TEST_CASE("intertwiner leading term and support") {
    GradedVector hw_l = GradedVector::highest_weight(Q(1, 2));
    GradedVector hw_m = GradedVector::highest_weight(Q(1, 3));
    auto s = boson_intertwiner(hw_l, hw_m, 'z', Q(2));
    // leading coefficient: z^{lm} |hw_{l+m}>
    Rational lm = Q(1, 6);
    auto lead = s.find({lm});
    REQUIRE(lead != nullptr);
    CHECK(*lead == GradedVector::highest_weight(Q(5, 6)));
    CHECK(*s.min_exp('z') == lm);
    // exponents lie in lm + Z
    for (const auto& [k, vec] : s.entries()) {
        Rational e = s.exp_of(k, 0);
        CHECK(is_integer(e - lm));
    }
    // lambda = 1, mu = 1: exponent support in 1 + Z
    auto t = boson_intertwiner(GradedVector::highest_weight(Q(1)), GradedVector::highest_weight(Q(1)),
                               'z', Q(3));
    CHECK(*t.min_exp('z') == Q(1));

    // charge-0 intertwiner reduces to the module vertex operator
    GradedVector w = alpha_apply(-1, hw_m);
    auto iv = boson_intertwiner(conformal_vector(), w, 'z', Q(3));
    auto mv = boson_vertex(conformal_vector(), w, 'z', Q(3));
    std::string wit;
    INFO(wit);
    CHECK(iv.equal_within_trust(mv, &wit));
}

TEST_CASE("intertwiner L(-1)-derivative property") {
    GradedVector hw_l = GradedVector::highest_weight(Q(1, 2));
    GradedVector hw_m = GradedVector::highest_weight(Q(1, 3));
    for (const GradedVector& wl : {hw_l, alpha_apply(-1, hw_l)}) {
        VectorSeries y = boson_intertwiner(wl, hw_m, 'z', Q(3), 6);
        VectorSeries dy(y.vars());
        dy.set_trust('z', Q(2));
        for (const auto& [k, vec] : y.entries()) {
            Rational e = y.exp_of(k, 0);
            if (e - 1 > Q(2)) continue;
            dy.add_term({e - 1}, vec.scaled(Scalar(e)));
        }
        dy.set_lower('z', *y.lower('z') - 1);
        GradedVector lw = virasoro(-1, wl);
        VectorSeries yl = boson_intertwiner(lw, hw_m, 'z', Q(2), 6);
        std::string wit;
        INFO(wit);
        CHECK(dy.equal_within_trust(yl, &wit));
    }
}

TEST_CASE("weak commutativity on the small basis") {
    // (z1-z2)^p [Y(u,z1), Y(v,z2)] w = 0 with p derived from the OPE order
    std::vector<GradedVector> ops;
    for (const auto& m : module_basis(Q(0), Q(3))) {
        GradedVector v(Q(0));
        v.add_term(m, Scalar(1));
        ops.push_back(v);
    }
    GradedVector w = GradedVector::highest_weight(Q(1, 2));
    const Rational hi1 = Q(2), hi2 = Q(2);
    for (size_t i = 0; i < ops.size(); ++i) {
        for (size_t j = i; j < ops.size(); ++j) {
            const auto& u = ops[i];
            const auto& v = ops[j];
            auto uv = boson_vertex(u, v, 'z', Q(20));
            long long p = 0;
            if (auto me = uv.min_exp('z')) p = std::max(0LL, to_ll(rat_num(-*me)));
            auto ab = compose2(u, '1', hi1 + p, v, '2', hi2, w).promoted({{'1', 1}, {'2', 1}});
            auto ba = compose2(v, '2', hi2 + p, u, '1', hi1, w).promoted({{'1', 1}, {'2', 1}});
            auto comm = ab + (-ba);
            auto poly = expand_binomial(Rational(p), Binom::a_minus_b, {'1', 1}, {'2', 1}, Rational(p));
            auto lhs = mul(comm, poly);
            lhs.truncate('1', hi1);
            lhs.truncate('2', hi2);
            INFO("u = " << u.str() << ", v = " << v.str() << ", p = " << p);
            CHECK(lhs.empty());
        }
    }
}

TEST_CASE("weak associativity, untwisted") {
    GradedVector u = conformal_vector();
    GradedVector v = GradedVector::monomial(Q(0), {1});
    GradedVector w = alpha_apply(-1, GradedVector::highest_weight(Q(1, 2)));

    // l: z^l Y(u,z)w has only nonnegative powers
    auto uw = boson_vertex(u, w, 'z', Q(10));
    long long l = 0;
    if (auto me = uw.min_exp('z')) l = std::max(0LL, to_ll(rat_num(-*me)));

    const Rational c0 = Q(2), c2 = Q(2);
    // LHS: make Y(u,z1)Y(v,z2)w, substitute z1 = z0+z2, multiply (z0+z2)^l
    Rational hi1 = c0 + c2 + 8; // budget for the substitution
    auto P = compose2(u, '1', hi1, v, '2', c2 + l + 4, w);
    auto L = LineSeries::binomial_root('0', '2', Q(1), Binom::a_plus_b, 1, Q(1));
    auto lhs0 = substitute_root(P, '1', 1, L, c0 + l, c2 + l);
    auto polyL = expand_binomial(Rational(l), Binom::a_plus_b, {'0', 1}, {'2', 1}, Rational(l))
                     .promoted(lhs0.vars());
    auto lhs = mul(lhs0, polyL);
    lhs.truncate('0', c0);
    lhs.truncate('2', c2);

    // RHS: (z2+z0)^l Y(Y(u,z0)v, z2) w
    auto uvz0 = boson_vertex(u, v, '0', c0 + l + 2);
    auto rhs0 = compose_new_var(uvz0, '2', 1, c2 + l,
                                [&](const GradedVector& x) { return boson_vertex(x, w, '2', c2 + l); });
    // reorder to ('0','2')? compose appends: vars are ('0','2') already
    auto rhs = mul(rhs0, polyL.promoted(rhs0.vars()));
    rhs.truncate('0', c0);
    rhs.truncate('2', c2);

    std::string wit;
    INFO(wit);
    CHECK(lhs.equal_within_trust(rhs, &wit));
    CHECK(!lhs.empty()); // the identity is not vacuously checked
}

TEST_CASE("contragredient operator") {
    // v = 1 -> identity on M'
    auto id = contragredient_op(GradedVector::vacuum(), Q(1, 2), Q(3), 'z', Q(3));
    REQUIRE(id.entries.size() == 1);
    for (const auto& [src, img] : id.entries.begin()->second) {
        REQUIRE(img.terms().size() == 1);
        CHECK(img.terms().begin()->first == src);
        CHECK(img.terms().begin()->second == Scalar(1));
    }

    // v = omega: L_{M'}(0) has the same spectrum on each graded piece
    auto om = contragredient_op(conformal_vector(), Q(1, 2), Q(3), 'z', Q(3));
    auto it = om.entries.find(Q(-2)); // L'(0)
    REQUIRE(it != om.entries.end());
    for (const auto& [src, img] : it->second) {
        REQUIRE(img.terms().size() == 1);
        CHECK(img.terms().begin()->first == src);
        CHECK(img.terms().begin()->second == Scalar(Q(1, 8) + src.degree()));
    }

    // pairing invariance: <Y_{M'}(v,z) f, u> = <f, Y_M(e^{zL(1)}(-z^{-2})^{L(0)}v, z^{-1}) u>
    // recomputed both ways for sampled (v, f, u) and exponents
    GradedVector v = GradedVector::monomial(Q(0), {2});
    auto dual = contragredient_op(v, Q(1, 2), Q(4), 'z', Q(4));
    auto basis = module_basis(Q(1, 2), Q(1, 8) + 4);
    long long checked = 0;
    for (const auto& fm : basis) {
        for (const auto& um : basis) {
            for (Rational e(-2); e <= Rational(2); e += 1) {
                // LHS: coefficient of z^e of (Y'(v,z) f)(u)
                Scalar lhs(0);
                auto eit = dual.entries.find(e);
                if (eit != dual.entries.end()) {
                    auto fit = eit->second.find(fm);
                    if (fit != eit->second.end()) {
                        for (const auto& [tm, c] : fit->second.terms())
                            if (tm == um) lhs += c;
                    }
                }
                // RHS: sum_j (1/j!) (-1)^h z^{j-2h} <f, Y(L(1)^j v, z^{-1}) u>
                Scalar rhs(0);
                GradedVector vj = v;
                Integer jf = 1;
                long long h = 2;
                for (long long j = 0; !vj.is_zero(); ++j) {
                    if (j > 0) {
                        vj = virasoro(1, vj);
                        jf *= static_cast<long>(j);
                        if (vj.is_zero()) break;
                    }
                    // need coefficient of z^e: z^{j-2h} z^{-f}: f = j - 2h - e
                    Rational f = j - 2 * h - e;
                    GradedVector uu(Q(1, 2));
                    uu.add_term(um, Scalar(1));
                    auto s = boson_vertex(vj, uu, 'z', f + 1);
                    auto cf = s.find({f});
                    if (cf) {
                        for (const auto& [tm, c] : cf->terms())
                            if (tm == fm) rhs += c.scaled(((h % 2 == 0) ? Rational(1) : Rational(-1)) / Rational(jf));
                    }
                }
                INFO("f = " << fm.str() << " u = " << um.str() << " e = " << rat_str(e));
                CHECK(lhs == rhs);
                ++checked;
            }
            if (checked > 300) break;
        }
        if (checked > 300) break;
    }
}
