#include <catch2/catch_amalgamated.hpp>

#include "orbifusion/cyclotomic.hpp"
#include "orbifusion/puiseux.hpp"

using namespace orbifusion;

namespace {
Rational Q(long long n, long long d = 1) { return Rational(n, d); }
}

TEST_CASE("rational binomial coefficients") {
    CHECK(binomial(Q(1, 2), 1) == Q(1, 2));
    CHECK(binomial(Q(1, 2), 2) == Q(-1, 8));
    CHECK(binomial(Q(-1), 3) == Q(-1));
    CHECK(binomial(Q(4), 2) == Q(6));
    CHECK(binomial(Q(3), 5) == Q(0));
}

TEST_CASE("cyclotomic field arithmetic") {
    Scalar i = Scalar::root_of_unity(4);
    CHECK(i * i == Scalar(-1));
    CHECK(i.pow(4) == Scalar(1));

    Scalar w = Scalar::root_of_unity(3);
    CHECK(w * w * w == Scalar(1));
    // 1 + w + w^2 = 0
    CHECK((Scalar(1) + w + w * w).is_zero());

    // inverse: w^{-1} = w^2
    CHECK(w.inverse() == w.pow(2));
    Scalar a = Scalar(2) + w.scaled(Q(3, 7));
    CHECK(a * a.inverse() == Scalar(1));

    // eta_2 embeds as -1
    CHECK(Scalar::root_of_unity(2) == Scalar(-1));
    // eta_6^3 = -1 across orders
    CHECK(Scalar::root_of_unity(6).pow(3) == Scalar(-1));
    // embedding Q(eta_3) into Q(eta_6): eta_3 = eta_6^2
    CHECK(w == Scalar::root_of_unity(6).pow(2));

    // (-1)^{1/2} = eta_4
    CHECK(Scalar::minus_one_pow(Q(1, 2)) == i);
    CHECK(Scalar::minus_one_pow(Q(1)) == Scalar(-1));
    CHECK(Scalar::minus_one_pow(Q(-1, 2)) == i.inverse());
}

TEST_CASE("expand_binomial matches the pinned convention") {
    // (z1 - z2)^1 with nonnegative powers of z2
    auto s = expand_binomial(Q(1), Binom::a_minus_b, {'1', 1}, {'2', 1}, Q(6));
    CHECK(*s.find({Q(1), Q(0)}) == Scalar(1));
    CHECK(*s.find({Q(0), Q(1)}) == Scalar(-1));
    CHECK(s.find({Q(-1), Q(2)}) == nullptr);

    // (z1 - z2)^{1/2}: z1^{1/2} - 1/2 z1^{-1/2} z2 - 1/8 z1^{-3/2} z2^2 + ...
    auto h = expand_binomial(Q(1, 2), Binom::a_minus_b, {'1', 2}, {'2', 1}, Q(6));
    CHECK(*h.find({Q(1, 2), Q(0)}) == Scalar(1));
    CHECK(*h.find({Q(-1, 2), Q(1)}) == Scalar(Q(-1, 2)));
    CHECK(*h.find({Q(-3, 2), Q(2)}) == Scalar(Q(-1, 8)));
}

TEST_CASE("binomial convention asymmetry is visible") {
    // (z1 - z2)^{1/2} expanded in z2 vs (-z2 + z1)^{1/2} expanded in z1
    auto a = expand_binomial(Q(1, 2), Binom::a_minus_b, {'1', 2}, {'2', 2}, Q(4));
    auto b = expand_binomial(Q(1, 2), Binom::minus_a_plus_b, {'2', 2}, {'1', 2}, Q(4));
    // reorder b's variables to ('1','2') by promotion
    auto bp = b.promoted({{'1', 2}, {'2', 2}});
    auto ap = a.promoted({{'1', 2}, {'2', 2}});
    // they must differ at some exponent: a has z1^{1/2}z2^0, b has z2^{1/2}z1^0
    CHECK(ap.find({Q(1, 2), Q(0)}) != nullptr);
    CHECK(bp.find({Q(1, 2), Q(0)}) == nullptr);
}

TEST_CASE("series product and truncation coherence") {
    // f = z^{-1} + 2 + 3 z,  g = 1 - z; windows wide enough
    ScalarSeries f({{'z', 1}});
    f.set_trust('z', Q(10));
    f.set_lower('z', Q(-1));
    f.add_term({Q(-1)}, Scalar(1));
    f.add_term({Q(0)}, Scalar(2));
    f.add_term({Q(1)}, Scalar(3));
    ScalarSeries g({{'z', 1}});
    g.set_trust('z', Q(10));
    g.set_lower('z', Q(0));
    g.add_term({Q(0)}, Scalar(1));
    g.add_term({Q(1)}, Scalar(-1));
    auto p = mul(f, g);
    CHECK(*p.find({Q(-1)}) == Scalar(1));
    CHECK(*p.find({Q(0)}) == Scalar(1));
    CHECK(*p.find({Q(1)}) == Scalar(1));
    CHECK(*p.find({Q(2)}) == Scalar(-3));
    // trust: min(10 + 0, 10 + (-1)) = 9
    CHECK(*p.trust('z') == Q(9));

    // truncation coherence: truncate then operate == operate then truncate
    auto p5 = mul(f, g);
    p5.truncate('z', Q(1));
    ScalarSeries f1 = f;
    f1.truncate('z', Q(1));
    auto q = mul(f1, g);
    q.truncate('z', Q(1));
    std::string w;
    CHECK(p5.equal_within_trust(q, &w));
}

TEST_CASE("residue extraction") {
    ScalarSeries f({{'z', 2}});
    f.set_trust('z', Q(5));
    f.set_lower('z', Q(-1));
    f.add_term({Q(-1)}, Scalar(1));
    f.add_term({Q(0)}, Scalar(3));
    auto r = f.residue('z');
    REQUIRE(r.nvars() == 0);
    CHECK(r.entries().size() == 1);
    CHECK(r.entries().begin()->second == Scalar(1));

    ScalarSeries h({{'z', 2}});
    h.set_trust('z', Q(5));
    h.set_lower('z', Q(-1, 2));
    h.add_term({Q(-1, 2)}, Scalar(1));
    auto r2 = h.residue('z');
    CHECK(r2.entries().empty());
}

TEST_CASE("substitute_root: x1 -> x + z for integer and half powers") {
    // x1^1 with root_den 1, L = (x+z)^1
    ScalarSeries s({{'t', 1}, {'x', 1}, {'z', 1}});
    s.set_lower('t', Q(1));
    s.set_lower('x', Q(0));
    s.set_lower('z', Q(0));
    s.add_term({Q(1), Q(0), Q(0)}, Scalar(1));
    auto L = LineSeries::binomial_root('x', 'z', Q(1), Binom::a_plus_b, 1, Q(8));
    auto out = substitute_root(s, 't', 1, L, Q(8), Q(8));
    CHECK(*out.find({Q(1), Q(0)}) == Scalar(1));
    CHECK(*out.find({Q(0), Q(1)}) == Scalar(1));

    // x1^{1/2} -> x^{1/2} + 1/2 x^{-1/2} z - 1/8 x^{-3/2} z^2 + ...
    ScalarSeries s2({{'t', 2}, {'x', 2}, {'z', 1}});
    s2.set_lower('t', Q(1, 2));
    s2.set_lower('x', Q(0));
    s2.set_lower('z', Q(0));
    s2.add_term({Q(1, 2), Q(0), Q(0)}, Scalar(1));
    auto Lroot = LineSeries::binomial_root('x', 'z', Q(1, 2), Binom::a_plus_b, 1, Q(6));
    auto out2 = substitute_root(s2, 't', 2, Lroot, Q(4), Q(4));
    CHECK(*out2.find({Q(1, 2), Q(0)}) == Scalar(1));
    CHECK(*out2.find({Q(-1, 2), Q(1)}) == Scalar(Q(1, 2)));
    CHECK(*out2.find({Q(-3, 2), Q(2)}) == Scalar(Q(-1, 8)));
}

TEST_CASE("pinned change-of-variable: (z1^k - x)^{n/k} at x = z1^k - (z1-z0)^k") {
    // expand (z1^k - x)^{n/k} by the pinned convention, substitute
    // x = z1^k - (z1-z0)^k, and compare with (z1-z0)^n; n = 3, k = 3.
    const long long k = 3, n = 3;
    const Rational cutoff(12);

    // (z1^3 - x)^{n/3} = sum_j C(n/3, j) (-1)^j z1^{n-3j} x^j : as a series in (1, x)
    ScalarSeries lhs({{'1', 3}, {'x', 1}});
    lhs.set_trust('1', std::nullopt);
    lhs.set_trust('x', cutoff);
    lhs.set_lower('x', Q(0));
    lhs.set_lower('1', Q(n - 3 * 12));
    for (long long j = 0; j <= 12; ++j) {
        Rational c = binomial(Q(n, k), j);
        if (j % 2 == 1) c = -c;
        if (c == 0) continue;
        lhs.add_term({Q(n - k * j), Q(j)}, Scalar(c));
    }

    // x-value line: z1^k - (z1-z0)^k = sum_{i>=1} C(k,i)(-1)^{i+1} z1^{k-i} z0^i
    LineSeries X;
    X.var_a = '1';
    X.var_b = '0';
    X.alpha = Q(k);
    X.den_b = 1;
    X.hi_b = LineSeries::inf_b; // a polynomial, complete
    for (long long i = 1; i <= k; ++i) {
        Rational c = binomial(Q(k), i);
        if (i % 2 == 0) c = -c;
        X.terms[i] = Scalar(c);
    }

    auto substituted = substitute_root(lhs, 'x', 1, X, Q(12), Q(12));

    // (z1 - z0)^n exactly (n = 3: a polynomial)
    auto direct0 = expand_binomial(Q(n), Binom::a_minus_b, {'1', 1}, {'0', 1}, Q(12));
    auto direct = direct0.promoted(substituted.vars());
    std::string w;
    INFO(w);
    CHECK(substituted.equal_within_trust(direct, &w));
}

TEST_CASE("residue_binom picks the delta-function pairing") {
    // Res_{x1} x1^{0} (x1 - x)^{-1} f(x1): for f = x1^m (m >= 0) this is
    // the expansion of x^m's tail: Res_{x1} sum_i (-1)^i C(-1,i) x1^{-1-i} x^i x1^m
    // = x^m (the i = m term), the standard delta pairing.
    ScalarSeries f({{'u', 1}, {'x', 1}});
    f.set_trust('u', Q(20));
    f.set_trust('x', Q(20));
    f.set_lower('u', Q(2));
    f.set_lower('x', Q(0));
    f.add_term({Q(2), Q(0)}, Scalar(1)); // x1^2
    auto r = residue_binom(f, 'u', 'x', Q(0), Q(-1), true, Q(10));
    REQUIRE(r.nvars() == 1);
    CHECK(*r.find({Q(2)}) == Scalar(1));
    CHECK(r.entries().size() == 1);
}
