#include <catch2/catch_amalgamated.hpp>

#include "orbifusion/delta.hpp"

using namespace orbifusion;

namespace {
Rational Q(long long n, long long d = 1) { return Rational(n, d); }

// independent series-composition oracle: verify the defining identity of the
// a_n directly with plain polynomial arithmetic
bool an_defining_identity_holds(long long k, const std::vector<Rational>& a, long long order) {
    // exp(sum -a_m x^{m+1} d/dx) x computed term by term
    std::vector<Rational> cur(order + 1, Rational(0)), total(order + 1, Rational(0));
    cur[1] = 1;
    Integer jfact = 1;
    for (long long j = 0; j <= order + 1; ++j) {
        if (j > 0) {
            jfact *= static_cast<long>(j);
            std::vector<Rational> nxt(order + 1, Rational(0));
            for (long long d = 1; d <= order; ++d) {
                if (cur[d] == 0) continue;
                for (size_t m = 1; m <= a.size(); ++m) {
                    long long nd = d + static_cast<long long>(m);
                    if (nd > order) break;
                    nxt[nd] += -a[m - 1] * d * cur[d];
                }
            }
            cur = nxt;
        }
        for (long long d = 0; d <= order; ++d) total[d] += cur[d] / Rational(jfact);
    }
    for (long long d = 0; d <= order; ++d) {
        Rational target = (d >= 1) ? binomial(Rational(k), d) / k : Rational(0);
        if (total[d] != target) return false;
    }
    return true;
}
} // namespace

TEST_CASE("a_n solver against the composition oracle") {
    // k = 1: all zeros
    auto a1 = solve_an(1, 8);
    for (const auto& x : a1.a) CHECK(x == 0);

    // a_1 = -(k-1)/2 for several k
    for (long long k = 2; k <= 6; ++k) {
        auto ak = solve_an(k, 6);
        CHECK(ak.a[0] == Q(-(k - 1), 2));
        CHECK(an_defining_identity_holds(k, ak.a, 7));
    }

    // k = 2 frozen values through a_4 (computed by the oracle): a_1 = -1/2,
    // a_2 = 1/4 (= (k^2-1)/12 at k=2)
    auto a2 = solve_an(2, 4);
    CHECK(a2.a[0] == Q(-1, 2));
    CHECK(a2.a[1] == Q(1, 4));
    CHECK(an_defining_identity_holds(2, a2.a, 5));

    // k = 4: a_1 = -3/2
    CHECK(solve_an(4, 1).a[0] == Q(-3, 2));
}

TEST_CASE("a_n uniqueness: perturbing any coefficient breaks the identity") {
    auto a = solve_an(3, 5);
    REQUIRE(an_defining_identity_holds(3, a.a, 6));
    for (size_t i = 0; i < a.a.size(); ++i) {
        auto p = a.a;
        p[i] += Q(1, 7);
        CHECK(!an_defining_identity_holds(3, p, 6));
    }
}

TEST_CASE("Delta_k on the vacuum and on omega") {
    // Delta_k(z^k)^{-1} 1 = 1 and Delta_k(z) 1 = 1
    for (long long k : {2, 3}) {
        auto f = apply_delta(k, GradedVector::vacuum(), DeltaKind::forward, 1, 'z');
        REQUIRE(f.size() == 1);
        CHECK(*f.find({Q(0)}) == GradedVector::vacuum());
        auto g = apply_delta(k, GradedVector::vacuum(), DeltaKind::inverse, k, 'z');
        REQUIRE(g.size() == 1);
        CHECK(*g.find({Q(0)}) == GradedVector::vacuum());
    }

    // Delta_k(z) omega = (1/k^2) z^{2(1/k-1)} omega + z^{-2} (c/24)(1 - k^{-2}) 1, c = 1
    for (long long k : {2, 3, 4}) {
        auto d = apply_delta(k, conformal_vector(), DeltaKind::forward, 1, 'z');
        REQUIRE(d.size() == 2);
        auto lead = d.find({Q(2) * (Q(1, k) - 1)});
        REQUIRE(lead != nullptr);
        CHECK(*lead == conformal_vector().scaled(Scalar(Q(1, k * k))));
        auto tail = d.find({Q(-2)});
        REQUIRE(tail != nullptr);
        CHECK(*tail == GradedVector::vacuum().scaled(Scalar(Q(1, 24) * (1 - Q(1, k * k)))));
    }
}

TEST_CASE("Delta round trips") {
    GradedVector v = alpha_apply(-1, alpha_apply(-1, GradedVector::vacuum()));
    CHECK(verify_delta_round_trip(3, v, 1).pass);
    CHECK(verify_delta_round_trip(3, v, 3).pass);
    CHECK(verify_delta_round_trip(2, conformal_vector(), 2).pass);
    GradedVector w = alpha_apply(-2, GradedVector::highest_weight(Q(1, 2)));
    CHECK(verify_delta_round_trip(2, w, 1).pass);
    CHECK(verify_delta_round_trip(2, w, 2).pass);
}

TEST_CASE("derivative identity (finite, all orders)") {
    // w = 1: both sides vanish
    auto r0 = verify_derivative_identity(2, GradedVector::vacuum());
    CHECK(r0.pass);
    CHECK(verify_derivative_identity(2, GradedVector::monomial(Q(0), {1})).pass);
    CHECK(verify_derivative_identity(3, conformal_vector()).pass);
    CHECK(verify_derivative_identity(2, GradedVector::monomial(Q(1, 2), {2, 1})).pass);
}

TEST_CASE("L(-1) bracket property") {
    CHECK(verify_delta_lminus1(2, GradedVector::vacuum()).pass);
    CHECK(verify_delta_lminus1(2, GradedVector::monomial(Q(1, 2), {1})).pass);
    CHECK(verify_delta_lminus1(3, conformal_vector()).pass);
}

TEST_CASE("delta conjugation identity") {
    // v = 1: both sides Delta_k(x) w
    auto t = verify_delta_conjugation(2, GradedVector::vacuum(),
                                      GradedVector::highest_weight(Q(1, 2)), Q(3), Q(3));
    INFO(t.witness);
    CHECK(t.pass);

    auto r1 = verify_delta_conjugation(2, GradedVector::monomial(Q(0), {1}),
                                       GradedVector::highest_weight(Q(1, 2)), Q(4), Q(4));
    INFO(r1.witness);
    CHECK(r1.pass);

    auto r2 = verify_delta_conjugation(3, conformal_vector(), GradedVector::vacuum(), Q(3), Q(3));
    INFO(r2.witness);
    CHECK(r2.pass);
}
