#pragma once

#include "orbifusion/cyclotomic.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace orbifusion {

// Truncated formal series with rational exponents of bounded denominator, in
// up to a few variables. Exponents are stored as integer numerators over a
// per-variable grid denominator. Every series is complete within its trust
// rectangle: for exponent tuples e with e_v <= trust_hi_v for all v, the
// stored coefficient is the exact one; nothing is claimed beyond. A per-
// variable structural lower bound records that the true object has no terms
// below it inside the rectangle, which is what makes truncated products and
// residues sound.

struct WindowError : std::runtime_error {
    explicit WindowError(const std::string& what) : std::runtime_error(what) {}
};

struct VarSpec {
    char id;
    long long den; // exponent grid: values are num/den
};

template <class C>
struct CoeffOps; // is_zero / add_in / scale per coefficient space

template <>
struct CoeffOps<Scalar> {
    static bool is_zero(const Scalar& s) { return s.is_zero(); }
    static void add_in(Scalar& a, const Scalar& b) { a += b; }
    static Scalar scale(const Scalar& a, const Scalar& s) { return a * s; }
};

template <class C>
class Series {
public:
    using Key = std::vector<long long>;

    Series() = default;
    explicit Series(std::vector<VarSpec> vars)
        : vars_(std::move(vars)),
          hi_(vars_.size(), std::nullopt),
          lo_(vars_.size(), std::nullopt) {}

    const std::vector<VarSpec>& vars() const { return vars_; }
    size_t nvars() const { return vars_.size(); }

    int var_index(char id) const {
        for (size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].id == id) return static_cast<int>(i);
        throw std::invalid_argument(std::string("no such variable: ") + id);
    }

    long long den(char id) const { return vars_[var_index(id)].den; }

    // trust rectangle (upper bounds, in rational exponent values)
    void set_trust(char id, std::optional<Rational> hi) {
        int i = var_index(id);
        if (!hi) {
            hi_[i] = std::nullopt;
            return;
        }
        hi_[i] = floor_num(*hi, vars_[i].den);
    }
    std::optional<Rational> trust(char id) const {
        int i = var_index(id);
        if (!hi_[i]) return std::nullopt;
        return Rational(*hi_[i], vars_[i].den);
    }

    // structural lower bound within the trust rectangle
    void set_lower(char id, std::optional<Rational> lo) {
        int i = var_index(id);
        if (!lo) {
            lo_[i] = std::nullopt; // no terms at all
            return;
        }
        lo_[i] = ceil_num(*lo, vars_[i].den);
    }
    std::optional<Rational> lower(char id) const {
        int i = var_index(id);
        if (!lo_[i]) return std::nullopt;
        return Rational(*lo_[i], vars_[i].den);
    }

    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }
    const std::map<Key, C>& entries() const { return entries_; }

    Rational exp_of(const Key& k, size_t i) const { return Rational(k[i], vars_[i].den); }

    /// Adds c at the given exponents; silently drops outside the trust rectangle.
    void add_term(const std::vector<Rational>& exps, const C& c) {
        if (CoeffOps<C>::is_zero(c)) return;
        Key k(vars_.size());
        for (size_t i = 0; i < vars_.size(); ++i) {
            Rational scaled = exps[i] * vars_[i].den;
            if (!is_integer(scaled))
                throw std::invalid_argument("exponent off the variable grid");
            k[i] = to_ll(rat_num(scaled));
            if (hi_[i] && k[i] > *hi_[i]) return;
        }
        add_key(k, c);
    }

    void add_key(const Key& k, const C& c) {
        if (CoeffOps<C>::is_zero(c)) return;
        for (size_t i = 0; i < vars_.size(); ++i)
            if (hi_[i] && k[i] > *hi_[i]) return;
        auto it = entries_.find(k);
        if (it == entries_.end()) {
            entries_.emplace(k, c);
        } else {
            CoeffOps<C>::add_in(it->second, c);
            if (CoeffOps<C>::is_zero(it->second)) entries_.erase(it);
        }
    }

    /// Exact coefficient at one exponent tuple (zero if absent); requires the
    /// tuple to be inside the trust rectangle.
    const C* find(const std::vector<Rational>& exps) const {
        Key k(vars_.size());
        for (size_t i = 0; i < vars_.size(); ++i) {
            Rational scaled = exps[i] * vars_[i].den;
            if (!is_integer(scaled)) return nullptr;
            k[i] = to_ll(rat_num(scaled));
            if (hi_[i] && k[i] > *hi_[i])
                throw WindowError("coefficient request outside trusted window");
        }
        auto it = entries_.find(k);
        return it == entries_.end() ? nullptr : &it->second;
    }

    /// Rescales every entry by a scalar depending on its exponent in one variable.
    template <class F>
    void scale_by_exponent(char id, F&& f) {
        int i = var_index(id);
        for (auto it = entries_.begin(); it != entries_.end();) {
            it->second = CoeffOps<C>::scale(it->second, f(exp_of(it->first, i)));
            it = CoeffOps<C>::is_zero(it->second) ? entries_.erase(it) : std::next(it);
        }
    }

    void scale_in_place(const Scalar& s) {
        if (s.is_zero()) {
            entries_.clear();
            return;
        }
        for (auto& [k, c] : entries_) c = CoeffOps<C>::scale(c, s);
    }

    Series scaled(const Scalar& s) const {
        Series r = *this;
        r.scale_in_place(s);
        return r;
    }

    /// Shifts every exponent of variable id by delta (a grid multiple).
    void shift_var(char id, const Rational& delta) {
        int i = var_index(id);
        Rational scaled = delta * vars_[i].den;
        if (!is_integer(scaled)) throw std::invalid_argument("shift off the grid");
        long long d = to_ll(rat_num(scaled));
        std::map<Key, C> out;
        for (auto& [k, c] : entries_) {
            Key nk = k;
            nk[i] += d;
            out.emplace(std::move(nk), std::move(c));
        }
        entries_ = std::move(out);
        if (hi_[i]) *hi_[i] += d;
        if (lo_[i]) *lo_[i] += d;
    }

    /// Substitutes v -> v^m (exponents multiply by m > 0).
    void power_var(char id, long long m) {
        int i = var_index(id);
        std::map<Key, C> out;
        for (auto& [k, c] : entries_) {
            Key nk = k;
            nk[i] *= m;
            out.emplace(std::move(nk), std::move(c));
        }
        entries_ = std::move(out);
        if (hi_[i]) *hi_[i] *= m;
        if (lo_[i]) *lo_[i] *= m;
    }

    void rename_var(char from, char to) { vars_[var_index(from)].id = to; }

    /// Re-grids a variable onto a finer denominator (newden multiple of old).
    void refine_den(char id, long long newden) {
        int i = var_index(id);
        if (newden == vars_[i].den) return;
        if (newden % vars_[i].den != 0) throw std::invalid_argument("refine_den: not a multiple");
        long long f = newden / vars_[i].den;
        std::map<Key, C> out;
        for (auto& [k, c] : entries_) {
            Key nk = k;
            nk[i] *= f;
            out.emplace(std::move(nk), std::move(c));
        }
        entries_ = std::move(out);
        vars_[i].den = newden;
        if (hi_[i]) *hi_[i] *= f;
        if (lo_[i]) *lo_[i] *= f;
    }

    void truncate(char id, const Rational& hi) {
        int i = var_index(id);
        long long h = floor_num(hi, vars_[i].den);
        if (hi_[i] && *hi_[i] <= h) return;
        hi_[i] = h;
        for (auto it = entries_.begin(); it != entries_.end();)
            it = (it->first[i] > h) ? entries_.erase(it) : std::next(it);
    }

    /// Raises the structural lower bound (sound only when the true object is
    /// known to satisfy it, e.g. locality after a (z1-z2)^m factor). Returns
    /// false if a stored entry contradicts the claim.
    bool tighten_lower(char id, const Rational& bound) {
        int i = var_index(id);
        long long b = ceil_num(bound, vars_[i].den);
        for (const auto& [k, c] : entries_)
            if (k[i] < b) return false;
        if (!lo_[i] || *lo_[i] < b) lo_[i] = b;
        return true;
    }

    std::optional<Rational> min_exp(char id) const {
        int i = var_index(id);
        std::optional<long long> m;
        for (const auto& [k, c] : entries_)
            if (!m || k[i] < *m) m = k[i];
        if (!m) return std::nullopt;
        return Rational(*m, vars_[i].den);
    }
    std::optional<Rational> max_exp(char id) const {
        int i = var_index(id);
        std::optional<long long> m;
        for (const auto& [k, c] : entries_)
            if (!m || k[i] > *m) m = k[i];
        if (!m) return std::nullopt;
        return Rational(*m, vars_[i].den);
    }

    /// Permutes the variable list to the given id order (same id set).
    Series reordered(const std::vector<char>& order) const {
        if (order.size() != vars_.size()) throw std::invalid_argument("reordered: size mismatch");
        std::vector<int> pos(order.size());
        std::vector<VarSpec> nv(order.size());
        for (size_t j = 0; j < order.size(); ++j) {
            pos[j] = var_index(order[j]);
            nv[j] = vars_[pos[j]];
        }
        Series out(nv);
        for (size_t j = 0; j < order.size(); ++j) {
            out.hi_[j] = hi_[pos[j]];
            out.lo_[j] = lo_[pos[j]];
        }
        for (const auto& [k, c] : entries_) {
            Key nk(k.size());
            for (size_t j = 0; j < order.size(); ++j) nk[j] = k[pos[j]];
            out.entries_.emplace(std::move(nk), c);
        }
        return out;
    }

    void add_in(const Series& other) {
        if (!same_vars(other)) {
            std::vector<char> order;
            for (const auto& v : vars_) order.push_back(v.id);
            add_in(other.reordered(order));
            return;
        }
        Series o = other;
        align(o);
        for (size_t i = 0; i < vars_.size(); ++i) {
            hi_[i] = opt_min(hi_[i], o.hi_[i]);
            lo_[i] = opt_min_lo(lo_[i], o.lo_[i]);
        }
        for (auto it = entries_.begin(); it != entries_.end();) {
            bool drop = false;
            for (size_t i = 0; i < vars_.size(); ++i)
                if (hi_[i] && it->first[i] > *hi_[i]) drop = true;
            it = drop ? entries_.erase(it) : std::next(it);
        }
        for (const auto& [k, c] : o.entries_) add_key(k, c);
    }

    friend Series operator+(Series a, const Series& b) {
        a.add_in(b);
        return a;
    }

    Series operator-() const { return scaled(Scalar(-1)); }

    /// True when both series agree on every tuple inside the intersected
    /// trust rectangle. On mismatch fills the witness strings.
    bool equal_within_trust(const Series& other, std::string* witness = nullptr) const {
        Series d = *this + (-other);
        if (d.entries_.empty()) return true;
        if (witness) {
            const auto& [k, c] = *d.entries_.begin();
            std::ostringstream os;
            os << "first differing exponent (";
            for (size_t i = 0; i < d.vars_.size(); ++i) {
                if (i) os << ", ";
                os << d.vars_[i].id << "^" << rat_str(d.exp_of(k, i));
            }
            os << ")";
            *witness = os.str();
        }
        return false;
    }

    /// Inserts missing variables (exponent 0, untouched trust).
    Series promoted(const std::vector<VarSpec>& full) const {
        Series out(full);
        std::vector<int> pos(full.size(), -1);
        for (size_t j = 0; j < full.size(); ++j) {
            for (size_t i = 0; i < vars_.size(); ++i)
                if (vars_[i].id == full[j].id) {
                    if (full[j].den % vars_[i].den != 0)
                        throw std::invalid_argument("promoted: coarser grid requested");
                    pos[j] = static_cast<int>(i);
                }
        }
        for (size_t j = 0; j < full.size(); ++j) {
            if (pos[j] >= 0) {
                auto h = hi_[pos[j]];
                long long f = full[j].den / vars_[pos[j]].den;
                out.hi_[j] = h ? std::optional<long long>(*h * f) : std::nullopt;
                auto l = lo_[pos[j]];
                out.lo_[j] = l ? std::optional<long long>(*l * f) : std::nullopt;
            } else {
                out.lo_[j] = 0; // concentrated at exponent 0
            }
        }
        for (const auto& [k, c] : entries_) {
            Key nk(full.size(), 0);
            for (size_t j = 0; j < full.size(); ++j)
                if (pos[j] >= 0) nk[j] = k[pos[j]] * (full[j].den / vars_[pos[j]].den);
            out.add_key(nk, c);
        }
        return out;
    }

    /// Extracts the coefficient of id^e as a series in the remaining variables.
    Series coefficient_of(char id, const Rational& e) const {
        int i = var_index(id);
        Rational scaled = e * vars_[i].den;
        if (!is_integer(scaled)) {
            Series out = drop_var_template(i);
            return out; // off-grid exponent: exact zero
        }
        long long num = to_ll(rat_num(scaled));
        if (hi_[i] && num > *hi_[i])
            throw WindowError(std::string("coefficient of ") + id + "^" + rat_str(e) +
                              " outside trusted window");
        Series out = drop_var_template(i);
        for (const auto& [k, c] : entries_) {
            if (k[i] != num) continue;
            Key nk;
            nk.reserve(k.size() - 1);
            for (size_t j = 0; j < k.size(); ++j)
                if (j != static_cast<size_t>(i)) nk.push_back(k[j]);
            out.add_key(nk, c);
        }
        return out;
    }

    Series residue(char id) const { return coefficient_of(id, Rational(-1)); }

    std::string str() const {
        std::ostringstream os;
        bool first = true;
        for (const auto& [k, c] : entries_) {
            if (!first) os << " + ";
            first = false;
            os << "(" << coeff_str(c) << ")";
            for (size_t i = 0; i < vars_.size(); ++i)
                if (k[i] != 0) os << " " << vars_[i].id << "^" << rat_str(exp_of(k, i));
        }
        if (first) os << "0";
        return os.str();
    }

    // implementation helpers shared with the free-function operations
    static long long floor_num(const Rational& v, long long den) {
        return to_ll(rat_floor(v * den));
    }
    static long long ceil_num(const Rational& v, long long den) {
        return to_ll(rat_ceil(v * den));
    }
    static std::optional<long long> opt_min(std::optional<long long> a, std::optional<long long> b) {
        if (!a) return b;
        if (!b) return a;
        return std::min(*a, *b);
    }
    static std::optional<long long> opt_min_lo(std::optional<long long> a, std::optional<long long> b) {
        // lower bounds: nullopt means "no terms" (+infinity)
        if (!a) return b;
        if (!b) return a;
        return std::min(*a, *b);
    }

    template <class D>
    bool same_vars(const Series<D>& o) const {
        if (vars_.size() != o.vars().size()) return false;
        for (size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].id != o.vars()[i].id) return false;
        return true;
    }

    /// Unifies grid denominators with another series (both refined to lcm).
    void align(Series& o) {
        for (size_t i = 0; i < vars_.size(); ++i) {
            long long l = lllcm(vars_[i].den, o.vars_[i].den);
            refine_den(vars_[i].id, l);
            o.refine_den(o.vars_[i].id, l);
        }
    }

    std::optional<long long> hi_num(size_t i) const { return hi_[i]; }
    std::optional<long long> lo_num(size_t i) const { return lo_[i]; }
    void set_hi_num(size_t i, std::optional<long long> v) { hi_[i] = v; }
    void set_lo_num(size_t i, std::optional<long long> v) { lo_[i] = v; }

private:
    template <class X>
    static std::string coeff_str(const X& c) {
        if constexpr (std::is_same_v<X, Scalar>) return c.str();
        else return c.str();
    }

    Series drop_var_template(int i) const {
        std::vector<VarSpec> nv;
        for (size_t j = 0; j < vars_.size(); ++j)
            if (j != static_cast<size_t>(i)) nv.push_back(vars_[j]);
        Series out(nv);
        size_t t = 0;
        for (size_t j = 0; j < vars_.size(); ++j) {
            if (j == static_cast<size_t>(i)) continue;
            out.hi_[t] = hi_[j];
            out.lo_[t] = lo_[j];
            ++t;
        }
        return out;
    }

    std::vector<VarSpec> vars_;
    std::map<Key, C> entries_;
    std::vector<std::optional<long long>> hi_;
    std::vector<std::optional<long long>> lo_;
};

using ScalarSeries = Series<Scalar>;

// ---------------------------------------------------------------------------
// products

/// General product of two lower-complete series over the same variables.
/// Trust: hi_v = min(hiA_v + loB_v, hiB_v + loA_v).
template <class C>
Series<C> mul(const Series<C>& a0, const ScalarSeries& b0) {
    Series<C> a = a0;
    ScalarSeries b = b0;
    {
        // align variable grids
        for (size_t i = 0; i < a.vars().size(); ++i) {
            long long l = lllcm(a.vars()[i].den, b.vars()[i].den);
            a.refine_den(a.vars()[i].id, l);
            b.refine_den(b.vars()[i].id, l);
        }
    }
    if (!a.same_vars(b)) throw std::invalid_argument("mul: variable mismatch");
    Series<C> out(a.vars());
    for (size_t i = 0; i < a.vars().size(); ++i) {
        auto hiA = a.hi_num(i), hiB = b.hi_num(i);
        auto loA = a.lo_num(i), loB = b.lo_num(i);
        std::optional<long long> h1, h2;
        if (hiA && loB) h1 = *hiA + *loB;
        if (hiA && !loB) h1 = std::nullopt; // B has no terms: no contamination
        if (!hiA) h1 = std::nullopt;
        if (hiB && loA) h2 = *hiB + *loA;
        if (hiB && !loA) h2 = std::nullopt;
        if (!hiB) h2 = std::nullopt;
        out.set_hi_num(i, Series<C>::opt_min(h1, h2));
        std::optional<long long> lo;
        if (loA && loB) lo = *loA + *loB;
        out.set_lo_num(i, lo);
    }
    for (const auto& [ka, ca] : a.entries()) {
        for (const auto& [kb, cb] : b.entries()) {
            typename Series<C>::Key k(ka.size());
            for (size_t i = 0; i < ka.size(); ++i) k[i] = ka[i] + kb[i];
            out.add_key(k, CoeffOps<C>::scale(ca, cb));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// binomial lines

enum class Binom {
    a_plus_b,        // (A + B)^alpha, nonnegative integer powers of B
    a_minus_b,       // (A - B)^alpha, nonnegative integer powers of B
    minus_a_plus_b,  // (-A + B)^alpha, nonnegative integer powers of B
};

inline Scalar binom_coeff(Binom kind, const Rational& alpha, long long j) {
    Rational c = binomial(alpha, j);
    switch (kind) {
        case Binom::a_plus_b: return Scalar(c);
        case Binom::a_minus_b: return (j % 2 == 0) ? Scalar(c) : Scalar(-c);
        case Binom::minus_a_plus_b: return Scalar::minus_one_pow(alpha - j).scaled(c);
    }
    return Scalar(0);
}

/// The two-variable expansion of (±A ± B)^alpha as a Series, truncated to the
/// given upper bounds (used for the public expand_binomial operation and for
/// small pinned-convention tests).
inline ScalarSeries expand_binomial(const Rational& alpha, Binom kind, VarSpec a, VarSpec b,
                                    const Rational& hi_b) {
    Rational an = alpha * a.den;
    if (!is_integer(an)) throw std::invalid_argument("expand_binomial: alpha off grid of A");
    bool polynomial = is_integer(alpha) && alpha >= 0 && hi_b >= alpha;
    ScalarSeries out({a, b});
    out.set_trust(a.id, std::nullopt);
    out.set_trust(b.id, polynomial ? std::optional<Rational>() : std::optional<Rational>(hi_b));
    out.set_lower(b.id, Rational(0));
    out.set_lower(a.id, std::nullopt);
    long long jmax = to_ll(rat_floor(hi_b));
    std::optional<Rational> lo_a;
    for (long long j = 0; j <= jmax; ++j) {
        Scalar c = binom_coeff(kind, alpha, j);
        if (c.is_zero()) continue;
        out.add_term({alpha - j, Rational(j)}, c);
        lo_a = alpha - j;
    }
    if (lo_a) out.set_lower(a.id, *lo_a);
    // terms beyond j_max have B-exponent > hi_b only, so A is trusted fully
    // above lo_a inside the rectangle; a polynomial case is complete outright
    return out;
}

/// S * (A ± B)^alpha for S lower-complete, with the requested trust rectangle.
/// A and B must both be variables of S. Output trust in B stays within S's;
/// trust in A is cut by the line rule hi_A + hi_B <= hiS_A + loS_B + alpha.
template <class C>
Series<C> mul_binom(const Series<C>& s, const Rational& alpha, Binom kind, char var_a, char var_b,
                    std::optional<Rational> req_hi_a, std::optional<Rational> req_hi_b) {
    Series<C> src = s;
    int ia0 = src.var_index(var_a);
    long long need = lllcm(src.vars()[ia0].den, to_ll(rat_den(alpha)));
    src.refine_den(var_a, need);
    int ia = src.var_index(var_a);
    int ib = src.var_index(var_b);

    Series<C> out(src.vars());
    // trust bookkeeping
    auto hiSa = src.hi_num(ia), hiSb = src.hi_num(ib);
    auto loSa = src.lo_num(ia), loSb = src.lo_num(ib);
    long long denA = src.vars()[ia].den, denB = src.vars()[ib].den;
    long long alpha_numA = to_ll(rat_num(alpha * denA));

    std::optional<long long> hi_b_out = hiSb;
    if (req_hi_b) hi_b_out = Series<C>::opt_min(hi_b_out, Series<C>::floor_num(*req_hi_b, denB));
    // line rule: f_a + f_b <= hiS_a + loS_b + alpha (in grid units of each var)
    std::optional<long long> hi_a_out;
    if (req_hi_a) hi_a_out = Series<C>::floor_num(*req_hi_a, denA);
    if (hiSa && loSb && hi_b_out) {
        // convert the B-part to the A grid conservatively via rationals
        Rational budget = Rational(*hiSa, denA) + Rational(*loSb, denB) + alpha - Rational(*hi_b_out, denB);
        long long cap = Series<C>::floor_num(budget, denA);
        hi_a_out = Series<C>::opt_min(hi_a_out, cap);
    } else if (hiSa && (!loSb || !hi_b_out)) {
        if (!loSb) {
            // no B terms at all: S is zero, product zero; keep requested trust
        } else {
            hi_a_out = std::nullopt;
        }
    } else if (!hiSa) {
        // fully trusted in A
    }
    if (!hi_a_out && req_hi_a) hi_a_out = Series<C>::floor_num(*req_hi_a, denA);
    for (size_t i = 0; i < out.vars().size(); ++i) {
        out.set_hi_num(i, src.hi_num(i));
        out.set_lo_num(i, src.lo_num(i));
    }
    out.set_hi_num(ia, hi_a_out);
    out.set_hi_num(ib, hi_b_out);
    if (loSa) out.set_lo_num(ia, std::nullopt); // recomputed below
    if (!src.entries().empty()) {
        // structural lows within the rectangle
        std::optional<long long> lo_a;
        if (loSa && hi_b_out && loSb) {
            // j <= hi_b_out - loS_b
            Rational jmax = Rational(*hi_b_out - *loSb, denB);
            Rational lo = Rational(*loSa, denA) + alpha - jmax;
            lo_a = Series<C>::ceil_num(lo, denA);
        }
        out.set_lo_num(ia, lo_a);
        if (loSb) out.set_lo_num(ib, loSb);
    }

    for (const auto& [k, c] : src.entries()) {
        for (long long j = 0;; ++j) {
            long long fb = k[ib] + j * denB;
            if (hi_b_out && fb > *hi_b_out) break;
            long long fa = k[ia] + alpha_numA - j * denA;
            if (hi_a_out && fa > *hi_a_out) {
                continue; // A still shrinking as j grows; keep going
            }
            Scalar bc = binom_coeff(kind, alpha, j);
            if (!bc.is_zero()) {
                typename Series<C>::Key nk = k;
                nk[ia] = fa;
                nk[ib] = fb;
                out.add_key(nk, CoeffOps<C>::scale(c, bc));
            }
            if (!hi_b_out)
                throw WindowError("mul_binom: unbounded B window");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// root lines and substitution

/// A series supported on the line {e_a + e_b = alpha} in two variables; the
/// canonical shape of (a+b)^alpha and of (x+z)^{1/k} - x^{1/k}. Closed under
/// product and integer powers (with truncation in the b direction), which is
/// exactly what fractional-power substitutions need.
struct LineSeries {
    static constexpr long long inf_b = (1LL << 60); // complete line, no tail

    char var_a = 'x';
    char var_b = 'z';
    Rational alpha;       // e_a + e_b of every term
    long long den_b = 1;  // grid of the b-exponent
    std::map<long long, Scalar> terms; // b-exponent numerator -> coefficient
    long long hi_b = 0;   // trusted through b-exponent hi_b/den_b

    static LineSeries binomial_root(char a, char b, const Rational& alpha, Binom kind,
                                    long long den_b, const Rational& hi_b) {
        LineSeries L;
        L.var_a = a;
        L.var_b = b;
        L.alpha = alpha;
        L.den_b = den_b;
        L.hi_b = Series<Scalar>::floor_num(hi_b, den_b);
        bool polynomial = is_integer(alpha) && alpha >= 0 && Rational(L.hi_b, den_b) >= alpha;
        for (long long j = 0; j * den_b <= L.hi_b; ++j) {
            Scalar c = binom_coeff(kind, alpha, j);
            if (!c.is_zero()) L.terms[j * den_b] = c;
        }
        if (polynomial) L.hi_b = inf_b;
        return L;
    }

    bool empty() const { return terms.empty(); }
    long long min_b() const { return terms.begin()->first; }
    bool complete() const { return hi_b >= inf_b; }

    LineSeries times(const LineSeries& o) const {
        LineSeries r;
        r.var_a = var_a;
        r.var_b = var_b;
        r.alpha = alpha + o.alpha;
        r.den_b = lllcm(den_b, o.den_b);
        long long f1 = r.den_b / den_b, f2 = r.den_b / o.den_b;
        long long h1 = complete() ? inf_b : hi_b * f1 + o.min_b() * f2;
        long long h2 = o.complete() ? inf_b : o.hi_b * f2 + min_b() * f1;
        long long hi = std::min({h1, h2, inf_b});
        r.hi_b = hi;
        for (const auto& [b1, c1] : terms)
            for (const auto& [b2, c2] : o.terms) {
                long long b = b1 * f1 + b2 * f2;
                if (b > hi) continue;
                Scalar prod = c1 * c2;
                auto it = r.terms.find(b);
                if (it == r.terms.end()) r.terms.emplace(b, prod);
                else {
                    it->second += prod;
                    if (it->second.is_zero()) r.terms.erase(it);
                }
            }
        return r;
    }

    /// Truncates to the given b-window (needed before inverting complete lines).
    LineSeries truncated(const Rational& hi) const {
        LineSeries r = *this;
        r.hi_b = Series<Scalar>::floor_num(hi, den_b);
        for (auto it = r.terms.begin(); it != r.terms.end();)
            it = (it->first > r.hi_b) ? r.terms.erase(it) : std::next(it);
        return r;
    }

    /// Inverse via the geometric series against the leading monomial.
    LineSeries inverse() const {
        if (empty()) throw std::domain_error("LineSeries::inverse of zero");
        if (complete() && terms.size() > 1)
            throw std::domain_error("LineSeries::inverse: truncate a complete line first");
        long long b0 = min_b();
        Scalar lead = terms.begin()->second;
        LineSeries tail; // (self/lead monomial) - 1
        tail.var_a = var_a;
        tail.var_b = var_b;
        tail.alpha = Rational(0);
        tail.den_b = den_b;
        tail.hi_b = hi_b - b0;
        Scalar ilead = lead.inverse();
        for (auto it = std::next(terms.begin()); it != terms.end(); ++it)
            tail.terms[it->first - b0] = it->second * ilead;
        LineSeries acc; // sum of (-tail)^m
        acc.var_a = var_a;
        acc.var_b = var_b;
        acc.alpha = Rational(0);
        acc.den_b = den_b;
        acc.hi_b = tail.hi_b;
        acc.terms[0] = Scalar(1);
        if (!tail.empty()) {
            LineSeries p = tail;
            long long steps = tail.hi_b / tail.min_b() + 1;
            for (long long m = 1; m <= steps; ++m) {
                Scalar sign((m % 2 == 0) ? 1 : -1);
                for (const auto& [b, c] : p.terms) {
                    if (b > acc.hi_b) continue;
                    Scalar v = c * sign;
                    auto it = acc.terms.find(b);
                    if (it == acc.terms.end()) acc.terms.emplace(b, v);
                    else {
                        it->second += v;
                        if (it->second.is_zero()) acc.terms.erase(it);
                    }
                }
                if (p.min_b() + tail.min_b() > acc.hi_b) break;
                p = p.times(tail);
            }
        }
        // result = acc * lead^{-1} shifted by -b0 on the line -alpha
        LineSeries r;
        r.var_a = var_a;
        r.var_b = var_b;
        r.alpha = -alpha;
        r.den_b = den_b;
        r.hi_b = acc.hi_b - b0;
        for (const auto& [b, c] : acc.terms) r.terms[b - b0] = c * ilead;
        return r;
    }

    LineSeries pow(long long m) const {
        if (m == 0) {
            LineSeries r;
            r.var_a = var_a;
            r.var_b = var_b;
            r.alpha = Rational(0);
            r.den_b = den_b;
            r.hi_b = complete() ? inf_b : hi_b - min_b();
            r.terms[0] = Scalar(1);
            return r;
        }
        const LineSeries base = (m > 0) ? *this : inverse();
        long long e = m > 0 ? m : -m;
        LineSeries r = base;
        for (long long i = 1; i < e; ++i) r = r.times(base);
        return r;
    }
};

/// Substitutes var_t^{1/R} := L throughout S (every stored t-exponent m/R is
/// replaced by L^m). L's variables must exist in S (promote first). The
/// requested rectangle drives truncation; trust is validated via the line rule.
template <class C>
Series<C> substitute_root(const Series<C>& s0, char var_t, long long root_den,
                          const LineSeries& L, std::optional<Rational> req_hi_a,
                          std::optional<Rational> req_hi_b) {
    Series<C> s = s0;
    {
        // promote missing line variables into S
        bool has_a = false, has_b = false;
        for (const auto& v : s.vars()) {
            if (v.id == L.var_a) has_a = true;
            if (v.id == L.var_b) has_b = true;
        }
        if (!has_a || !has_b) {
            std::vector<VarSpec> full = s.vars();
            if (!has_a) full.push_back({L.var_a, lllcm(to_ll(rat_den(L.alpha)), L.den_b)});
            if (!has_b) full.push_back({L.var_b, L.den_b});
            s = s.promoted(full);
        }
    }
    s.refine_den(var_t, lllcm(s.den(var_t), root_den));
    int it_ = s.var_index(var_t);
    long long tden = s.vars()[it_].den;
    long long step = tden / root_den; // t-exponent num -> power of t^{1/R}: num/step

    int ia = s.var_index(L.var_a);
    int ib = s.var_index(L.var_b);
    long long denA = s.vars()[ia].den;
    long long denB = s.vars()[ib].den;

    // collect the integer powers of L we need
    std::map<long long, LineSeries> powers;
    bool need_negative = false;
    for (const auto& [k, c] : s.entries()) {
        if (k[it_] % step != 0) throw std::invalid_argument("substitute_root: exponent not in (1/R)Z");
        powers.emplace(k[it_] / step, LineSeries{});
        if (k[it_] < 0) need_negative = true;
    }
    LineSeries Luse = L;
    if (need_negative && L.complete() && L.terms.size() > 1) {
        // inverting a multi-term line needs a finite b-window
        if (!req_hi_b)
            throw WindowError("substitute_root: negative powers of a line need a B window");
        auto loB0 = s.lo_num(s.var_index(L.var_b));
        Rational lob = loB0 ? Rational(*loB0, s.den(L.var_b)) : Rational(0);
        // worst-case extra depth: most negative power of the line
        long long mmin = powers.begin()->first;
        Rational depth = (mmin < 0 && !L.empty()) ? Rational(-mmin) * Rational(L.min_b(), L.den_b)
                                                  : Rational(0);
        Luse = L.truncated(*req_hi_b - lob + depth + 1);
    }
    for (auto& [m, P] : powers) P = Luse.pow(m);

    // output template without var_t
    std::vector<VarSpec> nv;
    for (size_t j = 0; j < s.vars().size(); ++j)
        if (static_cast<int>(j) != it_) nv.push_back(s.vars()[j]);
    // refine output grids to accommodate line exponents
    for (auto& v : nv) {
        if (v.id == L.var_a) v.den = lllcm(v.den, lllcm(to_ll(rat_den(L.alpha * root_den)), L.den_b));
        if (v.id == L.var_b) v.den = lllcm(v.den, L.den_b);
    }
    Series<C> out(nv);

    // Trust analysis. Contamination sources:
    //  (C1) source entries with t-exponent beyond hiS_t: each unit of t carries
    //       line-sum gamma = R*alpha_L and b-climb delta = R*b_min(L), so those
    //       land at f_a+f_b > loA+loB+hiT*gamma and at f_b > loB+hiT*delta.
    //  (C2) source entries beyond the a/b windows of S (sum rule).
    //  (C3) truncated tail of L^m beyond its trusted b-span: f_b > loB + span.
    auto hiT = s.hi_num(it_);
    auto loA = s.lo_num(ia), loB = s.lo_num(ib), loT = s.lo_num(it_);
    auto hiA = s.hi_num(ia), hiB = s.hi_num(ib);
    Rational rha = req_hi_a.value_or(Rational(1000000));
    Rational rhb = req_hi_b.value_or(Rational(1000000));

    Rational gamma = L.alpha * root_den;
    Rational b_min_L = L.empty() ? Rational(0) : Rational(L.min_b(), L.den_b);
    long long m_min = powers.empty() ? 0 : powers.begin()->first;
    if (hiT && loA && loB && !s.entries().empty()) {
        Rational delta = b_min_L * root_den;
        Rational sum_ok = Rational(*loA, denA) + Rational(*loB, denB) + Rational(*hiT, tden) * gamma;
        Rational b_ok = Rational(*loB, denB) + Rational(*hiT, tden) * delta;
        bool protected_by_sum = (rha + rhb <= sum_ok);
        bool protected_by_b = (delta > 0) && (rhb <= b_ok);
        if (!protected_by_sum && !protected_by_b)
            throw WindowError("substitute_root: requested window exceeds trusted line budget");
    }
    // untrusted A-side source entries land at f_a+f_b > hiA + loB + gamma*loT
    if (hiA && loB && loT && !s.entries().empty()) {
        Rational cap = Rational(*hiA, denA) + Rational(*loB, denB) + gamma * Rational(*loT, tden);
        if (rha + rhb > cap)
            throw WindowError("substitute_root: requested window exceeds trusted source window (A)");
    }
    // untrusted B-side source entries climb: f_b > hiB - dip with
    // dip = (-m_min) * b_min(L) when negative powers pull b down
    if (hiB && !s.entries().empty()) {
        Rational dip = (m_min < 0 && b_min_L > 0) ? Rational(-m_min) * b_min_L : Rational(0);
        if (rhb > Rational(*hiB, denB) - dip)
            throw WindowError("substitute_root: requested window exceeds trusted source window (B)");
    }
    std::optional<Rational> b_cap;
    for (const auto& [m, P] : powers) {
        if (P.empty() || P.complete()) continue;
        Rational cap = (loB ? Rational(*loB, denB) : Rational(0)) + Rational(P.hi_b, P.den_b);
        if (!b_cap || cap < *b_cap) b_cap = cap;
    }
    if (b_cap && rhb > *b_cap)
        throw WindowError("substitute_root: requested B window exceeds line precision");

    int oa = out.var_index(L.var_a);
    int ob = out.var_index(L.var_b);
    for (size_t j = 0; j < out.vars().size(); ++j) {
        out.set_hi_num(j, std::nullopt);
        out.set_lo_num(j, std::nullopt);
    }
    if (req_hi_a) out.set_trust(L.var_a, *req_hi_a);
    if (req_hi_b) out.set_trust(L.var_b, *req_hi_b);

    for (const auto& [k, c] : s.entries()) {
        long long m = k[it_] / step;
        const LineSeries& P = powers[m];
        for (const auto& [bnum, coef] : P.terms) {
            Rational fb = Rational(k[ib], denB) + Rational(bnum, P.den_b);
            Rational fa = Rational(k[ia], denA) + (P.alpha - Rational(bnum, P.den_b));
            if (req_hi_a && fa > *req_hi_a) continue;
            if (req_hi_b && fb > *req_hi_b) continue;
            std::vector<Rational> exps;
            exps.reserve(out.vars().size());
            for (size_t j = 0; j < s.vars().size(); ++j) {
                if (static_cast<int>(j) == it_) continue;
                if (static_cast<int>(j) == ia) exps.push_back(fa);
                else if (static_cast<int>(j) == ib) exps.push_back(fb);
                else exps.push_back(s.exp_of(k, j));
            }
            out.add_term(exps, CoeffOps<C>::scale(c, coef));
        }
    }
    // structural lows
    for (size_t j = 0; j < out.vars().size(); ++j) {
        std::optional<long long> mn;
        for (const auto& [k, c] : out.entries())
            if (!mn || k[j] < *mn) mn = k[j];
        out.set_lo_num(j, mn);
    }
    (void)oa;
    (void)ob;
    return out;
}

// ---------------------------------------------------------------------------
// binomial residues:  Res_{x1} [ x1^{shift} * (x1 - x)^{beta} * S ]   (kind 1)
//                     Res_{x1} [ x1^{shift} * (-x + x1)^{beta} * S ]  (kind 2)
// with the convention that kind 1 carries nonnegative powers of x and kind 2
// nonnegative powers of x1. Output is a series without x1.

template <class C>
Series<C> residue_binom(const Series<C>& s, char var_x1, char var_x, const Rational& shift,
                        const Rational& beta, bool x1_minus_x, std::optional<Rational> req_hi_x) {
    int i1 = s.var_index(var_x1);
    int ix = s.var_index(var_x);
    long long den1 = s.vars()[i1].den;
    long long denx = s.vars()[ix].den;

    std::vector<VarSpec> nv;
    for (size_t j = 0; j < s.vars().size(); ++j)
        if (static_cast<int>(j) != i1) nv.push_back(s.vars()[j]);
    for (auto& v : nv)
        if (v.id == var_x) v.den = lllcm(v.den, lllcm(den1, to_ll(rat_den(beta))));
    Series<C> out(nv);
    for (size_t j = 0, t = 0; j < s.vars().size(); ++j) {
        if (static_cast<int>(j) == i1) continue;
        out.set_hi_num(t, std::nullopt);
        out.set_lo_num(t, std::nullopt);
        ++t;
    }

    // trust in x: contamination from untrusted x1 region of S
    auto hi1 = s.hi_num(i1);
    auto lo1 = s.lo_num(i1);
    auto hix = s.hi_num(ix);
    auto lox = s.lo_num(ix);
    std::optional<Rational> cap;
    if (x1_minus_x) {
        // x-exp of output = e_x + i with i = beta + shift + e_{x1} + 1
        if (hi1 && lox) cap = Rational(*lox, denx) + beta + shift + Rational(*hi1, den1) + 1;
        if (hix && lo1) {
            Rational c2 = Rational(*hix, denx) + std::max(Rational(0), beta + shift + Rational(*lo1, den1) + 1);
            if (!cap || c2 < *cap) cap = c2;
        }
    } else {
        // x-exp of output = e_x + beta - i with i = -1 - shift - e_{x1};
        // entries with e_{x1} > -1 - shift never contribute, so the x1-side
        // cap only applies when the trusted window stops short of that line
        if (hi1 && lox && Rational(*hi1, den1) < -1 - shift)
            cap = Rational(*lox, denx) + beta + shift + Rational(*hi1, den1) + 1;
        if (hix && lo1) {
            Rational c2 = Rational(*hix, denx) + beta + 1 + shift + Rational(*lo1, den1);
            if (!cap || c2 < *cap) cap = c2;
        }
    }
    Rational rhx = req_hi_x.value_or(cap.value_or(Rational(1000000)));
    if (cap && rhx > *cap)
        throw WindowError(std::string("residue_binom(") + (x1_minus_x ? "x1-x" : "-x+x1") +
                          ", beta=" + rat_str(beta) + ", shift=" + rat_str(shift) +
                          "): requested x<=" + rat_str(rhx) + " exceeds trusted cap " +
                          rat_str(*cap));
    out.set_trust(var_x, rhx);
    for (size_t j = 0, t = 0; j < s.vars().size(); ++j) {
        if (static_cast<int>(j) == i1) continue;
        if (static_cast<int>(j) != ix) {
            out.set_hi_num(t, s.hi_num(j));
            out.set_lo_num(t, s.lo_num(j));
        }
        ++t;
    }

    for (const auto& [k, c] : s.entries()) {
        Rational e1 = Rational(k[i1], den1);
        Rational ex = Rational(k[ix], denx);
        Rational fx;
        Scalar coef;
        if (x1_minus_x) {
            Rational iR = beta + shift + e1 + 1;
            if (!is_integer(iR)) continue; // off-pairing grid: no residue
            long long i = to_ll(rat_num(iR));
            if (i < 0) continue;
            fx = ex + i;
            Rational b = binomial(beta, i);
            coef = (i % 2 == 0) ? Scalar(b) : Scalar(-b);
        } else {
            Rational iR = -shift - e1 - 1;
            if (!is_integer(iR)) continue;
            long long i = to_ll(rat_num(iR));
            if (i < 0) continue;
            fx = ex + beta - i;
            coef = Scalar::minus_one_pow(beta - i).scaled(binomial(beta, i));
        }
        if (fx > rhx) continue;
        std::vector<Rational> exps;
        for (size_t j = 0; j < s.vars().size(); ++j) {
            if (static_cast<int>(j) == i1) continue;
            exps.push_back(static_cast<int>(j) == ix ? fx : s.exp_of(k, j));
        }
        out.add_term(exps, CoeffOps<C>::scale(c, coef));
    }
    std::optional<long long> mn;
    int oxi = out.var_index(var_x);
    for (const auto& [k, c] : out.entries())
        if (!mn || k[oxi] < *mn) mn = k[oxi];
    out.set_lo_num(oxi, mn);
    return out;
}

} // namespace orbifusion
