#pragma once

#include "orbifusion/fusion_ring.hpp"

namespace orbifusion {

// Fusion of untwisted k-tuples with sigma-twisted labels at the fusion-ring
// level (Theorem C):
//   (M_1 (x) ... (x) M_k) boxtimes T_sigma(N_1,...,N_s)
//     = T_sigma(M^{[cycle 1]} boxtimes N_1, ..., M^{[cycle s]} boxtimes N_s),
// where the i-th factor collects the M-labels on the i-th canonical cycle of
// sigma. Twisted tuples are ordered by the canonical cycle order (descending
// length, ties by smallest element); fixed points are 1-cycles.

/// A sigma-twisted label: the twist and the s-tuple of ring labels.
struct TwistedLabel {
    Permutation sigma;
    std::vector<int> entries; // one per canonical cycle of sigma

    friend bool operator<(const TwistedLabel& a, const TwistedLabel& b) {
        if (!(a.sigma == b.sigma)) return a.sigma.str() < b.sigma.str();
        return a.entries < b.entries;
    }
    friend bool operator==(const TwistedLabel& a, const TwistedLabel& b) {
        return a.sigma == b.sigma && a.entries == b.entries;
    }
};

using TupleMultiset = std::map<std::vector<int>, long long>;

inline std::string tuple_str(const FusionRing& ring, const std::vector<int>& t) {
    std::string s = "T(";
    for (size_t i = 0; i < t.size(); ++i) {
        if (i) s += ",";
        s += ring.label(t[i]);
    }
    return s + ")";
}

inline std::string multiset_str(const FusionRing& ring, const TupleMultiset& ms) {
    std::string s;
    bool first = true;
    for (const auto& [t, m] : ms) {
        if (!first) s += " + ";
        first = false;
        if (m != 1) s += std::to_string(m) + "*";
        s += tuple_str(ring, t);
    }
    return s.empty() ? "0" : s;
}

/// (M_1,...,M_k) boxtimes T_sigma(N_1,...,N_s) as a multiset of s-tuples.
inline TupleMultiset orbifold_fuse(const FusionRing& ring, const Permutation& sigma,
                                   const std::vector<int>& M, const std::vector<int>& Ntuple) {
    long long k = sigma.k();
    if (static_cast<long long>(M.size()) != k)
        throw std::invalid_argument("orbifold_fuse: module tuple length != k");
    auto cycles = sigma.canonical_cycles();
    if (Ntuple.size() != cycles.size())
        throw std::invalid_argument("orbifold_fuse: twisted tuple length != number of cycles");

    // per cycle: fuse the M-labels on its positions, then the N-label
    std::vector<FusionRing::Multiset> per_cycle;
    for (size_t i = 0; i < cycles.size(); ++i) {
        std::vector<int> xs;
        for (long long p : cycles[i]) xs.push_back(M[p - 1]);
        xs.push_back(Ntuple[i]);
        per_cycle.push_back(ring.fuse_list(xs));
    }
    // cartesian product with multiplicities
    TupleMultiset out;
    std::vector<int> cur(cycles.size());
    std::function<void(size_t, long long)> rec = [&](size_t i, long long m) {
        if (i == per_cycle.size()) {
            out[cur] += m;
            return;
        }
        for (const auto& [lbl, m2] : per_cycle[i]) {
            cur[i] = lbl;
            rec(i + 1, m * m2);
        }
    };
    rec(0, 1);
    return out;
}

/// The Theorem A / Lemma sigma-tau path: fuse single-slot modules
/// (V,...,M_i,...,V) one position at a time.
inline TupleMultiset iterate_single_slots(const FusionRing& ring, const Permutation& sigma,
                                          const std::vector<int>& M, const std::vector<int>& Ntuple) {
    auto cycles = sigma.canonical_cycles();
    std::vector<size_t> cycle_of(sigma.k() + 1);
    for (size_t i = 0; i < cycles.size(); ++i)
        for (long long p : cycles[i]) cycle_of[p] = i;

    TupleMultiset acc{{Ntuple, 1}};
    for (long long pos = 1; pos <= sigma.k(); ++pos) {
        size_t ci = cycle_of[pos];
        TupleMultiset nxt;
        for (const auto& [t, m] : acc) {
            for (const auto& [lbl, m2] : ring.fuse(M[pos - 1], t[ci])) {
                std::vector<int> t2 = t;
                t2[ci] = lbl;
                nxt[t2] += m * m2;
            }
        }
        acc = std::move(nxt);
    }
    return acc;
}

/// Every sigma-twisted simple: all s-tuples of ring labels, s = #cycles.
inline std::vector<std::vector<int>> classify_twisted(const FusionRing& ring,
                                                      const Permutation& sigma) {
    size_t s = sigma.canonical_cycles().size();
    std::vector<std::vector<int>> out;
    std::vector<int> cur(s, 0);
    std::function<void(size_t)> rec = [&](size_t i) {
        if (i == s) {
            out.push_back(cur);
            return;
        }
        for (int l = 0; l < ring.size(); ++l) {
            cur[i] = l;
            rec(i + 1);
        }
    };
    rec(0);
    return out;
}

/// Conjugation of a twisted label: T_sigma(N)^mu = T_{mu^{-1} sigma mu}(N'),
/// entries reordered by the induced cycle correspondence.
inline TwistedLabel conjugate_twisted(const TwistedLabel& L, const Permutation& mu) {
    Permutation sigma2 = L.sigma.conjugated_by(mu.inverse());
    auto cycles1 = L.sigma.canonical_cycles();
    auto cycles2 = sigma2.canonical_cycles();
    // the image of cycle C of sigma under mu^{-1} is a cycle of sigma2
    Permutation mu_inv = mu.inverse();
    TwistedLabel out;
    out.sigma = sigma2;
    out.entries.assign(cycles2.size(), -1);
    for (size_t i = 0; i < cycles1.size(); ++i) {
        std::vector<long long> image;
        for (long long p : cycles1[i]) image.push_back(mu_inv(p));
        std::sort(image.begin(), image.end());
        for (size_t j = 0; j < cycles2.size(); ++j) {
            std::vector<long long> c2 = cycles2[j];
            std::sort(c2.begin(), c2.end());
            if (c2 == image) {
                out.entries[j] = L.entries[i];
                break;
            }
        }
    }
    for (int e : out.entries)
        if (e < 0) throw std::logic_error("conjugate_twisted: cycle correspondence failed");
    return out;
}

/// Conjugation of an untwisted k-tuple: (M_1,...,M_k)^mu = (M_{mu(1)},...,M_{mu(k)}).
inline std::vector<int> conjugate_untwisted(const std::vector<int>& M, const Permutation& mu) {
    std::vector<int> out(M.size());
    for (long long j = 1; j <= mu.k(); ++j) out[j - 1] = M[mu(j) - 1];
    return out;
}

/// iterate_consistency: the direct Theorem C product against the iterated
/// Theorem A path; returns an empty string on agreement, else a witness.
inline std::string iterate_consistency(const FusionRing& ring, const Permutation& sigma,
                                       const std::vector<int>& M, const std::vector<int>& Ntuple) {
    TupleMultiset direct = orbifold_fuse(ring, sigma, M, Ntuple);
    TupleMultiset iterated = iterate_single_slots(ring, sigma, M, Ntuple);
    if (direct == iterated) return {};
    return "direct " + multiset_str(ring, direct) + " vs iterated " + multiset_str(ring, iterated);
}

} // namespace orbifusion
