#pragma once

#include "orbifusion/rational.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

namespace orbifusion {

// Permutations of {1..k} with cycle machinery: cycle type, the canonical
// representative sigma_kappa attached to a partition, and a deterministic
// conjugator mu with mu sigma mu^{-1} = sigma_kappa.

struct Partition {
    std::vector<long long> parts; // descending, sum = k

    long long sum() const {
        long long s = 0;
        for (long long p : parts) s += p;
        return s;
    }
    friend bool operator==(const Partition& a, const Partition& b) { return a.parts == b.parts; }
    std::string str() const {
        std::string s = "(";
        for (size_t i = 0; i < parts.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(parts[i]);
        }
        return s + ")";
    }
};

class Permutation {
public:
    Permutation() = default;
    explicit Permutation(long long k) : img_(k) {
        for (long long i = 0; i < k; ++i) img_[i] = i + 1;
    }
    explicit Permutation(std::vector<long long> images) : img_(std::move(images)) {
        validate();
    }

    static Permutation identity(long long k) { return Permutation(k); }

    /// Builds from disjoint cycles in 1-indexed notation, e.g. {{1,2,3},{4,5}}.
    static Permutation from_cycles(long long k, const std::vector<std::vector<long long>>& cycles) {
        std::vector<long long> img(k);
        for (long long i = 0; i < k; ++i) img[i] = i + 1;
        for (const auto& c : cycles) {
            for (size_t i = 0; i < c.size(); ++i) {
                long long from = c[i], to = c[(i + 1) % c.size()];
                if (from < 1 || from > k) throw std::invalid_argument("cycle point out of range");
                img[from - 1] = to;
            }
        }
        Permutation p(img);
        return p;
    }

    /// Parses "(1 2 3)(4 5)" (whitespace tolerant, 1-indexed; fixed points may
    /// be omitted). "()" or "" is the identity.
    static Permutation parse(long long k, const std::string& text) {
        std::vector<std::vector<long long>> cycles;
        std::vector<long long> cur;
        bool in_cycle = false;
        size_t i = 0;
        while (i < text.size()) {
            char c = text[i];
            if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
                ++i;
                continue;
            }
            if (c == '(') {
                if (in_cycle) throw std::invalid_argument("nested '(' in cycle notation at position " + std::to_string(i));
                in_cycle = true;
                cur.clear();
                ++i;
                continue;
            }
            if (c == ')') {
                if (!in_cycle) throw std::invalid_argument("unmatched ')' at position " + std::to_string(i));
                if (!cur.empty()) cycles.push_back(cur);
                in_cycle = false;
                ++i;
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                if (!in_cycle) throw std::invalid_argument("digit outside cycle at position " + std::to_string(i));
                long long v = 0;
                while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
                    v = v * 10 + (text[i] - '0');
                    ++i;
                }
                cur.push_back(v);
                continue;
            }
            throw std::invalid_argument(std::string("unexpected character '") + c + "' at position " +
                                        std::to_string(i));
        }
        if (in_cycle) throw std::invalid_argument("unterminated cycle");
        return from_cycles(k, cycles);
    }

    long long k() const { return static_cast<long long>(img_.size()); }
    long long operator()(long long i) const { return img_[i - 1]; } // 1-indexed

    friend bool operator==(const Permutation& a, const Permutation& b) { return a.img_ == b.img_; }

    Permutation compose(const Permutation& other) const { // (this . other)(i) = this(other(i))
        std::vector<long long> img(img_.size());
        for (long long i = 1; i <= k(); ++i) img[i - 1] = (*this)(other(i));
        return Permutation(img);
    }
    Permutation inverse() const {
        std::vector<long long> img(img_.size());
        for (long long i = 1; i <= k(); ++i) img[(*this)(i)-1] = i;
        return Permutation(img);
    }
    Permutation conjugated_by(const Permutation& mu) const { // mu . this . mu^{-1}
        return mu.compose(this->compose(mu.inverse()));
    }

    bool is_identity() const {
        for (long long i = 1; i <= k(); ++i)
            if ((*this)(i) != i) return false;
        return true;
    }

    /// Cycles in canonical order: descending length, ties by smallest element;
    /// each cycle starts at its smallest element. Fixed points are 1-cycles.
    std::vector<std::vector<long long>> canonical_cycles() const {
        std::vector<bool> seen(img_.size(), false);
        std::vector<std::vector<long long>> cycles;
        for (long long i = 1; i <= k(); ++i) {
            if (seen[i - 1]) continue;
            std::vector<long long> c;
            long long j = i;
            do {
                c.push_back(j);
                seen[j - 1] = true;
                j = (*this)(j);
            } while (j != i);
            cycles.push_back(std::move(c));
        }
        std::stable_sort(cycles.begin(), cycles.end(), [](const auto& a, const auto& b) {
            if (a.size() != b.size()) return a.size() > b.size();
            return a.front() < b.front();
        });
        return cycles;
    }

    Partition cycle_type() const {
        Partition p;
        for (const auto& c : canonical_cycles()) p.parts.push_back(static_cast<long long>(c.size()));
        return p;
    }

    std::string str() const {
        auto cycles = canonical_cycles();
        std::string s;
        bool any = false;
        for (const auto& c : cycles) {
            if (c.size() == 1) continue;
            any = true;
            s += "(";
            for (size_t i = 0; i < c.size(); ++i) {
                if (i) s += " ";
                s += std::to_string(c[i]);
            }
            s += ")";
        }
        return any ? s : "()";
    }

private:
    void validate() const {
        std::vector<bool> seen(img_.size(), false);
        for (long long v : img_) {
            if (v < 1 || v > k() || seen[v - 1])
                throw std::invalid_argument("not a permutation");
            seen[v - 1] = true;
        }
    }
    std::vector<long long> img_;
};

/// sigma_kappa = (1..k1)(k1+1..k1+k2)... for the partition kappa.
inline Permutation sigma_kappa(const Partition& kappa) {
    long long k = kappa.sum();
    std::vector<std::vector<long long>> cycles;
    long long start = 1;
    for (long long len : kappa.parts) {
        std::vector<long long> c;
        for (long long i = 0; i < len; ++i) c.push_back(start + i);
        cycles.push_back(std::move(c));
        start += len;
    }
    return Permutation::from_cycles(k, cycles);
}

/// Returns (kappa, mu) with mu sigma mu^{-1} = sigma_kappa: the i-th canonical
/// cycle of sigma maps onto the i-th block of sigma_kappa, smallest elements
/// first, following the cycle order.
inline std::pair<Partition, Permutation> cycle_normal_form(const Permutation& sigma) {
    auto cycles = sigma.canonical_cycles();
    Partition kappa;
    for (const auto& c : cycles) kappa.parts.push_back(static_cast<long long>(c.size()));
    std::vector<long long> img(sigma.k());
    long long pos = 1;
    for (const auto& c : cycles)
        for (long long x : c) img[x - 1] = pos++;
    Permutation mu{img};
    return {kappa, mu};
}

} // namespace orbifusion
