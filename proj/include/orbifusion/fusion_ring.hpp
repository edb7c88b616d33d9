#pragma once

#include "orbifusion/permutation.hpp"

#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

namespace orbifusion {

// Finite fusion-ring data: labels, unit, dual involution and the multiplicity
// tensor N_{ab}^c. Loading validates the unit law, commutativity and
// associativity; violations are rejected naming the offending tuple.

class FusionRing {
public:
    using Multiset = std::map<int, long long>; // label index -> multiplicity

    const std::string& name() const { return name_; }
    const std::vector<std::string>& labels() const { return labels_; }
    int unit() const { return unit_; }
    int dual(int a) const { return dual_[a]; }
    int size() const { return static_cast<int>(labels_.size()); }

    int index(const std::string& label) const {
        for (size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label) return static_cast<int>(i);
        throw std::invalid_argument("unknown label: " + label);
    }
    const std::string& label(int i) const { return labels_[i]; }

    long long mult(int a, int b, int c) const {
        auto it = N_.find(key(a, b, c));
        return it == N_.end() ? 0 : it->second;
    }

    Multiset fuse(int a, int b) const {
        Multiset out;
        for (int c = 0; c < size(); ++c) {
            long long m = mult(a, b, c);
            if (m > 0) out[c] = m;
        }
        return out;
    }

    Multiset fuse(const Multiset& A, int b) const {
        Multiset out;
        for (const auto& [a, m] : A)
            for (const auto& [c, m2] : fuse(a, b)) out[c] += m * m2;
        return out;
    }

    /// Left-to-right iterated product of a list of labels.
    Multiset fuse_list(const std::vector<int>& xs) const {
        Multiset acc{{unit_, 1}};
        for (int x : xs) acc = fuse(acc, x);
        return acc;
    }

    static FusionRing from_json(const nlohmann::json& j) {
        FusionRing r;
        r.name_ = j.at("name").get<std::string>();
        r.labels_ = j.at("labels").get<std::vector<std::string>>();
        {
            std::map<std::string, int> seen;
            for (size_t i = 0; i < r.labels_.size(); ++i)
                if (!seen.emplace(r.labels_[i], 1).second)
                    throw std::invalid_argument("duplicate label " + r.labels_[i]);
        }
        r.unit_ = r.index(j.at("unit").get<std::string>());
        r.dual_.assign(r.labels_.size(), -1);
        for (const auto& [from, to] : j.at("dual").items())
            r.dual_[r.index(from)] = r.index(to.get<std::string>());
        for (int a = 0; a < r.size(); ++a) {
            if (r.dual_[a] < 0)
                throw std::invalid_argument("dual missing for label " + r.labels_[a]);
        }
        for (int a = 0; a < r.size(); ++a)
            if (r.dual_[r.dual_[a]] != a)
                throw std::invalid_argument("dual is not an involution at " + r.labels_[a]);
        for (const auto& entry : j.at("N")) {
            if (!entry.is_array() || entry.size() != 4)
                throw std::invalid_argument("N entries must be [a, b, c, mult]");
            int a = r.index(entry[0].get<std::string>());
            int b = r.index(entry[1].get<std::string>());
            int c = r.index(entry[2].get<std::string>());
            long long m = entry[3].get<long long>();
            if (m < 0) throw std::invalid_argument("negative multiplicity");
            auto [it, fresh] = r.N_.emplace(key(a, b, c), m);
            if (!fresh) throw std::invalid_argument("duplicate N triple");
        }
        r.validate();
        return r;
    }

    static FusionRing load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open ring file: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }

    void validate() const {
        // unit law N_{1a}^b = delta_{ab}
        for (int a = 0; a < size(); ++a)
            for (int b = 0; b < size(); ++b) {
                long long want = (a == b) ? 1 : 0;
                if (mult(unit_, a, b) != want)
                    throw std::invalid_argument("unit law fails at (" + labels_[unit_] + "," +
                                                labels_[a] + "," + labels_[b] + ")");
            }
        // commutativity
        for (int a = 0; a < size(); ++a)
            for (int b = 0; b < size(); ++b)
                for (int c = 0; c < size(); ++c)
                    if (mult(a, b, c) != mult(b, a, c))
                        throw std::invalid_argument("commutativity fails at (" + labels_[a] + "," +
                                                    labels_[b] + "," + labels_[c] + ")");
        // associativity
        for (int a = 0; a < size(); ++a)
            for (int b = 0; b < size(); ++b)
                for (int c = 0; c < size(); ++c)
                    for (int d = 0; d < size(); ++d) {
                        long long lhs = 0, rhs = 0;
                        for (int e = 0; e < size(); ++e) {
                            lhs += mult(a, b, e) * mult(e, c, d);
                            rhs += mult(b, c, e) * mult(a, e, d);
                        }
                        if (lhs != rhs)
                            throw std::invalid_argument(
                                "associativity fails at quadruple (" + labels_[a] + "," + labels_[b] +
                                "," + labels_[c] + "," + labels_[d] + ")");
                    }
    }

private:
    static long long key(int a, int b, int c) {
        return (static_cast<long long>(a) << 40) | (static_cast<long long>(b) << 20) | c;
    }

    std::string name_;
    std::vector<std::string> labels_;
    int unit_ = 0;
    std::vector<int> dual_;
    std::map<long long, long long> N_;
};

} // namespace orbifusion
