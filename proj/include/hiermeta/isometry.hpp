#pragma once

#include <algorithm>
#include <map>
#include <unordered_set>
#include <vector>

#include "configuration.hpp"
#include "lattice.hpp"

namespace hiermeta {

// Interns block contents level by level so that two configurations get the
// same top-level class exactly when some isometry maps one onto the other.
class IsometryClassifier {
public:
    explicit IsometryClassifier(const LatticeParams& p) : p_(p), tables_(static_cast<std::size_t>(p.n) + 1) {
        classes_.resize(static_cast<std::size_t>(p.n) + 1);
        // level 0: class 0 = minus, class 1 = plus
        classes_[0] = {{}, {}};
    }

    int classify(const Configuration& s) {
        std::vector<int> ids(s.size());
        for (u64 v = 0; v < s.size(); ++v) ids[v] = s.test(v) ? 1 : 0;
        for (int level = 1; level <= p_.n; ++level) {
            std::vector<int> next(ids.size() / static_cast<std::size_t>(p_.N));
            for (std::size_t b = 0; b < next.size(); ++b) {
                std::vector<int> key(ids.begin() + static_cast<long>(b * p_.N),
                                     ids.begin() + static_cast<long>((b + 1) * p_.N));
                std::sort(key.begin(), key.end());
                next[b] = intern(level, key);
            }
            ids = std::move(next);
        }
        return ids[0];
    }

    // Orbit size of the class `id` at `level`.
    u128 orbit_size(int level, int id) const {
        if (level == 0) return 1;
        const auto& key = classes_[level][id];
        u128 r = factorial(p_.N);
        for (std::size_t i = 0; i < key.size();) {
            std::size_t j = i;
            while (j < key.size() && key[j] == key[i]) ++j;
            r /= factorial(static_cast<int>(j - i));
            i = j;
        }
        for (int c : key) r *= orbit_size(level - 1, c);
        return r;
    }

    // Every vertex pattern of class `id` at `level`, as 0/1 vectors.
    std::vector<std::vector<char>> patterns(int level, int id) const {
        if (level == 0) return {{static_cast<char>(id)}};
        std::vector<int> perm = classes_[level][id];
        std::vector<std::vector<char>> out;
        do {
            std::vector<std::vector<char>> partial{{}};
            for (int c : perm) {
                auto child = patterns(level - 1, c);
                std::vector<std::vector<char>> grown;
                grown.reserve(partial.size() * child.size());
                for (const auto& a : partial)
                    for (const auto& b : child) {
                        auto x = a;
                        x.insert(x.end(), b.begin(), b.end());
                        grown.push_back(std::move(x));
                    }
                partial = std::move(grown);
            }
            for (auto& x : partial) out.push_back(std::move(x));
        } while (std::next_permutation(perm.begin(), perm.end()));
        return out;
    }

    int levels() const { return p_.n; }

private:
    int intern(int level, const std::vector<int>& key) {
        auto& t = tables_[level];
        auto it = t.find(key);
        if (it != t.end()) return it->second;
        int id = static_cast<int>(classes_[level].size());
        t.emplace(key, id);
        classes_[level].push_back(key);
        return id;
    }

    LatticeParams p_;
    std::vector<std::map<std::vector<int>, int>> tables_;
    std::vector<std::vector<std::vector<int>>> classes_;
};

inline u128 orbit_size(const Configuration& s, const LatticeParams& p) {
    IsometryClassifier c(p);
    int id = c.classify(s);
    return c.orbit_size(p.n, id);
}

inline bool same_orbit(const Configuration& a, const Configuration& b, const LatticeParams& p) {
    IsometryClassifier c(p);
    return c.classify(a) == c.classify(b);
}

// Orbit of s under the automorphism group of the ultrametric.
inline std::vector<Configuration> enumerate_isometry_images(const Configuration& s, const LatticeParams& p, u64 cap) {
    IsometryClassifier c(p);
    int id = c.classify(s);
    u128 size = c.orbit_size(p.n, id);
    if (size > static_cast<u128>(cap)) throw SizeCapError("orbit too large");
    std::vector<Configuration> out;
    for (const auto& pat : c.patterns(p.n, id)) {
        Configuration x(s.size());
        for (u64 v = 0; v < pat.size(); ++v)
            if (pat[v]) x.set(v, true);
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace hiermeta
