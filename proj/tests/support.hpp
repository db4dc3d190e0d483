#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "hiermeta/configuration.hpp"
#include "hiermeta/lattice.hpp"

namespace testing {

using namespace hiermeta;

// Direct O(V^2) pair sum: each unordered crossing pair costs J_d, each plus spin h.
inline double pair_sum_energy(const Configuration& s, const LatticeParams& p) {
    double e = 0.0;
    for (u64 a = 0; a < p.volume(); ++a)
        for (u64 b = a + 1; b < p.volume(); ++b)
            if (s.test(a) != s.test(b)) e += p.coupling(distance(a, b, p));
    return e - p.h * static_cast<double>(s.volume());
}

// One automorphism of the N-ary tree: a permutation of the children at every internal node.
// Applied top-down, it maps a vertex label to its image.
struct TreeAutomorphism {
    // perms[level][node] permutes the N children of `node` at depth `level` (root = level 0).
    std::vector<std::vector<std::vector<int>>> perms;

    u64 apply(u64 v, const LatticeParams& p) const {
        std::vector<int> digits(static_cast<std::size_t>(p.n));  // most significant first
        u64 x = v;
        for (int i = p.n - 1; i >= 0; --i) {
            digits[i] = static_cast<int>(x % static_cast<u64>(p.N));
            x /= static_cast<u64>(p.N);
        }
        u64 image = 0;
        for (int level = 0; level < p.n; ++level) {
            // permutation attached to the original ancestor at this depth
            u64 orig_node = v / p.pow(p.n - level);
            int child = perms[level][orig_node][digits[level]];
            image = image * static_cast<u64>(p.N) + static_cast<u64>(child);
        }
        return image;
    }
};

// Every element of the iterated wreath product S_N wr ... wr S_N.
inline void for_each_automorphism(const LatticeParams& p, const std::function<void(const TreeAutomorphism&)>& f) {
    std::vector<int> base(static_cast<std::size_t>(p.N));
    std::iota(base.begin(), base.end(), 0);
    std::vector<std::vector<int>> all;
    do all.push_back(base);
    while (std::next_permutation(base.begin(), base.end()));

    std::vector<std::pair<int, u64>> slots;  // (level, node)
    for (int level = 0; level < p.n; ++level)
        for (u64 node = 0; node < p.pow(level); ++node) slots.emplace_back(level, node);

    TreeAutomorphism t;
    t.perms.resize(static_cast<std::size_t>(p.n));
    for (int level = 0; level < p.n; ++level) t.perms[level].assign(p.pow(level), base);

    std::vector<std::size_t> choice(slots.size(), 0);
    while (true) {
        for (std::size_t i = 0; i < slots.size(); ++i) t.perms[slots[i].first][slots[i].second] = all[choice[i]];
        f(t);
        std::size_t i = 0;
        while (i < choice.size() && ++choice[i] == all.size()) choice[i++] = 0;
        if (i == choice.size()) break;
    }
}

inline Configuration apply(const TreeAutomorphism& t, const Configuration& s, const LatticeParams& p) {
    Configuration out(s.size());
    for (u64 v = 0; v < s.size(); ++v)
        if (s.test(v)) out.set(t.apply(v, p), true);
    return out;
}

inline std::set<std::vector<u64>> group_orbit(const Configuration& s, const LatticeParams& p) {
    std::set<std::vector<u64>> orbit;
    for_each_automorphism(p, [&](const TreeAutomorphism& t) {
        auto img = apply(t, s, p).plus_vertices();
        orbit.insert(img);
    });
    return orbit;
}

inline Configuration random_configuration(u64 V, std::mt19937_64& rng, double density = 0.5) {
    std::bernoulli_distribution coin(density);
    Configuration c(V);
    for (u64 v = 0; v < V; ++v)
        if (coin(rng)) c.set(v, true);
    return c;
}

// Positive couplings sorted non-increasing (or non-decreasing).
inline std::vector<double> random_monotone_couplings(int n, std::mt19937_64& rng, bool decreasing = true) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> J(static_cast<std::size_t>(n));
    for (auto& j : J) j = u(rng);
    std::sort(J.begin(), J.end());
    if (decreasing) std::reverse(J.begin(), J.end());
    return J;
}

}  // namespace testing
