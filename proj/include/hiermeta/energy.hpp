#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "configuration.hpp"
#include "lattice.hpp"

namespace hiermeta {

// Plus-spin counts for every block at every level. counts(j, b) is the number
// of +1 vertices in the j-th level block with index b; level 0 is the spins.
class BlockCounts {
public:
    BlockCounts(const Configuration& s, const LatticeParams& p) : p_(&p) {
        counts_.resize(static_cast<std::size_t>(p.n) + 1);
        u64 V = p.volume();
        counts_[0].assign(V, 0);
        for (u64 v = 0; v < V; ++v) counts_[0][v] = s.test(v) ? 1 : 0;
        for (int j = 1; j <= p.n; ++j) {
            auto& cur = counts_[j];
            const auto& prev = counts_[j - 1];
            cur.assign(prev.size() / static_cast<std::size_t>(p.N), 0);
            for (std::size_t b = 0; b < prev.size(); ++b) cur[b / static_cast<std::size_t>(p.N)] += prev[b];
        }
    }

    u64 count(int level, u64 block) const { return counts_[level][block]; }
    bool plus(u64 v) const { return counts_[0][v] != 0; }
    u64 volume() const { return counts_[p_->n][0]; }

    void flip(u64 v) {
        bool up = counts_[0][v] == 0;
        u64 b = v;
        for (int j = 0; j <= p_->n; ++j) {
            if (up)
                ++counts_[j][b];
            else
                --counts_[j][b];
            b /= static_cast<u64>(p_->N);
        }
    }

    // E(s with v flipped) - E(s) in O(n).
    double delta(u64 v) const {
        const auto& p = *p_;
        const u64 N = static_cast<u64>(p.N);
        double acc = 0.0;
        u64 prev = counts_[0][v];
        u64 b = v;
        u64 shell = N - 1;  // (N-1) N^{j-1}
        for (int j = 1; j <= p.n; ++j) {
            b /= N;
            u64 c = counts_[j][b];
            double at_distance = static_cast<double>(c - prev);
            acc += p.J[j - 1] * (static_cast<double>(shell) - 2.0 * at_distance);
            prev = c;
            shell *= N;
        }
        acc -= p.h;
        return counts_[0][v] ? -acc : acc;
    }

private:
    const LatticeParams* p_;
    std::vector<std::vector<u64>> counts_;
};

// H(s) - H(all minus): each unordered crossing pair costs J_d, each plus spin h.
inline double relative_energy(const Configuration& s, const LatticeParams& p) {
    if (s.size() != p.volume()) throw std::invalid_argument("configuration size does not match lattice");
    BlockCounts c(s, p);
    const u64 N = static_cast<u64>(p.N);
    double e = 0.0;
    u64 child = 1;
    for (int j = 1; j <= p.n; ++j) {
        u64 size = child * N;
        u64 blocks = p.volume() / size;
        double pairs = 0.0;
        for (u64 b = 0; b < blocks; ++b) {
            double P = static_cast<double>(c.count(j, b));
            pairs += P * (static_cast<double>(size) - P);
            for (u64 k = 0; k < N; ++k) {
                double Q = static_cast<double>(c.count(j - 1, b * N + k));
                pairs -= Q * (static_cast<double>(child) - Q);
            }
        }
        e += p.J[j - 1] * pairs;
        child = size;
    }
    return e - p.h * static_cast<double>(s.volume());
}

inline double flip_delta(const BlockCounts& c, u64 v) { return c.delta(v); }

inline double flip_delta(const Configuration& s, u64 v, const LatticeParams& p) {
    check_vertex(v, p);
    return BlockCounts(s, p).delta(v);
}

// Digits of the prefix set of size k as seen from its last flipped vertex:
// a_0 = ((k-1) mod N) + 1 lies in [1, N], higher digits are those of k-1.
inline NaryDigits last_vertex_digits(u64 k, const LatticeParams& p) {
    if (k == 0) return nary_decomposition(0, p);
    NaryDigits d = nary_decomposition(k - 1, p);
    d.digits[0] += 1;
    return d;
}

// Closed-form delta for flipping a vertex w at distance b from the last
// flipped vertex of the prefix set. sign = -1 flips a plus vertex down,
// sign = +1 flips a minus vertex up. Digits follow last_vertex_digits.
inline double vertex_flip_formula(const NaryDigits& digits, int b, int sign, const LatticeParams& p) {
    if (b < 1 || b > p.n) throw std::invalid_argument("distance level out of range");
    const int N = p.N;
    const auto& a = digits.digits;
    auto J = [&](int i) { return p.J[i - 1]; };
    auto Np = [&](int i) { return std::pow(static_cast<double>(N), i); };
    double low = 0.0;
    for (int i = 0; i < b; ++i) low += a[i] * Np(i);
    double r = 0.0;
    if (sign < 0) {
        if (b == 1) {
            r = J(1) * (2.0 * a[0] - N - 1);
            for (int i = 1; i < p.n; ++i) r += J(i + 1) * Np(i) * (2.0 * a[i] - N + 1);
        } else {
            for (int i = 1; i < b; ++i) r += J(i) * Np(i) * (1.0 - 1.0 / N);
            r += J(b) * (2.0 * low - Np(b) - Np(b - 1));
            for (int i = b; i < p.n; ++i) r += J(i + 1) * Np(i) * (2.0 * a[i] - N + 1);
        }
        return r + p.h;
    }
    if (b == 1) {
        for (int i = 0; i < p.n; ++i) r += J(i + 1) * Np(i) * (N - 2.0 * a[i] - 1);
    } else {
        for (int i = 1; i < b; ++i) r += J(i) * Np(i) * (1.0 - 1.0 / N);
        r += J(b) * (Np(b) - 2.0 * low - Np(b - 1));
        for (int i = b; i < p.n; ++i) r += J(i + 1) * Np(i) * (N - 2.0 * a[i] - 1);
    }
    return r - p.h;
}

}  // namespace hiermeta
