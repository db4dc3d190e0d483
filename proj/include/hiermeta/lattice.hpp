#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiermeta {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

// Parameter outside the model's domain, or no metastable regime.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Instance too large for an exhaustive computation.
struct SizeCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr u64 kMaxVertices = u64(1) << 62;

struct LatticeParams {
    int N = 2;
    int n = 1;
    std::vector<double> J;  // J[i-1] is the coupling at distance i
    double h = 0.0;

    static LatticeParams standard(int N, int n, double jt, double h) {
        LatticeParams p{N, n, {}, h};
        double scale = 1.0;
        for (int i = 1; i <= n; ++i) {
            scale *= N;
            p.J.push_back(jt / scale);
        }
        p.validate();
        return p;
    }

    // J_i = jt_i / N^i
    static LatticeParams scaled(int N, int n, const std::vector<double>& jt, double h) {
        if (static_cast<int>(jt.size()) != n) throw DomainError("scaled couplings need n entries");
        LatticeParams p{N, n, {}, h};
        double scale = 1.0;
        for (int i = 1; i <= n; ++i) {
            scale *= N;
            p.J.push_back(jt[i - 1] / scale);
        }
        p.validate();
        return p;
    }

    void validate() const {
        if (N < 2) throw DomainError("N must be at least 2");
        if (n < 1) throw DomainError("n must be at least 1");
        if (static_cast<int>(J.size()) != n) throw DomainError("coupling vector must have n entries");
        for (double j : J)
            if (!(j > 0.0) || !std::isfinite(j)) throw DomainError("couplings must be positive");
        if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("field h must be positive");
        long double v = 1;
        for (int i = 0; i < n; ++i) {
            v *= N;
            if (v > static_cast<long double>(kMaxVertices)) throw SizeCapError("N^n exceeds the vertex limit");
        }
    }

    u64 pow(int k) const {
        u64 r = 1;
        for (int i = 0; i < k; ++i) r *= static_cast<u64>(N);
        return r;
    }
    u64 volume() const { return pow(n); }
    double coupling(int d) const { return J.at(static_cast<std::size_t>(d - 1)); }

    bool non_increasing() const {
        for (int i = 1; i < n; ++i)
            if (J[i] > J[i - 1]) return false;
        return true;
    }
    bool non_decreasing() const {
        for (int i = 1; i < n; ++i)
            if (J[i] < J[i - 1]) return false;
        return true;
    }

    // J_i = jt / N^i up to relative 1e-12; returns jt through the pointer.
    bool is_standard(double* jt = nullptr) const {
        double base = J[0] * N;
        double scale = 1.0;
        for (int i = 1; i <= n; ++i) {
            scale *= N;
            if (std::abs(J[i - 1] * scale - base) > 1e-12 * base) return false;
        }
        if (jt) *jt = base;
        return true;
    }

    // jt_i = J_i N^i
    std::vector<double> scaled_couplings() const {
        std::vector<double> out;
        double scale = 1.0;
        for (int i = 1; i <= n; ++i) {
            scale *= N;
            out.push_back(J[i - 1] * scale);
        }
        return out;
    }
};

inline void check_vertex(u64 v, const LatticeParams& p) {
    if (v >= p.volume()) throw std::invalid_argument("vertex id out of range");
}

// Smallest k with floor(a/N^k) == floor(b/N^k).
inline int distance(u64 a, u64 b, const LatticeParams& p) {
    check_vertex(a, p);
    check_vertex(b, p);
    int k = 0;
    const u64 N = static_cast<u64>(p.N);
    while (a != b) {
        a /= N;
        b /= N;
        ++k;
    }
    return k;
}

struct BlockRange {
    u64 begin = 0;
    u64 end = 0;
    u64 size() const { return end - begin; }
    bool contains(u64 v) const { return v >= begin && v < end; }
    bool operator==(const BlockRange&) const = default;
};

inline BlockRange block_members(u64 v, int k, const LatticeParams& p) {
    check_vertex(v, p);
    if (k < 0 || k > p.n) throw std::invalid_argument("block level out of range");
    u64 s = p.pow(k);
    u64 b = v / s * s;
    return {b, b + s};
}

struct NaryDigits {
    std::vector<int> digits;  // a_0 .. a_{n-1}
    bool full = false;        // k == N^n

    u64 value(int N) const {
        if (full) {
            u64 r = 1;
            for (std::size_t i = 0; i < digits.size(); ++i) r *= static_cast<u64>(N);
            return r;
        }
        u64 r = 0;
        for (std::size_t i = digits.size(); i-- > 0;) r = r * static_cast<u64>(N) + static_cast<u64>(digits[i]);
        return r;
    }
};

inline NaryDigits nary_decomposition(u64 k, const LatticeParams& p) {
    u64 V = p.volume();
    if (k > V) throw std::invalid_argument("value exceeds N^n");
    NaryDigits d;
    d.digits.assign(static_cast<std::size_t>(p.n), 0);
    if (k == V) {
        d.full = true;
        return d;
    }
    for (int i = 0; i < p.n; ++i) {
        d.digits[i] = static_cast<int>(k % static_cast<u64>(p.N));
        k /= static_cast<u64>(p.N);
    }
    return d;
}

inline u128 binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    u128 r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<u128>(n - k + i) / static_cast<u128>(i);
    return r;
}

inline u128 factorial(int n) {
    u128 r = 1;
    for (int i = 2; i <= n; ++i) r *= static_cast<u128>(i);
    return r;
}

inline std::string to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

// Number of distinct isometric images of the prefix set {0..M-1}.
inline u128 translation_count(u64 M, const LatticeParams& p) {
    u64 V = p.volume();
    if (M > V) throw std::invalid_argument("volume exceeds N^n");
    if (M == 0 || M == V) return 1;
    auto d = nary_decomposition(M, p).digits;
    int top = p.n - 1;
    while (d[top] == 0) --top;
    int low = 0;
    while (d[low] == 0) ++low;
    u128 count = 1;
    for (int i = top + 1; i < p.n; ++i) count *= static_cast<u128>(p.N);
    count *= binomial(p.N, d[low]);
    for (int i = low + 1; i <= top; ++i) count *= binomial(p.N, d[i]) * static_cast<u128>(p.N - d[i]);
    return count;
}

}  // namespace hiermeta
