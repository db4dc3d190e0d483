#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "configuration.hpp"
#include "energy.hpp"
#include "lattice.hpp"

namespace hiermeta {

enum class PathKind { MD, MI };

inline std::string to_string(PathKind k) { return k == PathKind::MD ? "MD" : "MI"; }

// MI flip order, 1-based in and out: theta(k) = 1 + sum_i N^{n-1-i} (floor((k-1)/N^i) mod N).
inline u64 theta(u64 k, const LatticeParams& p) {
    if (k < 1 || k > p.volume()) throw std::invalid_argument("theta index out of range");
    u64 r = 1;
    u64 q = k - 1;
    for (int i = 0; i < p.n; ++i) {
        r += p.pow(p.n - 1 - i) * (q % static_cast<u64>(p.N));
        q /= static_cast<u64>(p.N);
    }
    return r;
}

class ReferencePath {
public:
    ReferencePath(PathKind kind, const LatticeParams& p) : kind_(kind), p_(p) {}

    PathKind kind() const { return kind_; }
    u64 length() const { return p_.volume() + 1; }

    // 0-based vertex flipped at step k, 1 <= k <= N^n.
    u64 flipped(u64 k) const {
        if (k < 1 || k > p_.volume()) throw std::invalid_argument("path step out of range");
        return kind_ == PathKind::MD ? k - 1 : theta(k, p_) - 1;
    }

    Configuration at(u64 k) const {
        if (k > p_.volume()) throw std::invalid_argument("path index out of range");
        Configuration c(p_.volume());
        for (u64 i = 1; i <= k; ++i) c.set(flipped(i), true);
        return c;
    }

private:
    PathKind kind_;
    LatticeParams p_;
};

// E(gamma^MD_k) in O(n).
inline double profile_closed_form(u64 k, const LatticeParams& p) {
    if (k > p.volume()) throw std::invalid_argument("profile index out of range");
    const u64 N = static_cast<u64>(p.N);
    double t = 0.0;
    u64 lower = 1;  // N^{i-1}
    for (int i = 1; i <= p.n; ++i) {
        u64 upper = lower * N;
        u64 d = (k / lower) % N;
        double a = static_cast<double>(k % upper) * static_cast<double>(N - d - 1);
        double b = static_cast<double>(lower - k % lower) * static_cast<double>(d);
        t += p.J[i - 1] * static_cast<double>(lower) * (a + b);
        lower = upper;
    }
    return t - p.h * static_cast<double>(k);
}

struct EnergyProfile {
    u64 first = 0;              // index of values[0]
    std::vector<double> values;  // values[i] = E(gamma_{first+i})
    double max = 0.0;
    std::vector<u64> argmax;     // every index within tol of max, ascending
};

inline void fill_argmax(EnergyProfile& e, double tol = 1e-9) {
    e.argmax.clear();
    if (e.values.empty()) return;
    e.max = *std::max_element(e.values.begin(), e.values.end());
    double scale = std::max(1.0, std::abs(e.max));
    for (std::size_t i = 0; i < e.values.size(); ++i)
        if (e.values[i] >= e.max - tol * scale) e.argmax.push_back(e.first + i);
}

// Profile over [lo, hi] (inclusive). MD uses the closed form, MI walks the path.
inline EnergyProfile energy_profile(PathKind kind, const LatticeParams& p, u64 lo = 0,
                                    std::optional<u64> hi = std::nullopt) {
    u64 last = hi.value_or(p.volume());
    if (lo > last || last > p.volume()) throw std::invalid_argument("profile range out of bounds");
    EnergyProfile e;
    e.first = lo;
    e.values.reserve(static_cast<std::size_t>(last - lo + 1));
    if (kind == PathKind::MD) {
        for (u64 k = lo; k <= last; ++k) e.values.push_back(profile_closed_form(k, p));
    } else {
        ReferencePath path(kind, p);
        Configuration c(p.volume());
        BlockCounts counts(c, p);
        double energy = 0.0;
        for (u64 k = 0; k <= last; ++k) {
            if (k > 0) {
                u64 v = path.flipped(k);
                energy += counts.delta(v);
                counts.flip(v);
            }
            if (k >= lo) e.values.push_back(energy);
        }
    }
    fill_argmax(e);
    return e;
}

// E(gamma_{N^a}) = (N-1) N^a sum_{i=a}^{n-1} N^i J_{i+1} - h N^a.
inline double block_increment(int a, const LatticeParams& p) {
    if (a < 0 || a > p.n - 1) throw std::invalid_argument("block level out of range");
    double Na = static_cast<double>(p.pow(a));
    double s = 0.0;
    for (int i = a; i < p.n; ++i) s += static_cast<double>(p.pow(i)) * p.J[i];
    return (p.N - 1) * Na * s - p.h * Na;
}

struct SwitchResult {
    Configuration result;
    double predicted_delta = 0.0;
    int k = 0;  // level of the switched blocks
    int m = 0;  // level of the enclosing disjoint blocks
};

// Swap the spins of two k-blocks sitting in distinct m-blocks of one (m+1)-block.
inline SwitchResult switch_blocks(const Configuration& s, const BlockRange& u1, const BlockRange& u2,
                                  const LatticeParams& p) {
    if (u1.size() != u2.size() || u1.size() == 0) throw std::invalid_argument("switched blocks differ in size");
    int k = 0;
    while (p.pow(k) < u1.size()) ++k;
    if (p.pow(k) != u1.size() || u1.begin % u1.size() || u2.begin % u2.size() || u2.end > p.volume() ||
        u1.end > p.volume())
        throw std::invalid_argument("switched ranges are not blocks");
    int m = distance(u1.begin, u2.begin, p) - 1;
    if (m <= k) throw std::invalid_argument("switched blocks must lie in distinct m-blocks with k < m");

    SwitchResult r{s, 0.0, k, m};
    for (u64 t = 0; t < u1.size(); ++t) {
        r.result.set(u1.begin + t, s.test(u2.begin + t));
        r.result.set(u2.begin + t, s.test(u1.begin + t));
    }
    BlockRange big1 = block_members(u1.begin, m, p);
    BlockRange big2 = block_members(u2.begin, m, p);
    double c1 = 0, c2 = 0;
    for (u64 t = 0; t < u1.size(); ++t) {
        c1 += s.test(u1.begin + t);
        c2 += s.test(u2.begin + t);
    }
    for (int i = k + 1; i <= m; ++i) {
        double A = 0, C = 0;
        for (u64 x = big1.begin; x < big1.end; ++x)
            if (!s.test(x) && distance(x, u1.begin, p) == i) ++A;
        for (u64 x = big2.begin; x < big2.end; ++x)
            if (!s.test(x) && distance(x, u2.begin, p) == i) ++C;
        r.predicted_delta += 2.0 * (p.coupling(i) - p.coupling(m + 1)) * (A - C) * (c2 - c1);
    }
    return r;
}

// (E(gamma_k) - E(gamma_j)) - (E(gamma_l) - E(gamma_k)) with k = j + N^a, l = k + N^a.
inline double check_concavity(u64 j, int a, const LatticeParams& p) {
    if (a < 0 || a > p.n - 1) throw std::invalid_argument("level out of range");
    u64 step = p.pow(a);
    u64 k = j + step;
    u64 l = k + step;
    if (l > p.volume()) throw std::invalid_argument("concavity window leaves the lattice");
    if (block_members(j, a + 1, p) != block_members(l - 1, a + 1, p))
        throw std::invalid_argument("concavity window is not inside one (a+1)-block");
    double ej = profile_closed_form(j, p), ek = profile_closed_form(k, p), el = profile_closed_form(l, p);
    return (ek - ej) - (el - ek);
}

struct OptimalityResult {
    bool optimal = true;
    std::optional<u64> first_violation;  // smallest k with E(gamma_k) > min over |sigma| = k
    std::vector<double> volume_minima;
};

// Minimum energy in each volume class by exhaustive scan, V <= cap.
inline std::vector<double> volume_class_minima(const LatticeParams& p, int cap = 24) {
    u64 V = p.volume();
    if (V > static_cast<u64>(cap) || V > 30) throw SizeCapError("exhaustive scan exceeds the size cap");
    std::vector<double> best(V + 1, std::numeric_limits<double>::infinity());
    Configuration c(V);
    BlockCounts counts(c, p);
    double e = 0.0;
    best[0] = 0.0;
    // Gray-code walk: each step flips one vertex.
    u64 total = u64(1) << V;
    for (u64 i = 1; i < total; ++i) {
        u64 v = static_cast<u64>(std::countr_zero(i));
        e += counts.delta(v);
        counts.flip(v);
        u64 vol = counts.volume();
        best[vol] = std::min(best[vol], e);
    }
    return best;
}

inline OptimalityResult check_uniform_optimality(PathKind kind, const LatticeParams& p, int cap = 24,
                                                 double tol = 1e-9) {
    OptimalityResult r;
    r.volume_minima = volume_class_minima(p, cap);
    auto prof = energy_profile(kind, p);
    for (u64 k = 0; k <= p.volume(); ++k) {
        double scale = std::max(1.0, std::abs(prof.values[k]));
        if (prof.values[k] > r.volume_minima[k] + tol * scale) {
            r.optimal = false;
            r.first_violation = k;
            break;
        }
    }
    return r;
}

// h^(m,s) = J~[(1-1/N)(n-m) - (s-1)/N]
inline double h_threshold(int m, int s, double jt, int N, int n) {
    return jt * ((1.0 - 1.0 / N) * (n - m) - (s - 1.0) / N);
}

struct SymmetryInterval {
    int k = 0;
    u64 lo = 0;
    u64 hi = 0;
};

// Nested intervals on which the profile at h = h^(m,s) is mirror-symmetric.
// Levels k = a(1 + (N+1) mod 2) + ((N+1)(s+1)) mod 2 for a >= 0, 1 <= k <= m;
// intervals that would start below 0 (s = 1) are dropped.
inline std::vector<SymmetryInterval> symmetry_intervals(int m, int s, const LatticeParams& p) {
    auto Q = [](long long a) { return static_cast<int>(((a % 2) + 2) % 2); };
    const long long N = p.N;
    std::vector<SymmetryInterval> out;
    for (int k = 1; k <= m; ++k) {
        bool admissible = false;
        for (int a = 0; a <= m + 1; ++a)
            if (k == a * (1 + Q(N + 1)) + Q((N + 1) * (s + 1))) admissible = true;
        if (!admissible) continue;
        long long base = (s / 2 - 1 + Q(s * (N + 1))) * static_cast<long long>(p.pow(m));
        for (int j = 1; j < k; ++j)
            base += (N / 2 - Q((j + s + 1) * (N + 1))) * static_cast<long long>(p.pow(m - j));
        long long lo = base + (1 + Q(s * N)) * static_cast<long long>(p.pow(m - k));
        long long hi = base + static_cast<long long>(p.pow(m - k + 1));
        if (lo < 0 || hi > static_cast<long long>(p.volume())) continue;
        out.push_back({k, static_cast<u64>(lo), static_cast<u64>(hi)});
    }
    return out;
}

struct SymmetryDeviation {
    double reflection = 0.0;  // max |E(gamma_K) - E(gamma_{sN^m - K})|
    double intervals = 0.0;   // same reflection inside every symmetry interval
    std::size_t interval_count = 0;
};

inline SymmetryDeviation check_symmetry_standard(int m, int s, const LatticeParams& base) {
    double jt = 0.0;
    if (!base.is_standard(&jt)) throw DomainError("symmetry check needs standard couplings");
    if (m < 0 || m > base.n - 1 || s < 1 || s > base.N) throw std::invalid_argument("regime pair out of range");
    LatticeParams p = base;
    p.h = h_threshold(m, s, jt, p.N, p.n);
    SymmetryDeviation d;
    u64 top = static_cast<u64>(s) * p.pow(m);
    auto E = [&](u64 k) { return profile_closed_form(k, p); };
    for (u64 K = 0; K <= top; ++K) d.reflection = std::max(d.reflection, std::abs(E(K) - E(top - K)));
    for (const auto& iv : symmetry_intervals(m, s, p)) {
        ++d.interval_count;
        for (u64 K = iv.lo; K <= iv.hi; ++K)
            d.intervals = std::max(d.intervals, std::abs(E(K) - E(iv.lo + iv.hi - K)));
    }
    return d;
}

}  // namespace hiermeta
