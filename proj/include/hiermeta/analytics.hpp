#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "energy.hpp"
#include "isometry.hpp"
#include "lattice.hpp"
#include "refpath.hpp"

namespace hiermeta {

inline constexpr double kSnap = 1e-9;

inline double snap(double x) {
    double r = std::round(x);
    return std::abs(x - r) <= kSnap ? r : x;
}
inline long long snap_floor(double x) { return static_cast<long long>(std::floor(snap(x))); }
inline long long snap_ceil(double x) { return static_cast<long long>(std::ceil(snap(x))); }

inline double powi(double b, int e) {
    double r = 1.0;
    if (e >= 0) {
        for (int i = 0; i < e; ++i) r *= b;
    } else {
        for (int i = 0; i < -e; ++i) r /= b;
    }
    return r;
}

// (1-1/N) sum_{i=from}^{n} J_i N^i
inline double tail_field(int from, const LatticeParams& p) {
    double s = 0.0;
    for (int i = from; i <= p.n; ++i) s += p.J[i - 1] * powi(p.N, i);
    return (1.0 - 1.0 / p.N) * s;
}

inline bool metastable_regime(const LatticeParams& p) { return tail_field(1, p) > p.h; }

inline int mhat(const LatticeParams& p) {
    if (!metastable_regime(p)) throw DomainError("no metastable regime (A1)");
    int m = 0;
    for (int k = 0; k <= p.n - 1; ++k)
        if (tail_field(k + 1, p) - p.h > kSnap * std::max(1.0, p.h)) m = k;
    return m;
}

inline double shat(const LatticeParams& p) {
    int m = mhat(p);
    return (p.N / 2.0) / (p.J[m] * powi(p.N, m + 1)) * (tail_field(m + 1, p) - p.h);
}

// ceil(s)(2s - ceil(s) + 1) J_{m+1} N^{2m}: the profile value at ceil(s) N^m.
inline double max_subpath_value(const LatticeParams& p) {
    int m = mhat(p);
    double s = shat(p);
    double c = static_cast<double>(snap_ceil(s));
    return c * (2.0 * s - c + 1.0) * p.J[m] * powi(p.N, 2 * m);
}

struct RegimePair {
    int m = 0;
    int s = 0;
    bool operator==(const RegimePair&) const = default;
};

inline double standard_scale(const LatticeParams& p) {
    double jt = 0.0;
    if (!p.is_standard(&jt)) throw DomainError("standard couplings J_i = J/N^i required");
    return jt;
}

// (m, s) with h^(m,s) <= h < h^(m,s-1), m in [0, n-1], s in [2, N].
inline RegimePair locate_regime(const LatticeParams& p) {
    double jt = standard_scale(p);
    const double eps = 1e-12 * std::max(1.0, jt);
    if (p.h <= 0.0) throw DomainError("field must be positive");
    if (p.h >= h_threshold(0, 1, jt, p.N, p.n) - eps) throw DomainError("no metastable regime (A1)");
    for (int m = 0; m < p.n; ++m)
        for (int s = 2; s <= p.N; ++s)
            if (p.h >= h_threshold(m, s, jt, p.N, p.n) - eps && p.h < h_threshold(m, s - 1, jt, p.N, p.n) - eps)
                return {m, s};
    throw DomainError("field below every regime threshold");
}

// m-hat for standard couplings: floor(n - (h/J)(1-1/N)^{-1}), one lower when
// the argument is an integer (s-hat would vanish there).
inline int mhat_standard(const LatticeParams& p) {
    double jt = standard_scale(p);
    return static_cast<int>(std::max(0LL, snap_ceil(p.n - (p.h / jt) / (1.0 - 1.0 / p.N)) - 1));
}

inline bool at_threshold(const LatticeParams& p, RegimePair r) {
    double jt = standard_scale(p);
    return std::abs(p.h - h_threshold(r.m, r.s, jt, p.N, p.n)) <= 1e-12 * std::max(1.0, jt);
}

// ---------------------------------------------------------------------------
// Communication height

enum class GammaMethod { ProfileExact, AsymptoticGeneral, AsymptoticScaled, MfLimit, StandardClosedForm, Printed };

inline std::string to_string(GammaMethod m) {
    switch (m) {
        case GammaMethod::ProfileExact: return "profile_exact";
        case GammaMethod::AsymptoticGeneral: return "asymptotic_general";
        case GammaMethod::AsymptoticScaled: return "asymptotic_scaled";
        case GammaMethod::MfLimit: return "mf_limit";
        case GammaMethod::StandardClosedForm: return "standard_closed_form";
        case GammaMethod::Printed: return "printed";
    }
    return "?";
}

inline PathKind optimal_path_kind(const LatticeParams& p) {
    if (p.non_increasing()) return PathKind::MD;
    if (p.non_decreasing()) return PathKind::MI;
    throw DomainError("coupling vector is not monotone");
}

// Scan range: [0, sN^m] for standard couplings, the whole path otherwise.
inline EnergyProfile optimal_profile(const LatticeParams& p) {
    PathKind kind = optimal_path_kind(p);
    double jt = 0.0;
    if (kind == PathKind::MD && p.is_standard(&jt) && metastable_regime(p)) {
        RegimePair r = locate_regime(p);
        return energy_profile(kind, p, 0, static_cast<u64>(r.s) * p.pow(r.m));
    }
    return energy_profile(kind, p);
}

namespace detail {

inline double Q(long long a) { return static_cast<double>(((a % 2) + 2) % 2); }

// Odd N; s odd carries the (h - h^(m,s)) shift back to the floor point.
inline double gamma_standard_odd(const LatticeParams& p, RegimePair r, bool at_ceiling) {
    double jt = standard_scale(p);
    const double N = p.N, h = p.h;
    const int m = r.m, s = r.s;
    double Nm = powi(N, m);
    double tail = 0.5 * (jt * (1.0 - 1.0 / N) * (p.n - m - 1) - h);
    if (s % 2 == 0)
        return jt / (4.0 * N) * (Nm * (2.0 * s * (N - s / 2.0 + 1.0) - N - 1.0) + N - 2.0 * s + 1.0) +
               tail * (Nm * (s - 1.0) + 1.0);
    double g = jt / (4.0 * N) * (Nm * (2.0 * s * (N - s / 2.0) + N) + N - 2.0 * s - 1.0) + tail * (s * Nm + 1.0);
    if (!at_ceiling) g += h - h_threshold(m, s, jt, p.N, p.n);
    return g;
}

// Even N, s odd, split into level sums.
inline double gamma_even_split(const LatticeParams& p, int m, int s) {
    double jt = standard_scale(p);
    const double N = p.N, h = p.h;
    double A = (powi(N, m - static_cast<int>(Q(m))) - 1.0) / (N * N - 1.0);
    double B = (powi(N, m) - 1.0) / (N - 1.0);
    double c = jt * (1.0 - 1.0 / N) * (p.n - m - 1) - h;
    double NQ = powi(N, static_cast<int>(Q(m)));
    double first = jt / 2.0 * powi(N, 1 + static_cast<int>(Q(m + 1))) *
                   ((powi(N, m - 2 + static_cast<int>(Q(m))) - 1.0) / (N * N - 1.0));
    return first + jt * (0.5 * B - NQ * A) * (N - s) +
           (N / 4.0 * B - NQ * A + powi(N, m - 1) * ((s - 1) / 2.0) * (N - (s - 1) / 2.0)) +
           (((s - 1) / 2.0) * powi(N, m) + N / 2.0 * B - powi(N, 1 + static_cast<int>(Q(m))) * A) * c;
}

// Even N, s odd, as printed in compact form.
inline double gamma_even_printed(const LatticeParams& p, int m, int s) {
    double jt = standard_scale(p);
    const double N = p.N, h = p.h;
    int q = m % 2;
    double A = (powi(N, m - q) - 1.0) / (N * N - 1.0);
    double B = (powi(N, m) - 1.0) / (N - 1.0);
    double c = jt * (1.0 - 1.0 / N) * (p.n - m - 1) - h;
    return jt / 2.0 * powi(N, -q) * (A - 1.0) + jt * (0.5 * B - powi(N, q) * A) * (N - s) +
           jt * (N / 4.0 * B - powi(N, q) * A + powi(N, m - 1) * ((s - 1) / 2.0) * (N - (s - 1) / 2.0)) +
           (((s - 1) / 2.0) * powi(N, m) + N / 2.0 * B - powi(N, 1 + q) * A) * c;
}

inline double gamma_even(const LatticeParams& p, RegimePair r, bool printed) {
    double jt = standard_scale(p);
    const double N = p.N;
    const int m = r.m, s = r.s;
    auto odd = [&](int ss) { return printed ? gamma_even_printed(p, m, ss) : gamma_even_split(p, m, ss); };
    if (s % 2 == 1) return odd(s);
    int q = m % 2;
    double A = (powi(N, m - q) - 1.0) / (N * N - 1.0);
    double B = (powi(N, m) - 1.0) / (N - 1.0);
    double bracket = s * powi(N, m) - ((s - 1) / 2.0) * powi(N, m) - (N / 2.0) * B + powi(N, 1 + q) * A;
    return odd(s - 1) + (h_threshold(m, s - 1, jt, p.N, p.n) - p.h) * bracket;
}

// Printed closed form for odd N with s mod 2 folded in.
inline double gamma_printed_odd(const LatticeParams& p, RegimePair r) {
    double jt = standard_scale(p);
    const double N = p.N, h = p.h;
    const int m = r.m, s = r.s;
    double q = Q(s);
    double Nm = powi(N, m);
    return jt / (4.0 * N) * (Nm * (2.0 * s * (N - s / 2.0 + q) - N - q) + N - 2.0 * s - powi(-1.0, static_cast<int>(q))) +
           0.5 * (jt * (1.0 - 1.0 / N) * (p.n - m - 1) - h) * (Nm * (s - q) + 1.0);
}

}  // namespace detail

struct Estimate {
    double value = 0.0;
    std::string method;
    bool experimental = false;
};

inline Estimate gamma_star(const LatticeParams& p, GammaMethod method) {
    Estimate e{0.0, to_string(method), false};
    switch (method) {
        case GammaMethod::ProfileExact:
            e.value = optimal_profile(p).max;
            break;
        case GammaMethod::AsymptoticGeneral: {
            if (!p.non_increasing()) throw DomainError("asymptotic formula needs non-increasing couplings");
            int m = mhat(p);
            double s = 0.0;
            for (int i = m + 1; i <= p.n; ++i) s += p.J[i - 1] * powi(p.N, i);
            e.value = 0.25 / p.J[m] * (s - p.h) * (s - p.h);
            break;
        }
        case GammaMethod::AsymptoticScaled: {
            auto jt = p.scaled_couplings();
            int m = mhat(p);
            double s = 0.0;
            for (int i = m + 1; i <= p.n; ++i) s += jt[i - 1];
            e.value = 0.25 / jt[m] * (s - p.h) * (s - p.h) * powi(p.N, m + 1);
            break;
        }
        case GammaMethod::MfLimit: {
            double jt = standard_scale(p);
            double x = p.n - p.h / jt;  // m + alpha
            int m = static_cast<int>(snap_floor(x));
            double alpha = x - m;
            if (m < 0 || m > p.n - 1 || alpha <= kSnap) throw DomainError("h is not of the form J(n-m-alpha), alpha in (0,1)");
            e.value = jt / 4.0 * alpha * alpha * powi(p.N, m + 1);
            break;
        }
        case GammaMethod::StandardClosedForm: {
            RegimePair r = locate_regime(p);
            if (p.N % 2 == 1) {
                e.value = detail::gamma_standard_odd(p, r, false);
            } else {
                e.value = detail::gamma_even(p, r, false);
                e.experimental = true;
            }
            break;
        }
        case GammaMethod::Printed: {
            RegimePair r = locate_regime(p);
            e.value = p.N % 2 == 1 ? detail::gamma_printed_odd(p, r) : detail::gamma_even(p, r, true);
            e.experimental = true;
            break;
        }
    }
    return e;
}

// s-odd expression without the field shift: the value at the ceiling point.
inline double gamma_standard_odd_ceiling(const LatticeParams& p) {
    if (p.N % 2 == 0) throw DomainError("odd N required");
    return detail::gamma_standard_odd(p, locate_regime(p), true);
}

// ---------------------------------------------------------------------------
// Critical volume

enum class VolumeMethod { ProfileArgmax, StandardFormula, Printed, Eta };

inline std::string to_string(VolumeMethod m) {
    switch (m) {
        case VolumeMethod::ProfileArgmax: return "profile_argmax";
        case VolumeMethod::StandardFormula: return "standard_formula";
        case VolumeMethod::Printed: return "printed";
        case VolumeMethod::Eta: return "eta";
    }
    return "?";
}

struct VolumeEstimate {
    u64 M = 0;
    std::vector<u64> ties;  // all maximisers when the argmax is not unique
    std::string method;
    bool experimental = false;
    std::string warning;
};

struct EtaCoordinates {
    std::vector<int> eta;              // recursion with each level's own digit, clamped to [0, N-1]
    std::vector<int> eta_printed;      // recursion with the coefficient frozen at eta_{m-i}
    std::vector<double> eta_scaled;    // simplified scaled-coupling values (real), empty if m-hat = 0
    u64 locator = 0;                   // sum eta_i N^i
};

inline EtaCoordinates eta_coordinates(const LatticeParams& p) {
    const int m = mhat(p);
    const double s = shat(p);
    const int N = p.N;
    EtaCoordinates r;
    r.eta.assign(static_cast<std::size_t>(p.n), 0);
    r.eta_printed.assign(static_cast<std::size_t>(p.n), 0);
    int top = static_cast<int>(std::min<long long>(snap_ceil(s), N - 1));
    r.eta[m] = top;
    r.eta_printed[m] = top;
    auto J = [&](int i) { return p.J[i - 1]; };
    auto clamp = [&](long long v) { return static_cast<int>(std::clamp<long long>(v, 0, N - 1)); };

    for (int i = 0; i < m; ++i) {
        const int level = m - i - 1;  // digit being chosen
        const double base = J(m - i) * powi(N, 2 * level);
        auto digit = [&](const std::vector<int>& eta, bool frozen) {
            double R = 0.0;
            for (int j = 1; j <= i + 1; ++j) {
                int e = frozen ? eta[m - i] : eta[m - i + j - 1];
                R += J(m - i + j) * powi(N, 2 * level + j) * (N - 2.0 * e - 1.0);
            }
            for (int q = m + 2; q <= p.n; ++q) R += (1.0 - 1.0 / N) * J(q) * powi(N, level + q);
            R -= p.h * powi(N, level);
            return clamp(std::max<long long>(0, snap_ceil(0.5 * (R / base + N - 1.0))));
        };
        r.eta[level] = digit(r.eta, false);
        r.eta_printed[level] = digit(r.eta_printed, true);
    }

    if (m >= 1) {
        auto jt = p.scaled_couplings();
        auto Jt = [&](int i) { return jt[i - 1]; };
        r.eta_scaled.assign(static_cast<std::size_t>(p.n), 0.0);
        r.eta_scaled[m] = top;
        r.eta_scaled[m - 1] = N / 2.0;
        for (int i = 1; i <= m - 1; ++i) {
            double a = 0.0;
            for (int j = 1; j <= i + 1; ++j) a += Jt(m - i + j) / Jt(m - i) * (1.0 - 2.0 * r.eta_scaled[m - i] / N);
            for (int j = 2; j <= p.n - m; ++j) a += Jt(m + j) / Jt(m - i);
            a += -p.h / Jt(m - i) + 1.0;
            r.eta_scaled[m - i - 1] = N / 2.0 * a;
        }
    }
    for (int i = p.n - 1; i >= 0; --i) r.locator = r.locator * static_cast<u64>(N) + static_cast<u64>(r.eta[i]);
    return r;
}

namespace detail {

inline u64 even_r(const LatticeParams& p, int m, int s, int lead_s) {
    // ((lead_s-1)/2) N^m + sum_{j=1}^{m-1} (N/2 - Q(j+s+1)) N^{m-j} + N/2
    long long r = (lead_s - 1) * static_cast<long long>(p.pow(m)) / 2;
    for (int j = 1; j <= m - 1; ++j)
        r += (p.N / 2 - static_cast<long long>(Q(j + s + 1))) * static_cast<long long>(p.pow(m - j));
    r += p.N / 2;
    return r < 0 ? 0 : static_cast<u64>(r);
}

}  // namespace detail

inline VolumeEstimate critical_volume(const LatticeParams& p, VolumeMethod method) {
    VolumeEstimate v;
    v.method = to_string(method);
    switch (method) {
        case VolumeMethod::ProfileArgmax: {
            auto prof = optimal_profile(p);
            v.M = prof.argmax.front();
            if (prof.argmax.size() > 1) {
                v.ties = prof.argmax;
                v.warning = "profile maximum is not unique";
            }
            break;
        }
        case VolumeMethod::StandardFormula: {
            RegimePair r = locate_regime(p);
            u64 Nm = p.pow(r.m);
            if (p.N % 2 == 1) {
                v.M = r.s % 2 == 1 ? static_cast<u64>(r.s) * Nm / 2 : static_cast<u64>(r.s - 1) * Nm / 2 + 1;
            } else {
                v.M = r.s % 2 == 1 ? detail::even_r(p, r.m, r.s, r.s) : detail::even_r(p, r.m, r.s - 1, r.s - 1);
                v.experimental = true;
            }
            if (at_threshold(p, r)) v.warning = "field sits on a regime threshold";
            break;
        }
        case VolumeMethod::Printed: {
            RegimePair r = locate_regime(p);
            double Nm = static_cast<double>(p.pow(r.m));
            if (p.N % 2 == 1) {
                v.M = r.s % 2 == 1 ? static_cast<u64>(std::ceil(r.s * Nm / 2.0))
                                   : static_cast<u64>(std::ceil((r.s - 1) / 2.0 * Nm)) + 1;
            } else {
                // leading term (s-1)/2 for odd s and (s-2)/2 for even s
                v.M = r.s % 2 == 1 ? detail::even_r(p, r.m, r.s, r.s) : detail::even_r(p, r.m, r.s, r.s - 1);
            }
            v.experimental = true;
            break;
        }
        case VolumeMethod::Eta:
            v.M = eta_coordinates(p).locator;
            v.experimental = true;
            break;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Neighbourhood of the critical configuration and the prefactor

struct NeighborCounts {
    u64 u_minus = 0;  // down-flips from gamma_M that lower the energy
    u64 u_plus = 0;   // up-flips from gamma_M that lower the energy
    std::vector<int> B_d;
    std::vector<int> B_u;
    double down_estimate = 0.0;  // sum_{i in B_d} a_{i-1} N^{i-1}
    double up_estimate = 0.0;    // sum_{i in B_u} (N^i - a_{i-1} N^{i-1})
    double min_abs_delta = 0.0;  // smallest |delta| among all flips at gamma_M
};

inline Configuration critical_configuration(const LatticeParams& p, u64 M) {
    return ReferencePath(optimal_path_kind(p), p).at(M);
}

inline NeighborCounts neighbor_counts(const LatticeParams& p, u64 M, double tol = 1e-9) {
    NeighborCounts c;
    Configuration g = critical_configuration(p, M);
    BlockCounts counts(g, p);
    c.min_abs_delta = std::numeric_limits<double>::infinity();
    for (u64 v = 0; v < p.volume(); ++v) {
        double d = counts.delta(v);
        c.min_abs_delta = std::min(c.min_abs_delta, std::abs(d));
        if (d < -tol) (g.test(v) ? c.u_minus : c.u_plus) += 1;
    }
    if (M >= 1 && M < p.volume()) {
        NaryDigits a = last_vertex_digits(M, p);
        int top = metastable_regime(p) ? mhat(p) : p.n;
        for (int b = 1; b <= top; ++b)
            if (vertex_flip_formula(a, b, -1, p) < 0.0) {
                c.B_d.push_back(b);
                c.down_estimate += a.digits[b - 1] * powi(p.N, b - 1);
            }
        for (int b = 1; b <= p.n; ++b)
            if (vertex_flip_formula(a, b, +1, p) < 0.0) {
                c.B_u.push_back(b);
                c.up_estimate += powi(p.N, b) - a.digits[b - 1] * powi(p.N, b - 1);
            }
    }
    return c;
}

// Number of configurations in the isometry orbit of gamma_M.
inline u128 gate_size(const LatticeParams& p, u64 M) {
    if (optimal_path_kind(p) == PathKind::MD) return translation_count(M, p);
    return orbit_size(critical_configuration(p, M), p);
}

enum class PrefactorMethod { Reduced, GeneralProduct, StandardProduct, StandardProductPrinted };

inline std::string to_string(PrefactorMethod m) {
    switch (m) {
        case PrefactorMethod::Reduced: return "reduced";
        case PrefactorMethod::GeneralProduct: return "thm1";
        case PrefactorMethod::StandardProduct: return "thm2";
        case PrefactorMethod::StandardProductPrinted: return "thm2_printed";
    }
    return "?";
}

// Returns 1/K*.
inline Estimate inverse_prefactor(const LatticeParams& p, PrefactorMethod method) {
    Estimate e{0.0, to_string(method), false};
    switch (method) {
        case PrefactorMethod::Reduced: {
            u64 M = critical_volume(p, VolumeMethod::ProfileArgmax).M;
            auto c = neighbor_counts(p, M);
            if (c.u_minus + c.u_plus == 0) throw DomainError("critical configuration has no downhill neighbours");
            double per = static_cast<double>(c.u_minus) * static_cast<double>(c.u_plus) /
                         static_cast<double>(c.u_minus + c.u_plus);
            e.value = static_cast<double>(gate_size(p, M)) * per;
            break;
        }
        case PrefactorMethod::GeneralProduct: {
            auto eta = eta_coordinates(p).eta;
            int m = mhat(p);
            NaryDigits d;
            d.digits = eta;
            double down = 0.0, up = 0.0;
            for (int b = 1; b <= m; ++b)
                if (vertex_flip_formula(d, b, -1, p) < 0.0) down += eta[b - 1] * powi(p.N, b - 1);
            for (int b = 1; b <= p.n; ++b)
                if (vertex_flip_formula(d, b, +1, p) < 0.0) up += powi(p.N, b) - eta[b - 1] * powi(p.N, b - 1);
            double prod = powi(p.N, p.n - m - 1) / (p.N - eta[0]);
            for (int i = 0; i <= m; ++i) prod *= static_cast<double>(binomial(p.N, eta[i])) * (p.N - eta[i]);
            e.value = down + up > 0.0 ? down * up / (down + up) * prod : 0.0;
            e.experimental = true;
            break;
        }
        case PrefactorMethod::StandardProduct:
        case PrefactorMethod::StandardProductPrinted: {
            RegimePair r = locate_regime(p);
            if (p.N == 2 || p.N == 4) throw DomainError("product prefactor excludes N = 2, 4");
            if (r.m < 1) throw DomainError("product prefactor needs m >= 1");
            std::vector<int> a(static_cast<std::size_t>(r.m) + 1);
            if (method == PrefactorMethod::StandardProductPrinted) {
                a[0] = (p.N - 1) / 2 + 1;
                for (int i = 1; i < r.m; ++i) a[i] = (p.N - 1) / 2;
                a[r.m] = (r.s - 1 - (r.s + 1) % 2) / 2;
                e.experimental = true;
            } else {
                u64 M = critical_volume(p, VolumeMethod::ProfileArgmax).M;
                auto d = nary_decomposition(M, p).digits;
                for (int i = 0; i <= r.m; ++i) a[i] = d[i];
                if (p.N % 2 == 0) e.experimental = true;
            }
            double v = a[0] * powi(p.N, p.n - r.m - 2);
            for (int i = 0; i <= r.m; ++i) v *= static_cast<double>(binomial(p.N, a[i])) * (p.N - a[i]);
            e.value = v;
            break;
        }
    }
    return e;
}

// ---------------------------------------------------------------------------
// Assumption diagnostics

struct AssumptionTolerances {
    double a2a_min = 0.05;
    double a3_max = 0.2;
    double a4_max = 2.0;
    double a5 = 1e-9;
};

struct AssumptionReport {
    bool a1 = false;
    double a1_margin = 0.0;  // (1-1/N) sum J_i N^i - h
    bool expect_no_local_minima = false;
    bool non_increasing = false;
    bool non_decreasing = false;
    std::optional<double> a2a;  // distance of s-hat to the nearest integer
    std::optional<double> a2b;  // |sum_{i>m} J_i N^i - h|
    std::optional<double> a3;   // max ratio over 1 <= k <= N^m
    std::optional<double> a4;   // max_{i <= m} J_{i+1} N / J_i
    bool a2a_ok = false, a3_ok = false, a4_ok = false;
    bool a5_operational = false;
    std::vector<std::string> warnings;
};

inline AssumptionReport check_assumptions(const LatticeParams& p, const AssumptionTolerances& tol = {}) {
    AssumptionReport r;
    r.non_increasing = p.non_increasing();
    r.non_decreasing = p.non_decreasing();
    r.a1_margin = tail_field(1, p) - p.h;
    r.a1 = r.a1_margin > 0.0;
    if (!r.a1) {
        r.expect_no_local_minima = true;
        r.warnings.push_back("no metastable regime (A1): no local minima besides the global one");
        return r;
    }
    int m = mhat(p);
    double s = shat(p);
    r.a2a = std::abs(s - std::round(s));
    r.a2a_ok = *r.a2a >= tol.a2a_min;
    double sum = 0.0;
    for (int i = m + 1; i <= p.n; ++i) sum += p.J[i - 1] * powi(p.N, i);
    r.a2b = std::abs(sum - p.h);

    double denom = max_subpath_value(p);
    u64 limit = std::min<u64>(p.pow(m), u64(1) << 22);
    double worst = 0.0;
    for (u64 k = 1; k <= limit; ++k) {
        std::vector<double> a(static_cast<std::size_t>(std::max(m, 1)), 0.0);
        u64 q = k;
        for (int i = 0; i < m; ++i) {
            a[i] = static_cast<double>(q % static_cast<u64>(p.N));
            q /= static_cast<u64>(p.N);
        }
        double num = 0.0;
        for (int i = 0; i < m; ++i) {
            double upto = 0.0, below = 0.0;
            for (int j = 0; j <= i; ++j) upto += a[j] * powi(p.N, j);
            for (int j = 0; j < i; ++j) below += a[j] * powi(p.N, j);
            num += p.J[i] * powi(p.N, i) * ((p.N - a[i] - 1.0) * upto + a[i] * (powi(p.N, i) - below));
        }
        num += static_cast<double>(k) * sum;
        if (denom != 0.0) worst = std::max(worst, std::abs(num / denom));
    }
    r.a3 = worst;
    r.a3_ok = worst <= tol.a3_max;
    double a4 = 0.0;
    for (int i = 1; i <= m; ++i) a4 = std::max(a4, p.J[i] * p.N / p.J[i - 1]);
    r.a4 = a4;
    r.a4_ok = a4 <= tol.a4_max;

    if (r.non_increasing || r.non_decreasing) {
        auto prof = optimal_profile(p);
        bool unique = prof.argmax.size() == 1;
        auto nc = neighbor_counts(p, prof.argmax.front(), 0.0);
        r.a5_operational = unique && nc.min_abs_delta > tol.a5;
        if (!unique) r.warnings.push_back("profile maximum is not unique");
    } else {
        r.warnings.push_back("coupling vector is not monotone");
    }
    if (!r.a2a_ok) r.warnings.push_back("s-hat is close to an integer (A2a)");
    if (!r.a3_ok) r.warnings.push_back("short-range profile fluctuation ratio exceeds tolerance (A3)");
    if (!r.a4_ok) r.warnings.push_back("coupling decay ratio exceeds tolerance (A4)");
    if (!r.a5_operational) r.warnings.push_back("landscape degenerate at the maximiser (operational A5)");
    return r;
}

// ---------------------------------------------------------------------------

struct MetastabilityReport {
    double gamma_star = 0.0;
    std::string gamma_method;
    u64 M = 0;
    std::vector<u64> M_ties;
    std::vector<int> digits;  // a_0 .. a_{n-1} of M
    EtaCoordinates eta;
    u128 c_star_count = 0;
    double inverse_k_star = 0.0;
    double k_star = 0.0;
    std::string k_star_method;
    NeighborCounts neighbors;
    std::optional<RegimePair> regime;
    int mhat = 0;
    double shat = 0.0;
    PathKind path = PathKind::MD;
    AssumptionReport assumptions;
    std::vector<Estimate> gamma_alternatives;
    std::vector<VolumeEstimate> volume_alternatives;
    std::vector<Estimate> prefactor_alternatives;
};

inline MetastabilityReport analyze(const LatticeParams& p) {
    p.validate();
    MetastabilityReport r;
    r.assumptions = check_assumptions(p);
    if (!r.assumptions.a1) throw DomainError("no metastable regime (A1)");
    r.path = optimal_path_kind(p);
    r.mhat = mhat(p);
    r.shat = shat(p);
    auto g = gamma_star(p, GammaMethod::ProfileExact);
    r.gamma_star = g.value;
    r.gamma_method = g.method;
    auto v = critical_volume(p, VolumeMethod::ProfileArgmax);
    r.M = v.M;
    r.M_ties = v.ties;
    r.digits = nary_decomposition(r.M, p).digits;
    r.eta = eta_coordinates(p);
    r.c_star_count = gate_size(p, r.M);
    r.neighbors = neighbor_counts(p, r.M);
    auto k = inverse_prefactor(p, PrefactorMethod::Reduced);
    r.inverse_k_star = k.value;
    r.k_star = 1.0 / k.value;
    r.k_star_method = k.method;

    auto attempt = [](auto&& f, auto& out) {
        try {
            out.push_back(f());
        } catch (const DomainError&) {
        }
    };
    for (auto m : {GammaMethod::AsymptoticGeneral, GammaMethod::AsymptoticScaled, GammaMethod::MfLimit,
                   GammaMethod::StandardClosedForm, GammaMethod::Printed})
        attempt([&] { return gamma_star(p, m); }, r.gamma_alternatives);
    for (auto m : {VolumeMethod::StandardFormula, VolumeMethod::Printed, VolumeMethod::Eta})
        attempt([&] { return critical_volume(p, m); }, r.volume_alternatives);
    for (auto m : {PrefactorMethod::GeneralProduct, PrefactorMethod::StandardProduct,
                   PrefactorMethod::StandardProductPrinted})
        attempt([&] { return inverse_prefactor(p, m); }, r.prefactor_alternatives);
    if (p.is_standard()) r.regime = locate_regime(p);
    return r;
}

}  // namespace hiermeta
