#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "configuration.hpp"
#include "lattice.hpp"

namespace hiermeta {

inline constexpr int kDefaultOracleCap = 24;

// Structural failure in an exact computation (disconnected graph, no convergence).
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline unsigned default_threads() {
    unsigned t = std::thread::hardware_concurrency();
    return t == 0 ? 1 : t;
}

// Energies of all 2^V configurations. Bit v of a code is the spin at vertex v.
// Energies are also ranked into integer levels (values within 1e-12 merged),
// so every comparison in the graph searches is exact.
class LandscapeIndex {
public:
    using State = std::uint32_t;

    LandscapeIndex(const LatticeParams& p, int cap = kDefaultOracleCap, unsigned threads = 0) : p_(p) {
        p.validate();
        u64 V = p.volume();
        if (V > static_cast<u64>(cap) || V > 31) throw SizeCapError("lattice too large for exhaustive enumeration");
        V_ = static_cast<int>(V);
        states_ = State(1) << V_;
        energies_.resize(states_);
        fill_energies(threads == 0 ? default_threads() : threads);
        rank_levels();
    }

    const LatticeParams& params() const { return p_; }
    int vertices() const { return V_; }
    State states() const { return states_; }
    State minus() const { return 0; }
    State plus() const { return states_ - 1; }
    double energy(State s) const { return energies_[s]; }
    const std::vector<double>& energies() const { return energies_; }
    std::uint32_t level(State s) const { return levels_[s]; }
    double level_value(std::uint32_t l) const { return values_[l]; }
    std::size_t level_count() const { return values_.size(); }
    std::uint32_t level_of(double e) const {
        auto it = std::lower_bound(values_.begin(), values_.end(), e - 1e-12);
        if (it == values_.end() || std::abs(*it - e) > 1e-12) throw std::invalid_argument("energy is not a landscape level");
        return static_cast<std::uint32_t>(it - values_.begin());
    }
    static State neighbor(State s, int v) { return s ^ (State(1) << v); }
    Configuration configuration(State s) const { return Configuration::from_bits(static_cast<u64>(V_), s); }

private:
    // E = sum_j (J_j - J_{j+1}) W_j with W_j = sum over j-blocks of P (size - P).
    void fill_energies(unsigned threads) {
        std::vector<double> weight(static_cast<std::size_t>(p_.n));
        for (int j = 1; j <= p_.n; ++j) weight[j - 1] = p_.J[j - 1] - (j < p_.n ? p_.J[j] : 0.0);
        auto work = [&](State lo, State hi) {
            for (State s = lo; s < hi; ++s) {
                double e = 0.0;
                u64 size = 1;
                for (int j = 1; j <= p_.n; ++j) {
                    size *= static_cast<u64>(p_.N);
                    u64 mask = size >= 64 ? ~u64(0) : (u64(1) << size) - 1;
                    double w = 0.0;
                    for (u64 b = 0; b < static_cast<u64>(V_); b += size) {
                        double P = static_cast<double>(std::popcount((static_cast<u64>(s) >> b) & mask));
                        w += P * (static_cast<double>(size) - P);
                    }
                    e += weight[j - 1] * w;
                }
                energies_[s] = e - p_.h * std::popcount(s);
            }
        };
        threads = std::max(1u, std::min<unsigned>(threads, states_ / 1024 + 1));
        if (threads == 1) {
            work(0, states_);
            return;
        }
        std::vector<std::thread> pool;
        State chunk = (states_ + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            State lo = std::min<State>(states_, t * chunk), hi = std::min<State>(states_, lo + chunk);
            pool.emplace_back(work, lo, hi);
        }
        for (auto& t : pool) t.join();
    }

    void rank_levels() {
        std::vector<double> sorted = energies_;
        std::sort(sorted.begin(), sorted.end());
        for (double e : sorted)
            if (values_.empty() || e - values_.back() > 1e-12) values_.push_back(e);
        levels_.resize(states_);
        for (State s = 0; s < states_; ++s) {
            auto it = std::upper_bound(values_.begin(), values_.end(), energies_[s] + 1e-12);
            levels_[s] = static_cast<std::uint32_t>(it - values_.begin() - 1);
        }
    }

    LatticeParams p_;
    int V_ = 0;
    State states_ = 0;
    std::vector<double> energies_;
    std::vector<double> values_;
    std::vector<std::uint32_t> levels_;
};

using State = LandscapeIndex::State;
using StateSet = std::vector<State>;

namespace detail {

inline bool reachable_within(const LandscapeIndex& L, const std::vector<char>& in_a, const std::vector<char>& in_b,
                             std::uint32_t threshold) {
    std::vector<char> seen(L.states(), 0);
    std::vector<State> stack;
    for (State s = 0; s < L.states(); ++s)
        if (in_a[s] && L.level(s) <= threshold) {
            seen[s] = 1;
            stack.push_back(s);
        }
    while (!stack.empty()) {
        State s = stack.back();
        stack.pop_back();
        if (in_b[s]) return true;
        for (int v = 0; v < L.vertices(); ++v) {
            State t = LandscapeIndex::neighbor(s, v);
            if (!seen[t] && L.level(t) <= threshold) {
                seen[t] = 1;
                stack.push_back(t);
            }
        }
    }
    return false;
}

}  // namespace detail

// Relative communication height between two state sets: binary search over
// the distinct energy levels with a connectivity search at each threshold.
inline double communication_height(const LandscapeIndex& L, const StateSet& A, const StateSet& B) {
    if (A.empty() || B.empty()) throw std::invalid_argument("communication height needs non-empty sets");
    std::vector<char> in_a(L.states(), 0), in_b(L.states(), 0);
    std::uint32_t lo = 0;
    for (State s : A) in_a[s] = 1;
    for (State s : B) {
        if (in_a[s]) throw std::invalid_argument("sets must be disjoint");
        in_b[s] = 1;
    }
    std::uint32_t ma = std::numeric_limits<std::uint32_t>::max(), mb = ma;
    for (State s : A) ma = std::min(ma, L.level(s));
    for (State s : B) mb = std::min(mb, L.level(s));
    lo = std::max(ma, mb);
    std::uint32_t hi = static_cast<std::uint32_t>(L.level_count() - 1);
    while (lo < hi) {
        std::uint32_t mid = lo + (hi - lo) / 2;
        if (detail::reachable_within(L, in_a, in_b, mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return L.level_value(lo);
}

// Level of min over paths to `source` of the maximal level en route, for every state.
inline std::vector<std::uint32_t> bottleneck_levels(const LandscapeIndex& L, State source) {
    const std::uint32_t inf = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> best(L.states(), inf);
    using Item = std::pair<std::uint32_t, State>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    best[source] = L.level(source);
    heap.push({best[source], source});
    while (!heap.empty()) {
        auto [b, s] = heap.top();
        heap.pop();
        if (b != best[s]) continue;
        for (int v = 0; v < L.vertices(); ++v) {
            State t = LandscapeIndex::neighbor(s, v);
            std::uint32_t nb = std::max(b, L.level(t));
            if (nb < best[t]) {
                best[t] = nb;
                heap.push({nb, t});
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

struct StabilityEntry {
    State state = 0;
    double energy = 0.0;
    double stability = 0.0;  // +inf for global minima
};

struct StabilityReport {
    std::vector<StabilityEntry> local_minima;  // no strictly lower neighbour
    StateSet omega_stab;
    StateSet omega_meta;
    double gamma_meta = 0.0;
    bool only_global_minima = false;
};

inline bool is_local_minimum(const LandscapeIndex& L, State s) {
    for (int v = 0; v < L.vertices(); ++v)
        if (L.level(LandscapeIndex::neighbor(s, v)) < L.level(s)) return false;
    return true;
}

// Stability levels by a sweep over increasing levels with union-find: a
// pending minimum is resolved when its component first meets a lower one.
inline std::vector<double> stability_levels(const LandscapeIndex& L) {
    const State S = L.states();
    std::vector<State> order(S);
    std::iota(order.begin(), order.end(), State(0));
    std::stable_sort(order.begin(), order.end(), [&](State a, State b) { return L.level(a) < L.level(b); });

    std::vector<State> parent(S);
    std::iota(parent.begin(), parent.end(), State(0));
    std::vector<char> added(S, 0);
    std::vector<std::uint32_t> comp_min(S);
    std::map<State, std::vector<State>> pending;  // only local minima can have positive stability
    std::vector<double> result(S, 0.0);
    auto find = [&](State x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    std::size_t i = 0;
    while (i < order.size()) {
        std::uint32_t lev = L.level(order[i]);
        std::size_t j = i;
        while (j < order.size() && L.level(order[j]) == lev) {
            State s = order[j++];
            added[s] = 1;
            comp_min[s] = lev;
            if (is_local_minimum(L, s)) pending[s].push_back(s);
        }
        for (std::size_t k = i; k < j; ++k) {
            State s = order[k];
            for (int v = 0; v < L.vertices(); ++v) {
                State t = LandscapeIndex::neighbor(s, v);
                if (!added[t]) continue;
                State a = find(s), b = find(t);
                if (a == b) continue;
                if (comp_min[a] > comp_min[b]) std::swap(a, b);
                // a has the lower (or equal) minimum
                auto pb = pending.find(b);
                if (pb != pending.end()) {
                    if (comp_min[b] > comp_min[a]) {
                        for (State x : pb->second) result[x] = L.level_value(lev) - L.energy(x);
                    } else {
                        auto& pa = pending[a];
                        pa.insert(pa.end(), pb->second.begin(), pb->second.end());
                    }
                    pending.erase(b);
                }
                parent[b] = a;
            }
        }
        i = j;
    }
    for (const auto& [root, xs] : pending)
        for (State x : xs) result[x] = std::numeric_limits<double>::infinity();
    return result;
}

inline StabilityReport stability_report(const LandscapeIndex& L) {
    StabilityReport r;
    auto V = stability_levels(L);
    std::uint32_t global = std::numeric_limits<std::uint32_t>::max();
    for (State s = 0; s < L.states(); ++s) global = std::min(global, L.level(s));
    for (State s = 0; s < L.states(); ++s) {
        if (L.level(s) == global) r.omega_stab.push_back(s);
        if (is_local_minimum(L, s)) r.local_minima.push_back({s, L.energy(s), V[s]});
    }
    double best = 0.0;
    for (const auto& m : r.local_minima)
        if (L.level(m.state) != global) best = std::max(best, m.stability);
    r.gamma_meta = best;
    if (best > 0.0)
        for (const auto& m : r.local_minima)
            if (L.level(m.state) != global && std::abs(m.stability - best) <= 1e-12) r.omega_meta.push_back(m.state);
    r.only_global_minima = std::all_of(r.local_minima.begin(), r.local_minima.end(),
                                       [&](const StabilityEntry& m) { return L.level(m.state) == global; });
    return r;
}

// ---------------------------------------------------------------------------

struct GateSets {
    double phi = 0.0;
    std::uint32_t phi_level = 0;
    std::vector<std::uint32_t> to_minus;  // bottleneck level to the all-minus state
    std::vector<std::uint32_t> to_plus;
    StateSet s_star, s_minus, s_plus;
    std::vector<StateSet> wells;
    StateSet c_star, p_star;
};

inline GateSets gate_sets(const LandscapeIndex& L) {
    GateSets g;
    const State S = L.states();
    g.to_minus = bottleneck_levels(L, L.minus());
    g.to_plus = bottleneck_levels(L, L.plus());
    g.phi_level = g.to_minus[L.plus()];
    g.phi = L.level_value(g.phi_level);
    const std::uint32_t phi = g.phi_level;

    std::vector<char> down(S, 0);  // closer to the all-minus state
    std::vector<char> well_member(S, 0);
    for (State s = 0; s < S; ++s) {
        if (g.to_minus[s] <= phi) g.s_star.push_back(s);
        if (g.to_minus[s] < phi) g.s_minus.push_back(s);
        if (g.to_plus[s] < phi) g.s_plus.push_back(s);
        down[s] = g.to_minus[s] < g.to_plus[s];
        well_member[s] = L.level(s) < phi && g.to_minus[s] == phi && g.to_plus[s] == phi;
    }

    std::vector<char> seen(S, 0);
    for (State s = 0; s < S; ++s) {
        if (!well_member[s] || seen[s]) continue;
        StateSet comp{s};
        seen[s] = 1;
        for (std::size_t k = 0; k < comp.size(); ++k)
            for (int v = 0; v < L.vertices(); ++v) {
                State t = LandscapeIndex::neighbor(comp[k], v);
                if (well_member[t] && !seen[t]) {
                    seen[t] = 1;
                    comp.push_back(t);
                }
            }
        std::sort(comp.begin(), comp.end());
        g.wells.push_back(std::move(comp));
    }

    // states that reach the all-plus state inside {level <= phi} without entering the minus side
    std::vector<char> reach(S, 0);
    std::vector<State> stack{L.plus()};
    reach[L.plus()] = 1;
    while (!stack.empty()) {
        State s = stack.back();
        stack.pop_back();
        for (int v = 0; v < L.vertices(); ++v) {
            State t = LandscapeIndex::neighbor(s, v);
            if (!reach[t] && !down[t] && L.level(t) <= phi) {
                reach[t] = 1;
                stack.push_back(t);
            }
        }
    }
    std::vector<char> in_c(S, 0);
    for (State s = 0; s < S; ++s) {
        if (down[s] || !reach[s]) continue;
        for (int v = 0; v < L.vertices(); ++v)
            if (down[LandscapeIndex::neighbor(s, v)]) {
                in_c[s] = 1;
                g.c_star.push_back(s);
                break;
            }
    }
    for (State s = 0; s < S; ++s) {
        if (!down[s]) continue;
        for (int v = 0; v < L.vertices(); ++v)
            if (in_c[LandscapeIndex::neighbor(s, v)]) {
                g.p_star.push_back(s);
                break;
            }
    }
    return g;
}

// Definition checks on an extracted (P*, C*) pair.
struct GateCheck {
    bool c_at_phi = false;           // every member of C* sits at the saddle energy
    bool c_in_s_star = false;
    bool p_below_phi_minus_side = false;  // P* inside the minus valley
    bool pairs_adjacent = false;     // P* and C* are matched by single flips
    bool c_reaches_plus = false;     // C* connects to the plus valley below the saddle, avoiding P*'s side
    bool no_moves_within_c = false;
    bool ok() const {
        return c_at_phi && c_in_s_star && p_below_phi_minus_side && pairs_adjacent && c_reaches_plus && no_moves_within_c;
    }
};

inline GateCheck check_gate(const LandscapeIndex& L, const GateSets& g) {
    GateCheck c;
    std::vector<char> in_c(L.states(), 0), in_p(L.states(), 0), in_star(L.states(), 0), in_minus(L.states(), 0);
    for (State s : g.c_star) in_c[s] = 1;
    for (State s : g.p_star) in_p[s] = 1;
    for (State s : g.s_star) in_star[s] = 1;
    for (State s : g.s_minus) in_minus[s] = 1;
    c.c_at_phi = std::all_of(g.c_star.begin(), g.c_star.end(), [&](State s) { return L.level(s) == g.phi_level; });
    c.c_in_s_star = std::all_of(g.c_star.begin(), g.c_star.end(), [&](State s) { return in_star[s]; });
    c.p_below_phi_minus_side = std::all_of(g.p_star.begin(), g.p_star.end(), [&](State s) { return in_minus[s]; });
    auto touches = [&](State s, const std::vector<char>& set) {
        for (int v = 0; v < L.vertices(); ++v)
            if (set[LandscapeIndex::neighbor(s, v)]) return true;
        return false;
    };
    c.pairs_adjacent = !g.c_star.empty() &&
                       std::all_of(g.c_star.begin(), g.c_star.end(), [&](State s) { return touches(s, in_p); }) &&
                       std::all_of(g.p_star.begin(), g.p_star.end(), [&](State s) { return touches(s, in_c); });
    c.c_reaches_plus = std::all_of(g.c_star.begin(), g.c_star.end(),
                                   [&](State s) { return g.to_plus[s] <= g.phi_level; });
    c.no_moves_within_c = std::none_of(g.c_star.begin(), g.c_star.end(), [&](State s) { return touches(s, in_c); });
    return c;
}

// ---------------------------------------------------------------------------

namespace detail {

// Solve the SPD system A x = b: dense Cholesky when small, Jacobi-preconditioned CG otherwise.
inline Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, double tol = 1e-14) {
    if (A.rows() == 0) return Eigen::VectorXd();
    if (A.rows() <= 1024) {
        Eigen::MatrixXd D(A);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(D);
        if (ldlt.info() != Eigen::Success) throw StructuralError("singular linear system");
        return ldlt.solve(b);
    }
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(static_cast<Eigen::Index>(20 * A.rows()));
    cg.compute(A);
    Eigen::VectorXd x = cg.solve(b);
    if (cg.info() != Eigen::Success) throw StructuralError("conjugate gradient did not converge");
    return x;
}

}  // namespace detail

struct CapacityResult {
    double capacity = 0.0;       // Dirichlet energy of the harmonic potential
    double reduced_sum = 0.0;    // sum over C* of |U-||U+|/(|U-|+|U+|)
    bool reduced_applicable = false;  // no wells, and every free node is an isolated C* member
    double upper_bound = 0.0;    // short-circuit bound: sum over C* of plus-valley neighbours
    std::vector<std::pair<State, double>> potential;  // harmonic values on free nodes
};

inline CapacityResult capacity(const LandscapeIndex& L, const GateSets& g) {
    const State S = L.states();
    constexpr int kOutside = -3, kMinus = -2, kPlus = -1;
    std::vector<int> node(S, kOutside);
    for (State s : g.s_star) node[s] = -4;  // free unless assigned below
    for (State s : g.s_minus) node[s] = kMinus;
    for (State s : g.s_plus) node[s] = kPlus;
    int free_count = 0;
    for (const auto& w : g.wells) {
        for (State s : w) node[s] = free_count;
        ++free_count;
    }
    std::vector<State> singles;
    for (State s : g.s_star)
        if (node[s] == -4) {
            node[s] = free_count++;
            singles.push_back(s);
        }

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(free_count);
    std::vector<double> diag(static_cast<std::size_t>(free_count), 0.0);
    for (State s : g.s_star) {
        int a = node[s];
        if (a < 0) continue;
        for (int v = 0; v < L.vertices(); ++v) {
            int b = node[LandscapeIndex::neighbor(s, v)];
            if (b == kOutside || b == a) continue;
            diag[a] += 1.0;
            if (b == kMinus)
                rhs[a] += 1.0;
            else if (b >= 0)
                trip.emplace_back(a, b, -1.0);
        }
    }
    for (int a = 0; a < free_count; ++a) trip.emplace_back(a, a, diag[a]);
    Eigen::SparseMatrix<double> A(free_count, free_count);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd f = detail::solve_spd(A, rhs);

    auto value = [&](int b) { return b == kMinus ? 1.0 : b == kPlus ? 0.0 : f[b]; };
    CapacityResult r;
    double sum = 0.0;
    for (State s : g.s_star) {
        int a = node[s];
        for (int v = 0; v < L.vertices(); ++v) {
            State t = LandscapeIndex::neighbor(s, v);
            if (t < s) continue;
            int b = node[t];
            if (b == kOutside || b == a) continue;
            double d = value(a) - value(b);
            sum += d * d;
        }
    }
    r.capacity = sum;
    for (State s : singles) r.potential.emplace_back(s, f[node[s]]);

    std::vector<char> in_c(S, 0);
    for (State s : g.c_star) in_c[s] = 1;
    bool applicable = g.wells.empty();
    for (State s : singles) applicable = applicable && in_c[s];
    for (State s : g.c_star) {
        double um = 0, up = 0;
        for (int v = 0; v < L.vertices(); ++v) {
            int b = node[LandscapeIndex::neighbor(s, v)];
            if (b == kMinus) um += 1;
            if (b == kPlus) up += 1;
            if (b >= 0) applicable = false;
        }
        if (um + up > 0) r.reduced_sum += um * up / (um + up);
        r.upper_bound += up;
    }
    r.reduced_applicable = applicable;
    return r;
}

// ---------------------------------------------------------------------------

inline void check_small_chain(const LandscapeIndex& L, double beta) {
    if (beta < 0.0 || !std::isfinite(beta)) throw DomainError("beta must be non-negative");
    if (L.vertices() > 16) throw SizeCapError("exact dynamics limited to 16 vertices");
}

// Mean hitting time of all-plus from all-minus for the Metropolis chain,
// via the symmetrised first-step system sum_t w(s,t)(m_s - m_t) = exp(-beta E_s).
inline double exact_mean_hitting_time(const LandscapeIndex& L, double beta) {
    check_small_chain(L, beta);
    const State S = L.states();
    const State target = L.plus();
    double e0 = *std::min_element(L.energies().begin(), L.energies().end());
    auto idx = [&](State s) { return static_cast<Eigen::Index>(s < target ? s : s - 1); };
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs(S - 1);
    for (State s = 0; s < S; ++s) {
        if (s == target) continue;
        double diag = 0.0;
        for (int v = 0; v < L.vertices(); ++v) {
            State t = LandscapeIndex::neighbor(s, v);
            double w = std::exp(-beta * (std::max(L.energy(s), L.energy(t)) - e0));
            diag += w;
            if (t != target) trip.emplace_back(idx(s), idx(t), -w);
        }
        trip.emplace_back(idx(s), idx(s), diag);
        rhs[idx(s)] = std::exp(-beta * (L.energy(s) - e0));
    }
    Eigen::SparseMatrix<double> A(S - 1, S - 1);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd m = detail::solve_spd(A, rhs);
    return m[idx(L.minus())];
}

// Smallest non-zero eigenvalue of minus the generator, computed on its
// symmetrisation D^{1/2} Q D^{-1/2}, whose null vector is sqrt(mu).
inline double spectral_gap(const LandscapeIndex& L, double beta, State dense_limit = 1024) {
    check_small_chain(L, beta);
    const State S = L.states();
    double e0 = *std::min_element(L.energies().begin(), L.energies().end());
    Eigen::VectorXd root(S);
    for (State s = 0; s < S; ++s) root[s] = std::exp(-0.5 * beta * (L.energy(s) - e0));
    root.normalize();

    std::vector<Eigen::Triplet<double>> trip;
    for (State s = 0; s < S; ++s) {
        double diag = 0.0;
        for (int v = 0; v < L.vertices(); ++v) {
            State t = LandscapeIndex::neighbor(s, v);
            double d = L.energy(t) - L.energy(s);
            diag += std::exp(-beta * std::max(0.0, d));
            trip.emplace_back(s, t, -std::exp(-0.5 * beta * std::abs(d)));
        }
        trip.emplace_back(s, s, diag);
    }
    Eigen::SparseMatrix<double> A(S, S);
    A.setFromTriplets(trip.begin(), trip.end());

    if (S <= dense_limit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(A), Eigen::EigenvaluesOnly);
        return es.eigenvalues()[1];
    }
    // block inverse iteration with Rayleigh-Ritz on the complement of sqrt(mu),
    // so clustered eigenvalues near the gap do not stall convergence
    const int k = static_cast<int>(std::min<State>(8, S - 1));
    Eigen::MatrixXd X(S, k);
    std::mt19937_64 rng(S);
    for (State s = 0; s < S; ++s)
        for (int c = 0; c < k; ++c) X(s, c) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    auto orthonormalise = [&](Eigen::MatrixXd& Y) {
        for (int c = 0; c < k; ++c) Y.col(c) -= root.dot(Y.col(c)) * root;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
        Y = qr.householderQ() * Eigen::MatrixXd::Identity(S, k);
    };
    orthonormalise(X);
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(std::max<Eigen::Index>(1000, 2 * static_cast<Eigen::Index>(S)));
    cg.compute(A);
    double gap = 0.0;
    for (int it = 0; it < 1000; ++it) {
        Eigen::MatrixXd Y(S, k);
        for (int c = 0; c < k; ++c) Y.col(c) = cg.solve(X.col(c));
        orthonormalise(Y);
        Eigen::MatrixXd AY = A * Y;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(Y.transpose() * AY);
        X = Y * small.eigenvectors();
        gap = small.eigenvalues()[0];
        Eigen::VectorXd r = AY * small.eigenvectors().col(0) - gap * X.col(0);
        if (r.norm() <= 1e-8 * gap) break;  // eigenvalue error is quadratic in the residual
    }
    return gap;
}

// ---------------------------------------------------------------------------

struct OracleReport {
    double phi = 0.0;
    StabilityReport stability;
    GateSets gates;
    GateCheck gate_check;
    CapacityResult capacity;
};

inline OracleReport run_oracle(const LandscapeIndex& L) {
    OracleReport r;
    r.stability = stability_report(L);
    r.gates = gate_sets(L);
    r.phi = r.gates.phi;
    r.gate_check = check_gate(L, r.gates);
    r.capacity = capacity(L, r.gates);
    return r;
}

}  // namespace hiermeta
