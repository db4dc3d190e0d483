#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>
#include <unordered_set>
#include <vector>

#include "configuration.hpp"
#include "energy.hpp"
#include "lattice.hpp"

namespace hiermeta {

struct SimConfig {
    double beta = 1.0;
    u64 replicas = 1000;
    u64 seed = 0;
    u64 max_events = u64(1) << 40;
    bool record_gate = false;
};

struct HittingSample {
    double tau = 0.0;
    bool hit_gate = false;
    u64 events = 0;
    bool censored = false;
};

// Set of configurations whose visit is recorded during a run.
class GateMembership {
public:
    GateMembership() = default;
    explicit GateMembership(const std::vector<Configuration>& members) {
        for (const auto& c : members) add(c);
    }
    void add(const Configuration& c) {
        set_.insert(c);
        if (std::find(volumes_.begin(), volumes_.end(), c.volume()) == volumes_.end()) volumes_.push_back(c.volume());
    }
    bool contains(const Configuration& c) const {
        if (std::find(volumes_.begin(), volumes_.end(), c.volume()) == volumes_.end()) return false;
        return set_.count(c) != 0;
    }
    std::size_t size() const { return set_.size(); }

private:
    std::unordered_set<Configuration, ConfigurationHash> set_;
    std::vector<u64> volumes_;
};

// exp(-beta [dE]_+)
inline double metropolis_rate(double delta, double beta) { return std::exp(-beta * std::max(0.0, delta)); }

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Continuous-time single-flip chain with a binary sum tree over the flip rates.
class GlauberChain {
public:
    GlauberChain(const LatticeParams& p, double beta)
        : p_(p), beta_(beta), sigma_(Configuration::empty(p.volume())), counts_(sigma_, p_) {
        if (beta < 0.0 || !std::isfinite(beta)) throw DomainError("beta must be non-negative");
        V_ = p.volume();
        leaves_ = 1;
        while (leaves_ < V_) leaves_ <<= 1;
        tree_.assign(2 * leaves_, 0.0);
        refresh();
    }

    const Configuration& state() const { return sigma_; }
    const BlockCounts& counts() const { return counts_; }
    double total_rate() const { return tree_[1]; }
    double rate(u64 v) const { return tree_[leaves_ + v]; }

    // Rates recomputed from scratch, for consistency checks.
    std::vector<double> fresh_rates() const {
        BlockCounts c(sigma_, p_);
        std::vector<double> r(V_);
        for (u64 v = 0; v < V_; ++v) r[v] = metropolis_rate(c.delta(v), beta_);
        return r;
    }

    // Advances one event; returns the waiting time.
    double step(std::mt19937_64& rng) {
        double total = tree_[1];
        double dt = -std::log1p(-uniform01(rng)) / total;
        double u = uniform01(rng) * total;
        std::size_t i = 1;
        while (i < leaves_) {
            double left = tree_[2 * i];
            if (u < left) {
                i = 2 * i;
            } else {
                u -= left;
                i = 2 * i + 1;
            }
        }
        u64 v = std::min<u64>(i - leaves_, V_ - 1);
        while (tree_[leaves_ + v] == 0.0 && v > 0) --v;  // rounding at the right edge
        sigma_.flip(v);
        counts_.flip(v);
        refresh();
        return dt;
    }

private:
    void refresh() {
        for (u64 v = 0; v < V_; ++v) tree_[leaves_ + v] = metropolis_rate(counts_.delta(v), beta_);
        for (std::size_t i = leaves_ - 1; i >= 1; --i) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
    }

    LatticeParams p_;
    double beta_;
    Configuration sigma_;
    BlockCounts counts_;
    u64 V_ = 0;
    std::size_t leaves_ = 1;
    std::vector<double> tree_;
};

inline std::mt19937_64 replica_stream(u64 seed, u64 replica) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)};
    return std::mt19937_64(seq);
}

// One run from all-minus to all-plus. The gate flag is cleared on every
// return to all-minus, so it reports the final excursion only.
inline HittingSample run_replica(const LatticeParams& p, const SimConfig& c, u64 replica, const GateMembership* gate) {
    auto rng = replica_stream(c.seed, replica);
    GlauberChain chain(p, c.beta);
    HittingSample s;
    const u64 V = p.volume();
    while (chain.state().volume() != V) {
        if (s.events >= c.max_events) {
            s.censored = true;
            return s;
        }
        s.tau += chain.step(rng);
        ++s.events;
        if (c.record_gate && gate) {
            if (chain.state().volume() == 0)
                s.hit_gate = false;
            else if (!s.hit_gate && gate->contains(chain.state()))
                s.hit_gate = true;
        }
    }
    return s;
}

inline std::vector<HittingSample> simulate_hitting(const LatticeParams& p, const SimConfig& c,
                                                   const GateMembership* gate = nullptr, unsigned threads = 1) {
    p.validate();
    if (c.replicas < 1) throw DomainError("replicas must be at least 1");
    if (c.max_events < 1) throw DomainError("max_events must be at least 1");
    if (c.beta < 0.0 || !std::isfinite(c.beta)) throw DomainError("beta must be non-negative");
    if (c.record_gate && !gate) throw DomainError("gate recording needs the critical set");
    std::vector<HittingSample> out(c.replicas);
    threads = std::max(1u, static_cast<unsigned>(std::min<u64>(threads, c.replicas)));
    auto work = [&](unsigned t) {
        for (u64 r = t; r < c.replicas; r += threads) out[r] = run_replica(p, c, r, gate);
    };
    if (threads == 1) {
        work(0);
        return out;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& t : pool) t.join();
    return out;
}

// ---------------------------------------------------------------------------

inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

// sup |F_n - (1 - e^{-x})| over the sample.
inline double ks_exponential(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double F = -std::expm1(-x[i]);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    return d;
}

struct SimSummary {
    u64 count = 0;
    u64 censored = 0;
    double mean = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0, ci_high = 0.0;
    double ks = 0.0;
    double gate_frequency = 0.0;
    double gate_ci_low = 0.0, gate_ci_high = 0.0;
    double mean_events = 0.0;
};

inline SimSummary summarize(const std::vector<HittingSample>& samples, u64 min_samples = 100) {
    std::vector<double> tau;
    std::vector<double> events;
    SimSummary s;
    u64 gate = 0;
    for (const auto& x : samples) {
        if (x.censored) {
            ++s.censored;
            continue;
        }
        tau.push_back(x.tau);
        events.push_back(static_cast<double>(x.events));
        gate += x.hit_gate ? 1 : 0;
    }
    if (tau.size() < min_samples) throw DomainError("too few uncensored samples");
    const double n = static_cast<double>(tau.size());
    s.count = tau.size();
    s.mean = pairwise_sum(tau.data(), tau.size()) / n;
    s.mean_events = pairwise_sum(events.data(), events.size()) / n;
    std::vector<double> sq(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) sq[i] = (tau[i] - s.mean) * (tau[i] - s.mean);
    double var = pairwise_sum(sq.data(), sq.size()) / (n - 1.0);
    s.std_error = std::sqrt(var / n);
    s.ci_low = s.mean - 1.96 * s.std_error;
    s.ci_high = s.mean + 1.96 * s.std_error;
    std::vector<double> scaled(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) scaled[i] = tau[i] / s.mean;
    s.ks = ks_exponential(std::move(scaled));

    // Wilson interval
    double ph = static_cast<double>(gate) / n, z = 1.96;
    double den = 1.0 + z * z / n;
    double mid = (ph + z * z / (2 * n)) / den;
    double half = z * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den;
    s.gate_frequency = ph;
    s.gate_ci_low = mid - half;
    s.gate_ci_high = mid + half;
    return s;
}

}  // namespace hiermeta
