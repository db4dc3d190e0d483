#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "analytics.hpp"
#include "dynamics.hpp"
#include "io.hpp"
#include "oracle.hpp"

namespace hiermeta {

// Critical configurations for gate recording: the exhaustive C* when the
// lattice is small enough, otherwise the isometry orbit of gamma_M.
inline GateMembership critical_gate(const LatticeParams& p, int oracle_cap, u64 orbit_cap = 1000000) {
    if (p.volume() <= static_cast<u64>(oracle_cap) && p.volume() <= 24) {
        LandscapeIndex L(p, oracle_cap);
        GateMembership g;
        for (State s : gate_sets(L).c_star) g.add(L.configuration(s));
        return g;
    }
    u64 M = critical_volume(p, VolumeMethod::ProfileArgmax).M;
    return GateMembership(enumerate_isometry_images(critical_configuration(p, M), p, orbit_cap));
}

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

inline json to_json(const CheckResult& c) { return {{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}}; }

namespace detail {

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace detail

// Cross-checks formula vs profile vs oracle vs simulation on one instance.
inline std::vector<CheckResult> run_verification(const RunConfig& c) {
    const LatticeParams& p = c.model;
    std::vector<CheckResult> out;
    auto add = [&](std::string name, bool pass, std::string detail) { out.push_back({std::move(name), pass, std::move(detail)}); };

    MetastabilityReport r = analyze(p);
    PathKind kind = optimal_path_kind(p);
    if (kind == PathKind::MD && p.volume() <= (u64(1) << 22)) {
        double worst = 0.0;
        ReferencePath path(kind, p);
        Configuration cfg(p.volume());
        BlockCounts counts(cfg, p);
        double e = 0.0;
        for (u64 k = 0; k <= p.volume(); ++k) {
            if (k > 0) {
                u64 v = path.flipped(k);
                e += counts.delta(v);
                counts.flip(v);
            }
            worst = std::max(worst, std::abs(e - profile_closed_form(k, p)));
        }
        add("profile_closed_form_vs_walk", worst <= 1e-9, "max deviation " + detail::fmt(worst));
    }
    if (p.is_standard() && p.N % 2 == 1) {
        double g = gamma_star(p, GammaMethod::StandardClosedForm).value;
        add("gamma_closed_form_vs_profile", detail::close(g, r.gamma_star, 1e-9),
            detail::fmt(g) + " vs " + detail::fmt(r.gamma_star));
        u64 M = critical_volume(p, VolumeMethod::StandardFormula).M;
        add("critical_volume_formula_vs_profile", M == r.M, std::to_string(M) + " vs " + std::to_string(r.M));
    }
    add("max_subpath_identity",
        detail::close(max_subpath_value(p),
                      profile_closed_form(static_cast<u64>(snap_ceil(r.shat)) * p.pow(r.mhat), p), 1e-9),
        detail::fmt(max_subpath_value(p)));

    if (p.volume() <= static_cast<u64>(c.oracle_cap) && p.volume() <= 24) {
        LandscapeIndex L(p, c.oracle_cap, c.threads);
        OracleReport o = run_oracle(L);
        add("oracle_phi_vs_profile", detail::close(o.phi, r.gamma_star, 1e-12),
            detail::fmt(o.phi) + " vs " + detail::fmt(r.gamma_star));
        bool meta = o.stability.omega_meta.size() == 1 && o.stability.omega_meta[0] == L.minus();
        add("oracle_metastable_set_is_minus", meta, std::to_string(o.stability.omega_meta.size()) + " states");
        add("oracle_gate_conditions", o.gate_check.ok(), std::to_string(o.gates.c_star.size()) + " critical states");
        add("oracle_gate_size_vs_orbit", static_cast<u128>(o.gates.c_star.size()) == r.c_star_count,
            std::to_string(o.gates.c_star.size()) + " vs " + to_string(r.c_star_count));
        add("oracle_capacity_vs_reduced", detail::close(o.capacity.capacity, r.inverse_k_star, 1e-9),
            detail::fmt(o.capacity.capacity) + " vs " + detail::fmt(r.inverse_k_star));
        if (L.vertices() <= 16) {
            for (double beta : c.verify_betas) {
                SimConfig sc = c.sim;
                sc.beta = beta;
                sc.replicas = c.verify_replicas;
                sc.record_gate = false;
                auto s = summarize(simulate_hitting(p, sc, nullptr, c.threads == 0 ? default_threads() : c.threads));
                double exact = exact_mean_hitting_time(L, beta);
                bool ok = std::abs(s.mean - exact) <= 3.0 * s.std_error;
                add("simulation_vs_exact_mean_beta_" + detail::fmt(beta), ok,
                    detail::fmt(s.mean) + " +- " + detail::fmt(s.std_error) + " vs " + detail::fmt(exact));
            }
        }
    }
    return out;
}

}  // namespace hiermeta
