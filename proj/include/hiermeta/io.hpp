#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "analytics.hpp"
#include "dynamics.hpp"
#include "oracle.hpp"

namespace hiermeta {

using json = nlohmann::json;

// Malformed configuration; the message names the offending field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline json u128_json(u128 x) {
    if (x <= static_cast<u128>(~u64(0))) return static_cast<u64>(x);
    return to_string(x);
}

namespace detail {

template <class T>
T field(const json& j, const char* path, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string(path) + "." + key + ": missing");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(path) + "." + key + ": " + e.what());
    }
}

template <class T>
T field_or(const json& j, const char* path, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return field<T>(j, path, key);
}

}  // namespace detail

// {N, n, h, couplings: [..] | {standard: J} | {scaled: [..]}}
inline LatticeParams params_from_json(const json& m) {
    if (!m.is_object()) throw ConfigError("model: expected an object");
    int N = detail::field<int>(m, "model", "N");
    int n = detail::field<int>(m, "model", "n");
    double h = detail::field<double>(m, "model", "h");
    if (!m.contains("couplings")) throw ConfigError("model.couplings: missing");
    const json& c = m.at("couplings");
    if (c.is_array()) {
        LatticeParams p{N, n, c.get<std::vector<double>>(), h};
        p.validate();
        return p;
    }
    if (!c.is_object() || c.size() != 1)
        throw ConfigError("model.couplings: expected a list, {standard: J} or {scaled: [..]}");
    if (c.contains("standard")) return LatticeParams::standard(N, n, detail::field<double>(c, "model.couplings", "standard"), h);
    if (c.contains("scaled"))
        return LatticeParams::scaled(N, n, detail::field<std::vector<double>>(c, "model.couplings", "scaled"), h);
    throw ConfigError("model.couplings: unknown coupling specification");
}

inline json params_json(const LatticeParams& p) {
    return {{"N", p.N}, {"n", p.n}, {"couplings", p.J}, {"h", p.h}};
}

struct RunConfig {
    LatticeParams model;
    int oracle_cap = kDefaultOracleCap;
    SimConfig sim;
    std::vector<double> sweep_h;
    std::vector<double> verify_betas{0.0};
    u64 verify_replicas = 4000;
    std::string format = "json";
    std::string out;
    unsigned threads = 0;
};

inline std::vector<double> grid_from_json(const json& g, const char* path) {
    if (g.is_array()) return g.get<std::vector<double>>();
    double a = detail::field<double>(g, path, "from");
    double b = detail::field<double>(g, path, "to");
    int k = detail::field<int>(g, path, "steps");
    if (k < 1) throw ConfigError(std::string(path) + ".steps: must be positive");
    std::vector<double> out;
    for (int i = 0; i < k; ++i) out.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
    return out;
}

inline RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    if (!j.is_object()) throw ConfigError("config: expected an object");
    if (!j.contains("model")) throw ConfigError("config.model: missing");
    c.model = params_from_json(j.at("model"));
    if (j.contains("oracle")) c.oracle_cap = detail::field_or<int>(j.at("oracle"), "oracle", "cap", c.oracle_cap);
    if (j.contains("simulate")) {
        const json& s = j.at("simulate");
        c.sim.beta = detail::field_or<double>(s, "simulate", "beta", c.sim.beta);
        c.sim.replicas = detail::field_or<u64>(s, "simulate", "replicas", c.sim.replicas);
        c.sim.seed = detail::field_or<u64>(s, "simulate", "seed", c.sim.seed);
        c.sim.max_events = detail::field_or<u64>(s, "simulate", "max_events", c.sim.max_events);
        c.sim.record_gate = detail::field_or<bool>(s, "simulate", "record_gate", c.sim.record_gate);
    }
    if (j.contains("sweep")) c.sweep_h = grid_from_json(j.at("sweep").at("h"), "sweep.h");
    if (j.contains("verify")) {
        const json& v = j.at("verify");
        if (v.contains("betas")) c.verify_betas = detail::field<std::vector<double>>(v, "verify", "betas");
        c.verify_replicas = detail::field_or<u64>(v, "verify", "replicas", c.verify_replicas);
    }
    if (j.contains("output")) {
        c.format = detail::field_or<std::string>(j.at("output"), "output", "format", c.format);
        c.out = detail::field_or<std::string>(j.at("output"), "output", "path", c.out);
    }
    if (c.format != "json" && c.format != "csv") throw ConfigError("output.format: expected json or csv");
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return run_config_from_json(j);
}

// ---------------------------------------------------------------------------

inline json to_json(const Estimate& e) {
    return {{"method", e.method}, {"value", e.value}, {"experimental", e.experimental}};
}

inline json to_json(const VolumeEstimate& v) {
    json j{{"method", v.method}, {"M", v.M}, {"experimental", v.experimental}};
    if (!v.ties.empty()) j["ties"] = v.ties;
    if (!v.warning.empty()) j["warning"] = v.warning;
    return j;
}

inline json to_json(const AssumptionReport& a) {
    json j{{"A1", a.a1},
           {"A1_margin", a.a1_margin},
           {"no_local_minima_expected", a.expect_no_local_minima},
           {"non_increasing", a.non_increasing},
           {"non_decreasing", a.non_decreasing},
           {"A5_operational", a.a5_operational},
           {"warnings", a.warnings}};
    auto opt = [&](const char* k, const std::optional<double>& v, bool ok) {
        if (v) j[k] = {{"value", *v}, {"ok", ok}};
    };
    opt("A2a", a.a2a, a.a2a_ok);
    if (a.a2b) j["A2b"] = *a.a2b;
    opt("A3", a.a3, a.a3_ok);
    opt("A4", a.a4, a.a4_ok);
    return j;
}

inline json to_json(const MetastabilityReport& r) {
    json j;
    j["gamma_star"] = r.gamma_star;
    j["gamma_method"] = r.gamma_method;
    j["critical_volume"] = r.M;
    if (!r.M_ties.empty()) j["critical_volume_ties"] = r.M_ties;
    j["digits"] = r.digits;
    j["path"] = to_string(r.path);
    j["c_star_count"] = u128_json(r.c_star_count);
    j["inverse_prefactor"] = r.inverse_k_star;
    j["prefactor"] = r.k_star;
    j["prefactor_method"] = r.k_star_method;
    j["neighbors"] = {{"u_minus", r.neighbors.u_minus},
                      {"u_plus", r.neighbors.u_plus},
                      {"B_d", r.neighbors.B_d},
                      {"B_u", r.neighbors.B_u}};
    j["eta"] = {{"coordinates", r.eta.eta}, {"printed", r.eta.eta_printed}, {"locator", r.eta.locator}};
    if (!r.eta.eta_scaled.empty()) j["eta"]["scaled"] = r.eta.eta_scaled;
    j["mhat"] = r.mhat;
    j["shat"] = r.shat;
    if (r.regime) j["regime"] = {{"m", r.regime->m}, {"s", r.regime->s}};
    j["assumptions"] = to_json(r.assumptions);
    for (const auto& e : r.gamma_alternatives) j["alternatives"]["gamma_star"].push_back(to_json(e));
    for (const auto& e : r.volume_alternatives) j["alternatives"]["critical_volume"].push_back(to_json(e));
    for (const auto& e : r.prefactor_alternatives) j["alternatives"]["inverse_prefactor"].push_back(to_json(e));
    return j;
}

inline json to_json(const OracleReport& r) {
    json j;
    j["phi"] = r.phi;
    json st = json::array();
    for (const auto& m : r.stability.local_minima)
        st.push_back({{"state", m.state},
                      {"energy", m.energy},
                      {"stability", std::isinf(m.stability) ? json("inf") : json(m.stability)}});
    j["stability"] = st;
    j["omega_stab"] = r.stability.omega_stab;
    j["omega_meta"] = r.stability.omega_meta;
    j["gamma_meta"] = r.stability.gamma_meta;
    j["only_global_minima"] = r.stability.only_global_minima;
    j["s_star_size"] = r.gates.s_star.size();
    j["s_minus_size"] = r.gates.s_minus.size();
    j["s_plus_size"] = r.gates.s_plus.size();
    j["wells"] = r.gates.wells;
    j["c_star"] = r.gates.c_star;
    j["p_star"] = r.gates.p_star;
    j["gate_conditions_hold"] = r.gate_check.ok();
    j["capacity"] = r.capacity.capacity;
    j["capacity_reduced_sum"] = r.capacity.reduced_sum;
    j["capacity_reduced_applicable"] = r.capacity.reduced_applicable;
    return j;
}

inline json to_json(const SimSummary& s) {
    return {{"count", s.count},
            {"censored", s.censored},
            {"mean", s.mean},
            {"std_error", s.std_error},
            {"ci95", {s.ci_low, s.ci_high}},
            {"ks_exponential", s.ks},
            {"gate_frequency", s.gate_frequency},
            {"gate_ci95", {s.gate_ci_low, s.gate_ci_high}},
            {"mean_events", s.mean_events}};
}

inline void write_samples_csv(std::ostream& os, const std::vector<HittingSample>& samples) {
    os << "replica,tau,events,hit_gate,censored\n";
    os.precision(17);
    for (std::size_t i = 0; i < samples.size(); ++i)
        os << i << ',' << samples[i].tau << ',' << samples[i].events << ',' << (samples[i].hit_gate ? 1 : 0) << ','
           << (samples[i].censored ? 1 : 0) << '\n';
}

inline void write_profile_csv(std::ostream& os, const EnergyProfile& prof) {
    os << "k,energy\n";
    os.precision(17);
    for (std::size_t i = 0; i < prof.values.size(); ++i) os << prof.first + i << ',' << prof.values[i] << '\n';
}

inline void write_landscape_csv(std::ostream& os, const LandscapeIndex& L) {
    if (L.vertices() > 16) throw SizeCapError("landscape dump limited to 16 vertices");
    os << "bitcode,volume,energy\n";
    os.precision(17);
    for (State s = 0; s < L.states(); ++s) os << s << ',' << std::popcount(s) << ',' << L.energy(s) << '\n';
}

}  // namespace hiermeta
