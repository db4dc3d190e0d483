#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"

#include "hiermeta/pipeline.hpp"

using namespace hiermeta;

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::string format;
    std::optional<u64> seed;
    std::optional<u64> replicas;
    std::optional<double> beta;
    std::optional<unsigned> threads;
    std::optional<int> oracle_cap;
};

void add_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "output file (default stdout)");
    cmd->add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--seed", f.seed, "master RNG seed");
    cmd->add_option("--replicas", f.replicas, "number of replicas");
    cmd->add_option("--beta", f.beta, "inverse temperature");
    cmd->add_option("--threads", f.threads, "worker threads");
    cmd->add_option("--oracle-cap", f.oracle_cap, "largest lattice for exhaustive enumeration");
}

RunConfig resolve(const Flags& f) {
    RunConfig c = load_run_config(f.config);
    if (!f.out.empty()) c.out = f.out;
    if (!f.format.empty()) c.format = f.format;
    if (f.seed) c.sim.seed = *f.seed;
    if (f.replicas) c.sim.replicas = *f.replicas;
    if (f.beta) c.sim.beta = *f.beta;
    if (f.oracle_cap) c.oracle_cap = *f.oracle_cap;
    if (f.threads) {
        c.threads = *f.threads;
    } else if (const char* env = std::getenv("HIERMETA_THREADS")) {
        c.threads = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    }
    if (c.threads == 0) c.threads = default_threads();
    return c;
}

struct Output {
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file = std::make_unique<std::ofstream>(path);
            if (!*file) throw std::runtime_error("cannot open " + path);
        }
    }
    std::ostream& get() { return file ? *file : std::cout; }
    std::unique_ptr<std::ofstream> file;
};

void analyze_cmd(const RunConfig& c) {
    Output out(c.out);
    auto& os = out.get();
    auto row = [&](const LatticeParams& p, const MetastabilityReport& r) {
        os.precision(17);
        os << p.h << ',' << r.gamma_star << ',' << r.M << ',' << to_string(r.c_star_count) << ',' << r.inverse_k_star
           << ',' << r.mhat << ',' << r.shat << '\n';
    };
    if (c.sweep_h.empty()) {
        auto r = analyze(c.model);
        if (c.format == "csv") {
            os << "h,gamma_star,critical_volume,c_star_count,inverse_prefactor,mhat,shat\n";
            row(c.model, r);
        } else {
            os << to_json(r).dump(2) << '\n';
        }
        return;
    }
    if (c.format == "csv") os << "h,gamma_star,critical_volume,c_star_count,inverse_prefactor,mhat,shat\n";
    for (double h : c.sweep_h) {
        LatticeParams p = c.model;
        p.h = h;
        try {
            auto r = analyze(p);
            if (c.format == "csv")
                row(p, r);
            else
                os << json{{"h", h}, {"report", to_json(r)}}.dump() << '\n';
        } catch (const DomainError& e) {
            if (c.format == "json") os << json{{"h", h}, {"error", e.what()}}.dump() << '\n';
        }
    }
}

void oracle_cmd(const RunConfig& c) {
    LandscapeIndex L(c.model, c.oracle_cap, c.threads);
    Output out(c.out);
    if (c.format == "csv") {
        write_landscape_csv(out.get(), L);
        return;
    }
    out.get() << to_json(run_oracle(L)).dump(2) << '\n';
}

void simulate_cmd(const RunConfig& c) {
    std::unique_ptr<GateMembership> gate;
    if (c.sim.record_gate) gate = std::make_unique<GateMembership>(critical_gate(c.model, c.oracle_cap));
    auto samples = simulate_hitting(c.model, c.sim, gate.get(), c.threads);
    Output out(c.out);
    if (c.format == "csv") {
        write_samples_csv(out.get(), samples);
        return;
    }
    json j{{"beta", c.sim.beta}, {"replicas", c.sim.replicas}, {"seed", c.sim.seed}};
    try {
        j["summary"] = to_json(summarize(samples));
    } catch (const DomainError& e) {
        j["summary"] = {{"error", e.what()}};
    }
    json taus = json::array();
    for (const auto& s : samples) taus.push_back(s.censored ? json(nullptr) : json(s.tau));
    j["tau"] = taus;
    out.get() << j.dump(2) << '\n';
}

void profile_cmd(const RunConfig& c) {
    auto prof = energy_profile(optimal_path_kind(c.model), c.model);
    Output out(c.out);
    if (c.format == "json") {
        json j{{"first", prof.first}, {"energy", prof.values}, {"max", prof.max}, {"argmax", prof.argmax}};
        out.get() << j.dump(2) << '\n';
        return;
    }
    write_profile_csv(out.get(), prof);
}

int verify_cmd(const RunConfig& c) {
    auto checks = run_verification(c);
    bool all = true;
    json j = json::array();
    for (const auto& x : checks) {
        all = all && x.pass;
        j.push_back(to_json(x));
    }
    Output out(c.out);
    if (c.format == "csv") {
        out.get() << "check,pass,detail\n";
        for (const auto& x : checks) out.get() << x.name << ',' << (x.pass ? 1 : 0) << ",\"" << x.detail << "\"\n";
    } else {
        out.get() << json{{"all_pass", all}, {"checks", j}}.dump(2) << '\n';
    }
    return all ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Metastability of Glauber dynamics on the hierarchical lattice"};
    app.require_subcommand(1);
    Flags f;
    auto* analyze = app.add_subcommand("analyze", "closed-form metastability report");
    auto* oracle = app.add_subcommand("oracle", "exhaustive landscape analysis");
    auto* simulate = app.add_subcommand("simulate", "kinetic Monte Carlo hitting times");
    auto* profile = app.add_subcommand("profile", "energy along the optimal reference path");
    auto* verify = app.add_subcommand("verify", "cross-check formulas, oracle and simulation");
    for (auto* cmd : {analyze, oracle, simulate, profile, verify}) add_flags(cmd, f);
    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig c = resolve(f);
        if (*analyze) analyze_cmd(c);
        if (*oracle) oracle_cmd(c);
        if (*simulate) simulate_cmd(c);
        if (*profile) profile_cmd(c);
        if (*verify) return verify_cmd(c);
        return 0;
    } catch (const DomainError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const SizeCapError& e) {
        std::cerr << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
