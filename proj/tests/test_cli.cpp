#include "catch_amalgamated.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "hiermeta/io.hpp"
#include "hiermeta/pipeline.hpp"

using namespace hiermeta;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("hiermeta_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_config(const std::string& name, const json& j) {
    auto path = scratch() / name;
    std::ofstream(path) << j.dump();
    return path;
}

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Run run(const std::string& args) {
    std::string cmd = std::string(HIERMETA_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json model(double h, double jt = 1.0) { return {{"N", 3}, {"n", 2}, {"couplings", {{"standard", jt}}}, {"h", h}}; }

}  // namespace

TEST_CASE("coupling specifications") {
    auto a = params_from_json(json::parse(R"({"N":3,"n":2,"couplings":{"standard":1.0},"h":0.8})"));
    CHECK(a.J[0] == Approx(1.0 / 3.0));
    CHECK(a.J[1] == Approx(1.0 / 9.0));
    auto b = params_from_json(json::parse(R"({"N":3,"n":2,"couplings":{"scaled":[1.0,2.0]},"h":0.8})"));
    CHECK(b.J[1] == Approx(2.0 / 9.0));
    auto c = params_from_json(json::parse(R"({"N":3,"n":2,"couplings":[0.5,0.25],"h":0.8})"));
    CHECK(c.J == std::vector<double>{0.5, 0.25});
}

TEST_CASE("malformed configurations name the offending field") {
    CHECK_THROWS_WITH(run_config_from_json(json::parse(R"({})")), "config.model: missing");
    CHECK_THROWS_WITH(params_from_json(json::parse(R"({"N":3,"n":2,"h":0.8})")), "model.couplings: missing");
    CHECK_THROWS_WITH(params_from_json(json::parse(R"({"N":3,"couplings":[1,1],"h":0.8})")), "model.n: missing");
    CHECK_THROWS_AS(params_from_json(json::parse(R"({"N":3,"n":2,"couplings":{"other":1},"h":0.8})")), ConfigError);
    CHECK_THROWS_AS(params_from_json(json::parse(R"({"N":"three","n":2,"couplings":[1,1],"h":0.8})")), ConfigError);
    CHECK_THROWS_AS(params_from_json(json::parse(R"({"N":3,"n":2,"couplings":[1],"h":0.8})")), DomainError);
    json bad_format{{"model", model(0.8)}, {"output", {{"format", "xml"}}}};
    CHECK_THROWS_AS(run_config_from_json(bad_format), ConfigError);
    auto cfg = run_config_from_json(json{{"model", model(0.8)}, {"sweep", {{"h", {{"from", 0.1}, {"to", 0.5}, {"steps", 5}}}}}});
    REQUIRE(cfg.sweep_h.size() == 5);
    CHECK(cfg.sweep_h.back() == Approx(0.5));
}

TEST_CASE("analyze reports the instance constants") {
    auto path = write_config("a.json", {{"model", model(0.8)}});
    auto r = run("analyze --config " + path.string());
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j.at("gamma_star").get<double>() == Approx(8.0 / 15.0).margin(1e-12));
    CHECK(j.at("critical_volume").get<u64>() == 1);
    CHECK(j.at("c_star_count").get<u64>() == 9);
    CHECK(j.at("inverse_prefactor").get<double>() == Approx(6.0).margin(1e-9));
    CHECK(j.contains("assumptions"));

    // the library path gives the same numbers
    auto rep = analyze(LatticeParams::standard(3, 2, 1.0, 0.8));
    CHECK(j.at("gamma_star").get<double>() == rep.gamma_star);
}

TEST_CASE("analyze outside the metastable regime exits with a domain error") {
    auto path = write_config("noa1.json", {{"model", model(4.0 / 3.0)}});
    auto r = run("analyze --config " + path.string());
    CHECK(r.code == 2);
    CHECK(r.out.find("no metastable regime (A1)") != std::string::npos);
}

TEST_CASE("size cap and malformed files map to their exit codes") {
    json big{{"N", 5}, {"n", 2}, {"couplings", {{"standard", 1.0}}}, {"h", 0.5}};
    auto path = write_config("big.json", {{"model", big}});
    CHECK(run("oracle --config " + path.string()).code == 3);
    auto broken = scratch() / "broken.json";
    std::ofstream(broken) << "{\"model\": ";
    auto r = run("analyze --config " + broken.string());
    CHECK(r.code == 2);
    CHECK(r.out.find("config error") != std::string::npos);
}

TEST_CASE("analyze sweeps emit one JSON line per grid point") {
    auto path = write_config("sweep.json", {{"model", model(0.8)}, {"sweep", {{"h", {0.3, 0.8, 1.5}}}}});
    auto r = run("analyze --config " + path.string());
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::vector<json> rows;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(json::parse(line));
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].at("report").at("critical_volume").get<u64>() == 1);
    CHECK(rows[2].at("error").get<std::string>() == "no metastable regime (A1)");
}

TEST_CASE("profile CSV on instance B") {
    auto path = write_config("b.json", {{"model", model(0.5)}});
    auto out = scratch() / "profile.csv";
    auto r = run("profile --format csv --config " + path.string() + " --out " + out.string());
    REQUIRE(r.code == 0);
    std::istringstream in(slurp(out));
    std::string line;
    std::getline(in, line);
    CHECK(line == "k,energy");
    int rows = 0;
    u64 best_k = 0;
    double best = -1e300;
    while (std::getline(in, line)) {
        ++rows;
        auto comma = line.find(',');
        u64 k = std::stoull(line.substr(0, comma));
        double e = std::stod(line.substr(comma + 1));
        if (e > best + 1e-12) {
            best = e;
            best_k = k;
        }
    }
    CHECK(rows == 10);
    CHECK(best_k == 2);
    CHECK(best == Approx(1.0).margin(1e-12));
}

TEST_CASE("simulate with a fixed seed writes identical files") {
    auto path = write_config("sim.json", {{"model", model(0.8)}, {"simulate", {{"beta", 1.0}, {"replicas", 200}}}});
    auto a = scratch() / "s1.csv", b = scratch() / "s2.csv", c = scratch() / "s3.csv";
    REQUIRE(run("simulate --seed 42 --format csv --threads 1 --config " + path.string() + " --out " + a.string()).code == 0);
    REQUIRE(run("simulate --seed 42 --format csv --threads 3 --config " + path.string() + " --out " + b.string()).code == 0);
    REQUIRE(run("simulate --seed 43 --format csv --config " + path.string() + " --out " + c.string()).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) != slurp(c));
    CHECK(slurp(a).rfind("replica,tau,events,hit_gate,censored\n", 0) == 0);
}

TEST_CASE("simulate JSON carries a summary") {
    auto path = write_config("simj.json", {{"model", model(0.8)}, {"simulate", {{"beta", 0.5}, {"replicas", 300}, {"seed", 1}}}});
    auto r = run("simulate --config " + path.string());
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j.at("tau").size() == 300);
    CHECK(j.at("summary").at("count").get<u64>() == 300);
}

TEST_CASE("oracle output is independent of the thread count") {
    auto path = write_config("o.json", {{"model", model(0.5)}});
    auto a = run("oracle --threads 1 --config " + path.string());
    auto b = run("oracle --threads 4 --config " + path.string());
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    auto j = json::parse(a.out);
    CHECK(j.at("phi").get<double>() == Approx(1.0).margin(1e-12));
}

TEST_CASE("HIERMETA_THREADS is honoured as a fallback") {
    auto path = write_config("env.json", {{"model", model(0.8)}, {"simulate", {{"beta", 1.0}, {"replicas", 50}, {"seed", 3}}}});
    auto a = run("simulate --format csv --config " + path.string());
    auto b = run("simulate --format csv --config " + path.string() + " --threads 2");
    ::setenv("HIERMETA_THREADS", "1", 1);
    auto c = run("simulate --format csv --config " + path.string());
    ::unsetenv("HIERMETA_THREADS");
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
}

TEST_CASE("verify is all green on instance A") {
    auto path = write_config("v.json", {{"model", model(0.8)}, {"verify", {{"betas", {0.0, 4.0}}, {"replicas", 4000}}}});
    auto r = run("verify --seed 11 --config " + path.string());
    INFO(r.out);
    CHECK(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j.at("all_pass").get<bool>());
    CHECK(j.at("checks").size() >= 8);
}
